#include "pcst/json_io.hpp"

#include <algorithm>
#include <istream>
#include <ostream>

namespace pcst::io {

using namespace protocol;

namespace {

std::string rat(const Rational& r) { return format_rational(r); }

Rational rat_of(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) throw FormatError(0, std::string("missing rational '") + key + "'");
  const auto parsed = parse_rational(j.at(key).get<std::string>());
  if (!parsed) throw FormatError(0, std::string("bad rational in '") + key + "'");
  return *parsed;
}

ExtRational ext_of(const Json& j, const char* key) {
  if (!j.contains(key) || !j.at(key).is_string()) throw FormatError(0, std::string("missing value '") + key + "'");
  const auto parsed = ExtRational::parse(j.at(key).get<std::string>());
  if (!parsed) throw FormatError(0, std::string("bad value in '") + key + "'");
  return *parsed;
}

template <typename T>
T get(const Json& j, const char* key) {
  if (!j.contains(key)) throw FormatError(0, std::string("missing '") + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    throw FormatError(0, std::string("wrong type for '") + key + "'");
  }
}

ComponentState cs_of(const Json& j, const char* key) {
  const auto cs = parse_component_state(get<std::string>(j, key));
  if (!cs) throw FormatError(0, std::string("bad component state in '") + key + "'");
  return *cs;
}

SearchState sn_of(const Json& j) {
  const auto s = get<std::string>(j, "sn");
  if (s == "find") return SearchState::Find;
  if (s == "found") return SearchState::Found;
  throw FormatError(0, "bad search state '" + s + "'");
}

struct PayloadWriter {
  Json& j;
  void operator()(const msg::Initiate& m) {
    j["leader"] = m.leader;
    j["sn"] = m.sn == SearchState::Find ? "find" : "found";
  }
  void operator()(const msg::Test& m) { j["leader"] = m.leader; }
  void operator()(const msg::Status& m) {
    j["cs"] = to_string(m.cs);
    j["d"] = rat(m.d);
  }
  void operator()(const msg::Reject&) {}
  void operator()(const msg::Report& m) {
    j["epsilon"] = m.epsilon.str();
    j["d_h"] = rat(m.d_h);
    j["tp"] = rat(m.tp);
    j["pf"] = m.pf;
    j["ts"] = m.ts.str();
  }
  void operator()(const msg::Merge& m) {
    j["epsilon"] = rat(m.epsilon);
    j["d_h"] = rat(m.d_h);
  }
  void operator()(const msg::Connect& m) {
    j["nid"] = m.nid;
    j["w"] = rat(m.w);
    j["d_v"] = rat(m.d_v);
    j["d_h"] = rat(m.d_h);
  }
  void operator()(const msg::Accept& m) {
    j["leader_flag"] = m.leader_flag;
    j["root_flag"] = m.root_flag;
    j["w"] = rat(m.w);
    j["d_h"] = rat(m.d_h);
  }
  void operator()(const msg::RefindEpsilon&) {}
  void operator()(const msg::UpdateInfo& m) {
    j["ev"] = rat(m.ev);
    j["root_flag"] = m.root_flag;
    j["deactivate_flag"] = m.deactivate_flag;
    j["w"] = rat(m.w);
    j["d_h"] = rat(m.d_h);
  }
  void operator()(const msg::Proceed& m) { j["d_h"] = rat(m.d_h); }
  void operator()(const msg::Back&) {}
  void operator()(const msg::Prune&) {}
  void operator()(const msg::BackwardPrune&) {}
};

std::string source_name(EpsilonSource s) { return s == EpsilonSource::Round ? "round" : "connect"; }

Json node_list(const std::vector<NodeId>& nodes) {
  Json arr = Json::array();
  for (NodeId v : nodes) arr.push_back(v);
  return arr;
}

}  // namespace

Json message_to_json(const Message& m) {
  Json j;
  j["type"] = to_string(type_of(m));
  std::visit(PayloadWriter{j}, m);
  return j;
}

Message message_from_json(const Json& j) {
  const auto type = parse_message_type(get<std::string>(j, "type"));
  if (!type) throw FormatError(0, "unknown message type");
  switch (*type) {
    case MessageType::Initiate: return msg::Initiate{get<NodeId>(j, "leader"), sn_of(j)};
    case MessageType::Test: return msg::Test{get<NodeId>(j, "leader")};
    case MessageType::Status: return msg::Status{cs_of(j, "cs"), rat_of(j, "d")};
    case MessageType::Reject: return msg::Reject{};
    case MessageType::Report:
      return msg::Report{ext_of(j, "epsilon"), rat_of(j, "d_h"), rat_of(j, "tp"), get<bool>(j, "pf"), ext_of(j, "ts")};
    case MessageType::Merge: return msg::Merge{rat_of(j, "epsilon"), rat_of(j, "d_h")};
    case MessageType::Connect:
      return msg::Connect{get<NodeId>(j, "nid"), rat_of(j, "w"), rat_of(j, "d_v"), rat_of(j, "d_h")};
    case MessageType::Accept:
      return msg::Accept{get<bool>(j, "leader_flag"), get<bool>(j, "root_flag"), rat_of(j, "w"), rat_of(j, "d_h")};
    case MessageType::RefindEpsilon: return msg::RefindEpsilon{};
    case MessageType::UpdateInfo:
      return msg::UpdateInfo{rat_of(j, "ev"), get<bool>(j, "root_flag"), get<bool>(j, "deactivate_flag"),
                             rat_of(j, "w"), rat_of(j, "d_h")};
    case MessageType::Proceed: return msg::Proceed{rat_of(j, "d_h")};
    case MessageType::Back: return msg::Back{};
    case MessageType::Prune: return msg::Prune{};
    case MessageType::BackwardPrune: return msg::BackwardPrune{};
  }
  throw FormatError(0, "unknown message type");
}

Json record_to_json(const sim::TraceRecord& rec) {
  Json j;
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, sim::WakeupRecord>) {
          j["kind"] = "wakeup";
          j["step"] = rec.step;
          j["node"] = b.node;
          j["payload"] = Json::object();
        } else if constexpr (std::is_same_v<T, sim::DeliveryRecord>) {
          j["kind"] = "delivery";
          j["step"] = rec.step;
          j["link"] = Json{{"from", b.from}, {"to", b.to}};
          j["payload"] = message_to_json(b.message);
        } else if constexpr (std::is_same_v<T, sim::StateChangeRecord>) {
          j["kind"] = "state";
          j["step"] = rec.step;
          j["node"] = b.node;
          j["payload"] = Json{{"field", b.field}, {"old", b.old_value}, {"new", b.new_value}};
        } else if constexpr (std::is_same_v<T, sim::EpsilonRecord>) {
          j["kind"] = "epsilon";
          j["step"] = rec.step;
          j["node"] = b.node;
          Json p;
          p["eps1"] = b.note.eps1.str();
          p["eps2"] = b.note.eps2 ? Json(rat(*b.note.eps2)) : Json(nullptr);
          p["chosen"] = to_string(b.note.chosen);
          p["source"] = source_name(b.note.source);
          p["d_v"] = rat(b.note.d_v);
          p["W"] = rat(b.note.w);
          j["payload"] = std::move(p);
        } else if constexpr (std::is_same_v<T, sim::RoundRecord>) {
          j["kind"] = "round";
          j["step"] = rec.step;
          j["node"] = b.leader;
          j["payload"] = Json{{"index", b.index}};
        } else {
          j["kind"] = "phase";
          j["step"] = rec.step;
          j["payload"] = Json{{"from", "growth"}, {"to", "pruning"}};
        }
      },
      rec.body);
  return j;
}

sim::TraceRecord record_from_json(const Json& j) {
  if (!j.is_object()) throw FormatError(0, "record is not an object");
  const auto kind = get<std::string>(j, "kind");
  const auto step = get<std::uint64_t>(j, "step");
  if (!j.contains("payload") || !j.at("payload").is_object()) throw FormatError(0, "missing payload object");
  const Json& p = j.at("payload");
  if (kind == "wakeup") return {step, sim::WakeupRecord{get<NodeId>(j, "node")}};
  if (kind == "delivery") {
    if (!j.contains("link") || !j.at("link").is_object()) throw FormatError(0, "missing link");
    const Json& link = j.at("link");
    return {step, sim::DeliveryRecord{get<NodeId>(link, "from"), get<NodeId>(link, "to"), message_from_json(p)}};
  }
  if (kind == "state") {
    return {step, sim::StateChangeRecord{get<NodeId>(j, "node"), get<std::string>(p, "field"),
                                         get<std::string>(p, "old"), get<std::string>(p, "new")}};
  }
  if (kind == "epsilon") {
    EpsilonNote note;
    note.eps1 = ext_of(p, "eps1");
    if (!p.contains("eps2")) throw FormatError(0, "missing 'eps2'");
    if (!p.at("eps2").is_null()) note.eps2 = rat_of(p, "eps2");
    const auto chosen = parse_decision(get<std::string>(p, "chosen"));
    if (!chosen) throw FormatError(0, "bad decision");
    note.chosen = *chosen;
    const auto source = get<std::string>(p, "source");
    if (source == "round") {
      note.source = EpsilonSource::Round;
    } else if (source == "connect") {
      note.source = EpsilonSource::Connect;
    } else {
      throw FormatError(0, "bad epsilon source '" + source + "'");
    }
    note.d_v = rat_of(p, "d_v");
    note.w = rat_of(p, "W");
    return {step, sim::EpsilonRecord{get<NodeId>(j, "node"), std::move(note)}};
  }
  if (kind == "round") return {step, sim::RoundRecord{get<NodeId>(j, "node"), get<std::size_t>(p, "index")}};
  if (kind == "phase") return {step, sim::PhaseRecord{}};
  throw FormatError(0, "unknown record kind '" + kind + "'");
}

void write_trace(std::ostream& os, const sim::Trace& trace) {
  for (const auto& rec : trace) os << record_to_json(rec).dump() << '\n';
}

sim::Trace read_trace(std::istream& is) {
  sim::Trace trace;
  std::string line;
  std::size_t number = 0;
  while (std::getline(is, line)) {
    ++number;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      trace.push_back(record_from_json(Json::parse(line)));
    } catch (const FormatError& err) {
      throw FormatError(number, std::string(err.what()).substr(std::string("line 0: ").size()));
    } catch (const nlohmann::json::exception& err) {
      throw FormatError(number, err.what());
    }
  }
  return trace;
}

Json solution_to_json(const PcstInstance& inst, const Solution& sol) {
  Json j;
  j["objective"] = rat(sol.objective);
  Json edges = Json::array();
  for (EdgeId e : sol.branch_edges) edges.push_back(Json::array({inst.edge(e).u, inst.edge(e).v}));
  j["branch_edges"] = std::move(edges);
  j["steiner_nodes"] = node_list(sol.steiner_nodes);
  j["penalty_nodes"] = node_list(sol.penalty_nodes);
  return j;
}

Solution solution_from_json(const PcstInstance& inst, const Json& j) {
  if (!j.is_object() || !j.contains("branch_edges") || !j.at("branch_edges").is_array()) {
    throw FormatError(0, "solution needs a 'branch_edges' array");
  }
  std::vector<EdgeId> edges;
  for (const auto& pair : j.at("branch_edges")) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_unsigned() || !pair[1].is_number_unsigned()) {
      throw FormatError(0, "branch edge must be [u, v]");
    }
    const auto e = inst.find_edge(pair[0].get<NodeId>(), pair[1].get<NodeId>());
    if (!e) throw InvalidSolution("branch edge " + pair.dump() + " is not in the instance");
    edges.push_back(*e);
  }
  std::vector<NodeId> steiner;
  if (j.contains("steiner_nodes")) {
    steiner = get<std::vector<NodeId>>(j, "steiner_nodes");
  } else if (j.contains("penalty_nodes")) {
    const auto penalty = get<std::vector<NodeId>>(j, "penalty_nodes");
    for (NodeId v : inst.nodes()) {
      if (std::find(penalty.begin(), penalty.end(), v) == penalty.end()) steiner.push_back(v);
    }
  } else {
    throw FormatError(0, "solution needs 'steiner_nodes' or 'penalty_nodes'");
  }
  for (NodeId v : steiner) {
    if (!inst.contains(v)) throw InvalidSolution("unknown node " + std::to_string(v));
  }
  std::sort(steiner.begin(), steiner.end());
  Solution sol = make_solution(inst, std::move(edges), std::move(steiner));
  if (j.contains("objective")) {
    const auto stated = parse_rational(get<std::string>(j, "objective"));
    if (!stated || *stated != sol.objective) {
      throw InvalidSolution("stated objective " + j.at("objective").dump() + " differs from " + rat(sol.objective));
    }
  }
  return sol;
}

Json report_to_json(const verify::CheckReport& r) {
  Json j;
  j["check"] = r.check;
  j["status"] = verify::to_string(r.status);
  j["witnesses"] = r.witnesses;
  Json values = Json::object();
  for (const auto& [k, v] : r.values) values[k] = v;
  j["values"] = std::move(values);
  return j;
}

}  // namespace pcst::io
