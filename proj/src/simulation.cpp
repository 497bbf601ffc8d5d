#include "pcst/simulation.hpp"

#include <algorithm>
#include <charconv>
#include <limits>

namespace pcst::sim {

using protocol::ComponentState;
using protocol::EdgeState;
using protocol::NodeState;

Schedule Schedule::parse(std::string_view text) {
  if (text == "eager" || text == "fifo-eager") return eager();
  constexpr std::string_view prefix = "seeded:";
  if (text.substr(0, prefix.size()) == prefix) {
    const auto digits = text.substr(prefix.size());
    std::uint64_t seed = 0;
    auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), seed);
    if (ec == std::errc() && ptr == digits.data() + digits.size() && !digits.empty()) return seeded(seed);
  }
  throw std::invalid_argument("schedule must be 'eager' or 'seeded:<n>', got '" + std::string(text) + "'");
}

std::string Schedule::str() const {
  return kind == Kind::FifoEager ? std::string("eager") : "seeded:" + std::to_string(seed);
}

std::uint64_t step_budget(std::size_t node_count, std::size_t edge_count) {
  const auto n = static_cast<std::int64_t>(node_count);
  const auto m = static_cast<std::int64_t>(edge_count);
  const std::int64_t total = (9 * n - 7) * (6 * n + 2 * m - 4) + 3 * (n - 1);
  return static_cast<std::uint64_t>(std::max<std::int64_t>(total, 1)) * 10;
}

Simulation::Simulation(PcstInstance inst, Schedule schedule)
    : inst_(std::move(inst)),
      schedule_(schedule),
      rng_(schedule.seed),
      nodes_(protocol::initialize_all(inst_)),
      queues_(2 * inst_.edge_count()) {}

std::size_t Simulation::link_index(EdgeId e, NodeId from) const {
  return 2 * e + (inst_.edge(e).u == from ? 0 : 1);
}

bool Simulation::step() {
  if (wakeup_pending_) {
    wakeup_pending_ = false;
    ++step_;
    trace_.push_back({step_, WakeupRecord{inst_.root()}});
    apply(inst_.root(), protocol::SpontaneousWakeup{});
    return true;
  }
  if (in_flight_ == 0) return false;

  std::size_t chosen = queues_.size();
  if (schedule_.kind == Schedule::Kind::FifoEager) {
    std::uint64_t oldest = std::numeric_limits<std::uint64_t>::max();
    for (std::size_t i = 0; i < queues_.size(); ++i) {
      if (!queues_[i].empty() && queues_[i].front().send_seq < oldest) {
        oldest = queues_[i].front().send_seq;
        chosen = i;
      }
    }
  } else {
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < queues_.size(); ++i) {
      if (!queues_[i].empty()) ready.push_back(i);
    }
    chosen = ready[std::uniform_int_distribution<std::size_t>(0, ready.size() - 1)(rng_)];
  }

  Queued item = std::move(queues_[chosen].front());
  queues_[chosen].pop_front();
  --in_flight_;
  const EdgeId e = chosen / 2;
  const Edge& edge = inst_.edge(e);
  const NodeId from = chosen % 2 == 0 ? edge.u : edge.v;
  const NodeId to = edge.other(from);
  ++step_;
  trace_.push_back({step_, DeliveryRecord{from, to, item.message}});
  apply(to, protocol::Deliver{e, std::move(item.message), step_});
  return true;
}

void Simulation::apply(NodeId node, const protocol::LocalEvent& event) {
  NodeState& slot = nodes_[inst_.index_of(node)];
  protocol::StepResult result = protocol::step(slot, event);
  for (const auto& note : result.notes) {
    if (std::holds_alternative<protocol::RoundNote>(note)) {
      trace_.push_back({step_, RoundRecord{node, rounds_++}});
    } else if (const auto* eps = std::get_if<protocol::EpsilonNote>(&note)) {
      trace_.push_back({step_, EpsilonRecord{node, *eps}});
    } else {
      if (pruning_started_) throw SimulationError("pruning started twice");
      pruning_started_ = true;
      trace_.push_back({step_, PhaseRecord{}});
    }
  }
  record_changes(slot, result.state);
  slot = std::move(result.state);
  for (auto& out : result.out) {
    queues_[link_index(out.edge, node)].push_back(Queued{std::move(out.message), send_seq_++});
    ++in_flight_;
  }
}

namespace {

std::string bool_str(bool b) { return b ? "true" : "false"; }

std::string edge_key(const Edge& e) { return std::to_string(e.u) + "-" + std::to_string(e.v); }

}  // namespace

std::vector<std::pair<std::string, std::string>> tracked_fields(const PcstInstance& inst, const NodeState& s) {
  std::vector<std::pair<std::string, std::string>> f;
  f.emplace_back("cs", std::string(to_string(s.cs)));
  f.emplace_back("d_v", format_rational(s.d_v));
  f.emplace_back("W", format_rational(s.w));
  f.emplace_back("d_h", format_rational(s.d_h));
  f.emplace_back("prize_flag", bool_str(s.prize_flag));
  f.emplace_back("labelled_flag", bool_str(s.labelled_flag));
  f.emplace_back("root_flag", bool_str(s.root_flag));
  for (const auto& slot : s.edges) {
    const auto key = edge_key(inst.edge(slot.edge));
    f.emplace_back("se:" + key, std::string(to_string(slot.se)));
    f.emplace_back("epm:" + key, bool_str(slot.epm));
  }
  return f;
}

void Simulation::record_changes(const NodeState& before, const NodeState& after) {
  const auto old_fields = tracked_fields(inst_, before);
  const auto new_fields = tracked_fields(inst_, after);
  for (std::size_t i = 0; i < new_fields.size(); ++i) {
    if (old_fields[i].second != new_fields[i].second) {
      trace_.push_back({step_, StateChangeRecord{after.id, new_fields[i].first, old_fields[i].second,
                                                 new_fields[i].second}});
    }
  }
}

const Trace& run_to_quiescence(Simulation& sim) {
  const auto budget = step_budget(sim.instance().node_count(), sim.instance().edge_count());
  while (sim.step()) {
    if (sim.steps() > budget) {
      throw SimulationError("step budget of " + std::to_string(budget) + " exceeded");
    }
  }
  if (!sim.pruning_started()) throw SimulationError("network went quiet before the pruning phase");
  return sim.trace();
}

MessageCounts count_messages(const Trace& trace) {
  MessageCounts c;
  bool pruning = false;
  for (const auto& rec : trace) {
    if (const auto* d = std::get_if<DeliveryRecord>(&rec.body)) {
      const auto type = protocol::type_of(d->message);
      ++c.by_type[static_cast<std::size_t>(type)];
      ++c.total;
      if (type == protocol::MessageType::Prune) ++c.prune_received[d->to];
      if (pruning) {
        ++c.pruning_total;
      } else if (!c.per_round.empty()) {
        ++c.per_round.back();
      }
    } else if (std::holds_alternative<RoundRecord>(rec.body)) {
      if (!pruning) c.per_round.push_back(0);
      ++c.rounds;
    } else if (std::holds_alternative<PhaseRecord>(rec.body)) {
      pruning = true;
    } else if (const auto* eps = std::get_if<EpsilonRecord>(&rec.body)) {
      if (eps->note.source != protocol::EpsilonSource::Round) continue;
      if (eps->note.chosen == protocol::Decision::Proceed) ++c.proceed_actions;
      if (eps->note.chosen == protocol::Decision::Back) ++c.back_actions;
    }
  }
  return c;
}

Solution extract_solution(const PcstInstance& inst, const std::vector<NodeState>& nodes) {
  std::vector<NodeId> steiner;
  for (const auto& s : nodes) {
    if (!s.prize_flag) steiner.push_back(s.id);
  }
  std::vector<EdgeId> branch;
  for (EdgeId e = 0; e < inst.edge_count(); ++e) {
    const Edge& edge = inst.edge(e);
    const bool at_u = nodes[inst.index_of(edge.u)].slot(e).se == EdgeState::Branch;
    const bool at_v = nodes[inst.index_of(edge.v)].slot(e).se == EdgeState::Branch;
    if (at_u != at_v) throw SimulationError("asymmetric branch mark on edge " + edge_key(edge));
    if (at_u) branch.push_back(e);
  }
  try {
    return make_solution(inst, std::move(branch), std::move(steiner));
  } catch (const InvalidSolution& err) {
    throw SimulationError(std::string("protocol output is not a valid solution: ") + err.what());
  }
}

}  // namespace pcst::sim
