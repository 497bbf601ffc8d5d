#include "pcst/verify.hpp"

#include <algorithm>
#include <map>
#include <string>

#include "pcst/protocol.hpp"

namespace pcst::verify {

std::string_view to_string(Status s) {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Violation: return "violation";
    case Status::Partial: return "partial";
    case Status::Skipped: return "skipped";
  }
  return "?";
}

namespace {

using protocol::Decision;
using protocol::EpsilonSource;

std::string edge_name(const Edge& e) { return std::to_string(e.u) + "-" + std::to_string(e.v); }

std::string set_name(const std::vector<NodeId>& nodes) {
  std::string out = "{";
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (i) out += ",";
    out += std::to_string(nodes[i]);
  }
  return out + "}";
}

bool subset_of(const std::vector<NodeId>& small, const std::vector<NodeId>& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

bool contains(const std::vector<NodeId>& set, NodeId v) { return std::binary_search(set.begin(), set.end(), v); }

// StateChange records applied on top of the initial node states.
class TracedState {
 public:
  explicit TracedState(const PcstInstance& inst) : inst_(inst) {
    for (const auto& s : protocol::initialize_all(inst)) {
      std::map<std::string, std::string> fields;
      for (auto& [k, v] : sim::tracked_fields(inst, s)) fields.emplace(std::move(k), std::move(v));
      fields_.push_back(std::move(fields));
    }
  }

  void apply(std::uint64_t step, const sim::StateChangeRecord& rec) {
    auto& slot = field(rec.node, rec.field);
    if (slot != rec.old_value) {
      throw ReplayDivergence("step " + std::to_string(step) + ": node " + std::to_string(rec.node) + " field " +
                             rec.field + " recorded as changing from " + rec.old_value + ", replay holds " + slot);
    }
    slot = rec.new_value;
  }

  const std::string& get(NodeId v, const std::string& name) const {
    return const_cast<TracedState*>(this)->field(v, name);
  }

  Rational rational(NodeId v, const std::string& name) const {
    const auto parsed = parse_rational(get(v, name));
    if (!parsed) throw TraceMismatch("field " + name + " of node " + std::to_string(v) + " is not a rational");
    return *parsed;
  }

  Solution solution() const {
    std::vector<NodeId> steiner;
    for (NodeId v : inst_.nodes()) {
      if (get(v, "prize_flag") == "false") steiner.push_back(v);
    }
    std::vector<EdgeId> branch;
    for (EdgeId e = 0; e < inst_.edge_count(); ++e) {
      const Edge& edge = inst_.edge(e);
      const std::string key = "se:" + edge_name(edge);
      const bool at_u = get(edge.u, key) == "branch";
      const bool at_v = get(edge.v, key) == "branch";
      if (at_u != at_v) throw ReplayDivergence("trace ends with a one-sided branch mark on " + edge_name(edge));
      if (at_u) branch.push_back(e);
    }
    try {
      return make_solution(inst_, std::move(branch), std::move(steiner));
    } catch (const InvalidSolution& err) {
      throw ReplayDivergence(std::string("trace ends in an invalid solution: ") + err.what());
    }
  }

 private:
  std::string& field(NodeId v, const std::string& name) {
    if (!inst_.contains(v)) throw TraceMismatch("trace names unknown node " + std::to_string(v));
    auto& fields = fields_[inst_.index_of(v)];
    auto it = fields.find(name);
    if (it == fields.end()) {
      throw TraceMismatch("trace names unknown field " + name + " at node " + std::to_string(v));
    }
    return it->second;
  }

  const PcstInstance& inst_;
  std::vector<std::map<std::string, std::string>> fields_;
};

class DualReplay {
 public:
  DualReplay(const PcstInstance& inst, ReplayStats* stats) : inst_(inst), traced_(inst), stats_(stats) {
    for (NodeId v : inst.nodes()) {
      moats_.push_back(Moat{{v}, Rational(0), false});
      inner_.emplace_back(0);
      comp_.push_back(moats_.size() - 1);
      deficit_.emplace_back(0);
    }
  }

  DualCertificate run(const sim::Trace& trace) {
    for (const auto& rec : trace) {
      step_ = rec.step;
      std::visit([this](const auto& body) { on(body); }, rec.body);
    }
    return DualCertificate{moats_, traced_.solution()};
  }

 private:
  std::size_t idx(NodeId v) const {
    if (!inst_.contains(v)) throw TraceMismatch("trace names unknown node " + std::to_string(v));
    return inst_.index_of(v);
  }

  void grow(std::size_t moat, const Rational& amount) {
    moats_[moat].y += amount;
    inner_[moat] += amount;
    for (NodeId v : moats_[moat].nodes) deficit_[inst_.index_of(v)] += amount;
  }

  void unite(NodeId a, NodeId b) {
    const auto ma = comp_[idx(a)];
    const auto mb = comp_[idx(b)];
    if (ma == mb) throw ReplayDivergence(where() + "merge of nodes already in one component");
    Moat merged;
    std::merge(moats_[ma].nodes.begin(), moats_[ma].nodes.end(), moats_[mb].nodes.begin(), moats_[mb].nodes.end(),
               std::back_inserter(merged.nodes));
    merged.y = 0;
    moats_.push_back(std::move(merged));
    inner_.push_back(inner_[ma] + inner_[mb]);
    for (NodeId v : moats_.back().nodes) comp_[inst_.index_of(v)] = moats_.size() - 1;
  }

  std::string where() const { return "step " + std::to_string(step_) + ": "; }

  void on(const sim::WakeupRecord& w) {
    if (w.node != inst_.root()) throw TraceMismatch("wakeup at non-root node " + std::to_string(w.node));
  }

  void on(const sim::DeliveryRecord& d) {
    idx(d.from);
    idx(d.to);
    if (!inst_.find_edge(d.from, d.to)) {
      throw TraceMismatch("delivery over missing edge " + std::to_string(d.from) + "-" + std::to_string(d.to));
    }
    last_ = d;
    last_step_ = step_;
    // A node woken by proceed or connect starts with d_v = W = d_h of the sender.
    if (traced_.get(d.to, "cs") != "sleeping") return;
    if (const auto* p = std::get_if<protocol::msg::Proceed>(&d.message)) grow(comp_[idx(d.to)], p->d_h);
    if (const auto* c = std::get_if<protocol::msg::Connect>(&d.message)) grow(comp_[idx(d.to)], c->d_h);
  }

  void on(const sim::StateChangeRecord& s) { traced_.apply(step_, s); }

  void on(const sim::EpsilonRecord& rec) {
    const auto& note = rec.note;
    const auto leader_moat = comp_[idx(rec.node)];
    if (note.source == EpsilonSource::Round) {
      check_identities(rec.node, note);
      if (note.chosen == Decision::Deactivate) {
        if (!note.eps2) throw TraceMismatch(where() + "deactivation without eps2");
        grow(leader_moat, *note.eps2);
        moats_[leader_moat].deactivated = true;
      }
      return;
    }

    const auto* connect = last_ ? std::get_if<protocol::msg::Connect>(&last_->message) : nullptr;
    if (!connect || last_step_ != step_ || last_->to != rec.node) {
      throw TraceMismatch(where() + "connect-side epsilon without a connect delivery");
    }
    const NodeId sender = last_->from;
    const auto& cs = traced_.get(rec.node, "cs");
    if (cs == "sleeping") {
      if (note.chosen == Decision::Merge) {
        if (!note.eps1.is_finite()) throw TraceMismatch(where() + "infinite merge epsilon");
        grow(leader_moat, note.eps1.value());
        grow(comp_[idx(sender)], note.eps1.value());
        unite(rec.node, sender);
      } else if (note.chosen == Decision::Deactivate) {
        if (!note.eps2) throw TraceMismatch(where() + "deactivation without eps2");
        grow(leader_moat, *note.eps2);
        moats_[leader_moat].deactivated = true;
      } else {
        throw TraceMismatch(where() + "connect-side decision must be merge or deactivate");
      }
    } else if (cs == "inactive") {
      if (note.chosen != Decision::Merge || !note.eps1.is_finite()) {
        throw TraceMismatch(where() + "inactive receiver must merge with a finite epsilon");
      }
      grow(comp_[idx(sender)], note.eps1.value());
      unite(rec.node, sender);
    } else {
      throw ReplayDivergence(where() + "connect accepted by an active node");
    }
  }

  void on(const sim::RoundRecord&) {}
  void on(const sim::PhaseRecord&) {}

  // The deciding node's own variables come from the note: the trace shows its
  // state before this step, the note shows it at the decision.
  void check_identities(NodeId leader, const protocol::EpsilonNote& note) {
    if (stats_) ++stats_->checkpoints;
    for (NodeId v : inst_.nodes()) {
      const Rational traced = v == leader ? note.d_v : traced_.rational(v, "d_v");
      const Rational& expected = deficit_[inst_.index_of(v)];
      if (traced != expected) {
        throw ReplayDivergence(where() + "d_v of node " + std::to_string(v) + " is " + format_rational(traced) +
                               " but the moats holding it sum to " + format_rational(expected));
      }
      if (stats_) ++stats_->node_comparisons;
    }
    std::vector<bool> seen(moats_.size(), false);
    for (NodeId v : inst_.nodes()) {
      const auto m = comp_[inst_.index_of(v)];
      const Rational traced = v == leader ? note.w : traced_.rational(v, "W");
      if (traced != inner_[m]) {
        throw ReplayDivergence(where() + "W at node " + std::to_string(v) + " is " + format_rational(traced) +
                               " but the moats inside " + set_name(moats_[m].nodes) + " sum to " +
                               format_rational(inner_[m]));
      }
      if (!seen[m] && stats_) ++stats_->component_comparisons;
      seen[m] = true;
    }
  }

  const PcstInstance& inst_;
  TracedState traced_;
  ReplayStats* stats_;
  std::vector<Moat> moats_;
  std::vector<Rational> inner_;     // dual mass of all moats inside each moat
  std::vector<std::size_t> comp_;   // node index -> current maximal moat
  std::vector<Rational> deficit_;   // node index -> dual mass of moats holding it
  std::optional<sim::DeliveryRecord> last_;
  std::uint64_t last_step_ = 0;
  std::uint64_t step_ = 0;
};

Rational load(const DualCertificate& cert, const Edge& e) {
  Rational sum = 0;
  for (const Moat& m : cert.moats) {
    if (contains(m.nodes, e.u) != contains(m.nodes, e.v)) sum += m.y;
  }
  return sum;
}

Rational inner_mass(const DualCertificate& cert, const std::vector<NodeId>& set) {
  Rational sum = 0;
  for (const Moat& m : cert.moats) {
    if (subset_of(m.nodes, set)) sum += m.y;
  }
  return sum;
}

Rational prize_mass(const PcstInstance& inst, const std::vector<NodeId>& set) {
  Rational sum = 0;
  for (NodeId v : set) sum += inst.prize(v);
  return sum;
}

CheckReport bound(std::string name, std::size_t observed, std::int64_t cap) {
  CheckReport r{std::move(name)};
  r.values = {{"observed", std::to_string(observed)}, {"bound", std::to_string(cap)}};
  if (static_cast<std::int64_t>(observed) > cap) {
    r.status = Status::Violation;
    r.witnesses.push_back(std::to_string(observed) + " > " + std::to_string(cap));
  }
  return r;
}

}  // namespace

Solution solution_from_trace(const sim::Trace& trace, const PcstInstance& inst) {
  TracedState state(inst);
  for (const auto& rec : trace) {
    if (const auto* s = std::get_if<sim::StateChangeRecord>(&rec.body)) state.apply(rec.step, *s);
  }
  return state.solution();
}

DualCertificate reconstruct_duals(const sim::Trace& trace, const PcstInstance& inst, ReplayStats* stats) {
  return DualReplay(inst, stats).run(trace);
}

CheckReport check_edge_packing(const DualCertificate& cert, const PcstInstance& inst) {
  CheckReport r{"edge-packing"};
  const auto& branch = cert.solution.branch_edges;
  for (EdgeId e = 0; e < inst.edge_count(); ++e) {
    const Edge& edge = inst.edge(e);
    const Rational l = load(cert, edge);
    if (l > edge.weight) {
      r.witnesses.push_back("edge " + edge_name(edge) + " overpacked: load " + format_rational(l) + " > weight " +
                            format_rational(edge.weight));
    } else if (std::binary_search(branch.begin(), branch.end(), e) && l != edge.weight) {
      r.witnesses.push_back("branch edge " + edge_name(edge) + " not tight: slack " +
                            format_rational(edge.weight - l));
    }
  }
  if (!r.witnesses.empty()) r.status = Status::Violation;
  return r;
}

CheckReport check_penalty_packing(const DualCertificate& cert, const PcstInstance& inst) {
  CheckReport r{"penalty-packing"};
  std::vector<NodeId> others;
  for (NodeId v : inst.nodes()) {
    if (v != inst.root()) others.push_back(v);
  }

  auto test = [&](const std::vector<NodeId>& set) {
    const Rational in = inner_mass(cert, set);
    const Rational p = prize_mass(inst, set);
    if (in > p) {
      r.witnesses.push_back("U=" + set_name(set) + ": dual " + format_rational(in) + " > prize " + format_rational(p));
    }
  };

  const bool exhaustive = inst.node_count() <= kExhaustivePenaltyLimit;
  if (exhaustive) {
    const std::size_t k = others.size();
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << k); ++mask) {
      std::vector<NodeId> set;
      for (std::size_t i = 0; i < k; ++i) {
        if (mask >> i & 1) set.push_back(others[i]);
      }
      test(set);
    }
  } else {
    for (const Moat& m : cert.moats) {
      if (!contains(m.nodes, inst.root())) test(m.nodes);
    }
  }

  // Pruned deactivated components pay exactly their prizes.
  const auto& penalty = cert.solution.penalty_nodes;
  std::vector<const Moat*> pruned;
  for (const Moat& m : cert.moats) {
    if (m.deactivated && subset_of(m.nodes, penalty)) pruned.push_back(&m);
  }
  for (const Moat* m : pruned) {
    const bool maximal = std::none_of(pruned.begin(), pruned.end(), [m](const Moat* o) {
      return o != m && o->nodes.size() > m->nodes.size() && subset_of(m->nodes, o->nodes);
    });
    if (!maximal) continue;
    const Rational in = inner_mass(cert, m->nodes);
    const Rational p = prize_mass(inst, m->nodes);
    if (in != p) {
      r.witnesses.push_back("pruned component " + set_name(m->nodes) + " not tight: dual " + format_rational(in) +
                            ", prize " + format_rational(p));
    }
  }

  r.values = {{"mode", exhaustive ? "exhaustive" : "moat-sets"}};
  if (!r.witnesses.empty()) {
    r.status = Status::Violation;
  } else if (!exhaustive) {
    r.status = Status::Partial;
  }
  return r;
}

CheckReport check_dual_signs(const DualCertificate& cert, const PcstInstance& inst) {
  CheckReport r{"dual-signs"};
  for (std::size_t i = 0; i < cert.moats.size(); ++i) {
    const Moat& m = cert.moats[i];
    if (m.y < 0) r.witnesses.push_back("y" + set_name(m.nodes) + " = " + format_rational(m.y) + " < 0");
    if (m.y > 0 && contains(m.nodes, inst.root())) {
      r.witnesses.push_back("y" + set_name(m.nodes) + " > 0 on a set holding the root");
    }
    for (std::size_t j = i + 1; j < cert.moats.size(); ++j) {
      const Moat& o = cert.moats[j];
      const bool disjoint = std::none_of(m.nodes.begin(), m.nodes.end(), [&o](NodeId v) { return contains(o.nodes, v); });
      if (!disjoint && !subset_of(m.nodes, o.nodes) && !subset_of(o.nodes, m.nodes)) {
        r.witnesses.push_back(set_name(m.nodes) + " and " + set_name(o.nodes) + " cross");
      }
    }
  }
  if (!r.witnesses.empty()) r.status = Status::Violation;
  return r;
}

CheckReport check_ratio(const DualCertificate& cert, const PcstInstance& inst,
                        const std::optional<exact::ExactResult>& exact) {
  CheckReport r{"ratio"};
  const std::size_t n = inst.node_count();
  if (n < 2) {
    r.status = Status::Skipped;
    r.witnesses.push_back("single-node instance");
    return r;
  }
  const Rational factor = Rational(2) - Rational(1, static_cast<long long>(n - 1));
  const Rational& obj = cert.solution.objective;
  const Rational dual = cert.dual_total();
  r.values = {{"objective", format_rational(obj)}, {"dual", format_rational(dual)}, {"factor", format_rational(factor)}};
  if (obj > factor * dual) {
    r.witnesses.push_back("objective " + format_rational(obj) + " > " + format_rational(factor) + " * dual " +
                          format_rational(dual));
  }
  if (exact) {
    r.values.emplace_back("optimum", format_rational(exact->opt_value));
    if (dual > exact->opt_value) {
      r.witnesses.push_back("dual " + format_rational(dual) + " > optimum " + format_rational(exact->opt_value));
    }
    if (obj > factor * exact->opt_value) {
      r.witnesses.push_back("objective " + format_rational(obj) + " > " + format_rational(factor) + " * optimum " +
                            format_rational(exact->opt_value));
    }
  }
  if (!r.witnesses.empty()) r.status = Status::Violation;
  return r;
}

std::vector<CheckReport> check_bounds(const sim::Trace& trace, const PcstInstance& inst) {
  const auto c = sim::count_messages(trace);
  const auto n = static_cast<std::int64_t>(inst.node_count());
  const auto m = static_cast<std::int64_t>(inst.edge_count());
  const std::int64_t per_round = 6 * n + 2 * m - 4;
  const std::int64_t rounds = 9 * n - 7;

  std::vector<CheckReport> out;
  CheckReport pr{"bound:per-round"};
  std::size_t worst = 0;
  for (std::size_t i = 0; i < c.per_round.size(); ++i) {
    worst = std::max(worst, c.per_round[i]);
    if (static_cast<std::int64_t>(c.per_round[i]) > per_round) {
      pr.witnesses.push_back("round " + std::to_string(i) + ": " + std::to_string(c.per_round[i]) + " > " +
                             std::to_string(per_round));
    }
  }
  pr.values = {{"observed", std::to_string(worst)}, {"bound", std::to_string(per_round)}};
  if (!pr.witnesses.empty()) pr.status = Status::Violation;
  out.push_back(std::move(pr));

  out.push_back(bound("bound:rounds", c.rounds, rounds));
  out.push_back(bound("bound:proceed", c.proceed_actions, n - 1));
  out.push_back(bound("bound:back", c.back_actions, n - 1));
  out.push_back(bound("bound:prune", c.count(protocol::MessageType::Prune), 2 * n - 2));
  out.push_back(bound("bound:backward-prune", c.count(protocol::MessageType::BackwardPrune), n - 1));
  out.push_back(bound("bound:total", c.total, rounds * per_round + 3 * (n - 1)));
  return out;
}

}  // namespace pcst::verify
