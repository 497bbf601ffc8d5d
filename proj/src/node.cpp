#include <algorithm>
#include <string>

#include "pcst/protocol.hpp"

namespace pcst::protocol {

std::string_view to_string(ComponentState s) {
  switch (s) {
    case ComponentState::Sleeping: return "sleeping";
    case ComponentState::Active: return "active";
    case ComponentState::Inactive: return "inactive";
  }
  return "?";
}

std::optional<ComponentState> parse_component_state(std::string_view text) {
  if (text == "sleeping") return ComponentState::Sleeping;
  if (text == "active") return ComponentState::Active;
  if (text == "inactive") return ComponentState::Inactive;
  return std::nullopt;
}

std::string_view to_string(EdgeState s) {
  switch (s) {
    case EdgeState::Basic: return "basic";
    case EdgeState::Branch: return "branch";
    case EdgeState::Rejected: return "rejected";
    case EdgeState::Refind: return "refind";
  }
  return "?";
}

namespace {
constexpr std::string_view kTypeNames[kMessageTypeCount] = {
    "Initiate", "Test",       "Status",  "Reject", "Report", "Merge", "Connect",
    "Accept",   "RefindEpsilon", "UpdateInfo", "Proceed", "Back", "Prune", "BackwardPrune"};
}  // namespace

std::string_view to_string(MessageType t) { return kTypeNames[static_cast<std::size_t>(t)]; }

std::optional<MessageType> parse_message_type(std::string_view text) {
  for (std::size_t i = 0; i < kMessageTypeCount; ++i) {
    if (kTypeNames[i] == text) return static_cast<MessageType>(i);
  }
  return std::nullopt;
}

std::string_view to_string(Decision d) {
  switch (d) {
    case Decision::Merge: return "merge";
    case Decision::Deactivate: return "deactivate";
    case Decision::Proceed: return "proceed";
    case Decision::Back: return "back";
    case Decision::Prune: return "prune";
    case Decision::Idle: return "idle";
  }
  return "?";
}

std::optional<Decision> parse_decision(std::string_view text) {
  for (Decision d : {Decision::Merge, Decision::Deactivate, Decision::Proceed, Decision::Back, Decision::Prune,
                     Decision::Idle}) {
    if (to_string(d) == text) return d;
  }
  return std::nullopt;
}

EdgeSlot& NodeState::slot(EdgeId e) {
  for (auto& s : edges) {
    if (s.edge == e) return s;
  }
  throw ProtocolViolation("node " + std::to_string(id) + " has no edge " + std::to_string(e));
}

const EdgeSlot& NodeState::slot(EdgeId e) const { return const_cast<NodeState*>(this)->slot(e); }

bool NodeState::has_edge(EdgeId e) const {
  return std::any_of(edges.begin(), edges.end(), [e](const EdgeSlot& s) { return s.edge == e; });
}

std::size_t NodeState::branch_count() const {
  return static_cast<std::size_t>(
      std::count_if(edges.begin(), edges.end(), [](const EdgeSlot& s) { return s.se == EdgeState::Branch; }));
}

NodeState initialize(NodeId id, bool is_root, Rational prize, const std::vector<EdgeSlot>& incident) {
  NodeState s;
  s.id = id;
  s.is_root = is_root;
  s.prize = std::move(prize);
  s.edges = incident;
  for (auto& e : s.edges) {
    e.se = EdgeState::Basic;
    e.epm = false;
  }
  std::sort(s.edges.begin(), s.edges.end(), [](const EdgeSlot& a, const EdgeSlot& b) { return a.edge < b.edge; });
  s.d_v = s.w = s.d_h = 0;
  s.tp = 0;
  if (is_root) {
    s.cs = ComponentState::Inactive;
    s.root_flag = true;
    s.prize_flag = false;
  } else {
    s.cs = ComponentState::Sleeping;
    s.root_flag = false;
    s.prize_flag = true;
  }
  return s;
}

std::vector<NodeState> initialize_all(const PcstInstance& inst) {
  std::vector<NodeState> nodes;
  for (NodeId v : inst.nodes()) {
    std::vector<EdgeSlot> incident;
    for (const auto& inc : inst.incident(v)) {
      incident.push_back(EdgeSlot{inc.edge, inc.neighbor, inst.edge(inc.edge).weight});
    }
    nodes.push_back(initialize(v, v == inst.root(), inst.prize(v), incident));
  }
  return nodes;
}

ExtRational compute_epsilon_edge(ComponentState cs_local, ComponentState cs_remote, EdgeState se_local,
                                 const Rational& w_e, const Rational& d_v, const Rational& d_remote,
                                 const Rational& d_h) {
  using CS = ComponentState;
  if (cs_local == CS::Active) {
    switch (cs_remote) {
      case CS::Active: return ExtRational((w_e - d_v - d_remote) / 2);
      case CS::Inactive: return ExtRational(w_e - d_v - d_remote);
      case CS::Sleeping: return ExtRational((w_e - d_v - d_h) / 2);
    }
  }
  if (cs_local == CS::Inactive) {
    switch (cs_remote) {
      case CS::Sleeping: return ExtRational(w_e - d_v - d_h);
      case CS::Inactive:
        if (se_local == EdgeState::Refind) return ExtRational(w_e - d_v - d_remote);
        return ExtRational::infinity();
      case CS::Active:
        throw ProtocolViolation("inactive component observed an active neighbour while computing epsilon");
    }
  }
  throw ProtocolViolation("sleeping node computing epsilon");
}

namespace {

// One transition in progress: a mutable copy of the state plus its outputs.
class Machine {
 public:
  explicit Machine(const NodeState& s) : s_(s) {}

  StepResult finish() && { return StepResult{std::move(s_), std::move(out_), std::move(notes_)}; }

  void wakeup_root() {
    if (!s_.is_root) throw ProtocolViolation("spontaneous wakeup at non-root node " + std::to_string(s_.id));
    if (s_.woken) throw ProtocolViolation("root woken twice");
    s_.woken = true;
    proc_initiate(false, true);
  }

  void deliver(EdgeId e, const Message& m, std::uint64_t ts) {
    if (!s_.has_edge(e)) throw ProtocolViolation("delivery on foreign edge");
    std::visit([&](const auto& msg) { on(e, msg, ts); }, m);
  }

 private:
  void send(EdgeId e, Message m) { out_.push_back(Outgoing{e, std::move(m)}); }
  bool is_branch(EdgeId e) const { return s_.slot(e).se == EdgeState::Branch; }

  // `sync`: identity wave that only refreshes LC and in_branch after a merge.
  // `new_round`: false when the find wave follows its own sync wave.
  void proc_initiate(bool sync, bool new_round) {
    if (new_round) notes_.push_back(RoundNote{});
    s_.sync_wave = sync;
    s_.sn = sync ? SearchState::Found : SearchState::Find;
    s_.find_count = 0;
    s_.best_epsilon = ExtRational::infinity();
    s_.best_edge.reset();
    s_.lc = s_.id;
    s_.tp = 0;
    s_.pf = false;
    s_.back_edge.reset();
    s_.ts = ExtRational::infinity();
    s_.in_branch.reset();
    for (const auto& slot : s_.edges) {
      if (slot.se == EdgeState::Branch) {
        send(slot.edge, msg::Initiate{s_.lc, s_.sn});
        ++s_.find_count;
      }
    }
    s_.test_count = 0;
    if (s_.sn == SearchState::Find) proc_test();
    proc_report();
  }

  void proc_test() {
    s_.test_count = 0;
    for (const auto& slot : s_.edges) {
      if (slot.se == EdgeState::Basic || slot.se == EdgeState::Refind) {
        send(slot.edge, msg::Test{s_.lc});
        ++s_.test_count;
      }
    }
  }

  void proc_report() {
    if (s_.find_count != 0 || s_.test_count != 0) return;
    s_.sn = SearchState::Found;
    if (s_.d_h < s_.d_v) s_.d_h = s_.d_v;
    if (s_.cs == ComponentState::Active) s_.tp += s_.prize;
    if (s_.proceed_flag) {
      s_.pf = true;
      if (s_.ts > s_.received_ts) {
        s_.ts = s_.received_ts;
        s_.back_edge.reset();
      }
    }
    if (s_.in_branch) {
      send(*s_.in_branch, msg::Report{s_.best_epsilon, s_.d_h, s_.tp, s_.pf, s_.ts});
    } else if (s_.sync_wave) {
      s_.sync_wave = false;
      proc_initiate(false, false);
    } else {
      decide();
    }
  }

  // proc_merge_or_deactivate_or_proceed
  void decide() {
    const ExtRational eps1 = s_.best_epsilon;
    if (!s_.root_flag && s_.cs == ComponentState::Active) {
      const Rational eps2 = s_.tp - s_.w;
      if (eps1 < ExtRational(eps2)) {
        notes_.push_back(EpsilonNote{eps1, eps2, Decision::Merge, EpsilonSource::Round, s_.d_v, s_.w});
        const EdgeId e = *s_.best_edge;
        if (is_branch(e)) {
          send(e, msg::Merge{eps1.value(), s_.d_h});
        } else {
          send(e, msg::Connect{s_.id, s_.w, s_.d_v, s_.d_h});
          s_.awaiting_accept = e;
        }
        return;
      }
      notes_.push_back(EpsilonNote{eps1, eps2, Decision::Deactivate, EpsilonSource::Round, s_.d_v, s_.w});
      s_.best_epsilon = eps2;
      s_.cs = ComponentState::Inactive;
      s_.d_v += eps2;
      s_.w += eps2;
      s_.d_h += eps2;
      s_.labelled_flag = true;
      for (const auto& slot : s_.edges) {
        if (slot.se == EdgeState::Branch) {
          send(slot.edge, msg::UpdateInfo{eps2, s_.root_flag, true, s_.w, s_.d_h});
        }
      }
      proc_initiate(false, true);
      return;
    }
    if (s_.cs != ComponentState::Inactive) {
      throw ProtocolViolation("leader " + std::to_string(s_.id) + " deciding in state " +
                              std::string(to_string(s_.cs)));
    }
    if (eps1.is_infinite()) {
      if (s_.ts.is_infinite()) {
        if (s_.is_root) {
          notes_.push_back(EpsilonNote{eps1, std::nullopt, Decision::Prune, EpsilonSource::Round, s_.d_v, s_.w});
          notes_.push_back(PruningNote{});
          s_.pruned_seen = true;
          for (const auto& slot : s_.edges) {
            if (slot.se == EdgeState::Branch || (slot.epm && slot.se != EdgeState::Rejected)) {
              send(slot.edge, msg::Prune{});
            }
            if (slot.se == EdgeState::Branch) ++s_.prune_msg_count;
          }
        } else {
          notes_.push_back(EpsilonNote{eps1, std::nullopt, Decision::Idle, EpsilonSource::Round, s_.d_v, s_.w});
        }
        return;
      }
      notes_.push_back(EpsilonNote{eps1, std::nullopt, Decision::Back, EpsilonSource::Round, s_.d_v, s_.w});
      send_back_down();
      return;
    }
    notes_.push_back(EpsilonNote{eps1, std::nullopt, Decision::Proceed, EpsilonSource::Round, s_.d_v, s_.w});
    forward_proceed(s_.d_h);
  }

  void forward_proceed(const Rational& d_k) {
    EdgeSlot& target = s_.slot(*s_.best_edge);
    send(target.edge, msg::Proceed{d_k});
    if (target.se == EdgeState::Basic) target.epm = true;
    if (target.se == EdgeState::Refind) target.se = EdgeState::Basic;
  }

  // Follows the earliest-pending-proceed pointer one hop away from the leader.
  void send_back_down() {
    if (s_.back_edge) {
      send(*s_.back_edge, msg::Back{});
    } else if (s_.proceed_flag) {
      send(*s_.proceed_in_edge, msg::Back{});
      s_.proceed_in_edge.reset();
      s_.proceed_flag = false;
    } else {
      throw ProtocolViolation("back at node " + std::to_string(s_.id) + " with no pending proceed");
    }
  }

  // Minimum over (epsilon, local edge id), so arrival order never matters.
  void fold(const ExtRational& eps, EdgeId e) {
    if (eps.is_infinite()) return;
    if (eps < s_.best_epsilon || (eps == s_.best_epsilon && e < *s_.best_edge)) {
      s_.best_epsilon = eps;
      s_.best_edge = e;
    }
  }

  void on(EdgeId e, const msg::Initiate& m, std::uint64_t) {
    if (!is_branch(e)) throw ProtocolViolation("initiate on non-branch edge");
    s_.sn = m.sn;
    s_.sync_wave = false;
    s_.find_count = 0;
    s_.best_epsilon = ExtRational::infinity();
    s_.best_edge.reset();
    s_.lc = m.leader;
    s_.tp = 0;
    s_.pf = false;
    s_.back_edge.reset();
    s_.ts = ExtRational::infinity();
    s_.in_branch = e;
    for (const auto& slot : s_.edges) {
      if (slot.edge != e && slot.se == EdgeState::Branch) {
        send(slot.edge, msg::Initiate{m.leader, m.sn});
        ++s_.find_count;
      }
    }
    s_.test_count = 0;
    if (m.sn == SearchState::Find) proc_test();
    proc_report();
  }

  void on(EdgeId e, const msg::Test& m, std::uint64_t) {
    if (s_.lc == m.leader) {
      send(e, msg::Reject{});
    } else {
      send(e, msg::Status{s_.cs, s_.d_v});
    }
  }

  void on(EdgeId e, const msg::Status& m, std::uint64_t) {
    if (s_.test_count <= 0) throw ProtocolViolation("status without outstanding test");
    --s_.test_count;
    const EdgeSlot& slot = s_.slot(e);
    fold(compute_epsilon_edge(s_.cs, m.cs, slot.se, slot.weight, s_.d_v, m.d, s_.d_h), e);
    proc_report();
  }

  void on(EdgeId e, const msg::Reject&, std::uint64_t) {
    if (s_.test_count <= 0) throw ProtocolViolation("reject without outstanding test");
    --s_.test_count;
    s_.slot(e).se = EdgeState::Rejected;
    if (s_.proceed_in_edge == e) {
      s_.proceed_in_edge.reset();
      s_.proceed_flag = false;
    }
    proc_report();
  }

  void on(EdgeId e, const msg::Report& m, std::uint64_t) {
    if (s_.find_count <= 0) throw ProtocolViolation("unexpected report");
    --s_.find_count;
    if (m.pf) {
      s_.pf = true;
      if (s_.ts > m.ts) {
        s_.ts = m.ts;
        s_.back_edge = e;
      }
    }
    if (s_.cs == ComponentState::Active) s_.tp += m.tp;
    if (s_.d_h < m.d_h) s_.d_h = m.d_h;
    fold(m.epsilon, e);
    proc_report();
  }

  void on(EdgeId, const msg::Merge& m, std::uint64_t) {
    if (!s_.best_edge) throw ProtocolViolation("merge without best edge");
    const EdgeId target = *s_.best_edge;
    if (is_branch(target)) {
      send(target, m);
    } else {
      send(target, msg::Connect{s_.id, s_.w, s_.d_v, m.d_h});
      s_.awaiting_accept = target;
    }
  }

  void on(EdgeId e, const msg::Connect& m, std::uint64_t) {
    EdgeSlot& slot = s_.slot(e);
    if (s_.cs == ComponentState::Active) {
      throw ProtocolViolation("connect received by active node " + std::to_string(s_.id));
    }
    if (s_.cs == ComponentState::Sleeping) {
      s_.cs = ComponentState::Active;
      s_.d_h = s_.d_v = s_.w = m.d_h;
      const Rational eps1 = (slot.weight - s_.d_v - m.d_v) / 2;
      const Rational eps2 = s_.prize - s_.w;
      if (eps1 < eps2) {
        notes_.push_back(EpsilonNote{eps1, eps2, Decision::Merge, EpsilonSource::Connect, s_.d_v, s_.w});
        s_.leader_flag = s_.id > m.nid;
        s_.d_h += eps1;
        s_.d_v += eps1;
        s_.w = s_.w + m.w + 2 * eps1;
        slot.se = EdgeState::Branch;
        send(e, msg::Accept{s_.leader_flag, s_.root_flag, s_.w, s_.d_h});
        if (s_.leader_flag) proc_initiate(true, true);
      } else {
        notes_.push_back(EpsilonNote{eps1, eps2, Decision::Deactivate, EpsilonSource::Connect, s_.d_v, s_.w});
        s_.cs = ComponentState::Inactive;
        s_.w += eps2;
        s_.d_v += eps2;
        s_.d_h = m.d_h + eps2;
        s_.labelled_flag = true;
        s_.lc = s_.id;
        send(e, msg::RefindEpsilon{});
      }
      return;
    }
    // Inactive receiver.
    if (s_.root_flag) {
      s_.leader_flag = true;
    } else {
      s_.cs = ComponentState::Active;
      s_.leader_flag = s_.id > m.nid;
    }
    const Rational eps1 = slot.weight - s_.d_v - m.d_v;
    notes_.push_back(EpsilonNote{eps1, std::nullopt, Decision::Merge, EpsilonSource::Connect, s_.d_v, s_.w});
    s_.w = s_.w + m.w + eps1;
    const Rational d_t = m.d_h + eps1;
    if (s_.d_h < d_t) s_.d_h = d_t;
    for (const auto& other : s_.edges) {
      if (other.edge != e && other.se == EdgeState::Branch) {
        send(other.edge, msg::UpdateInfo{Rational(0), s_.root_flag, false, s_.w, s_.d_h});
      }
    }
    slot.se = EdgeState::Branch;
    send(e, msg::Accept{s_.leader_flag, s_.root_flag, s_.w, s_.d_h});
    // The root component keeps r as its only leader; r learns of the merge
    // through the UpdateInfo flood unless it received the Connect itself.
    if (s_.root_flag) {
      if (s_.is_root) proc_initiate(true, true);
    } else if (s_.leader_flag) {
      proc_initiate(true, true);
    }
  }

  void on(EdgeId e, const msg::RefindEpsilon&, std::uint64_t) {
    EdgeSlot& slot = s_.slot(e);
    if (slot.se == EdgeState::Basic) {
      if (s_.awaiting_accept != e) throw ProtocolViolation("refind on an edge without a pending connect");
      s_.awaiting_accept.reset();
      slot.se = EdgeState::Refind;
    }
    if (s_.in_branch) {
      send(*s_.in_branch, msg::RefindEpsilon{});
    } else {
      proc_initiate(false, true);
    }
  }

  void on(EdgeId e, const msg::Accept& m, std::uint64_t) {
    if (s_.awaiting_accept != e) throw ProtocolViolation("accept on unexpected edge at " + std::to_string(s_.id));
    s_.awaiting_accept.reset();
    s_.slot(e).se = EdgeState::Branch;
    s_.root_flag = m.root_flag;
    s_.d_h = m.d_h;
    s_.d_v += s_.best_epsilon.value();
    s_.w = m.w;
    if (m.root_flag) {
      s_.cs = ComponentState::Inactive;
      s_.prize_flag = false;
    } else {
      s_.cs = ComponentState::Active;
    }
    if (s_.proceed_in_edge == e && s_.proceed_flag) {
      s_.proceed_in_edge.reset();
      s_.proceed_flag = false;
    }
    for (const auto& other : s_.edges) {
      if (other.edge != e && other.se == EdgeState::Branch) {
        send(other.edge, msg::UpdateInfo{s_.best_epsilon.value(), s_.root_flag, false, m.w, s_.d_h});
      }
    }
    if (!m.leader_flag) proc_initiate(true, true);
  }

  void on(EdgeId e, const msg::UpdateInfo& m, std::uint64_t) {
    if (m.root_flag && !m.deactivate_flag) {
      s_.cs = ComponentState::Inactive;
      s_.prize_flag = false;
    } else if (!m.root_flag && m.deactivate_flag) {
      s_.cs = ComponentState::Inactive;
      s_.labelled_flag = true;
    } else if (!m.root_flag && !m.deactivate_flag) {
      s_.cs = ComponentState::Active;
    }
    s_.root_flag = m.root_flag;
    s_.d_h = m.d_h;
    s_.d_v += m.ev;
    s_.w = m.w;
    for (const auto& other : s_.edges) {
      if (other.edge != e && other.se == EdgeState::Branch) send(other.edge, m);
    }
    if (s_.is_root) proc_initiate(true, true);
  }

  void on(EdgeId e, const msg::Proceed& m, std::uint64_t ts) {
    const EdgeState se = s_.slot(e).se;
    if (se == EdgeState::Branch && s_.in_branch == e) {
      forward_proceed(m.d_h);
    } else if (se == EdgeState::Basic || se == EdgeState::Refind) {
      s_.proceed_flag = true;
      s_.proceed_in_edge = e;
      s_.received_ts = ExtRational(Rational(static_cast<long long>(ts)));
      if (s_.cs == ComponentState::Sleeping) {
        s_.cs = ComponentState::Active;
        s_.d_v = m.d_h;
        s_.w = m.d_h;
        if (m.d_h > s_.d_h) s_.d_h = m.d_h;
        proc_initiate(false, true);
      } else if (s_.cs == ComponentState::Inactive) {
        if (s_.in_branch) {
          send(*s_.in_branch, m);
        } else {
          proc_initiate(false, true);
        }
      } else {
        throw ProtocolViolation("proceed received by active node " + std::to_string(s_.id));
      }
    } else if (se == EdgeState::Branch) {
      if (s_.in_branch) {
        send(*s_.in_branch, m);
      } else {
        proc_initiate(false, true);
      }
    } else {
      throw ProtocolViolation("proceed on rejected edge at " + std::to_string(s_.id));
    }
  }

  void on(EdgeId e, const msg::Back&, std::uint64_t) {
    if (s_.in_branch == e) {
      send_back_down();
    } else if (s_.in_branch) {
      send(*s_.in_branch, msg::Back{});
    } else {
      proc_initiate(false, true);
    }
  }

  void forward_prune(EdgeId except, bool branch_too) {
    for (const auto& slot : s_.edges) {
      if (slot.edge == except) continue;
      const bool branch = slot.se == EdgeState::Branch;
      const bool epm = slot.epm && slot.se != EdgeState::Rejected;
      if ((branch && branch_too) || (epm && !branch)) {
        send(slot.edge, msg::Prune{});
        if (branch) ++s_.prune_msg_count;
      }
    }
  }

  void on(EdgeId e, const msg::Prune&, std::uint64_t) {
    // Duplicates arrive over extra EPM edges; only the first one acts, and in
    // the root component only the one from the tree parent.
    if (s_.pruned_seen) return;
    if (s_.root_flag && s_.in_branch != e) return;
    s_.pruned_seen = true;
    if (s_.root_flag) {
      const bool leaf = std::none_of(s_.edges.begin(), s_.edges.end(), [e](const EdgeSlot& slot) {
        return slot.edge != e && slot.se == EdgeState::Branch;
      });
      if (s_.labelled_flag && leaf && is_branch(e)) {
        forward_prune(e, false);
        s_.prize_flag = true;
        s_.root_flag = false;
        s_.labelled_flag = false;
        send(e, msg::BackwardPrune{});
        s_.slot(e).se = EdgeState::Basic;
      } else {
        forward_prune(e, true);
      }
    } else {
      forward_prune(e, true);
      for (auto& slot : s_.edges) slot.se = EdgeState::Basic;
    }
  }

  void on(EdgeId e, const msg::BackwardPrune&, std::uint64_t) {
    --s_.prune_msg_count;
    s_.slot(e).se = EdgeState::Basic;
    if (s_.labelled_flag && s_.prune_msg_count == 0 && s_.in_branch) {
      s_.prize_flag = true;
      s_.root_flag = false;
      s_.labelled_flag = false;
      send(*s_.in_branch, msg::BackwardPrune{});
      s_.slot(*s_.in_branch).se = EdgeState::Basic;
    }
  }

  NodeState s_;
  std::vector<Outgoing> out_;
  std::vector<Note> notes_;
};

}  // namespace

StepResult step(const NodeState& state, const LocalEvent& event) {
  Machine m(state);
  if (std::holds_alternative<SpontaneousWakeup>(event)) {
    m.wakeup_root();
  } else {
    const auto& d = std::get<Deliver>(event);
    m.deliver(d.edge, d.message, d.timestamp);
  }
  return std::move(m).finish();
}

}  // namespace pcst::protocol
