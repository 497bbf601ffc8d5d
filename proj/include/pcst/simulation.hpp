#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "pcst/instance.hpp"
#include "pcst/protocol.hpp"

namespace pcst::sim {

struct Schedule {
  enum class Kind { FifoEager, Seeded };
  Kind kind = Kind::FifoEager;
  std::uint64_t seed = 0;

  static Schedule eager() { return {}; }
  static Schedule seeded(std::uint64_t s) { return {Kind::Seeded, s}; }
  /// "eager" or "seeded:<n>"; throws std::invalid_argument otherwise.
  static Schedule parse(std::string_view text);
  std::string str() const;

  friend bool operator==(const Schedule&, const Schedule&) = default;
};

struct WakeupRecord {
  NodeId node;
};
struct DeliveryRecord {
  NodeId from;
  NodeId to;
  protocol::Message message;
};
struct StateChangeRecord {
  NodeId node;
  std::string field;  // cs, d_v, W, d_h, prize_flag, labelled_flag, root_flag, se:<u>-<v>, epm:<u>-<v>
  std::string old_value;
  std::string new_value;
};
struct EpsilonRecord {
  NodeId node;
  protocol::EpsilonNote note;
};
struct RoundRecord {
  NodeId leader;
  std::size_t index;  // 0-based, strictly increasing
};
struct PhaseRecord {};

using RecordBody =
    std::variant<WakeupRecord, DeliveryRecord, StateChangeRecord, EpsilonRecord, RoundRecord, PhaseRecord>;

// Within one step the order is: the wakeup or delivery, then the node's notes
// (rounds, epsilons, phase) in emission order, then state changes.
struct TraceRecord {
  std::uint64_t step;
  RecordBody body;
};

using Trace = std::vector<TraceRecord>;

class SimulationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The traced view of a node state, in the order StateChange records use.
std::vector<std::pair<std::string, std::string>> tracked_fields(const PcstInstance& inst,
                                                                const protocol::NodeState& s);

/// 10 x the total message bound for an instance of this size.
std::uint64_t step_budget(std::size_t node_count, std::size_t edge_count);

class Simulation {
 public:
  Simulation(PcstInstance inst, Schedule schedule);

  const PcstInstance& instance() const { return inst_; }
  const Schedule& schedule() const { return schedule_; }
  const std::vector<protocol::NodeState>& nodes() const { return nodes_; }
  const protocol::NodeState& node(NodeId v) const { return nodes_[inst_.index_of(v)]; }
  const Trace& trace() const { return trace_; }

  std::size_t link_count() const { return queues_.size(); }
  std::size_t in_flight() const { return in_flight_; }
  /// Root wakeup (until consumed) plus in-flight messages.
  std::size_t pending_events() const { return in_flight_ + (wakeup_pending_ ? 1 : 0); }
  std::uint64_t steps() const { return step_; }
  bool pruning_started() const { return pruning_started_; }

  /// Processes one event; false when nothing is pending.
  bool step();

 private:
  struct Queued {
    protocol::Message message;
    std::uint64_t send_seq;
  };

  std::size_t link_index(EdgeId e, NodeId from) const;
  void apply(NodeId node, const protocol::LocalEvent& event);
  void record_changes(const protocol::NodeState& before, const protocol::NodeState& after);

  PcstInstance inst_;
  Schedule schedule_;
  std::mt19937_64 rng_;
  std::vector<protocol::NodeState> nodes_;
  std::vector<std::deque<Queued>> queues_;  // index 2e: u->v, 2e+1: v->u
  std::size_t in_flight_ = 0;
  bool wakeup_pending_ = true;
  bool pruning_started_ = false;
  std::uint64_t step_ = 0;
  std::uint64_t send_seq_ = 0;
  std::size_t rounds_ = 0;
  Trace trace_;
};

/// Steps until no message is in flight. Throws SimulationError when the
/// step budget is exceeded or the network goes quiet before pruning started.
const Trace& run_to_quiescence(Simulation& sim);

struct MessageCounts {
  std::array<std::size_t, protocol::kMessageTypeCount> by_type{};
  std::vector<std::size_t> per_round;  // growth-phase deliveries per round span
  std::size_t total = 0;
  std::size_t pruning_total = 0;       // deliveries after the phase boundary
  std::size_t rounds = 0;
  std::size_t proceed_actions = 0;     // leader decisions to proceed
  std::size_t back_actions = 0;        // leader decisions to send back
  std::map<NodeId, std::size_t> prune_received;

  std::size_t count(protocol::MessageType t) const { return by_type[static_cast<std::size_t>(t)]; }
};

MessageCounts count_messages(const Trace& trace);

/// Steiner nodes are those with prize_flag FALSE; branch edges are marked
/// branch at both ends. Throws SimulationError on asymmetric marks or a non-tree.
Solution extract_solution(const PcstInstance& inst, const std::vector<protocol::NodeState>& nodes);
inline Solution extract_solution(const Simulation& sim) { return extract_solution(sim.instance(), sim.nodes()); }

}  // namespace pcst::sim
