#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string_view>
#include <variant>
#include <vector>

#include "pcst/instance.hpp"
#include "pcst/rational.hpp"

namespace pcst::protocol {

enum class ComponentState { Sleeping, Active, Inactive };
enum class EdgeState { Basic, Branch, Rejected, Refind };
enum class SearchState { Find, Found };

std::string_view to_string(ComponentState s);
std::string_view to_string(EdgeState s);
std::optional<ComponentState> parse_component_state(std::string_view text);

namespace msg {
struct Initiate {
  NodeId leader;
  SearchState sn;
  friend bool operator==(const Initiate&, const Initiate&) = default;
};
struct Test {
  NodeId leader;
  friend bool operator==(const Test&, const Test&) = default;
};
struct Status {
  ComponentState cs;
  Rational d;
  friend bool operator==(const Status&, const Status&) = default;
};
struct Reject {
  friend bool operator==(const Reject&, const Reject&) = default;
};
struct Report {
  ExtRational epsilon;
  Rational d_h;
  Rational tp;
  bool pf;
  ExtRational ts;
  friend bool operator==(const Report&, const Report&) = default;
};
struct Merge {
  Rational epsilon;
  Rational d_h;
  friend bool operator==(const Merge&, const Merge&) = default;
};
struct Connect {
  NodeId nid;
  Rational w;
  Rational d_v;
  Rational d_h;
  friend bool operator==(const Connect&, const Connect&) = default;
};
struct Accept {
  bool leader_flag;
  bool root_flag;
  Rational w;
  Rational d_h;
  friend bool operator==(const Accept&, const Accept&) = default;
};
struct RefindEpsilon {
  friend bool operator==(const RefindEpsilon&, const RefindEpsilon&) = default;
};
struct UpdateInfo {
  Rational ev;
  bool root_flag;
  bool deactivate_flag;
  Rational w;
  Rational d_h;
  friend bool operator==(const UpdateInfo&, const UpdateInfo&) = default;
};
struct Proceed {
  Rational d_h;
  friend bool operator==(const Proceed&, const Proceed&) = default;
};
struct Back {
  friend bool operator==(const Back&, const Back&) = default;
};
struct Prune {
  friend bool operator==(const Prune&, const Prune&) = default;
};
struct BackwardPrune {
  friend bool operator==(const BackwardPrune&, const BackwardPrune&) = default;
};
}  // namespace msg

// Variant order defines MessageType.
using Message = std::variant<msg::Initiate, msg::Test, msg::Status, msg::Reject, msg::Report, msg::Merge,
                             msg::Connect, msg::Accept, msg::RefindEpsilon, msg::UpdateInfo, msg::Proceed,
                             msg::Back, msg::Prune, msg::BackwardPrune>;

enum class MessageType {
  Initiate,
  Test,
  Status,
  Reject,
  Report,
  Merge,
  Connect,
  Accept,
  RefindEpsilon,
  UpdateInfo,
  Proceed,
  Back,
  Prune,
  BackwardPrune,
};
inline constexpr std::size_t kMessageTypeCount = 14;

inline MessageType type_of(const Message& m) { return static_cast<MessageType>(m.index()); }
std::string_view to_string(MessageType t);
std::optional<MessageType> parse_message_type(std::string_view text);

struct EdgeSlot {
  EdgeId edge;
  NodeId neighbor;
  Rational weight;
  EdgeState se = EdgeState::Basic;
  bool epm = false;
  friend bool operator==(const EdgeSlot&, const EdgeSlot&) = default;
};

// Local variables of one node. Component-level quantities (W, d_h, TP, the
// leader id) are replicated in every member.
struct NodeState {
  NodeId id = 0;
  bool is_root = false;  // v = r; fixed
  Rational prize;        // p_v; fixed
  std::vector<EdgeSlot> edges;  // ascending edge id

  ComponentState cs = ComponentState::Sleeping;
  Rational d_v;
  Rational w;
  Rational d_h;
  bool prize_flag = true;
  bool labelled_flag = false;
  bool root_flag = false;
  bool leader_flag = false;
  bool proceed_flag = false;
  std::optional<EdgeId> proceed_in_edge;
  std::optional<EdgeId> in_branch;
  std::optional<EdgeId> best_edge;
  std::optional<EdgeId> back_edge;
  ExtRational best_epsilon;
  NodeId lc = 0;
  SearchState sn = SearchState::Found;
  Rational tp;
  bool pf = false;
  int find_count = 0;
  int test_count = 0;
  int prune_msg_count = 0;
  ExtRational received_ts;
  ExtRational ts;

  // Additions to the literal pseudocode state.
  bool sync_wave = false;                  // current wave only refreshes LC/in_branch
  std::optional<EdgeId> awaiting_accept;   // edge that carried our last Connect
  bool woken = false;                      // root wakeup already handled
  bool pruned_seen = false;                // a Prune has been processed here

  EdgeSlot& slot(EdgeId e);
  const EdgeSlot& slot(EdgeId e) const;
  bool has_edge(EdgeId e) const;
  std::size_t branch_count() const;

  friend bool operator==(const NodeState&, const NodeState&) = default;
};

struct SpontaneousWakeup {};
struct Deliver {
  EdgeId edge;
  Message message;
  std::uint64_t timestamp;  // global delivery sequence number
};
using LocalEvent = std::variant<SpontaneousWakeup, Deliver>;

struct Outgoing {
  EdgeId edge;
  Message message;
};

enum class Decision { Merge, Deactivate, Proceed, Back, Prune, Idle };
std::string_view to_string(Decision d);
std::optional<Decision> parse_decision(std::string_view text);

enum class EpsilonSource { Round, Connect };

// Instrumentation emitted alongside state transitions.
struct EpsilonNote {
  ExtRational eps1;
  std::optional<Rational> eps2;
  Decision chosen;
  EpsilonSource source;
  Rational d_v;  // deciding node's values before the decision is applied
  Rational w;
};
struct RoundNote {};
struct PruningNote {};
using Note = std::variant<EpsilonNote, RoundNote, PruningNote>;

struct StepResult {
  NodeState state;
  std::vector<Outgoing> out;
  std::vector<Note> notes;
};

class ProtocolViolation : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Root: inactive, root_flag, prize_flag FALSE. Others: sleeping, prize_flag TRUE.
NodeState initialize(NodeId id, bool is_root, Rational prize, const std::vector<EdgeSlot>& incident);

/// Builds the initial state of every node of `inst`, in inst.nodes() order.
std::vector<NodeState> initialize_all(const PcstInstance& inst);

/// The five-case ε table for a frontier edge. `d_remote` is ignored when the
/// remote side is sleeping (d_h stands in for it).
ExtRational compute_epsilon_edge(ComponentState cs_local, ComponentState cs_remote, EdgeState se_local,
                                 const Rational& w_e, const Rational& d_v, const Rational& d_remote,
                                 const Rational& d_h);

/// Pure transition: applies one event to one node.
StepResult step(const NodeState& state, const LocalEvent& event);

}  // namespace pcst::protocol
