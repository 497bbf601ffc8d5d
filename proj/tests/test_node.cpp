#include "doctest.h"
#include "pcst/protocol.hpp"
#include "support.hpp"

using namespace pcst;
using namespace pcst::protocol;
using pcst::test::q;

namespace {

using CS = ComponentState;
using ES = EdgeState;

EdgeSlot link(EdgeId e, NodeId neighbor, long long w, ES se = ES::Basic) {
  EdgeSlot s{e, neighbor, q(w)};
  s.se = se;
  return s;
}

// initialize() resets every edge to basic; the requested marks go on afterwards.
NodeState node(NodeId id, long long prize, std::vector<EdgeSlot> edges, bool root = false) {
  NodeState s = initialize(id, root, q(prize), edges);
  for (const EdgeSlot& e : edges) s.slot(e.edge).se = e.se;
  return s;
}

StepResult deliver(const NodeState& s, EdgeId e, Message m, std::uint64_t ts = 1) {
  return step(s, Deliver{e, std::move(m), ts});
}

template <class T>
std::vector<std::pair<EdgeId, T>> sent(const StepResult& r) {
  std::vector<std::pair<EdgeId, T>> out;
  for (const auto& o : r.out) {
    if (const T* m = std::get_if<T>(&o.message)) out.emplace_back(o.edge, *m);
  }
  return out;
}

std::vector<EpsilonNote> eps_notes(const StepResult& r) {
  std::vector<EpsilonNote> out;
  for (const auto& n : r.notes) {
    if (const auto* e = std::get_if<EpsilonNote>(&n)) out.push_back(*e);
  }
  return out;
}

bool started_round(const StepResult& r) {
  for (const auto& n : r.notes) {
    if (std::holds_alternative<RoundNote>(n)) return true;
  }
  return false;
}

// A leader waiting on one Status reply over edge 0, with nothing else pending.
NodeState awaiting_status(NodeState s) {
  s.lc = s.id;
  s.sn = SearchState::Find;
  s.test_count = 1;
  return s;
}

}  // namespace

TEST_SUITE("dpcst-node") {
  TEST_CASE("initialize") {
    const auto root = node(1, 0, {link(0, 2, 5), link(1, 3, 5)}, true);
    CHECK(root.cs == CS::Inactive);
    CHECK_FALSE(root.prize_flag);
    CHECK(root.root_flag);
    const auto other = node(2, 4, {link(0, 1, 5)});
    CHECK(other.cs == CS::Sleeping);
    CHECK(other.prize_flag);
    CHECK_FALSE(other.root_flag);
    CHECK_FALSE(other.labelled_flag);
    CHECK(other.received_ts.is_infinite());
    CHECK(other.d_v == 0);
    CHECK(other.w == 0);
    CHECK(other.d_h == 0);
    for (const auto& s : root.edges) {
      CHECK(s.se == ES::Basic);
      CHECK_FALSE(s.epm);
    }
  }

  TEST_CASE("epsilon table") {
    CHECK(compute_epsilon_edge(CS::Active, CS::Sleeping, ES::Basic, q(12), q(7), q(99), q(7)) == ExtRational(q(-1)));
    CHECK(compute_epsilon_edge(CS::Active, CS::Active, ES::Basic, q(9), q(0), q(0), q(0)) == ExtRational(q(9, 2)));
    CHECK(compute_epsilon_edge(CS::Active, CS::Inactive, ES::Basic, q(9), q(2), q(3), q(0)) == ExtRational(q(4)));
    CHECK(compute_epsilon_edge(CS::Inactive, CS::Sleeping, ES::Basic, q(30), q(5), q(0), q(15)) == ExtRational(q(10)));
    CHECK(compute_epsilon_edge(CS::Inactive, CS::Inactive, ES::Basic, q(9), q(1), q(1), q(0)).is_infinite());
    CHECK(compute_epsilon_edge(CS::Inactive, CS::Inactive, ES::Refind, q(9), q(1), q(1), q(0)) == ExtRational(q(7)));
  }

  TEST_CASE("initiate at a leaf with two basic edges") {
    const auto s = node(4, 0, {link(0, 1, 3, ES::Branch), link(1, 5, 3), link(2, 6, 3)});
    const auto r = deliver(s, 0, msg::Initiate{9, SearchState::Find});
    CHECK(sent<msg::Initiate>(r).empty());
    CHECK(sent<msg::Test>(r).size() == 2);
    CHECK(r.state.test_count == 2);
    CHECK(r.state.lc == 9);
    CHECK(r.state.in_branch == EdgeId{0});
    CHECK(r.state.best_epsilon.is_infinite());
    CHECK(r.state.ts.is_infinite());
  }

  TEST_CASE("initiate at an interior node with three branch edges") {
    const auto s = node(4, 0, {link(0, 1, 3, ES::Branch), link(1, 5, 3, ES::Branch), link(2, 6, 3, ES::Branch)});
    const auto r = deliver(s, 0, msg::Initiate{9, SearchState::Find});
    const auto fwd = sent<msg::Initiate>(r);
    REQUIRE(fwd.size() == 2);
    CHECK(fwd[0].first == 1);
    CHECK(fwd[1].first == 2);
    CHECK(r.state.find_count == 2);
    CHECK(r.out.size() == 2);
  }

  TEST_CASE("initiate with every other edge rejected reports at once") {
    const auto s = node(4, 0, {link(0, 1, 3, ES::Branch), link(1, 5, 3, ES::Rejected)});
    const auto r = deliver(s, 0, msg::Initiate{9, SearchState::Find});
    CHECK(r.state.test_count == 0);
    CHECK(sent<msg::Report>(r).size() == 1);
  }

  TEST_CASE("initiate on a non-branch edge is a violation") {
    const auto s = node(4, 0, {link(0, 1, 3)});
    CHECK_THROWS_AS(deliver(s, 0, msg::Initiate{9, SearchState::Find}), ProtocolViolation);
  }

  TEST_CASE("test replies") {
    auto s = node(4, 0, {link(0, 1, 3)});
    s.lc = 7;
    auto same = deliver(s, 0, msg::Test{7});
    CHECK(sent<msg::Reject>(same).size() == 1);
    auto sleeping = deliver(s, 0, msg::Test{8});
    REQUIRE(sent<msg::Status>(sleeping).size() == 1);
    CHECK(sent<msg::Status>(sleeping)[0].second == msg::Status{CS::Sleeping, q(0)});
    s.cs = CS::Inactive;
    s.d_v = q(7);
    auto inactive = deliver(s, 0, msg::Test{8});
    CHECK(sent<msg::Status>(inactive)[0].second == msg::Status{CS::Inactive, q(7)});
  }

  TEST_CASE("status folds the minimum") {
    auto s = node(2, 0, {link(0, 1, 12)});
    s.cs = CS::Active;
    s.d_v = s.d_h = q(7);
    s.test_count = 2;  // keeps the report back
    const auto r = deliver(s, 0, msg::Status{CS::Sleeping, q(0)});
    CHECK(r.state.best_epsilon == ExtRational(q(-1)));
    CHECK(r.state.best_edge == EdgeId{0});
    CHECK(r.state.test_count == 1);
  }

  TEST_CASE("equal epsilons keep the lower edge in either arrival order") {
    auto s = node(2, 0, {link(0, 1, 6), link(1, 3, 6), link(2, 4, 1, ES::Branch)});
    s.cs = CS::Active;
    s.test_count = 2;
    s.in_branch = EdgeId{2};
    const msg::Status st{CS::Sleeping, q(0)};  // (6 - 0 - 0) / 2 = 3 on both
    const auto low_first = deliver(deliver(s, 0, st).state, 1, st);
    const auto high_first = deliver(deliver(s, 1, st).state, 0, st);
    CHECK(low_first.state.best_edge == EdgeId{0});
    CHECK(high_first.state.best_edge == EdgeId{0});
    CHECK(low_first.state.best_epsilon == ExtRational(q(3)));
  }

  TEST_CASE("reject on the proceed edge clears the pending proceed") {
    auto s = node(2, 0, {link(0, 1, 6), link(1, 3, 6)});
    s.cs = CS::Active;
    s.test_count = 2;
    s.proceed_flag = true;
    s.proceed_in_edge = EdgeId{1};
    const auto r = deliver(s, 1, msg::Reject{});
    CHECK(r.state.slot(1).se == ES::Rejected);
    CHECK_FALSE(r.state.proceed_flag);
    CHECK_FALSE(r.state.proceed_in_edge);
  }

  TEST_CASE("leaf report carries max deficit and its prize") {
    auto s = node(3, 4, {link(0, 1, 5, ES::Branch)});
    s.cs = CS::Active;
    s.d_v = q(2);
    s.d_h = q(1);
    const auto r = deliver(s, 0, msg::Initiate{9, SearchState::Find});
    const auto rep = sent<msg::Report>(r);
    REQUIRE(rep.size() == 1);
    CHECK(rep[0].first == 0);
    CHECK(rep[0].second.epsilon.is_infinite());
    CHECK(rep[0].second.d_h == q(2));
    CHECK(rep[0].second.tp == q(4));
    CHECK_FALSE(rep[0].second.pf);
    CHECK(r.state.sn == SearchState::Found);
  }

  TEST_CASE("interior node forwards the smaller epsilon") {
    // Own Status gave 3; the child reports 5.
    auto s = node(3, 0, {link(0, 1, 5, ES::Branch), link(1, 4, 5, ES::Branch), link(2, 7, 6)});
    s.cs = CS::Active;
    s.in_branch = EdgeId{0};
    s.find_count = 1;
    s.test_count = 1;
    s = deliver(s, 2, msg::Status{CS::Sleeping, q(0)}).state;
    const auto r = deliver(s, 1, msg::Report{ExtRational(q(5)), q(0), q(0), false, ExtRational::infinity()});
    const auto rep = sent<msg::Report>(r);
    REQUIRE(rep.size() == 1);
    CHECK(rep[0].second.epsilon == ExtRational(q(3)));
  }

  TEST_CASE("leader decides once all reports are in") {
    auto s = node(3, 0, {link(0, 1, 5, ES::Branch)});
    s.cs = CS::Inactive;
    s.find_count = 1;
    const auto r = deliver(s, 0, msg::Report{ExtRational::infinity(), q(0), q(0), false, ExtRational::infinity()});
    REQUIRE(eps_notes(r).size() == 1);
    CHECK(eps_notes(r)[0].chosen == Decision::Idle);
  }

  TEST_CASE("decide: epsilon1 = -1 < epsilon2 = 6 merges") {
    auto s = node(5, 10, {link(0, 4, 2)});
    s.cs = CS::Active;
    s.d_v = s.d_h = q(2);
    s.w = q(4);
    const auto r = deliver(awaiting_status(s), 0, msg::Status{CS::Sleeping, q(0)});
    REQUIRE(eps_notes(r).size() == 1);
    const auto note = eps_notes(r)[0];
    CHECK(note.eps1 == ExtRational(q(-1)));
    CHECK(note.eps2 == q(6));
    CHECK(note.chosen == Decision::Merge);
    const auto c = sent<msg::Connect>(r);
    REQUIRE(c.size() == 1);
    CHECK(c[0].second == msg::Connect{5, q(4), q(2), q(2)});
    CHECK(r.state.awaiting_accept == EdgeId{0});
  }

  TEST_CASE("decide: epsilon1 = 15/2 against epsilon2 = 3 deactivates") {
    auto s = node(5, 3, {link(0, 4, 15), link(1, 6, 1, ES::Branch)});
    s.cs = CS::Active;
    const auto r = deliver(awaiting_status(s), 0, msg::Status{CS::Sleeping, q(0)});
    REQUIRE(!eps_notes(r).empty());
    CHECK(eps_notes(r)[0].eps1 == ExtRational(q(15, 2)));
    CHECK(eps_notes(r)[0].eps2 == q(3));
    CHECK(eps_notes(r)[0].chosen == Decision::Deactivate);
    CHECK(r.state.cs == CS::Inactive);
    CHECK(r.state.labelled_flag);
    CHECK(r.state.d_v == q(3));
    CHECK(r.state.w == q(3));
    CHECK(r.state.d_h == q(3));
    const auto upd = sent<msg::UpdateInfo>(r);
    REQUIRE(upd.size() == 1);
    CHECK(upd[0].second == msg::UpdateInfo{q(3), false, true, q(3), q(3)});
    CHECK(started_round(r));
    CHECK(sent<msg::Test>(r).size() == 1);
  }

  TEST_CASE("decide: inactive with epsilon1 = 10 proceeds with d_h = 15") {
    auto s = node(3, 15, {link(0, 4, 30)});
    s.cs = CS::Inactive;
    s.d_v = q(5);
    s.w = q(15);
    s.d_h = q(15);
    const auto r = deliver(awaiting_status(s), 0, msg::Status{CS::Sleeping, q(0)});
    REQUIRE(eps_notes(r).size() == 1);
    CHECK(eps_notes(r)[0].eps1 == ExtRational(q(10)));
    CHECK(eps_notes(r)[0].chosen == Decision::Proceed);
    const auto p = sent<msg::Proceed>(r);
    REQUIRE(p.size() == 1);
    CHECK(p[0].second.d_h == q(15));
    CHECK(r.state.slot(0).epm);
  }

  TEST_CASE("decide: nothing left but a pending proceed sends back") {
    auto s = node(3, 0, {link(0, 4, 30), link(1, 5, 1)});
    s.cs = CS::Inactive;
    s.proceed_flag = true;
    s.proceed_in_edge = EdgeId{1};
    s.received_ts = ExtRational(q(4));
    s.lc = 3;
    s.sn = SearchState::Find;
    s.test_count = 1;
    const auto r = deliver(s, 0, msg::Reject{});
    CHECK(eps_notes(r)[0].chosen == Decision::Back);
    const auto b = sent<msg::Back>(r);
    REQUIRE(b.size() == 1);
    CHECK(b[0].first == 1);
    CHECK_FALSE(r.state.proceed_flag);
  }

  TEST_CASE("decide: root with nothing left starts pruning") {
    const auto root = node(1, 0, {}, true);
    const auto r = step(root, SpontaneousWakeup{});
    CHECK(eps_notes(r)[0].chosen == Decision::Prune);
    bool phase = false;
    for (const auto& n : r.notes) phase = phase || std::holds_alternative<PruningNote>(n);
    CHECK(phase);
    CHECK(r.out.empty());
    CHECK_THROWS_AS(step(r.state, SpontaneousWakeup{}), ProtocolViolation);
  }

  TEST_CASE("merge at the frontier becomes connect") {
    auto s = node(2, 10, {link(0, 1, 12), link(1, 5, 14, ES::Branch)});
    s.cs = CS::Active;
    s.w = q(14);
    s.d_v = q(7);
    s.best_edge = EdgeId{0};
    const auto r = deliver(s, 1, msg::Merge{q(-1), q(7)});
    const auto c = sent<msg::Connect>(r);
    REQUIRE(c.size() == 1);
    CHECK(c[0].first == 0);
    CHECK(c[0].second == msg::Connect{2, q(14), q(7), q(7)});
  }

  TEST_CASE("merge inside the component is forwarded unchanged") {
    auto s = node(5, 10, {link(0, 2, 14, ES::Branch), link(1, 6, 18, ES::Branch)});
    s.best_edge = EdgeId{0};
    const auto r = deliver(s, 1, msg::Merge{q(-1), q(7)});
    const auto m = sent<msg::Merge>(r);
    REQUIRE(m.size() == 1);
    CHECK(m[0].first == 0);
    CHECK(m[0].second == msg::Merge{q(-1), q(7)});
  }

  TEST_CASE("sleeping node accepts a connect when epsilon1 < epsilon2") {
    const auto s = node(1, 10, {link(0, 2, 12)});
    const auto r = deliver(s, 0, msg::Connect{2, q(14), q(7), q(7)});
    CHECK(eps_notes(r)[0].eps1 == ExtRational(q(-1)));
    CHECK(eps_notes(r)[0].eps2 == q(3));
    CHECK(r.state.d_v == q(6));
    CHECK(r.state.w == q(19));
    CHECK(r.state.cs == CS::Active);
    CHECK(r.state.slot(0).se == ES::Branch);
    const auto a = sent<msg::Accept>(r);
    REQUIRE(a.size() == 1);
    // 1 < 2, so the sender stays leader
    CHECK(a[0].second == msg::Accept{false, false, q(19), q(6)});
  }

  TEST_CASE("sleeping node with a small prize refuses the connect") {
    const auto s = node(1, 1, {link(0, 2, 12)});
    const auto r = deliver(s, 0, msg::Connect{2, q(14), q(7), q(7)});
    CHECK(sent<msg::RefindEpsilon>(r).size() == 1);
    CHECK(r.state.labelled_flag);
    CHECK(r.state.cs == CS::Inactive);
    // 7 + (1 - 7)
    CHECK(r.state.d_v == q(1));
  }

  TEST_CASE("root component accepts a connect") {
    const auto root = node(1, 0, {link(0, 2, 5)}, true);
    const auto r = deliver(root, 0, msg::Connect{2, q(3), q(3), q(3)});
    const auto a = sent<msg::Accept>(r);
    REQUIRE(a.size() == 1);
    CHECK(a[0].second.root_flag);
    CHECK(a[0].second.leader_flag);
    CHECK(r.state.cs == CS::Inactive);
    CHECK(r.state.w == q(5));
  }

  TEST_CASE("connect at an active node is a violation") {
    auto s = node(1, 10, {link(0, 2, 12)});
    s.cs = CS::Active;
    CHECK_THROWS_AS(deliver(s, 0, msg::Connect{2, q(14), q(7), q(7)}), ProtocolViolation);
  }

  TEST_CASE("accept applies the round epsilon") {
    auto s = node(2, 10, {link(0, 1, 12), link(1, 5, 14, ES::Branch)});
    s.cs = CS::Active;
    s.d_v = q(7);
    s.best_epsilon = ExtRational(q(-1));
    s.awaiting_accept = EdgeId{0};
    const auto r = deliver(s, 0, msg::Accept{true, false, q(19), q(7)});
    CHECK(r.state.d_v == q(6));
    CHECK(r.state.cs == CS::Active);
    CHECK(r.state.w == q(19));
    CHECK(r.state.slot(0).se == ES::Branch);
    const auto upd = sent<msg::UpdateInfo>(r);
    REQUIRE(upd.size() == 1);
    CHECK(upd[0].second == msg::UpdateInfo{q(-1), false, false, q(19), q(7)});
    CHECK_FALSE(started_round(r));
    CHECK_THROWS_AS(deliver(s, 1, msg::Accept{true, false, q(19), q(7)}), ProtocolViolation);
  }

  TEST_CASE("update info flags") {
    auto s = node(5, 10, {link(0, 2, 14, ES::Branch), link(1, 6, 18, ES::Branch)});
    s.cs = CS::Active;
    const auto joined = deliver(s, 0, msg::UpdateInfo{q(0), true, false, q(20), q(9)});
    CHECK(joined.state.cs == CS::Inactive);
    CHECK_FALSE(joined.state.prize_flag);
    CHECK(joined.state.w == q(20));
    CHECK(sent<msg::UpdateInfo>(joined).size() == 1);
    const auto deact = deliver(s, 0, msg::UpdateInfo{q(2), false, true, q(20), q(9)});
    CHECK(deact.state.labelled_flag);
    CHECK(deact.state.cs == CS::Inactive);
    CHECK(deact.state.d_v == q(2));
  }

  TEST_CASE("refind at the frontier marks the edge and relays") {
    auto s = node(2, 10, {link(0, 1, 12), link(1, 5, 14, ES::Branch)});
    s.in_branch = EdgeId{1};
    s.awaiting_accept = EdgeId{0};
    const auto r = deliver(s, 0, msg::RefindEpsilon{});
    CHECK(r.state.slot(0).se == ES::Refind);
    const auto up = sent<msg::RefindEpsilon>(r);
    REQUIRE(up.size() == 1);
    CHECK(up[0].first == 1);
  }

  TEST_CASE("refind at the leader reruns the round") {
    auto s = node(2, 10, {link(0, 1, 12)});
    s.cs = CS::Active;
    s.awaiting_accept = EdgeId{0};
    const auto r = deliver(s, 0, msg::RefindEpsilon{});
    CHECK(r.state.slot(0).se == ES::Refind);
    CHECK(started_round(r));
    CHECK(sent<msg::Test>(r).size() == 1);
  }

  TEST_CASE("proceed wakes a sleeping node") {
    const auto s = node(4, 35, {link(0, 3, 40), link(1, 8, 70)});
    const auto r = deliver(s, 0, msg::Proceed{q(15)}, 42);
    CHECK(r.state.cs == CS::Active);
    CHECK(r.state.d_v == q(15));
    CHECK(r.state.w == q(15));
    CHECK(r.state.d_h == q(15));
    CHECK(r.state.proceed_flag);
    CHECK(r.state.proceed_in_edge == EdgeId{0});
    CHECK(r.state.received_ts == ExtRational(q(42)));
    CHECK(started_round(r));
    CHECK(sent<msg::Test>(r).size() == 2);
  }

  TEST_CASE("proceed at an inactive member is relayed upward") {
    auto s = node(4, 0, {link(0, 3, 40), link(1, 8, 70, ES::Branch)});
    s.cs = CS::Inactive;
    s.in_branch = EdgeId{1};
    const auto r = deliver(s, 0, msg::Proceed{q(9)});
    const auto p = sent<msg::Proceed>(r);
    REQUIRE(p.size() == 1);
    CHECK(p[0].first == 1);
    CHECK(r.state.proceed_flag);
  }

  TEST_CASE("back at a leader with no chain starts a round") {
    auto s = node(4, 0, {link(0, 3, 40), link(1, 8, 70, ES::Branch)});
    s.cs = CS::Inactive;
    const auto r = deliver(s, 1, msg::Back{});
    CHECK(started_round(r));
  }

  TEST_CASE("labelled leaf of the root tree prunes itself") {
    auto s = node(11, 7, {link(0, 6, 19, ES::Branch), link(1, 7, 10)});
    s.cs = CS::Inactive;
    s.root_flag = true;
    s.prize_flag = false;
    s.labelled_flag = true;
    s.in_branch = EdgeId{0};
    const auto r = deliver(s, 0, msg::Prune{});
    CHECK(r.state.prize_flag);
    CHECK_FALSE(r.state.root_flag);
    CHECK(r.state.slot(0).se == ES::Basic);
    CHECK(sent<msg::BackwardPrune>(r).size() == 1);
  }

  TEST_CASE("unlabelled leaf stays and sends nothing") {
    auto s = node(10, 80, {link(0, 6, 60, ES::Branch)});
    s.cs = CS::Inactive;
    s.root_flag = true;
    s.prize_flag = false;
    s.in_branch = EdgeId{0};
    const auto r = deliver(s, 0, msg::Prune{});
    CHECK_FALSE(r.state.prize_flag);
    CHECK(r.out.empty());
  }

  TEST_CASE("node outside the root tree resets its edges") {
    auto s = node(2, 10, {link(0, 1, 12, ES::Branch), link(1, 5, 14, ES::Branch), link(2, 9, 3, ES::Rejected)});
    s.cs = CS::Inactive;
    s.slot(1).epm = true;
    const auto r = deliver(s, 1, msg::Prune{});
    for (const auto& slot : r.state.edges) CHECK(slot.se == ES::Basic);
    const auto fwd = sent<msg::Prune>(r);
    REQUIRE(fwd.size() == 1);
    CHECK(fwd[0].first == 0);
    // a second copy is ignored
    CHECK(deliver(r.state, 0, msg::Prune{}).out.empty());
  }

  TEST_CASE("backward prune cascades up a labelled chain") {
    auto s = node(7, 6, {link(0, 3, 25, ES::Branch), link(1, 11, 10, ES::Branch)});
    s.cs = CS::Inactive;
    s.root_flag = true;
    s.labelled_flag = true;
    s.in_branch = EdgeId{0};
    s.prune_msg_count = 1;
    const auto r = deliver(s, 1, msg::BackwardPrune{});
    CHECK(r.state.prize_flag);
    CHECK(r.state.slot(0).se == ES::Basic);
    CHECK(r.state.slot(1).se == ES::Basic);
    const auto up = sent<msg::BackwardPrune>(r);
    REQUIRE(up.size() == 1);
    CHECK(up[0].first == 0);
  }

  TEST_CASE("step is pure") {
    const auto s = node(4, 35, {link(0, 3, 40), link(1, 8, 70)});
    const auto a = deliver(s, 0, msg::Proceed{q(15)}, 3);
    const auto b = deliver(s, 0, msg::Proceed{q(15)}, 3);
    CHECK(a.state == b.state);
    CHECK(a.out.size() == b.out.size());
    for (std::size_t i = 0; i < a.out.size(); ++i) {
      CHECK(a.out[i].edge == b.out[i].edge);
      CHECK(a.out[i].message == b.out[i].message);
    }
  }
}
