#include <sstream>

#include "doctest.h"
#include "pcst/json_io.hpp"
#include "pcst/simulation.hpp"
#include "support.hpp"

using namespace pcst;
using pcst::test::q;

namespace {

std::string serialized(const sim::Trace& trace) {
  std::ostringstream out;
  io::write_trace(out, trace);
  return out.str();
}

}  // namespace

TEST_SUITE("json-io") {
  TEST_CASE("every message survives a round trip") {
    using namespace protocol;
    const std::vector<Message> all = {
        msg::Initiate{4, SearchState::Find},
        msg::Test{4},
        msg::Status{ComponentState::Inactive, q(-7, 2)},
        msg::Reject{},
        msg::Report{ExtRational::infinity(), q(3), q(10), true, ExtRational(q(12))},
        msg::Merge{q(-1), q(7)},
        msg::Connect{2, q(14), q(7), q(7)},
        msg::Accept{true, false, q(19), q(7)},
        msg::RefindEpsilon{},
        msg::UpdateInfo{q(1, 3), true, false, q(5), q(2)},
        msg::Proceed{q(15)},
        msg::Back{},
        msg::Prune{},
        msg::BackwardPrune{},
    };
    CHECK(all.size() == kMessageTypeCount);
    for (const auto& m : all) CHECK(io::message_from_json(io::message_to_json(m)) == m);
    CHECK(io::message_to_json(all[4])["epsilon"] == "inf");
  }

  TEST_CASE("traces survive a round trip") {
    for (std::uint64_t seed : {0u, 5u, 9u}) {
      sim::Simulation s(test::sweep_instance(seed), sim::Schedule::seeded(seed));
      sim::run_to_quiescence(s);
      const std::string text = serialized(s.trace());
      std::istringstream in(text);
      const auto back = io::read_trace(in);
      CHECK(back.size() == s.trace().size());
      CHECK(serialized(back) == text);
    }
  }

  TEST_CASE("record keys keep a fixed order") {
    const sim::TraceRecord rec{3, sim::DeliveryRecord{1, 2, protocol::msg::Proceed{q(5)}}};
    CHECK(io::record_to_json(rec).dump() ==
          R"({"kind":"delivery","step":3,"link":{"from":1,"to":2},"payload":{"type":"Proceed","d_h":"5"}})");
  }

  TEST_CASE("bad trace lines name their line") {
    std::istringstream in(
        "{\"kind\":\"wakeup\",\"step\":1,\"node\":1,\"payload\":{}}\n"
        "{\"kind\":\"teleport\",\"step\":2,\"node\":1,\"payload\":{}}\n");
    try {
      io::read_trace(in);
      FAIL("accepted an unknown kind");
    } catch (const io::FormatError& err) {
      CHECK(err.line() == 2);
    }
    std::istringstream broken("{\"kind\":");
    CHECK_THROWS_AS(io::read_trace(broken), io::FormatError);
  }

  TEST_CASE("solutions survive a round trip") {
    const auto inst = test::worked_example();
    sim::Simulation s(inst, sim::Schedule::eager());
    sim::run_to_quiescence(s);
    const auto sol = sim::extract_solution(s);
    const auto j = io::solution_to_json(inst, sol);
    CHECK(j["objective"] == "323");
    CHECK(io::solution_from_json(inst, j) == sol);

    auto wrong = j;
    wrong["objective"] = "1";
    CHECK_THROWS(io::solution_from_json(inst, wrong));
    auto cyclic = j;
    cyclic["branch_edges"].push_back(io::Json::array({1, 2}));
    CHECK_THROWS(io::solution_from_json(inst, cyclic));
    auto shapeless = io::Json::object();
    CHECK_THROWS_AS(io::solution_from_json(inst, shapeless), io::FormatError);
  }

  TEST_CASE("reports") {
    verify::CheckReport r{"ratio", verify::Status::Violation, {"too big"}, {{"factor", "3/2"}}};
    const auto j = io::report_to_json(r);
    CHECK(j["check"] == "ratio");
    CHECK(j["status"] == "violation");
    CHECK(j["witnesses"][0] == "too big");
    CHECK(j["values"]["factor"] == "3/2");
  }
}
