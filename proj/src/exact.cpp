#include "pcst/exact.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <numeric>
#include <optional>
#include <vector>

namespace pcst::exact {
namespace {

struct Candidate {
  std::vector<NodeId> nodes;
  std::vector<EdgeId> edges;
  Rational cost;
};

}  // namespace

ExactResult exact_pcst(const PcstInstance& inst) {
  const std::size_t n = inst.node_count();
  if (n > kMaxExactNodes) {
    throw InstanceTooLarge("exact oracle limited to " + std::to_string(kMaxExactNodes) + " nodes, got " +
                           std::to_string(n));
  }

  std::vector<EdgeId> by_weight(inst.edge_count());
  std::iota(by_weight.begin(), by_weight.end(), EdgeId{0});
  std::stable_sort(by_weight.begin(), by_weight.end(), [&inst](EdgeId a, EdgeId b) {
    return inst.edge(a).weight < inst.edge(b).weight;
  });
  std::vector<std::pair<std::size_t, std::size_t>> ends(inst.edge_count());
  for (EdgeId e = 0; e < inst.edge_count(); ++e) {
    ends[e] = {inst.index_of(inst.edge(e).u), inst.index_of(inst.edge(e).v)};
  }

  const std::size_t root_bit = inst.index_of(inst.root());
  std::optional<Candidate> best;
  std::size_t examined = 0;
  std::vector<std::size_t> parent(n);
  auto find = [&parent](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };

  for (std::uint32_t mask = 0; mask < (1u << n); ++mask) {
    if (!(mask & (1u << root_bit))) continue;
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    Candidate cand;
    cand.cost = 0;
    std::size_t unions = 0;
    for (EdgeId e : by_weight) {
      const auto [a, b] = ends[e];
      if (!(mask & (1u << a)) || !(mask & (1u << b))) continue;
      const auto ra = find(a);
      const auto rb = find(b);
      if (ra == rb) continue;
      parent[std::max(ra, rb)] = std::min(ra, rb);
      ++unions;
      cand.edges.push_back(e);
      cand.cost += inst.edge(e).weight;
    }
    const auto size = static_cast<std::size_t>(std::popcount(mask));
    if (unions + 1 != size) continue;  // induced subgraph disconnected
    ++examined;
    for (std::size_t i = 0; i < n; ++i) {
      if (mask & (1u << i)) {
        cand.nodes.push_back(inst.nodes()[i]);
      } else {
        cand.cost += inst.prize(inst.nodes()[i]);
      }
    }
    std::sort(cand.edges.begin(), cand.edges.end());
    if (!best || cand.cost < best->cost ||
        (cand.cost == best->cost && cand.nodes < best->nodes)) {
      best = std::move(cand);
    }
  }

  ExactResult result;
  result.best = make_solution(inst, best->edges, best->nodes);
  result.opt_value = result.best.objective;
  result.enumerated_count = examined;
  return result;
}

}  // namespace pcst::exact
