#pragma once

#include <fstream>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "pcst/instance.hpp"

#ifndef PCST_TEST_DATA
#define PCST_TEST_DATA "tests/data"
#endif

namespace pcst::test {

inline Rational q(long long num, long long den = 1) { return Rational(num, den); }

inline std::string read_data(const std::string& name) {
  std::ifstream in(std::string(PCST_TEST_DATA) + "/" + name);
  if (!in) throw std::runtime_error("missing test data " + name);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline PcstInstance worked_example() { return parse_instance(read_data("worked_example.pcst")); }

// Root 1 joined to 2 by one edge.
inline PcstInstance two_node(long long w, long long p) {
  return PcstInstance::create({1, 2}, 1, {{2, Rational(p)}}, {{1, 2, Rational(w)}});
}

inline PcstInstance single_node() { return PcstInstance::create({1}, 1, {}, {}); }

// The generator settings the acceptance sweep uses for instance `seed`.
struct SweepShape {
  std::size_t n, m;
};
inline SweepShape sweep_shape(std::uint64_t seed) {
  std::mt19937_64 rng(seed * 7919 + 1);
  const std::size_t n = 2 + rng() % 9;
  const std::size_t lo = n - 1, hi = n * (n - 1) / 2;
  return {n, lo + rng() % (hi - lo + 1)};
}

inline PcstInstance sweep_instance(std::uint64_t seed) {
  const auto s = sweep_shape(seed);
  return generate_random_instance(s.n, s.m, seed, 20, 20);
}

// Independent optimum: every edge subset that forms a tree through the root.
// Only for small edge counts.
inline Rational brute_force_by_edges(const PcstInstance& inst) {
  if (inst.edge_count() > 20) throw std::invalid_argument("too many edges for subset enumeration");
  const std::size_t m = inst.edge_count();
  const std::size_t n = inst.node_count();
  Rational best = 0;
  for (NodeId v : inst.nodes()) best += v == inst.root() ? Rational(0) : inst.prize(v);
  for (std::uint64_t mask = 1; mask < (std::uint64_t{1} << m); ++mask) {
    std::vector<std::size_t> parent(n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&parent](std::size_t x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    bool forest = true;
    std::vector<bool> touched(n, false);
    Rational cost = 0;
    for (EdgeId e = 0; e < m && forest; ++e) {
      if (!(mask >> e & 1)) continue;
      const auto a = inst.index_of(inst.edge(e).u), b = inst.index_of(inst.edge(e).v);
      touched[a] = touched[b] = true;
      if (find(a) == find(b)) forest = false;
      parent[find(a)] = find(b);
      cost += inst.edge(e).weight;
    }
    if (!forest) continue;
    const auto r = inst.index_of(inst.root());
    if (!touched[r]) continue;
    bool one_tree = true;
    for (std::size_t x = 0; x < n; ++x) {
      if (touched[x] && find(x) != find(r)) one_tree = false;
      if (!touched[x]) cost += inst.prize(inst.nodes()[x]);
    }
    if (one_tree && cost < best) best = cost;
  }
  return best;
}

}  // namespace pcst::test
