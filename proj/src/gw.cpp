#include "pcst/gw.hpp"

#include <algorithm>
#include <optional>
#include <stdexcept>
#include <string>

namespace pcst::gw {
namespace {

std::vector<std::size_t> owners(const PcstInstance& inst, const GwState& g) {
  std::vector<std::size_t> owner(inst.node_count());
  for (std::size_t c = 0; c < g.components.size(); ++c) {
    for (NodeId v : g.components[c].nodes) owner[inst.index_of(v)] = c;
  }
  return owner;
}

bool subset_of(const std::vector<NodeId>& small, const std::vector<NodeId>& big) {
  return std::includes(big.begin(), big.end(), small.begin(), small.end());
}

bool contains(const std::vector<NodeId>& set, NodeId v) {
  return std::binary_search(set.begin(), set.end(), v);
}

}  // namespace

void check_invariants(const PcstInstance& inst, const GwState& g) {
  const auto owner = owners(inst, g);
  for (const auto& comp : g.components) {
    if (contains(comp.nodes, inst.root()) && comp.active) {
      throw std::logic_error("root component is active");
    }
    Rational inside = 0;
    for (const Moat& m : g.moats) {
      if (subset_of(m.nodes, comp.nodes)) inside += m.y;
    }
    if (inside != comp.weight) throw std::logic_error("W(C) differs from the dual mass inside C");
  }
  for (NodeId v : inst.nodes()) {
    Rational sum = 0;
    for (const Moat& m : g.moats) {
      if (contains(m.nodes, v)) sum += m.y;
    }
    if (sum != g.deficit[inst.index_of(v)]) {
      throw std::logic_error("deficit of node " + std::to_string(v) + " differs from its moat sum");
    }
  }
  // d_u + d_v counts exactly the moats crossing e only when u and v sit in different components.
  for (const Edge& e : inst.edges()) {
    if (owner[inst.index_of(e.u)] == owner[inst.index_of(e.v)]) continue;
    if (g.deficit[inst.index_of(e.u)] + g.deficit[inst.index_of(e.v)] > e.weight) {
      throw std::logic_error("edge " + std::to_string(e.u) + "-" + std::to_string(e.v) + " overpacked");
    }
  }
}

GwState gw_grow(const PcstInstance& inst) {
  GwState g;
  g.deficit.assign(inst.node_count(), Rational(0));
  g.marks.assign(inst.node_count(), {});
  for (NodeId v : inst.nodes()) {
    g.moats.push_back(Moat{{v}, Rational(0), false});
    g.components.push_back(GwComponent{{v}, v != inst.root(), Rational(0), g.moats.size() - 1});
  }

  auto any_active = [&g] {
    return std::any_of(g.components.begin(), g.components.end(), [](const auto& c) { return c.active; });
  };

  while (any_active()) {
    const auto owner = owners(inst, g);

    std::optional<Rational> eps1;
    EdgeId best_edge = 0;
    for (EdgeId e = 0; e < inst.edge_count(); ++e) {
      const Edge& edge = inst.edge(e);
      const auto cu = owner[inst.index_of(edge.u)];
      const auto cv = owner[inst.index_of(edge.v)];
      if (cu == cv) continue;
      const int denom = int(g.components[cu].active) + int(g.components[cv].active);
      if (denom == 0) continue;
      Rational value = (edge.weight - g.deficit[inst.index_of(edge.u)] - g.deficit[inst.index_of(edge.v)]) /
                       Rational(denom);
      if (!eps1 || value < *eps1) {
        eps1 = std::move(value);
        best_edge = e;
      }
    }

    std::optional<Rational> eps2;
    std::size_t best_comp = 0;
    for (std::size_t c = 0; c < g.components.size(); ++c) {
      const auto& comp = g.components[c];
      if (!comp.active) continue;
      Rational prize = 0;
      for (NodeId v : comp.nodes) prize += inst.prize(v);
      Rational value = prize - comp.weight;
      if (!eps2 || value < *eps2 ||
          (value == *eps2 && comp.leader() < g.components[best_comp].leader())) {
        eps2 = std::move(value);
        best_comp = c;
      }
    }

    const bool deactivate = !eps1 || *eps2 <= *eps1;
    const Rational eps = deactivate ? *eps2 : *eps1;
    for (auto& comp : g.components) {
      if (!comp.active) continue;
      comp.weight += eps;
      g.moats[comp.moat].y += eps;
      for (NodeId v : comp.nodes) g.deficit[inst.index_of(v)] += eps;
    }

    if (deactivate) {
      auto& comp = g.components[best_comp];
      comp.active = false;
      g.moats[comp.moat].deactivated = true;
      for (NodeId v : comp.nodes) g.marks[inst.index_of(v)].push_back(comp.moat);
    } else {
      g.forest.push_back(best_edge);
      const Edge& edge = inst.edge(best_edge);
      auto a = owner[inst.index_of(edge.u)];
      auto b = owner[inst.index_of(edge.v)];
      GwComponent merged;
      std::merge(g.components[a].nodes.begin(), g.components[a].nodes.end(), g.components[b].nodes.begin(),
                 g.components[b].nodes.end(), std::back_inserter(merged.nodes));
      merged.weight = g.components[a].weight + g.components[b].weight;
      merged.active = !contains(merged.nodes, inst.root());
      g.moats.push_back(Moat{merged.nodes, Rational(0), false});
      merged.moat = g.moats.size() - 1;
      if (a < b) std::swap(a, b);
      g.components.erase(g.components.begin() + static_cast<std::ptrdiff_t>(a));
      g.components.erase(g.components.begin() + static_cast<std::ptrdiff_t>(b));
      g.components.push_back(std::move(merged));
    }
    ++g.iterations;
#ifndef NDEBUG
    check_invariants(inst, g);
#endif
  }
  return g;
}

Solution gw_prune(const PcstInstance& inst, const GwState& g) {
  const std::size_t n = inst.node_count();
  std::vector<std::vector<std::pair<EdgeId, std::size_t>>> adj(n);
  for (EdgeId e : g.forest) {
    const auto a = inst.index_of(inst.edge(e).u);
    const auto b = inst.index_of(inst.edge(e).v);
    adj[a].emplace_back(e, b);
    adj[b].emplace_back(e, a);
  }

  // Nodes reachable from the root through the forest.
  std::vector<bool> in_tree(n, false);
  std::vector<std::size_t> stack{inst.index_of(inst.root())};
  in_tree[stack.back()] = true;
  while (!stack.empty()) {
    const auto x = stack.back();
    stack.pop_back();
    for (const auto& [e, y] : adj[x]) {
      if (!in_tree[y]) {
        in_tree[y] = true;
        stack.push_back(y);
      }
    }
  }

  std::vector<std::vector<bool>> member;
  std::vector<std::size_t> deactivated;
  for (std::size_t m = 0; m < g.moats.size(); ++m) {
    if (!g.moats[m].deactivated) continue;
    deactivated.push_back(m);
    std::vector<bool> bits(n, false);
    for (NodeId v : g.moats[m].nodes) bits[inst.index_of(v)] = true;
    member.push_back(std::move(bits));
  }

  bool changed = true;
  while (changed) {
    changed = false;
    for (std::size_t k = 0; k < deactivated.size(); ++k) {
      const auto& bits = member[k];
      std::size_t crossing = 0;
      bool touches = false;
      for (std::size_t x = 0; x < n; ++x) {
        if (!in_tree[x] || !bits[x]) continue;
        touches = true;
        for (const auto& [e, y] : adj[x]) {
          if (in_tree[y] && !bits[y]) ++crossing;
        }
      }
      if (touches && crossing == 1) {
        for (std::size_t x = 0; x < n; ++x) {
          if (bits[x]) in_tree[x] = false;
        }
        changed = true;
      }
    }
  }

  std::vector<NodeId> steiner;
  for (std::size_t x = 0; x < n; ++x) {
    if (in_tree[x]) steiner.push_back(inst.nodes()[x]);
  }
  std::vector<EdgeId> branch;
  for (EdgeId e : g.forest) {
    if (in_tree[inst.index_of(inst.edge(e).u)] && in_tree[inst.index_of(inst.edge(e).v)]) branch.push_back(e);
  }
  return make_solution(inst, std::move(branch), std::move(steiner));
}

std::pair<Solution, DualCertificate> gw_solve(const PcstInstance& inst) {
  GwState g = gw_grow(inst);
  Solution sol = gw_prune(inst, g);
  DualCertificate cert{g.moats, sol};
  return {std::move(sol), std::move(cert)};
}

}  // namespace pcst::gw
