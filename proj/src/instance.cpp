#include "pcst/instance.hpp"

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <functional>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <tuple>

namespace pcst {
namespace {

std::string error_message(InstanceErrorKind kind, std::size_t line, const std::string& detail) {
  std::string msg(to_string(kind));
  msg += "(line " + std::to_string(line) + ")";
  if (!detail.empty()) msg += ": " + detail;
  return msg;
}

// Small union-find over dense indices.
class DisjointSets {
 public:
  explicit DisjointSets(std::size_t n) : parent_(n) { std::iota(parent_.begin(), parent_.end(), 0); }
  std::size_t find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  bool unite(std::size_t a, std::size_t b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[std::max(a, b)] = std::min(a, b);
    return true;
  }

 private:
  std::vector<std::size_t> parent_;
};

std::vector<std::string_view> split_words(std::string_view line) {
  std::vector<std::string_view> words;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    std::size_t end = pos;
    while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
    if (end > pos) words.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return words;
}

std::optional<NodeId> parse_node_id(std::string_view word) {
  if (word.empty() || word.size() > 9) return std::nullopt;
  NodeId value = 0;
  for (char c : word) {
    if (c < '0' || c > '9') return std::nullopt;
    value = value * 10 + static_cast<NodeId>(c - '0');
  }
  if (value == 0) return std::nullopt;
  return value;
}

}  // namespace

std::string_view to_string(InstanceErrorKind kind) {
  switch (kind) {
    case InstanceErrorKind::Malformed: return "Malformed";
    case InstanceErrorKind::UnknownNode: return "UnknownNode";
    case InstanceErrorKind::DuplicateNode: return "DuplicateNode";
    case InstanceErrorKind::DuplicateEdge: return "DuplicateEdge";
    case InstanceErrorKind::SelfLoop: return "SelfLoop";
    case InstanceErrorKind::NegativeWeight: return "NegativeWeight";
    case InstanceErrorKind::NegativePrize: return "NegativePrize";
    case InstanceErrorKind::MissingRoot: return "MissingRoot";
    case InstanceErrorKind::Disconnected: return "Disconnected";
  }
  return "Unknown";
}

InstanceError::InstanceError(InstanceErrorKind kind, std::size_t line, const std::string& detail)
    : std::runtime_error(error_message(kind, line, detail)), kind_(kind), line_(line) {}

PcstInstance PcstInstance::create(std::vector<NodeId> nodes, NodeId root,
                                  const std::map<NodeId, Rational>& prizes,
                                  const std::vector<EdgeSpec>& edges) {
  PcstInstance inst;
  std::sort(nodes.begin(), nodes.end());
  if (nodes.empty()) throw InstanceError(InstanceErrorKind::Malformed, 0, "no nodes");
  if (nodes.front() == 0) throw InstanceError(InstanceErrorKind::Malformed, 0, "node id 0");
  if (std::adjacent_find(nodes.begin(), nodes.end()) != nodes.end()) {
    throw InstanceError(InstanceErrorKind::DuplicateNode, 0, "");
  }
  inst.nodes_ = std::move(nodes);
  if (!inst.contains(root)) throw InstanceError(InstanceErrorKind::MissingRoot, 0, "");
  inst.root_ = root;

  inst.prizes_.assign(inst.nodes_.size(), Rational(0));
  for (const auto& [v, p] : prizes) {
    if (!inst.contains(v)) {
      throw InstanceError(InstanceErrorKind::UnknownNode, 0, "prize for node " + std::to_string(v));
    }
    if (p < 0) throw InstanceError(InstanceErrorKind::NegativePrize, 0, std::to_string(v));
    inst.prizes_[inst.index_of(v)] = p;
  }

  for (const auto& spec : edges) {
    if (!inst.contains(spec.a) || !inst.contains(spec.b)) {
      throw InstanceError(InstanceErrorKind::UnknownNode, 0, "edge endpoint");
    }
    if (spec.a == spec.b) throw InstanceError(InstanceErrorKind::SelfLoop, 0, "");
    if (spec.weight < 0) throw InstanceError(InstanceErrorKind::NegativeWeight, 0, "");
    inst.edges_.push_back(Edge{std::min(spec.a, spec.b), std::max(spec.a, spec.b), spec.weight});
  }
  std::sort(inst.edges_.begin(), inst.edges_.end(),
            [](const Edge& x, const Edge& y) { return std::tie(x.u, x.v) < std::tie(y.u, y.v); });
  for (std::size_t i = 1; i < inst.edges_.size(); ++i) {
    if (inst.edges_[i - 1].u == inst.edges_[i].u && inst.edges_[i - 1].v == inst.edges_[i].v) {
      throw InstanceError(InstanceErrorKind::DuplicateEdge, 0,
                          std::to_string(inst.edges_[i].u) + "-" + std::to_string(inst.edges_[i].v));
    }
  }

  inst.adjacency_.assign(inst.nodes_.size(), {});
  DisjointSets sets(inst.nodes_.size());
  std::size_t components = inst.nodes_.size();
  for (EdgeId e = 0; e < inst.edges_.size(); ++e) {
    const Edge& edge = inst.edges_[e];
    const auto iu = inst.index_of(edge.u);
    const auto iv = inst.index_of(edge.v);
    inst.adjacency_[iu].push_back(Incidence{e, edge.v});
    inst.adjacency_[iv].push_back(Incidence{e, edge.u});
    if (sets.unite(iu, iv)) --components;
  }
  if (components != 1) throw InstanceError(InstanceErrorKind::Disconnected, 0, "");
  return inst;
}

bool PcstInstance::contains(NodeId v) const {
  return std::binary_search(nodes_.begin(), nodes_.end(), v);
}

std::size_t PcstInstance::index_of(NodeId v) const {
  auto it = std::lower_bound(nodes_.begin(), nodes_.end(), v);
  if (it == nodes_.end() || *it != v) throw std::out_of_range("unknown node " + std::to_string(v));
  return static_cast<std::size_t>(it - nodes_.begin());
}

std::optional<EdgeId> PcstInstance::find_edge(NodeId a, NodeId b) const {
  const NodeId lo = std::min(a, b);
  const NodeId hi = std::max(a, b);
  auto it = std::lower_bound(edges_.begin(), edges_.end(), std::pair{lo, hi},
                             [](const Edge& e, const std::pair<NodeId, NodeId>& key) {
                               return std::tie(e.u, e.v) < std::tie(key.first, key.second);
                             });
  if (it == edges_.end() || it->u != lo || it->v != hi) return std::nullopt;
  return static_cast<EdgeId>(it - edges_.begin());
}

PcstInstance parse_instance(std::string_view text) {
  std::vector<NodeId> nodes;
  std::set<NodeId> node_set;
  std::optional<NodeId> root;
  std::map<NodeId, Rational> prizes;
  std::vector<EdgeSpec> edges;
  std::set<std::pair<NodeId, NodeId>> seen_edges;
  bool saw_nodes = false;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  auto fail = [&](InstanceErrorKind kind, const std::string& detail) -> InstanceError {
    return InstanceError(kind, line_no, detail);
  };
  auto require_node = [&](std::string_view word) {
    auto id = parse_node_id(word);
    if (!id) throw fail(InstanceErrorKind::Malformed, "bad node id '" + std::string(word) + "'");
    if (!node_set.count(*id)) throw fail(InstanceErrorKind::UnknownNode, std::string(word));
    return *id;
  };
  auto require_rational = [&](std::string_view word) {
    auto q = parse_rational(word);
    if (!q) throw fail(InstanceErrorKind::Malformed, "bad rational '" + std::string(word) + "'");
    return *q;
  };

  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    const auto words = split_words(line);
    if (words.empty()) {
      if (end == text.size()) break;
      continue;
    }

    const std::string_view head = words[0];
    if (head == "nodes") {
      if (saw_nodes) throw fail(InstanceErrorKind::Malformed, "second nodes line");
      saw_nodes = true;
      if (words.size() < 2) throw fail(InstanceErrorKind::Malformed, "empty nodes line");
      for (std::size_t i = 1; i < words.size(); ++i) {
        auto id = parse_node_id(words[i]);
        if (!id) throw fail(InstanceErrorKind::Malformed, "bad node id '" + std::string(words[i]) + "'");
        if (!node_set.insert(*id).second) throw fail(InstanceErrorKind::DuplicateNode, std::string(words[i]));
        nodes.push_back(*id);
      }
    } else if (head == "root") {
      if (words.size() != 2) throw fail(InstanceErrorKind::Malformed, "root takes one id");
      if (root) throw fail(InstanceErrorKind::Malformed, "second root line");
      root = require_node(words[1]);
    } else if (head == "prize") {
      if (words.size() != 3) throw fail(InstanceErrorKind::Malformed, "prize takes id and value");
      const NodeId v = require_node(words[1]);
      Rational p = require_rational(words[2]);
      if (p < 0) throw fail(InstanceErrorKind::NegativePrize, std::string(words[2]));
      if (prizes.count(v)) throw fail(InstanceErrorKind::Malformed, "second prize for node");
      prizes[v] = std::move(p);
    } else if (head == "edge") {
      if (words.size() != 4) throw fail(InstanceErrorKind::Malformed, "edge takes two ids and a weight");
      const NodeId a = require_node(words[1]);
      const NodeId b = require_node(words[2]);
      if (a == b) throw fail(InstanceErrorKind::SelfLoop, std::string(words[1]));
      Rational w = require_rational(words[3]);
      if (w < 0) throw fail(InstanceErrorKind::NegativeWeight, std::string(words[3]));
      if (!seen_edges.insert({std::min(a, b), std::max(a, b)}).second) {
        throw fail(InstanceErrorKind::DuplicateEdge, std::string(words[1]) + " " + std::string(words[2]));
      }
      edges.push_back(EdgeSpec{a, b, std::move(w)});
    } else {
      throw fail(InstanceErrorKind::Malformed, "unknown directive '" + std::string(head) + "'");
    }
    if (end == text.size()) break;
  }

  if (!saw_nodes) throw InstanceError(InstanceErrorKind::Malformed, line_no, "missing nodes line");
  if (!root) throw InstanceError(InstanceErrorKind::MissingRoot, line_no, "");
  try {
    return PcstInstance::create(std::move(nodes), *root, prizes, edges);
  } catch (const InstanceError& e) {
    // Only whole-graph conditions can reach here; report them at end of input.
    throw InstanceError(e.kind(), line_no, "");
  }
}

std::string render_instance(const PcstInstance& inst) {
  std::ostringstream out;
  out << "nodes";
  for (NodeId v : inst.nodes()) out << ' ' << v;
  out << "\nroot " << inst.root() << '\n';
  for (NodeId v : inst.nodes()) {
    if (inst.prize(v) != 0) out << "prize " << v << ' ' << format_rational(inst.prize(v)) << '\n';
  }
  for (const Edge& e : inst.edges()) {
    out << "edge " << e.u << ' ' << e.v << ' ' << format_rational(e.weight) << '\n';
  }
  return out.str();
}

PcstInstance generate_random_instance(std::size_t n, std::size_t m, std::uint64_t seed,
                                      int weight_max, int prize_max) {
  if (n < 2) throw std::invalid_argument("generator needs n >= 2");
  if (m < n - 1 || m > n * (n - 1) / 2) {
    throw std::invalid_argument("infeasible edge count " + std::to_string(m) + " for n=" +
                                std::to_string(n));
  }
  if (weight_max < 0 || prize_max < 0) throw std::invalid_argument("negative generator bound");

  std::mt19937_64 rng(seed);
  auto uniform = [&rng](std::uint64_t lo, std::uint64_t hi) {
    return std::uniform_int_distribution<std::uint64_t>(lo, hi)(rng);
  };

  std::vector<NodeId> ids(n);
  std::iota(ids.begin(), ids.end(), NodeId{1});
  std::vector<NodeId> order = ids;
  for (std::size_t i = n - 1; i > 0; --i) std::swap(order[i], order[uniform(0, i)]);

  std::set<std::pair<NodeId, NodeId>> chosen;
  for (std::size_t i = 1; i < n; ++i) {
    const NodeId a = order[i];
    const NodeId b = order[uniform(0, i - 1)];
    chosen.insert({std::min(a, b), std::max(a, b)});
  }
  std::vector<std::pair<NodeId, NodeId>> spare;
  for (NodeId a = 1; a <= n; ++a) {
    for (NodeId b = a + 1; b <= n; ++b) {
      if (!chosen.count({a, b})) spare.emplace_back(a, b);
    }
  }
  for (std::size_t k = 0; chosen.size() < m; ++k) {
    const std::size_t pick = k + uniform(0, spare.size() - 1 - k);
    std::swap(spare[k], spare[pick]);
    chosen.insert(spare[k]);
  }

  std::vector<EdgeSpec> edges;
  for (const auto& [a, b] : chosen) {
    edges.push_back(EdgeSpec{a, b, Rational(static_cast<long long>(uniform(0, weight_max)))});
  }
  std::map<NodeId, Rational> prizes;
  for (NodeId v : ids) prizes[v] = Rational(static_cast<long long>(uniform(0, prize_max)));
  return PcstInstance::create(ids, ids.front(), prizes, edges);
}

PcstInstance relabel_instance(const PcstInstance& inst, const std::map<NodeId, NodeId>& mapping) {
  auto map_id = [&mapping](NodeId v) {
    auto it = mapping.find(v);
    if (it == mapping.end()) throw std::invalid_argument("relabel mapping misses node " + std::to_string(v));
    return it->second;
  };
  std::vector<NodeId> nodes;
  std::map<NodeId, Rational> prizes;
  for (NodeId v : inst.nodes()) {
    nodes.push_back(map_id(v));
    prizes[map_id(v)] = inst.prize(v);
  }
  std::vector<EdgeSpec> edges;
  for (const Edge& e : inst.edges()) edges.push_back(EdgeSpec{map_id(e.u), map_id(e.v), e.weight});
  return PcstInstance::create(std::move(nodes), map_id(inst.root()), prizes, edges);
}

namespace {

// Checks that `edges` form a spanning tree of exactly `vertices`.
void check_tree(const PcstInstance& inst, const std::vector<EdgeId>& edges,
                const std::vector<NodeId>& vertices) {
  if (edges.size() + 1 != vertices.size()) {
    throw InvalidSolution("branch set has " + std::to_string(edges.size()) + " edges for " +
                          std::to_string(vertices.size()) + " steiner nodes");
  }
  std::vector<std::size_t> slot(inst.node_count(), SIZE_MAX);
  for (std::size_t i = 0; i < vertices.size(); ++i) slot[inst.index_of(vertices[i])] = i;
  DisjointSets sets(vertices.size());
  for (EdgeId e : edges) {
    if (e >= inst.edge_count()) throw InvalidSolution("edge id out of range");
    const Edge& edge = inst.edge(e);
    const auto a = slot[inst.index_of(edge.u)];
    const auto b = slot[inst.index_of(edge.v)];
    if (a == SIZE_MAX || b == SIZE_MAX) {
      throw InvalidSolution("branch edge " + std::to_string(edge.u) + "-" + std::to_string(edge.v) +
                            " leaves the steiner set");
    }
    if (!sets.unite(a, b)) throw InvalidSolution("branch set contains a cycle");
  }
}

bool strictly_ascending(const auto& xs) {
  return std::adjacent_find(xs.begin(), xs.end(), std::greater_equal<>()) == xs.end();
}

}  // namespace

Solution make_solution(const PcstInstance& inst, std::vector<EdgeId> branch_edges,
                       std::vector<NodeId> steiner_nodes) {
  std::sort(branch_edges.begin(), branch_edges.end());
  std::sort(steiner_nodes.begin(), steiner_nodes.end());
  Solution sol;
  sol.branch_edges = std::move(branch_edges);
  sol.steiner_nodes = std::move(steiner_nodes);
  for (NodeId v : inst.nodes()) {
    if (!std::binary_search(sol.steiner_nodes.begin(), sol.steiner_nodes.end(), v)) {
      sol.penalty_nodes.push_back(v);
    }
  }
  sol.objective = 0;
  sol.objective = objective(inst, sol);
  return sol;
}

void validate_solution(const PcstInstance& inst, const Solution& sol) {
  if (!strictly_ascending(sol.branch_edges) || !strictly_ascending(sol.steiner_nodes) ||
      !strictly_ascending(sol.penalty_nodes)) {
    throw InvalidSolution("solution sets must be sorted and duplicate-free");
  }
  for (NodeId v : sol.steiner_nodes) {
    if (!inst.contains(v)) throw InvalidSolution("unknown steiner node " + std::to_string(v));
  }
  for (NodeId v : sol.penalty_nodes) {
    if (!inst.contains(v)) throw InvalidSolution("unknown penalty node " + std::to_string(v));
  }
  if (sol.steiner_nodes.size() + sol.penalty_nodes.size() != inst.node_count()) {
    throw InvalidSolution("steiner and penalty sets do not partition the nodes");
  }
  std::vector<NodeId> all;
  std::merge(sol.steiner_nodes.begin(), sol.steiner_nodes.end(), sol.penalty_nodes.begin(),
             sol.penalty_nodes.end(), std::back_inserter(all));
  if (all != inst.nodes()) throw InvalidSolution("steiner and penalty sets overlap");
  if (!std::binary_search(sol.steiner_nodes.begin(), sol.steiner_nodes.end(), inst.root())) {
    throw InvalidSolution("root is not in the tree");
  }
  check_tree(inst, sol.branch_edges, sol.steiner_nodes);
}

Rational objective(const PcstInstance& inst, const Solution& sol) {
  validate_solution(inst, sol);
  Rational total = 0;
  for (EdgeId e : sol.branch_edges) total += inst.edge(e).weight;
  for (NodeId v : sol.penalty_nodes) total += inst.prize(v);
  return total;
}

}  // namespace pcst
