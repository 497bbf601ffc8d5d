#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "pcst/rational.hpp"

namespace pcst {

using NodeId = std::uint32_t;
// Index into PcstInstance::edges(). Edges are stored sorted by (min id, max id),
// so ascending EdgeId is the lexicographic tie-break order.
using EdgeId = std::size_t;

struct Edge {
  NodeId u;  // u < v
  NodeId v;
  Rational weight;

  NodeId other(NodeId x) const { return x == u ? v : u; }
  friend bool operator==(const Edge&, const Edge&) = default;
};

struct Incidence {
  EdgeId edge;
  NodeId neighbor;
  friend bool operator==(const Incidence&, const Incidence&) = default;
};

enum class InstanceErrorKind {
  Malformed,
  UnknownNode,
  DuplicateNode,
  DuplicateEdge,
  SelfLoop,
  NegativeWeight,
  NegativePrize,
  MissingRoot,
  Disconnected,
};

std::string_view to_string(InstanceErrorKind kind);

// Raised by parse_instance (line = 1-based source line, or the line count for
// whole-input conditions) and by PcstInstance::create (line = 0).
class InstanceError : public std::runtime_error {
 public:
  InstanceError(InstanceErrorKind kind, std::size_t line, const std::string& detail);
  InstanceErrorKind kind() const { return kind_; }
  std::size_t line() const { return line_; }

 private:
  InstanceErrorKind kind_;
  std::size_t line_;
};

struct EdgeSpec {
  NodeId a;
  NodeId b;
  Rational weight;
};

// Rooted, connected, simple undirected graph with nonnegative rational edge
// weights and node prizes. Immutable once built.
class PcstInstance {
 public:
  /// Validates and builds. Prizes absent from `prizes` default to 0.
  static PcstInstance create(std::vector<NodeId> nodes, NodeId root,
                             const std::map<NodeId, Rational>& prizes,
                             const std::vector<EdgeSpec>& edges);

  const std::vector<NodeId>& nodes() const { return nodes_; }
  NodeId root() const { return root_; }
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t edge_count() const { return edges_.size(); }

  bool contains(NodeId v) const;
  /// Dense position of v in nodes(); throws std::out_of_range for unknown ids.
  std::size_t index_of(NodeId v) const;

  const Rational& prize(NodeId v) const { return prizes_[index_of(v)]; }
  const std::vector<Edge>& edges() const { return edges_; }
  const Edge& edge(EdgeId e) const { return edges_.at(e); }
  std::optional<EdgeId> find_edge(NodeId a, NodeId b) const;
  /// Incident edges of v in ascending EdgeId order.
  const std::vector<Incidence>& incident(NodeId v) const { return adjacency_[index_of(v)]; }

  friend bool operator==(const PcstInstance& a, const PcstInstance& b) {
    return a.nodes_ == b.nodes_ && a.root_ == b.root_ && a.prizes_ == b.prizes_ &&
           a.edges_ == b.edges_;
  }

 private:
  PcstInstance() = default;

  std::vector<NodeId> nodes_;  // ascending
  NodeId root_ = 0;
  std::vector<Rational> prizes_;  // parallel to nodes_
  std::vector<Edge> edges_;       // ascending (u, v)
  std::vector<std::vector<Incidence>> adjacency_;
};

/// Line format: `nodes <id>...`, `root <id>`, `prize <id> <q>`, `edge <id> <id> <q>`;
/// '#' starts a comment. Throws InstanceError naming the offending line.
PcstInstance parse_instance(std::string_view text);

/// Canonical rendering: sorted nodes, nonzero prizes, sorted edges, lowest terms.
std::string render_instance(const PcstInstance& inst);

/// Random spanning tree plus (m - n + 1) extra edges, integer weights in
/// [0, weight_max], prizes in [0, prize_max], node ids 1..n, root 1.
/// Pure function of its arguments. Throws std::invalid_argument if (n, m) is infeasible.
PcstInstance generate_random_instance(std::size_t n, std::size_t m, std::uint64_t seed,
                                      int weight_max, int prize_max);

/// Renames every node through `mapping` (must be a bijection onto positive ids).
PcstInstance relabel_instance(const PcstInstance& inst, const std::map<NodeId, NodeId>& mapping);

// A rooted tree plus the nodes whose prizes are paid instead.
struct Solution {
  std::vector<EdgeId> branch_edges;    // ascending
  std::vector<NodeId> steiner_nodes;   // ascending, contains the root
  std::vector<NodeId> penalty_nodes;   // ascending, complement of steiner_nodes
  Rational objective;

  friend bool operator==(const Solution&, const Solution&) = default;
};

class InvalidSolution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Builds a Solution from a branch edge set and the node set it spans, filling
/// in the penalty set and the objective. Throws InvalidSolution if the edges do
/// not form a tree on exactly `steiner_nodes` or the root is missing.
Solution make_solution(const PcstInstance& inst, std::vector<EdgeId> branch_edges,
                       std::vector<NodeId> steiner_nodes);

/// Sum of branch weights plus penalty prizes, after full structural validation.
Rational objective(const PcstInstance& inst, const Solution& sol);

/// Throws InvalidSolution describing the first structural problem found.
void validate_solution(const PcstInstance& inst, const Solution& sol);

}  // namespace pcst
