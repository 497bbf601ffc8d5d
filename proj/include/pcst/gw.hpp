#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "pcst/certificate.hpp"
#include "pcst/instance.hpp"

namespace pcst::gw {

struct GwComponent {
  std::vector<NodeId> nodes;  // ascending
  bool active = false;
  Rational weight;            // W(C)
  std::size_t moat = 0;       // index of this node set's snapshot in GwState::moats

  NodeId leader() const { return nodes.back(); }
};

// Terminal (or intermediate) state of centralized moat growing.
struct GwState {
  std::vector<EdgeId> forest;              // in insertion order
  std::vector<GwComponent> components;     // live partition of V
  std::vector<Rational> deficit;           // parallel to inst.nodes()
  std::vector<Moat> moats;                 // every snapshot ever created
  std::vector<std::vector<std::size_t>> marks;  // per node: deactivated snapshot ids, oldest first
  std::size_t iterations = 0;
};

/// Throws std::logic_error if a bookkeeping identity is broken.
void check_invariants(const PcstInstance& inst, const GwState& g);

/// Moat growing until no component is active. Ties: deactivation beats merging,
/// lowest edge id among equal merge values, smallest leader (max member id)
/// among equal deactivation values.
GwState gw_grow(const PcstInstance& inst);

/// Keeps the root's tree in the forest, then repeatedly drops the part of the
/// tree inside any deactivated snapshot that the tree crosses exactly once.
Solution gw_prune(const PcstInstance& inst, const GwState& g);

std::pair<Solution, DualCertificate> gw_solve(const PcstInstance& inst);

}  // namespace pcst::gw
