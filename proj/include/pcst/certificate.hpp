#pragma once

#include <vector>

#include "pcst/instance.hpp"

namespace pcst {

// One dual variable y_S. `nodes` is ascending. Snapshots are recorded when a
// component first appears (singleton or merge result) and keep growing while
// that exact node set stays a live component.
struct Moat {
  std::vector<NodeId> nodes;
  Rational y;
  bool deactivated = false;  // the component chose deactivation at some point

  friend bool operator==(const Moat&, const Moat&) = default;
};

struct DualCertificate {
  std::vector<Moat> moats;
  Solution solution;

  Rational dual_total() const {
    Rational sum = 0;
    for (const Moat& m : moats) sum += m.y;
    return sum;
  }
};

}  // namespace pcst
