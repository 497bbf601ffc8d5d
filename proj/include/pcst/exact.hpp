#pragma once

#include <cstddef>
#include <stdexcept>

#include "pcst/instance.hpp"

namespace pcst::exact {

struct ExactResult {
  Solution best;
  Rational opt_value;
  std::size_t enumerated_count = 0;  // root-containing connected vertex subsets examined
};

class InstanceTooLarge : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr std::size_t kMaxExactNodes = 16;

/// Brute force over every vertex set containing the root whose induced
/// subgraph is connected; each is priced as its MST plus the prizes left out.
/// Ties go to the lexicographically smallest vertex set. The MST is Kruskal
/// over (weight, edge id), so the edge set is the smallest among equal-weight trees.
ExactResult exact_pcst(const PcstInstance& inst);

}  // namespace pcst::exact
