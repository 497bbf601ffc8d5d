#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "pcst/certificate.hpp"
#include "pcst/exact.hpp"
#include "pcst/instance.hpp"
#include "pcst/simulation.hpp"

namespace pcst::verify {

enum class Status { Pass, Violation, Partial, Skipped };
std::string_view to_string(Status s);

struct CheckReport {
  std::string check;
  Status status = Status::Pass;
  std::vector<std::string> witnesses{};                    // one line per offending item
  std::vector<std::pair<std::string, std::string>> values{};  // quantities behind the verdict

  bool ok() const { return status != Status::Violation; }
};

// The replayed duals disagree with the traced node variables.
class ReplayDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The trace names nodes, edges or fields the instance does not have.
class TraceMismatch : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ReplayStats {
  std::size_t checkpoints = 0;      // round decisions at which the identities were checked
  std::size_t node_comparisons = 0;
  std::size_t component_comparisons = 0;
};

/// Final Steiner/penalty split and branch set as recorded by the trace's
/// StateChange records.
Solution solution_from_trace(const sim::Trace& trace, const PcstInstance& inst);

/// Replays the trace, crediting every epsilon application to the component
/// snapshot it grew. At each leader decision, every node's traced d_v must equal
/// the dual mass of the moats holding it and every live component's traced W the
/// dual mass inside it; otherwise ReplayDivergence.
DualCertificate reconstruct_duals(const sim::Trace& trace, const PcstInstance& inst,
                                  ReplayStats* stats = nullptr);

/// Every edge: dual load <= weight. Branch edges: equality.
CheckReport check_edge_packing(const DualCertificate& cert, const PcstInstance& inst);

/// Every U within V - r (exhaustive up to 12 nodes, else moat node sets only,
/// reported Partial): inner dual mass <= prize mass. Maximal deactivated moats
/// inside the penalty set: equality.
CheckReport check_penalty_packing(const DualCertificate& cert, const PcstInstance& inst);

/// y >= 0, laminar moats, no positive moat containing the root.
CheckReport check_dual_signs(const DualCertificate& cert, const PcstInstance& inst);

/// objective <= (2 - 1/(n-1)) * sum y; with `exact`, also sum y <= OPT and
/// objective <= (2 - 1/(n-1)) * OPT. Skipped for n = 1.
CheckReport check_ratio(const DualCertificate& cert, const PcstInstance& inst,
                        const std::optional<exact::ExactResult>& exact = std::nullopt);

/// One report per message bound: per-round, rounds, proceed, back, prune,
/// backward-prune, total.
std::vector<CheckReport> check_bounds(const sim::Trace& trace, const PcstInstance& inst);

inline constexpr std::size_t kExhaustivePenaltyLimit = 12;

}  // namespace pcst::verify
