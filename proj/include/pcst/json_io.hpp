#pragma once

#include <cstddef>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "json.hpp"
#include "pcst/instance.hpp"
#include "pcst/protocol.hpp"
#include "pcst/simulation.hpp"
#include "pcst/verify.hpp"

namespace pcst::io {

using Json = nlohmann::ordered_json;

class FormatError : public std::runtime_error {
 public:
  FormatError(std::size_t line, const std::string& detail)
      : std::runtime_error("line " + std::to_string(line) + ": " + detail), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// Rationals travel as strings ("7", "-3/2"); infinity as "inf".
Json message_to_json(const protocol::Message& m);
protocol::Message message_from_json(const Json& j);

/// {kind, step, node | link, payload} with fixed key order.
Json record_to_json(const sim::TraceRecord& rec);
sim::TraceRecord record_from_json(const Json& j);

/// JSON-lines, one record per line.
void write_trace(std::ostream& os, const sim::Trace& trace);
/// Throws FormatError naming the 1-based line of the first bad record.
sim::Trace read_trace(std::istream& is);

/// {objective, branch_edges: [[u, v]...], steiner_nodes, penalty_nodes}.
Json solution_to_json(const PcstInstance& inst, const Solution& sol);
/// Rebuilds and validates against `inst`; a stated objective must match.
/// Throws FormatError (line 0) on shape problems, InvalidSolution on bad trees.
Solution solution_from_json(const PcstInstance& inst, const Json& j);

Json report_to_json(const verify::CheckReport& r);

}  // namespace pcst::io
