// Command-line front end: generate, solve, verify, render.
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "pcst/exact.hpp"
#include "pcst/gw.hpp"
#include "pcst/instance.hpp"
#include "pcst/json_io.hpp"
#include "pcst/simulation.hpp"
#include "pcst/verify.hpp"

namespace {

using namespace pcst;
using io::Json;

constexpr int kOk = 0;
constexpr int kUsage = 1;
constexpr int kViolation = 2;
constexpr int kDivergence = 3;

// Usage and I/O failures, reported with exit code 1.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct GenParams {
  std::size_t n = 0, m = 0;
  std::uint64_t seed = 0;
  int wmax = 20, pmax = 20;
};

GenParams parse_gen(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    const auto eq = item.find('=');
    if (eq == std::string::npos) throw UsageError("--gen entry '" + item + "' is not key=value");
    kv[item.substr(0, eq)] = item.substr(eq + 1);
  }
  GenParams g;
  auto take = [&](const std::string& key, auto& out, bool required) {
    auto it = kv.find(key);
    if (it == kv.end()) {
      if (required) throw UsageError("--gen needs " + key + "=<value>");
      return;
    }
    try {
      std::size_t used = 0;
      const long long value = std::stoll(it->second, &used);
      if (used != it->second.size() || value < 0) throw std::invalid_argument("");
      out = static_cast<std::remove_reference_t<decltype(out)>>(value);
    } catch (const std::exception&) {
      throw UsageError("--gen value for " + key + " must be a non-negative integer");
    }
    kv.erase(it);
  };
  take("n", g.n, true);
  take("m", g.m, true);
  take("seed", g.seed, true);
  take("wmax", g.wmax, false);
  take("pmax", g.pmax, false);
  if (!kv.empty()) throw UsageError("unknown --gen key '" + kv.begin()->first + "'");
  return g;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out || !(out << text)) throw UsageError("cannot write " + path);
}

PcstInstance load_instance(const std::string& path) {
  try {
    return parse_instance(read_file(path));
  } catch (const InstanceError& err) {
    throw UsageError(path + ": " + err.what());
  }
}

PcstInstance input_instance(const std::string& path, const std::string& gen) {
  if (path.empty() == gen.empty()) throw UsageError("give exactly one of an instance path or --gen");
  if (!path.empty()) return load_instance(path);
  const auto g = parse_gen(gen);
  try {
    return generate_random_instance(g.n, g.m, g.seed, g.wmax, g.pmax);
  } catch (const std::invalid_argument& err) {
    throw UsageError(std::string("--gen: ") + err.what());
  }
}

std::string dot(const PcstInstance& inst, const Solution& sol) {
  std::ostringstream out;
  out << "graph pcst {\n  node [shape=circle];\n";
  for (NodeId v : inst.nodes()) {
    const bool steiner = std::binary_search(sol.steiner_nodes.begin(), sol.steiner_nodes.end(), v);
    std::string style = steiner ? "filled" : "dashed";
    out << "  " << v << " [label=\"" << v << "\\n" << format_rational(inst.prize(v)) << "\", style=" << style;
    if (v == inst.root()) out << ", shape=doublecircle";
    out << "];\n";
  }
  for (EdgeId e = 0; e < inst.edge_count(); ++e) {
    const Edge& edge = inst.edge(e);
    const bool branch = std::binary_search(sol.branch_edges.begin(), sol.branch_edges.end(), e);
    out << "  " << edge.u << " -- " << edge.v << " [label=\"" << format_rational(edge.weight) << "\"";
    if (branch) out << ", style=bold, penwidth=3";
    out << "];\n";
  }
  out << "}\n";
  return out.str();
}

struct Options {
  std::string instance;
  std::string gen;
  std::string alg = "dpcst";
  std::string schedule = "eager";
  std::string trace_path;
  std::string out;
  std::string solution_path;
  bool json = false;
  bool skip_exact = false;
  bool verbose = false;
};

int cmd_generate(const Options& o) {
  if (o.gen.empty()) throw UsageError("generate needs --gen");
  write_output(o.out, render_instance(input_instance("", o.gen)));
  return kOk;
}

int cmd_solve(const Options& o) {
  const PcstInstance inst = input_instance(o.instance, o.gen);
  if (!o.trace_path.empty() && o.alg != "dpcst") throw UsageError("--trace is only produced by --alg dpcst");
  Solution sol;
  if (o.alg == "exact") {
    try {
      sol = exact::exact_pcst(inst).best;
    } catch (const exact::InstanceTooLarge& err) {
      throw UsageError(err.what());
    }
  } else if (o.alg == "gw") {
    sol = gw::gw_solve(inst).first;
  } else {
    sim::Schedule schedule;
    try {
      schedule = sim::Schedule::parse(o.schedule);
    } catch (const std::invalid_argument& err) {
      throw UsageError(err.what());
    }
    sim::Simulation simulation(inst, schedule);
    sim::run_to_quiescence(simulation);
    sol = sim::extract_solution(simulation);
    if (!o.trace_path.empty()) {
      std::ostringstream trace;
      io::write_trace(trace, simulation.trace());
      write_output(o.trace_path, trace.str());
    }
    if (o.verbose) {
      const auto c = sim::count_messages(simulation.trace());
      std::cerr << "steps " << simulation.steps() << ", messages " << c.total << ", rounds " << c.rounds << '\n';
    }
  }
  write_output(o.out, io::solution_to_json(inst, sol).dump() + "\n");
  return kOk;
}

int cmd_verify(const Options& o) {
  const PcstInstance inst = load_instance(o.instance);
  sim::Trace trace;
  {
    std::istringstream in(read_file(o.trace_path));
    try {
      trace = io::read_trace(in);
    } catch (const io::FormatError& err) {
      throw UsageError(o.trace_path + ": " + err.what());
    }
  }

  std::vector<verify::CheckReport> reports;
  Json out = Json::array();
  try {
    verify::ReplayStats stats;
    const DualCertificate cert = verify::reconstruct_duals(trace, inst, &stats);
    std::optional<exact::ExactResult> ex;
    if (!o.skip_exact && inst.node_count() <= exact::kMaxExactNodes) ex = exact::exact_pcst(inst);
    verify::CheckReport identities{"identities"};
    identities.values = {{"checkpoints", std::to_string(stats.checkpoints)}};
    reports.push_back(std::move(identities));
    reports.push_back(verify::check_edge_packing(cert, inst));
    reports.push_back(verify::check_penalty_packing(cert, inst));
    reports.push_back(verify::check_dual_signs(cert, inst));
    reports.push_back(verify::check_ratio(cert, inst, ex));
    for (auto& r : verify::check_bounds(trace, inst)) reports.push_back(std::move(r));
  } catch (const verify::ReplayDivergence& err) {
    verify::CheckReport r{"identities", verify::Status::Violation, {err.what()}};
    if (o.json) {
      std::cout << Json::array({io::report_to_json(r)}).dump(2) << '\n';
    } else {
      std::cout << "identities: divergence: " << err.what() << '\n';
    }
    return kDivergence;
  } catch (const verify::TraceMismatch& err) {
    throw UsageError(std::string("trace does not match instance: ") + err.what());
  }

  bool ok = true;
  for (const auto& r : reports) {
    ok = ok && r.ok();
    if (o.json) {
      out.push_back(io::report_to_json(r));
      continue;
    }
    std::cout << r.check << ": " << verify::to_string(r.status);
    for (const auto& [k, v] : r.values) std::cout << ' ' << k << '=' << v;
    std::cout << '\n';
    for (const auto& w : r.witnesses) std::cout << "  " << w << '\n';
  }
  if (o.json) std::cout << out.dump(2) << '\n';
  return ok ? kOk : kViolation;
}

int cmd_render(const Options& o) {
  const PcstInstance inst = load_instance(o.instance);
  Solution sol;
  try {
    sol = io::solution_from_json(inst, Json::parse(read_file(o.solution_path)));
  } catch (const nlohmann::json::exception& err) {
    throw UsageError(o.solution_path + ": " + err.what());
  } catch (const io::FormatError& err) {
    throw UsageError(o.solution_path + ": " + err.what());
  } catch (const InvalidSolution& err) {
    throw UsageError(o.solution_path + " does not fit the instance: " + err.what());
  }
  write_output(o.out, dot(inst, sol));
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Prize-collecting Steiner tree: distributed primal-dual protocol, GW reference, exact oracle"};
  app.require_subcommand(1);
  Options o;

  auto* generate = app.add_subcommand("generate", "Print a random instance");
  generate->add_option("--gen", o.gen, "n=<n>,m=<m>,seed=<s>[,wmax=<w>][,pmax=<p>]")->required();
  generate->add_option("-o,--out", o.out, "Output path (default stdout)");

  auto* solve = app.add_subcommand("solve", "Solve an instance and print the solution as JSON");
  solve->add_option("instance", o.instance, "Instance file");
  solve->add_option("--gen", o.gen, "Generate the instance instead of reading it");
  solve->add_option("--alg", o.alg, "dpcst, gw or exact")->check(CLI::IsMember({"dpcst", "gw", "exact"}));
  solve->add_option("--schedule", o.schedule, "eager or seeded:<n> (dpcst only)");
  solve->add_option("--trace", o.trace_path, "Write the JSON-lines trace here (dpcst only)");
  solve->add_option("-o,--out", o.out, "Output path (default stdout)");
  solve->add_flag("--json", o.json, "Accepted for symmetry; solutions are always JSON");
  solve->add_flag("-v,--verbose", o.verbose, "Message statistics on stderr");

  auto* verify = app.add_subcommand("verify", "Replay a trace and check duals and bounds");
  verify->add_option("instance", o.instance, "Instance file")->required();
  verify->add_option("trace", o.trace_path, "JSON-lines trace")->required();
  verify->add_flag("--json", o.json, "Print reports as JSON");
  verify->add_flag("--no-exact", o.skip_exact, "Skip the exact-optimum comparisons");

  auto* render = app.add_subcommand("render", "DOT drawing of a solution");
  render->add_option("instance", o.instance, "Instance file")->required();
  render->add_option("solution", o.solution_path, "Solution JSON")->required();
  render->add_option("-o,--out", o.out, "Output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (generate->parsed()) return cmd_generate(o);
    if (solve->parsed()) return cmd_solve(o);
    if (verify->parsed()) return cmd_verify(o);
    return cmd_render(o);
  } catch (const UsageError& err) {
    std::cerr << "error: " << err.what() << '\n';
    return kUsage;
  } catch (const sim::SimulationError& err) {
    std::cerr << "internal: " << err.what() << '\n';
    return kDivergence;
  } catch (const protocol::ProtocolViolation& err) {
    std::cerr << "internal: " << err.what() << '\n';
    return kDivergence;
  }
}
