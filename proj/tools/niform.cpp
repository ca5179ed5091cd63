// niform — run formation scenarios, certify plant models, inspect topologies.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "niform/error.hpp"
#include "niform/graph/topology.hpp"
#include "niform/lti/certify.hpp"
#include "niform/lti/model_library.hpp"
#include "niform/sim/scenario.hpp"
#include "niform/sim/world.hpp"

namespace fs = std::filesystem;
using namespace niform;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 1;    // bad input: schema, file, arguments
constexpr int kUnsafe = 2;   // collision or divergence
constexpr int kRejected = 3; // a certificate failed

fs::path default_output_dir() {
  if (const char* env = std::getenv("NIFORM_OUTPUT_DIR"); env && *env) return env;
  return "niform-out";
}

struct RunArgs {
  std::string scenario;
  std::string out;
  std::optional<double> dt;
  std::optional<std::uint64_t> seed;
  bool baseline = false;
  std::optional<std::string> noise;
};

void add_run_flags(CLI::App* cmd, RunArgs& a, bool with_baseline) {
  cmd->add_option("scenario", a.scenario, "Scenario file (JSON)")->required();
  cmd->add_option("-o,--output", a.out, "Output directory (default $NIFORM_OUTPUT_DIR or ./niform-out)");
  cmd->add_option("--dt", a.dt, "Override the sample time, s");
  cmd->add_option("--seed", a.seed, "Override the noise seed");
  cmd->add_option("--noise", a.noise, "Noise profile: none | lab");
  if (with_baseline) cmd->add_flag("--baseline", a.baseline, "Original architecture (no prediction)");
}

sim::Scenario load_with_overrides(const RunArgs& a) {
  sim::Overrides o;
  if (a.baseline) o.baseline = true;
  o.dt = a.dt;
  o.seed = a.seed;
  o.noise_profile = a.noise;
  return sim::apply_overrides(sim::load_scenario(a.scenario), o);
}

void write_file(const fs::path& p, const auto& writer) {
  std::ofstream os(p);
  if (!os) throw Error("cannot write " + p.string());
  writer(os);
}

void write_log(const fs::path& dir, const sim::RunLog& log) {
  fs::create_directories(dir);
  write_file(dir / "run.csv", [&](std::ostream& os) { log.write_table(os); });
  write_file(dir / "summary.txt", [&](std::ostream& os) { log.write_summary(os); });
  write_file(dir / "events.log", [&](std::ostream& os) { log.write_events(os); });
}

bool unsafe(const sim::RunLog& log) { return log.summary.collision || log.summary.divergence; }

int cmd_run(const RunArgs& a) {
  const auto sc = load_with_overrides(a);
  const auto log = sim::run(sc);
  const fs::path dir = a.out.empty() ? default_output_dir() : fs::path(a.out);
  write_log(dir, log);
  log.write_summary(std::cout);
  std::cout << "output = " << dir.string() << "\n";
  return unsafe(log) ? kUnsafe : kOk;
}

int cmd_compare(const RunArgs& a) {
  const auto sc = load_with_overrides(a);
  const auto c = sim::compare(sc);
  const fs::path dir = a.out.empty() ? default_output_dir() : fs::path(a.out);
  write_log(dir / "enhanced", c.enhanced);
  write_log(dir / "baseline", c.baseline);
  write_file(dir / "compare.csv", [&](std::ostream& os) {
    os << "metric,enhanced,baseline\n";
    for (const auto& r : c.rows)
      os << r.metric << "," << sim::fmt_num(r.enhanced) << "," << sim::fmt_num(r.baseline) << "\n";
  });
  std::printf("%-24s %14s %14s\n", "metric", "enhanced", "baseline");
  for (const auto& r : c.rows)
    std::printf("%-24s %14s %14s\n", r.metric.c_str(), sim::fmt_num(r.enhanced, 4).c_str(),
                sim::fmt_num(r.baseline, 4).c_str());
  std::cout << "output = " << dir.string() << "\n";
  return unsafe(c.enhanced) || unsafe(c.baseline) ? kUnsafe : kOk;
}

struct VerifyArgs {
  std::string library;
  std::optional<double> gain;
  int points = 400;
};

int cmd_verify(const VerifyArgs& a) {
  const auto lib = a.library.empty() ? lti::ModelLibrary::builtin() : lti::ModelLibrary::load(a.library);
  if (lib.models().empty()) throw Error("model library is empty");
  const auto grid = lti::FrequencyGrid::log_spaced(1e-3, 1e4, static_cast<std::size_t>(a.points));

  std::ostringstream rows;
  rows << "kind,name,class,dc_gain,min_sni_index,worst_omega,certificate\n";
  std::cout << "models (" << grid.size() << "-point grid, 1e-3..1e4 rad/s)\n";
  for (const auto& m : lib.models()) {
    const auto c = lti::classify_ni(m.tf, grid);
    std::string dc = "inf";
    try {
      dc = sim::fmt_num(lti::dc_gain(m.tf));
    } catch (const IntegratorError&) {
    }
    std::printf("  %-14s %-8s dc=%-12s min_index=%-14s at w=%s\n", m.name.c_str(),
                lti::to_string(c.kind).c_str(), dc.c_str(), sim::fmt_num(c.min_index, 9).c_str(),
                sim::fmt_num(c.worst_omega, 4).c_str());
    if (c.kind != lti::NiClass::sni && c.violation_lo > 0.0)
      std::printf("  %-14s violation band w in [%s, %s]\n", "", sim::fmt_num(c.violation_lo, 4).c_str(),
                  sim::fmt_num(c.violation_hi, 4).c_str());
    rows << "model," << m.name << "," << lti::to_string(c.kind) << "," << dc << ","
         << sim::fmt_num(c.min_index, 9) << "," << sim::fmt_num(c.worst_omega, 6) << ",-\n";
  }

  bool all_ok = true;
  std::cout << "pairings\n";
  for (const auto& p : lib.pairings()) {
    const double g = a.gain.value_or(p.controller_gain);
    const auto& plant = lib.get(p.plant).tf;
    const auto cert = lti::certify_interconnection(plant, lti::TransferFunction::gain(g), grid);
    all_ok = all_ok && cert.stable;
    std::printf("  %-14s x %-8s dc_product=%-12s dc<1=%s nyquist=%s side=%s => %s\n", p.plant.c_str(),
                sim::fmt_num(g, 4).c_str(), sim::fmt_num(cert.dc_product, 4).c_str(),
                cert.dc_condition ? "yes" : "no", cert.nyquist.stable ? "stable" : "unstable",
                cert.side_conditions ? "ok" : "violated", cert.stable ? "STABLE" : "VIOLATED");
    for (const auto& r : cert.reasons) std::printf("  %-14s   - %s\n", "", r.c_str());
    rows << "pairing," << p.plant << "@" << sim::fmt_num(g, 4) << ","
         << lti::to_string(cert.plant_class.kind) << "," << sim::fmt_num(cert.dc_product) << ","
         << sim::fmt_num(cert.plant_class.min_index, 9) << ","
         << sim::fmt_num(cert.plant_class.worst_omega, 6) << ","
         << (cert.stable ? "stable" : "violated") << "\n";
  }
  std::cout << "\n" << rows.str();
  return all_ok ? kOk : kRejected;
}

struct TopologyArgs {
  std::string scenario;
  int agents = 0;
  std::vector<std::string> edges;
  std::vector<int> reference;
};

void print_matrix(const char* name, const Eigen::MatrixXd& m) {
  std::cout << name << " (" << m.rows() << "x" << m.cols() << ")\n";
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    std::cout << " ";
    for (Eigen::Index c = 0; c < m.cols(); ++c) std::printf(" %3g", m(r, c) == 0.0 ? 0.0 : m(r, c));
    std::cout << "\n";
  }
}

int cmd_topology(const TopologyArgs& a) {
  graph::NetworkTopology topo;
  if (!a.scenario.empty()) {
    topo = sim::load_scenario(a.scenario).topology;
  } else {
    if (a.agents <= 0) throw Error("topology: give a scenario or --agents");
    std::vector<graph::Edge> edges;
    for (const auto& e : a.edges) {
      const auto comma = e.find(',');
      if (comma == std::string::npos) throw Error("--edge expects HEAD,TAIL (1-based), got '" + e + "'");
      edges.emplace_back(std::stoi(e.substr(0, comma)) - 1, std::stoi(e.substr(comma + 1)) - 1);
    }
    std::vector<int> ref;
    for (int r : a.reference) ref.push_back(r - 1);
    if (ref.empty()) ref.push_back(0);
    topo = graph::build_topology(a.agents, edges, ref);
  }
  std::cout << "agents = " << topo.n_agents() << "\nedges =";
  for (const auto& [h, t] : topo.edges()) std::cout << " (" << h + 1 << "," << t + 1 << ")";
  std::cout << "\n";
  print_matrix("Q_i", topo.incidence());
  print_matrix("Q_c", topo.consensus());
  print_matrix("Q_r", topo.reference());
  print_matrix("L", graph::laplacian(topo));
  const auto ex = graph::kron_expand(topo, 2);
  print_matrix("[Q_i Q_r] (x) I_2", ex.incidence_ref);
  print_matrix("[Q_c Q_r] (x) I_2", ex.consensus_ref);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"NI formation-control simulator and certificate checker"};
  app.require_subcommand(1);

  RunArgs run_args, cmp_args;
  auto* run = app.add_subcommand("run", "Simulate a scenario and write run.csv, summary.txt, events.log");
  add_run_flags(run, run_args, true);

  auto* cmp = app.add_subcommand("compare", "Run enhanced and baseline architectures side by side");
  add_run_flags(cmp, cmp_args, false);

  VerifyArgs ver_args;
  auto* ver = app.add_subcommand("verify", "Classify models and certify plant x gain pairings");
  ver->add_option("--library", ver_args.library, "Model library file (default: built-in)");
  ver->add_option("--gain", ver_args.gain, "Controller gain applied to every pairing");
  ver->add_option("--grid-points", ver_args.points, "Frequency grid size")->check(CLI::PositiveNumber);

  TopologyArgs top_args;
  auto* top = app.add_subcommand("topology", "Print incidence, consensus, reference and Laplacian matrices");
  top->add_option("scenario", top_args.scenario, "Scenario file");
  top->add_option("--agents", top_args.agents, "Agent count (without a scenario)");
  top->add_option("--edge", top_args.edges, "Edge HEAD,TAIL, 1-based (repeatable)");
  top->add_option("--reference", top_args.reference, "Reference agent, 1-based (repeatable)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // Help and version print and succeed; any other parse problem is a usage error.
    return app.exit(e) == 0 ? kOk : kUsage;
  }

  try {
    if (*run) return cmd_run(run_args);
    if (*cmp) return cmd_compare(cmp_args);
    if (*ver) return cmd_verify(ver_args);
    if (*top) return cmd_topology(top_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}
