// pmmsim: scenario-driven front end for the polarization-controlled OAM simulator.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "pmm/checks.hpp"
#include "pmm/graymap.hpp"
#include "pmm/runner.hpp"
#include "pmm/scenario.hpp"

namespace fs = std::filesystem;

namespace {

enum Exit { kOk = 0, kCheckFailed = 1, kParseError = 2, kRuntimeError = 3 };

struct Globals {
  std::optional<std::uint64_t> seed;
  std::string out_dir = ".";
  std::optional<int> l_max;
  bool check = false;
};

pmm::RunOptions options(const Globals& g) {
  pmm::RunOptions o;
  o.out_dir = g.out_dir;
  o.seed = g.seed;
  o.l_max = g.l_max;
  return o;
}

// Parse problems become exit code 2; everything else thrown later is a runtime error.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

template <typename F>
auto usage(F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  } catch (const std::out_of_range& e) {
    throw UsageError(e.what());
  }
}

pmm::Scenario load(const std::string& path, const Globals& g) {
  pmm::Scenario sc;
  try {
    sc = pmm::load_scenario(path);
  } catch (const pmm::ParseError& e) {
    throw UsageError(path + ":" + std::to_string(e.line()) + ":" + std::to_string(e.column()) +
                     ": " + e.message());
  }
  return usage([&] { return pmm::with_overrides(sc, options(g)); });
}

int cmd_run(const std::vector<std::string>& files, const Globals& g) {
  int status = kOk;
  for (const auto& f : files) {
    const pmm::Scenario sc = load(f, g);
    pmm::RunReport rep;
    try {
      rep = pmm::run_scenario(sc, options(g));
    } catch (const std::exception& e) {
      throw std::runtime_error("scenario '" + sc.name + "': " + e.what());
    }
    for (const auto& a : rep.artifacts) std::cout << a.string() << "\n";
    if (!rep.gate_checks_passed) {
      std::cerr << "scenario '" << sc.name << "': gate check below tolerance\n";
      status = kCheckFailed;
    }
  }
  return status;
}

struct RenderArgs {
  std::string state = "(H+V)(|1>+|-1>)";
  std::string circuit = "none";
  std::string alpha = "pi/4";
  int side = 256;
  double extent = 3.0;
  std::string format = "p5";
  std::string name = "render";
};

int cmd_render(const RenderArgs& a, const Globals& g) {
  const int lm = g.l_max.value_or(pmm::kDefaultLmax);
  const auto entries = usage([&] { return pmm::parse_state_expression(a.state); });
  const double alpha = usage([&] { return pmm::parse_angle(a.alpha); });
  pmm::HybridState st = usage([&] { return pmm::normalize(pmm::make_state(lm, entries)); });
  if (a.circuit == "pmm") {
    st = pmm::apply(pmm::pmm(alpha, pmm::DPParams::ideal(alpha), pmm::DPParams::ideal(alpha), lm), st);
  } else if (a.circuit == "bare") {
    st = pmm::apply(pmm::bare_dp_sagnac(alpha, pmm::DPParams::ideal(alpha), lm), st);
  }
  pmm::BeamGrid grid;
  grid.side = a.side;
  grid.extent = a.extent;
  usage([&] { grid.validate(); });
  const auto fmt = a.format == "p2" ? pmm::GraymapFormat::p2 : pmm::GraymapFormat::p5;
  fs::create_directories(g.out_dir);
  const fs::path path = fs::path(g.out_dir) / (a.name + ".pgm");
  pmm::write_graymap(pmm::intensity_image(st, grid), path, fmt);
  std::cout << path.string() << "\n";
  return kOk;
}

void emit(const std::string& text, const std::string& output, const Globals& g) {
  if (output.empty()) {
    std::cout << text;
    return;
  }
  fs::create_directories(g.out_dir);
  const fs::path path = fs::path(g.out_dir) / output;
  std::ofstream f(path, std::ios::binary);
  if (!(f << text)) throw std::runtime_error("cannot write " + path.string());
  std::cout << path.string() << "\n";
}

int cmd_sweep(const std::string& modes, const std::string& deltas, const std::string& output,
              const Globals& g) {
  const int lm = g.l_max.value_or(pmm::kDefaultLmax);
  const auto m = usage([&] { return pmm::parse_int_list(modes); });
  const auto d = usage([&] { return pmm::parse_angle_list(deltas); });
  const std::string csv = usage([&] { return pmm::sweep_csv(m, d, pmm::DPParams::ideal(0.0), lm); });
  emit(csv, output, g);
  return kOk;
}

int cmd_gate(const std::string& moduli, const std::string& dims, const std::string& output,
             const Globals& g) {
  const int lm = g.l_max.value_or(pmm::kDefaultLmax);
  const auto n = usage([&] { return pmm::parse_int_list(moduli); });
  const auto d = usage([&] { return pmm::parse_int_list(dims); });
  bool ok = true;
  const std::string csv = usage([&] { return pmm::gate_csv(n, d, pmm::DPParams::ideal(0.0), lm, ok); });
  emit(csv, output, g);
  return ok ? kOk : kCheckFailed;
}

int cmd_check(const std::string& scenario_dir, const Globals& g) {
  bool ok = true;
  for (const auto& r : pmm::run_checks(g.seed.value_or(0))) {
    std::cout << pmm::format_check(r) << "\n";
    ok = ok && r.passed;
  }
  if (!scenario_dir.empty()) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(scenario_dir)) {
      if (e.path().extension() == ".scenario") files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& f : files) {
      const pmm::Scenario sc = load(f.string(), g);
      if (!sc.outputs.count(pmm::Output::gate_check)) continue;
      pmm::Scenario gate_only = sc;
      gate_only.outputs = {pmm::Output::gate_check};
      const auto rep = pmm::run_scenario(gate_only, options(g));
      std::cout << (rep.gate_checks_passed ? "[PASS] " : "[FAIL] ") << "scenario " << sc.name
                << ": gate check\n";
      ok = ok && rep.gate_checks_passed;
    }
  }
  return ok ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Polarization-controlled OAM phase manipulation simulator"};
  app.require_subcommand(0, 1);
  app.fallthrough();

  Globals g;
  app.add_option("--seed", g.seed, "Override the random seed");
  app.add_option("--out-dir", g.out_dir, "Directory for generated files");
  app.add_option("--lmax", g.l_max, "Override the OAM truncation bound")->check(CLI::Range(0, 64));
  app.add_flag("--check", g.check, "Same as the check subcommand");

  std::vector<std::string> run_files;
  auto* run = app.add_subcommand("run", "Run scenario files");
  run->add_option("scenario", run_files, "Scenario files")->required()->check(CLI::ExistingFile);

  RenderArgs ra;
  auto* render = app.add_subcommand("render", "Render the intensity of a state");
  render->add_option("--state", ra.state, "Ket expression, e.g. '(H+V)(|2>+|-2>)'");
  render->add_option("--circuit", ra.circuit, "Apply a circuit first")
      ->check(CLI::IsMember({"none", "pmm", "bare"}));
  render->add_option("--alpha", ra.alpha, "Dove prism angle for --circuit");
  render->add_option("--side", ra.side, "Image side in pixels");
  render->add_option("--extent", ra.extent, "Half-width in beam waists");
  render->add_option("--format", ra.format, "p2 or p5")->check(CLI::IsMember({"p2", "p5"}));
  render->add_option("--name", ra.name, "Output file stem");

  std::string sweep_modes = "1..10", sweep_deltas = "0deg..2deg step 0.2deg", sweep_out;
  auto* sweep = app.add_subcommand("sweep", "Rotation-error sweep, analytic vs simulated");
  sweep->add_option("--modes", sweep_modes, "OAM orders");
  sweep->add_option("--delta", sweep_deltas, "Rotation errors");
  sweep->add_option("--output", sweep_out, "File name inside --out-dir (stdout if omitted)");

  std::string gate_n = "2,3,4", gate_d = "2..8", gate_out;
  auto* gate = app.add_subcommand("gate-check", "Process fidelity of the C-phase gate");
  gate->add_option("--n", gate_n, "Gate moduli N");
  gate->add_option("--d", gate_d, "OAM dimensions D");
  gate->add_option("--output", gate_out, "File name inside --out-dir (stdout if omitted)");

  std::string scenario_dir;
  auto* check = app.add_subcommand("check", "Run the acceptance checks");
  check->add_option("--scenarios", scenario_dir, "Also run gate-check scenarios in this directory")
      ->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kParseError;
  }

  try {
    if (*run) return cmd_run(run_files, g);
    if (*render) return cmd_render(ra, g);
    if (*sweep) return cmd_sweep(sweep_modes, sweep_deltas, sweep_out, g);
    if (*gate) return cmd_gate(gate_n, gate_d, gate_out, g);
    if (*check || g.check) return cmd_check(scenario_dir, g);
    std::cout << app.help();
    return kParseError;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kParseError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
}
