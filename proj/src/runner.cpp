#include "pmm/runner.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "pmm/graymap.hpp"

namespace pmm {

using std::numbers::pi;

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0.0) return "0";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 15);
  if (ec != std::errc()) throw std::runtime_error("format_number: conversion failed");
  return std::string(buf, end);
}

namespace {

constexpr double kDarkPort = 1e-24;

void write_text(const std::filesystem::path& path, const std::string& text, RunReport& report) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot open " + path.string() + " for writing");
  f << text;
  if (!f) throw std::runtime_error("write failed: " + path.string());
  report.artifacts.push_back(path);
}

std::string fidelity_field(double i1, double i2) {
  if (i1 + i2 < kDarkPort) return "";
  return format_number(sorting_fidelity_unordered(i1, i2));
}

void check_range(const std::vector<int>& modes, int l_max, const char* what) {
  for (int l : modes) {
    if (std::abs(l) > l_max) {
      throw std::invalid_argument(std::string(what) + ": OAM order " + std::to_string(l) +
                                  " exceeds lmax " + std::to_string(l_max));
    }
  }
}

struct Setup {
  TransferOperator op;
  PortMap ports;
  std::optional<TransferOperator> stage2;  // full chain up to the second detection
};

Setup make_setup(const Scenario& sc) {
  const int lm = sc.l_max;
  TransferOperator op = sc.circuit.kind == CircuitKind::detection ? TransferOperator::identity(lm)
                                                                  : build(sc.circuit);
  Setup s{op, detection(sc.detection_theta), std::nullopt};
  if (sc.cascade_pmm2) {
    const DPParams& d1 = sc.circuit.prisms.at("dp1");
    const DPParams& d2 = sc.circuit.prisms.at("dp2");
    s.stage2 = cascade({op, PortSelection::from_port(s.ports, Port::port1),
                        pmm2_stage(d1.with_alpha(pi / 8.0), d2.with_alpha(pi / 8.0), lm)},
                       lm);
  }
  return s;
}

HybridState scan_state(const Scenario& sc, int l) {
  return normalize(make_state(sc.l_max, {{Polarization::H, l, sc.scan_polarization(0)},
                                         {Polarization::V, l, sc.scan_polarization(1)}}));
}

HybridState input_state(const Scenario& sc) {
  return normalize(make_state(sc.l_max, std::span<const StateEntry>(sc.input)));
}

std::string ports_csv(const Scenario& sc, const Setup& s) {
  const PortMap second = detection(pi / 8.0);
  std::ostringstream out;
  out << "l,port1,port2,sorting_fidelity";
  if (s.stage2) out << ",stage2_port1,stage2_port2,stage2_sorting_fidelity";
  out << "\n";

  auto row = [&](int l, double i1, double i2, const HybridState* in) {
    out << l << ',' << format_number(i1) << ',' << format_number(i2) << ','
        << fidelity_field(i1, i2);
    if (s.stage2) {
      const HybridState o2 = apply(*s.stage2, *in);
      const Eigen::VectorXcd a1 = second.port_amplitudes(o2, Port::port1);
      const Eigen::VectorXcd a2 = second.port_amplitudes(o2, Port::port2);
      const double j1 = std::norm(a1(l + sc.l_max));
      const double j2 = std::norm(a2(l + sc.l_max));
      out << ',' << format_number(j1) << ',' << format_number(j2) << ',' << fidelity_field(j1, j2);
    }
    out << "\n";
  };

  if (!sc.mode_scan.empty()) {
    for (int l : sc.mode_scan) {
      const HybridState in = scan_state(sc, l);
      const HybridState o = apply(s.op, in);
      row(l, s.ports.intensity(o, Port::port1), s.ports.intensity(o, Port::port2), &in);
    }
  } else {
    const HybridState in = input_state(sc);
    const HybridState o = apply(s.op, in);
    const Eigen::VectorXcd a1 = s.ports.port_amplitudes(o, Port::port1);
    const Eigen::VectorXcd a2 = s.ports.port_amplitudes(o, Port::port2);
    for (int l = -sc.l_max; l <= sc.l_max; ++l) {
      const double i1 = std::norm(a1(l + sc.l_max));
      const double i2 = std::norm(a2(l + sc.l_max));
      const bool in_input = std::any_of(sc.input.begin(), sc.input.end(),
                                        [l](const StateEntry& e) { return e.l == l; });
      if (in_input || i1 + i2 >= kDarkPort) row(l, i1, i2, &in);
    }
  }
  return out.str();
}

std::string fidelity_csv(const Scenario& sc, const Setup& s) {
  std::ostringstream out;
  out << "quantity,value\n";
  if (!sc.mode_scan.empty()) {
    double sum = 0.0, lo = 1.0;
    for (int l : sc.mode_scan) {
      const FidelityReport r = measure(apply(s.op, scan_state(sc, l)), s.ports);
      sum += r.sorting_fidelity;
      lo = std::min(lo, r.sorting_fidelity);
    }
    out << "modes," << sc.mode_scan.size() << "\n";
    out << "mean_sorting_fidelity," << format_number(sum / sc.mode_scan.size()) << "\n";
    out << "min_sorting_fidelity," << format_number(lo) << "\n";
  } else {
    const FidelityReport r = measure(apply(s.op, input_state(sc)), s.ports);
    out << "port1," << format_number(r.port_intensities.at("port1")) << "\n";
    out << "port2," << format_number(r.port_intensities.at("port2")) << "\n";
    out << "sorting_fidelity," << format_number(r.sorting_fidelity) << "\n";
  }
  return out.str();
}

IntensityImage port_image(const HybridState& out, const PortMap& ports, Port port,
                          const BeamGrid& grid) {
  const Eigen::VectorXcd a = ports.port_amplitudes(out, port);
  const int lm = out.l_max();
  std::map<int, cplx> amps;
  for (int l = -lm; l <= lm; ++l) {
    if (std::norm(a(l + lm)) >= kDarkPort) amps[l] = a(l + lm);
  }
  if (amps.empty()) {
    IntensityImage dark;
    dark.side = grid.side;
    dark.pixels.assign(static_cast<std::size_t>(grid.side) * grid.side, 0.0);
    return dark;
  }
  return intensity_image(amps, grid);
}

std::string montecarlo_csv(const Scenario& sc) {
  const auto& mc = *sc.montecarlo;
  const PmmConfig cfg = sc.circuit.kind == CircuitKind::pmm ? sc.circuit.pmm_config()
                                                            : PmmConfig::ideal(pi / 4.0);
  std::ostringstream out;
  out << "l,mean,stddev,count\n";
  for (int l : mc.modes) {
    MonteCarloProblem p;
    p.l = l;
    p.model = mc.model;
    p.seed = sc.seed;
    p.alpha = cfg.dp1.alpha;
    p.dp1 = cfg.dp1;
    p.dp2 = cfg.dp2;
    p.detection_theta = sc.detection_theta;
    const FidelityReport r = monte_carlo_fidelity(p, mc.samples);
    out << l << ',' << format_number(r.samples->mean) << ',' << format_number(r.samples->stddev)
        << ',' << r.samples->count << "\n";
  }
  return out.str();
}

std::string compensation_csv(const Scenario& sc) {
  const auto& cs = *sc.compensation;
  const double alpha = cs.alpha ? *cs.alpha : sc.circuit.angle("alpha");
  const DPParams dp = sc.circuit.prisms.at("dp1").with_alpha(alpha);
  const TransferOperator baseline = bare_dp_sagnac(alpha, dp, sc.l_max);
  std::ostringstream out;
  out << "D,alpha,restarts,residual\n";
  for (int d : cs.dimensions) {
    const double res = compensation_search(baseline, d, alpha, cs.restarts, sc.seed);
    out << d << ',' << format_number(alpha) << ',' << cs.restarts << ',' << format_number(res)
        << "\n";
  }
  return out.str();
}

}  // namespace

std::string sweep_csv(const std::vector<int>& modes, const std::vector<double>& deltas,
                      const DPParams& dp, int l_max) {
  check_range(modes, l_max, "sweep");
  std::ostringstream out;
  out << "l,delta_deg,analytic,simulated,abs_diff\n";
  for (int l : modes) {
    for (double d : deltas) {
      const double a = rotation_error_fidelity(l, d);
      const double s = simulated_rotation_error_fidelity(l, d, dp, pi / 4.0, l_max);
      out << l << ',' << format_number(d * 180.0 / pi) << ',' << format_number(a) << ','
          << format_number(s) << ',' << format_number(std::abs(a - s)) << "\n";
    }
  }
  return out.str();
}

std::string gate_csv(const std::vector<int>& moduli, const std::vector<int>& dimensions,
                     const DPParams& dp, int l_max, bool& all_pass) {
  std::ostringstream out;
  out << "N,D,alpha,process_fidelity,pass,sign_convention\n";
  all_pass = true;
  for (int n : moduli) {
    for (int d : dimensions) {
      const GateCheck g = cphase_gate_check(n, d, dp, l_max);
      const bool ok = std::abs(1.0 - g.process_fidelity) <= kGateFidelityTolerance;
      all_pass = all_pass && ok;
      out << n << ',' << d << ',' << format_number(g.alpha) << ','
          << format_number(g.process_fidelity) << ',' << (ok ? "yes" : "no") << ",conjugated\n";
    }
  }
  return out.str();
}

Scenario with_overrides(Scenario sc, const RunOptions& opt) {
  if (opt.seed) sc.seed = *opt.seed;
  if (opt.l_max) {
    if (*opt.l_max < 0) throw std::invalid_argument("lmax must be non-negative");
    sc.l_max = *opt.l_max;
    sc.circuit.l_max = *opt.l_max;
  }
  std::vector<int> input_modes;
  for (const auto& e : sc.input) input_modes.push_back(e.l);
  check_range(input_modes, sc.l_max, "input");
  check_range(sc.mode_scan, sc.l_max, "input");
  if (sc.sweep) check_range(sc.sweep->modes, sc.l_max, "sweep");
  if (sc.montecarlo) check_range(sc.montecarlo->modes, sc.l_max, "errors");
  if (sc.gate) {
    for (int d : sc.gate->dimensions) check_range({d - 1}, sc.l_max, "gate");
  }
  if (sc.compensation) {
    for (int d : sc.compensation->dimensions) check_range({d - 1}, sc.l_max, "compensation");
  }
  return sc;
}

RunReport run_scenario(const Scenario& sc, const RunOptions& opt) {
  std::filesystem::create_directories(opt.out_dir);
  RunReport report;
  const auto file = [&](const std::string& suffix) { return opt.out_dir / (sc.name + suffix); };
  const bool needs_setup = sc.outputs.count(Output::ports_csv) || sc.outputs.count(Output::image) ||
                           sc.outputs.count(Output::fidelity);
  std::optional<Setup> setup;
  if (needs_setup) setup = make_setup(sc);

  if (sc.outputs.count(Output::ports_csv)) {
    write_text(file("_ports.csv"), ports_csv(sc, *setup), report);
  }
  if (sc.outputs.count(Output::fidelity)) {
    write_text(file("_fidelity.csv"), fidelity_csv(sc, *setup), report);
  }
  if (sc.outputs.count(Output::image)) {
    const HybridState in = input_state(sc);
    const HybridState out = apply(setup->op, in);
    for (const auto& req : sc.images.requests) {
      IntensityImage img;
      switch (req.source) {
        case ImageSource::input: img = intensity_image(in, sc.images.grid); break;
        case ImageSource::output: img = intensity_image(out, sc.images.grid); break;
        case ImageSource::baseline: {
          const double alpha = sc.circuit.angle("alpha");
          const TransferOperator b =
              bare_dp_sagnac(alpha, sc.circuit.prisms.at("dp1").with_alpha(alpha), sc.l_max);
          img = intensity_image(apply(b, in), sc.images.grid);
          break;
        }
        case ImageSource::port1:
          img = port_image(out, setup->ports, Port::port1, sc.images.grid);
          break;
        case ImageSource::port2:
          img = port_image(out, setup->ports, Port::port2, sc.images.grid);
          break;
      }
      const auto path = file("_" + req.name + ".pgm");
      write_graymap(img, path, sc.images.format);
      report.artifacts.push_back(path);
    }
  }
  if (sc.outputs.count(Output::sweep)) {
    write_text(file("_sweep.csv"),
               sweep_csv(sc.sweep->modes, sc.sweep->deltas, sc.circuit.prisms.at("dp1"), sc.l_max),
               report);
  }
  if (sc.outputs.count(Output::gate_check)) {
    bool ok = true;
    write_text(file("_gate.csv"),
               gate_csv(sc.gate->moduli, sc.gate->dimensions, sc.circuit.prisms.at("dp1"),
                        sc.l_max, ok),
               report);
    report.gate_checks_passed = ok;
  }
  if (sc.outputs.count(Output::montecarlo)) {
    write_text(file("_montecarlo.csv"), montecarlo_csv(sc), report);
  }
  if (sc.outputs.count(Output::compensation)) {
    write_text(file("_compensation.csv"), compensation_csv(sc), report);
  }
  return report;
}

}  // namespace pmm
