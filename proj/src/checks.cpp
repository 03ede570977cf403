#include "pmm/checks.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "pmm/analysis.hpp"
#include "pmm/circuits.hpp"
#include "pmm/graymap.hpp"
#include "pmm/render.hpp"
#include "pmm/runner.hpp"

namespace pmm {

using std::numbers::pi;

namespace {

std::string sci(double v) {
  std::ostringstream s;
  s.precision(3);
  s << std::scientific << v;
  return s.str();
}

HybridState balanced(int l_max, std::initializer_list<int> modes) {
  std::vector<StateEntry> e;
  for (int l : modes) {
    e.push_back({Polarization::H, l, 1.0});
    e.push_back({Polarization::V, l, 1.0});
  }
  return normalize(make_state(l_max, e));
}

CheckResult eq2_reproduction(std::uint64_t seed) {
  CheckResult r{1, "pmm-closed-form", false, "", 0.0};
  std::seed_seq ss{seed, std::uint64_t{1}};
  std::mt19937_64 rng(ss);
  std::uniform_real_distribution<double> angle(-pi, pi);
  std::uniform_real_distribution<double> trans(0.05, 1.0);
  double worst = 0.0;
  for (int draw = 0; draw < 100; ++draw) {
    const double alpha = angle(rng);
    const DPParams dp(trans(rng), trans(rng), angle(rng), alpha);
    const TransferOperator op = pmm(alpha, dp, dp, kDefaultLmax);
    Eigen::MatrixXcd expected = Eigen::MatrixXcd::Zero(op.dim(), op.dim());
    const cplx common = std::sqrt(dp.t_par * dp.t_perp) * std::polar(1.0, dp.delta_phi);
    for (int l = -kDefaultLmax; l <= kDefaultLmax; ++l) {
      const int h = canonical_index(Polarization::H, l, kDefaultLmax);
      const int v = canonical_index(Polarization::V, l, kDefaultLmax);
      expected(h, h) = common;
      expected(v, v) = common * std::polar(1.0, -4.0 * l * alpha);
    }
    worst = std::max(worst, max_abs_diff(op.matrix(), expected));
  }
  r.passed = worst <= kAlgebraTol;
  r.detail = "100 draws, l in [-10,10], max |diff| = " + sci(worst) + " (tol 1e-12)";
  return r;
}

CheckResult gate_law() {
  CheckResult r{2, "cphase-gate-law", false, "", 0.0};
  double worst = 0.0;
  for (int n : {2, 3, 4}) {
    for (int d = 2; d <= 8; ++d) {
      worst = std::max(worst, std::abs(1.0 - cphase_gate_check(n, d).process_fidelity));
    }
  }
  r.passed = worst <= kGateFidelityTolerance;
  r.detail = "N in {2,3,4}, D in 2..8, max |1 - F| = " + sci(worst) + " (tol 1e-10)";
  return r;
}

CheckResult rotation_error_law() {
  CheckResult r{3, "rotation-error-law", false, "", 0.0};
  double worst = 0.0;
  for (int l = 1; l <= 10; ++l) {
    for (int k = 0; k <= 10; ++k) {
      const double d = k * 0.2 * pi / 180.0;
      worst = std::max(worst, std::abs(rotation_error_fidelity(l, d) -
                                       simulated_rotation_error_fidelity(l, d)));
    }
  }
  const double point = simulated_rotation_error_fidelity(10, 0.6 * pi / 180.0);
  r.passed = worst <= kAlgebraTol && std::abs(point - 0.9568) <= 5e-4;
  r.detail = "max |analytic - simulated| = " + sci(worst) + ", F(l=10, 0.6deg) = " +
             format_number(point);
  return r;
}

CheckResult parity_filter() {
  CheckResult r{4, "parity-filter", false, "", 0.0};
  const int lm = kDefaultLmax;
  const PortMap first = detection(pi / 8.0);
  const PortMap second = detection(pi / 8.0);
  const TransferOperator stage1 = pmm(pi / 4.0, DPParams::ideal(pi / 4.0), DPParams::ideal(pi / 4.0), lm);
  const TransferOperator chain = cascade(
      {stage1, PortSelection::from_port(first, Port::port1),
       pmm2_stage(DPParams::ideal(pi / 8.0), DPParams::ideal(pi / 8.0), lm)},
      lm);
  double worst1 = 0.0, worst2 = 0.0;
  bool ports_ok = true;
  for (int l = -5; l <= 5; ++l) {
    const HybridState in = balanced(lm, {l});
    const FidelityReport a = measure(apply(stage1, in), first);
    worst1 = std::max(worst1, std::abs(1.0 - a.sorting_fidelity));
    const bool odd = (l % 2) != 0;
    ports_ok = ports_ok && ((a.port_intensities.at("port1") > a.port_intensities.at("port2")) == odd);
    if (!odd) continue;
    const FidelityReport b = measure(apply(chain, in), second);
    worst2 = std::max(worst2, std::abs(1.0 - b.sorting_fidelity));
    const bool one_mod_four = ((l % 4) + 4) % 4 == 1;
    ports_ok = ports_ok &&
               ((b.port_intensities.at("port1") > b.port_intensities.at("port2")) == one_mod_four);
  }
  r.passed = worst1 <= kAlgebraTol && worst2 <= kAlgebraTol && ports_ok;
  r.detail = "stage 1 max |1 - F| = " + sci(worst1) + ", cascade max |1 - F| = " + sci(worst2) +
             (ports_ok ? ", port assignment ok" : ", port assignment WRONG");
  return r;
}

double orientation_gap(double a, double b, double period) {
  double d = std::fmod(std::abs(a - b), period);
  return std::min(d, period - d);
}

CheckResult baseline_contrast() {
  CheckResult r{5, "baseline-contrast", false, "", 0.0};
  const int lm = kDefaultLmax;
  const double alpha = pi / 4.0;
  const HybridState in = balanced(lm, {1, -1});
  const HybridState bare = apply(bare_dp_sagnac(alpha, DPParams::ideal(alpha), lm), in);
  const HybridState mod = apply(pmm(alpha, DPParams::ideal(alpha), DPParams::ideal(alpha), lm), in);
  double bare_overlap = 0.0, pmm_defect = 0.0;
  for (auto p : {Polarization::H, Polarization::V}) {
    bare_overlap = std::max(bare_overlap, oam_overlap(in, bare, p));
    pmm_defect = std::max(pmm_defect, std::abs(1.0 - oam_overlap(in, mod, p)));
  }
  const BeamGrid grid;
  const PetalAnalysis pb = petal_analysis(intensity_image(bare, grid), 1);
  const PetalAnalysis pp = petal_analysis(intensity_image(mod, grid), 1);
  const double gap = orientation_gap(pb.orientation, pp.orientation, pi);
  const double tol = std::max(pb.angular_pixel, pp.angular_pixel);
  r.passed = bare_overlap < kAlgebraTol && pmm_defect <= kAlgebraTol &&
             std::abs(gap - pi / 2.0) <= tol;
  r.detail = "bare overlap = " + sci(bare_overlap) + ", PMM |1 - overlap| = " + sci(pmm_defect) +
             ", petal rotation = " + format_number(gap * 180.0 / pi) + " deg (tol " +
             format_number(tol * 180.0 / pi) + " deg)";
  return r;
}

CheckResult compensation(std::uint64_t seed) {
  CheckResult r{6, "compensation-impossibility", false, "", 0.0};
  const int lm = kDefaultLmax;
  const double alpha = pi / 6.0;
  const DPParams lossy(1.0, 0.9, pi / 4.0, alpha);
  const TransferOperator baseline = bare_dp_sagnac(alpha, lossy, lm);
  const double d3 = compensation_search(baseline, 3, alpha, 50, seed);
  const double d1 = compensation_search(baseline, 1, alpha, 50, seed);
  const TransferOperator ideal = bare_dp_sagnac(alpha, DPParams::ideal(alpha), lm);
  const double d2 = compensation_search(ideal, 2, alpha, 50, seed);
  r.passed = d3 > 1e-3 && d1 < 1e-8 && d2 < 1e-8;
  r.detail = "D=3 residual = " + sci(d3) + " (need > 1e-3), D=1 = " + sci(d1) +
             ", ideal D=2 = " + sci(d2) + " (need < 1e-8)";
  return r;
}

CheckResult render_properties() {
  CheckResult r{7, "render-properties", false, "", 0.0};
  const BeamGrid grid;
  bool counts_ok = true;
  double worst_uniformity = 0.0;
  std::string counts;
  bool identical = true;
  for (int l = 1; l <= 5; ++l) {
    const IntensityImage petals = intensity_image(std::map<int, cplx>{{l, 1.0}, {-l, 1.0}}, grid);
    const int n = petal_analysis(petals).petal_count;
    counts += (l > 1 ? "," : "") + std::to_string(n);
    counts_ok = counts_ok && n == 2 * l;
    const IntensityImage ring = intensity_image(std::map<int, cplx>{{l, 1.0}}, grid);
    worst_uniformity = std::max(worst_uniformity, angular_uniformity(ring));
    const IntensityImage again = intensity_image(std::map<int, cplx>{{l, 1.0}, {-l, 1.0}}, grid);
    identical = identical && encode_graymap(petals, GraymapFormat::p5) ==
                                 encode_graymap(again, GraymapFormat::p5);
  }
  r.passed = counts_ok && worst_uniformity < 1e-10 && identical;
  r.detail = "petal counts [" + counts + "], max relative variance = " + sci(worst_uniformity) +
             (identical ? ", repeat renders identical" : ", repeat renders DIFFER");
  return r;
}

template <typename F>
CheckResult timed(F&& f, double limit_seconds) {
  const auto t0 = std::chrono::steady_clock::now();
  CheckResult r = f();
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (r.seconds > limit_seconds) {
    r.passed = false;
    r.detail += ", exceeded " + format_number(limit_seconds) + " s";
  }
  return r;
}

}  // namespace

std::vector<CheckResult> run_checks(std::uint64_t seed) {
  std::vector<CheckResult> out;
  out.push_back(timed([&] { return eq2_reproduction(seed); }, 5.0));
  out.push_back(timed(gate_law, 5.0));
  out.push_back(timed(rotation_error_law, 60.0));
  out.push_back(timed(parity_filter, 5.0));
  out.push_back(timed(baseline_contrast, 60.0));
  out.push_back(timed([&] { return compensation(seed); }, 60.0));
  out.push_back(timed(render_properties, 60.0));
  return out;
}

std::string format_check(const CheckResult& r) {
  return std::string(r.passed ? "[PASS] " : "[FAIL] ") + std::to_string(r.id) + " " + r.name +
         ": " + r.detail;
}

}  // namespace pmm
