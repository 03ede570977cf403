#include "pmm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include "pmm/kernels.hpp"

namespace pmm {

using std::numbers::pi;

namespace {

std::mt19937_64 indexed_engine(std::uint64_t seed, std::size_t index) {
  const auto idx = static_cast<std::uint64_t>(index);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(idx), static_cast<std::uint32_t>(idx >> 32)};
  return std::mt19937_64(seq);
}

std::vector<int> resolve_modes(int D, std::span<const int> modes) {
  if (D < 2) throw std::invalid_argument("gate dimension D must be >= 2");
  std::vector<int> m = modes.empty() ? default_modes(D) : std::vector<int>(modes.begin(), modes.end());
  if (static_cast<int>(m.size()) != D) {
    throw std::invalid_argument("mode list length does not match D");
  }
  return m;
}

std::vector<int> subspace_indices(std::span<const int> modes, int l_max) {
  std::vector<int> idx;
  idx.reserve(2 * modes.size());
  for (auto p : {Polarization::H, Polarization::V})
    for (int l : modes) idx.push_back(canonical_index(p, l, l_max));
  return idx;
}

Eigen::MatrixXcd restrict(const Eigen::MatrixXcd& m, const std::vector<int>& idx) {
  const auto n = static_cast<Eigen::Index>(idx.size());
  Eigen::MatrixXcd r(n, n);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < n; ++j) r(i, j) = m(idx[i], idx[j]);
  return r;
}

double trace_fidelity(const Eigen::MatrixXcd& actual, const Eigen::MatrixXcd& target) {
  const auto n = target.rows();
  const double defect =
      max_abs_diff(target.adjoint() * target, Eigen::MatrixXcd::Identity(n, n));
  if (defect > kChainTol) throw std::invalid_argument("process_fidelity: target is not unitary");
  return std::abs((target.adjoint() * actual).trace()) / static_cast<double>(n);
}

}  // namespace

double sorting_fidelity(double i_max, double i_min) {
  if (i_min < 0.0 || i_max < 0.0) throw std::invalid_argument("intensities must be >= 0");
  if (i_max < i_min) throw std::invalid_argument("sorting_fidelity: i_max < i_min");
  if (i_max == 0.0) throw std::invalid_argument("sorting_fidelity: both intensities are zero");
  return i_max / (i_max + i_min);
}

double sorting_fidelity_unordered(double a, double b) {
  return sorting_fidelity(std::max(a, b), std::min(a, b));
}

FidelityReport measure(const HybridState& state, const PortMap& ports) {
  FidelityReport r;
  const double i1 = ports.intensity(state, Port::port1);
  const double i2 = ports.intensity(state, Port::port2);
  r.port_intensities["port1"] = i1;
  r.port_intensities["port2"] = i2;
  r.sorting_fidelity = sorting_fidelity_unordered(i1, i2);
  return r;
}

double oam_overlap(const HybridState& a, const HybridState& b, Polarization p) {
  if (a.l_max() != b.l_max()) throw std::invalid_argument("oam_overlap: truncation mismatch");
  const Eigen::VectorXcd x = a.polarization_part(p);
  const Eigen::VectorXcd y = b.polarization_part(p);
  const double nx = x.norm();
  const double ny = y.norm();
  if (nx == 0.0 || ny == 0.0) return 0.0;
  return std::abs(x.dot(y)) / (nx * ny);
}

std::vector<int> default_modes(int D) {
  std::vector<int> m(static_cast<std::size_t>(std::max(D, 0)));
  for (int i = 0; i < D; ++i) m[i] = i;
  return m;
}

Eigen::MatrixXcd zgate_target(int D, int N, std::span<const int> modes, int l_max) {
  if (N < 2) throw std::invalid_argument("gate modulus N must be >= 2");
  const auto m = resolve_modes(D, modes);
  Eigen::MatrixXcd z = Eigen::MatrixXcd::Zero(D, D);
  for (int i = 0; i < D; ++i) {
    if (std::abs(m[i]) > l_max) throw std::out_of_range("gate mode exceeds truncation bound");
    z(i, i) = std::polar(1.0, 2.0 * pi * m[i] / N);
  }
  return z;
}

TransferOperator cphase_target(int D, int N, int l_max, std::span<const int> modes,
                               PhaseSign sign) {
  const auto m = resolve_modes(D, modes);
  const Eigen::MatrixXcd z = zgate_target(D, N, m, l_max);
  Eigen::MatrixXcd t = Eigen::MatrixXcd::Identity(hybrid_dim(l_max), hybrid_dim(l_max));
  for (int i = 0; i < D; ++i) {
    const int k = canonical_index(Polarization::V, m[i], l_max);
    t(k, k) = sign == PhaseSign::as_written ? z(i, i) : std::conj(z(i, i));
  }
  return TransferOperator(l_max, std::move(t));
}

double process_fidelity(const TransferOperator& actual, const TransferOperator& target) {
  if (actual.dim() != target.dim()) throw std::invalid_argument("process_fidelity: dimension mismatch");
  return trace_fidelity(actual.matrix(), target.matrix());
}

double process_fidelity(const TransferOperator& actual, const TransferOperator& target,
                        std::span<const int> modes) {
  if (actual.l_max() != target.l_max()) {
    throw std::invalid_argument("process_fidelity: dimension mismatch");
  }
  const auto idx = subspace_indices(modes, actual.l_max());
  return trace_fidelity(restrict(actual.matrix(), idx), restrict(target.matrix(), idx));
}

GateCheck cphase_gate_check(int N, int D, const DPParams& dp, int l_max) {
  const double alpha = pi / (2.0 * N);
  const DPParams p = dp.with_alpha(alpha);
  const auto modes = default_modes(D);
  const TransferOperator actual = pmm(alpha, p, p, l_max);
  const TransferOperator target = cphase_target(D, N, l_max, modes, PhaseSign::conjugated);
  return {N, D, alpha, process_fidelity(actual, target, modes),
          "target conjugated (CZ^dagger): module realizes exp(-i 4 l alpha) on V"};
}

double rotation_error_fidelity(int l, double delta) {
  return (1.0 + std::cos(4.0 * l * delta)) / 2.0;
}

double simulated_rotation_error_fidelity(int l, double delta, const DPParams& dp, double alpha,
                                         int l_max) {
  const double a = alpha + delta;
  const DPParams p = dp.with_alpha(a);
  const TransferOperator op = pmm(a, p, p, l_max);
  const HybridState in = normalize(make_state(
      l_max, {{Polarization::H, l, 1.0}, {Polarization::V, l, 1.0}}));
  return measure(apply(op, in), detection(pi / 8.0)).sorting_fidelity;
}

std::string to_string(ElementId id) {
  switch (id) {
    case ElementId::dp1: return "dp1";
    case ElementId::dp2: return "dp2";
    case ElementId::hwp1: return "hwp1";
    case ElementId::hwp2: return "hwp2";
    case ElementId::hwp3: return "hwp3";
    case ElementId::hwp4: return "hwp4";
  }
  return "unknown";
}

std::optional<ElementId> element_id_from_string(const std::string& s) {
  for (auto id : {ElementId::dp1, ElementId::dp2, ElementId::hwp1, ElementId::hwp2,
                  ElementId::hwp3, ElementId::hwp4}) {
    if (to_string(id) == s) return id;
  }
  return std::nullopt;
}

void ErrorModel::validate() const {
  if (!std::isfinite(delta)) throw std::invalid_argument("error model: non-finite delta");
  if (distribution == ErrorDistribution::uniform && delta < 0.0) {
    throw std::invalid_argument("error model: uniform bound must be >= 0");
  }
  for (const auto& [id, b] : per_element) {
    if (!std::isfinite(b)) throw std::invalid_argument("error model: non-finite bound");
    if (distribution == ErrorDistribution::uniform && b < 0.0) {
      throw std::invalid_argument("error model: uniform bound for " + to_string(id) +
                                  " must be >= 0");
    }
  }
}

PmmConfig draw_configuration(const MonteCarloProblem& p, std::size_t index) {
  const ErrorModel& m = p.model;
  double lumped = m.delta;
  std::map<ElementId, double> errs = m.per_element;
  if (m.distribution == ErrorDistribution::uniform) {
    auto eng = indexed_engine(p.seed, index);
    auto draw = [&eng](double bound) {
      return bound == 0.0 ? 0.0 : std::uniform_real_distribution<double>(-bound, bound)(eng);
    };
    lumped = draw(m.delta);
    for (auto& [id, v] : errs) v = draw(v);  // map order is fixed
  }
  auto err = [&errs](ElementId id) {
    auto it = errs.find(id);
    return it == errs.end() ? 0.0 : it->second;
  };
  const double a = p.alpha + lumped;
  PmmAngles t = PmmAngles::tied(a);
  t.theta1 += err(ElementId::hwp1);
  t.theta2 += err(ElementId::hwp2);
  t.theta3 += err(ElementId::hwp3);
  t.theta4 += err(ElementId::hwp4);
  return {p.dp1.with_alpha(a + err(ElementId::dp1)), p.dp2.with_alpha(a + err(ElementId::dp2)), t};
}

double mc_sample_fidelity(const MonteCarloProblem& p, std::size_t index) {
  const Jones block = pmm_block(draw_configuration(p, index), p.l);
  const Eigen::Vector2cd out = block * Eigen::Vector2cd(1.0, 1.0) / std::sqrt(2.0);
  const PortMap ports{p.detection_theta};
  const double i1 = (ports.analyzer(Port::port1) * out).squaredNorm();
  const double i2 = (ports.analyzer(Port::port2) * out).squaredNorm();
  return sorting_fidelity_unordered(i1, i2);
}

SampleSummary summarize(std::span<const double> values) {
  SampleSummary s;
  s.count = values.size();
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.stddev = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
  return s;
}

FidelityReport monte_carlo_fidelity(const MonteCarloProblem& p, std::size_t samples) {
  if (samples < 1) throw std::invalid_argument("monte_carlo_fidelity: samples must be >= 1");
  p.model.validate();
  std::vector<double> f(samples);
  kernels::omp::monte_carlo(p, f);
  FidelityReport r;
  r.samples = summarize(f);
  r.sorting_fidelity = r.samples->mean;
  r.notes.push_back(p.model.distribution == ErrorDistribution::fixed ? "distribution=fixed"
                                                                     : "distribution=uniform");
  return r;
}

FidelityReport monte_carlo_fidelity(int l, const ErrorModel& model, std::size_t samples,
                                    std::uint64_t seed) {
  MonteCarloProblem p;
  p.l = l;
  p.model = model;
  p.seed = seed;
  return monte_carlo_fidelity(p, samples);
}

Jones compensator(const std::array<double, 3>& x) {
  const double c = std::cos(x[0]);
  const double s = std::sin(x[0]);
  Jones u;
  u(0, 0) = std::polar(c, x[1]);
  u(0, 1) = std::polar(s, x[2]);
  u(1, 0) = -std::polar(s, -x[2]);
  u(1, 1) = std::polar(c, -x[1]);
  return u;
}

CompensationProblem make_compensation_problem(const TransferOperator& baseline,
                                              std::vector<int> modes, double alpha) {
  if (modes.empty()) throw std::invalid_argument("compensation: empty mode list");
  CompensationProblem p;
  p.alpha = alpha;
  for (int l : modes) p.blocks.push_back(mode_block(baseline, l));
  p.modes = std::move(modes);
  return p;
}

double compensation_residual(const CompensationProblem& p, const std::array<double, 3>& x) {
  const Jones c = compensator(x);
  const Eigen::Vector2cd in = Eigen::Vector2cd(1.0, 1.0) / std::sqrt(2.0);
  double total = 0.0;
  for (std::size_t k = 0; k < p.modes.size(); ++k) {
    const Eigen::Vector2cd s = c * p.blocks[k] * in;
    const double n2 = s.squaredNorm();
    if (n2 == 0.0) continue;
    const Eigen::Vector2cd target =
        Eigen::Vector2cd(1.0, std::polar(1.0, -4.0 * p.modes[k] * p.alpha)) / std::sqrt(2.0);
    total += std::norm(target.dot(s)) / n2;
  }
  return std::max(0.0, 1.0 - total / static_cast<double>(p.modes.size()));
}

namespace {

double gsl_objective(const gsl_vector* v, void* params) {
  const auto* p = static_cast<const CompensationProblem*>(params);
  return compensation_residual(*p, {gsl_vector_get(v, 0), gsl_vector_get(v, 1),
                                    gsl_vector_get(v, 2)});
}

constexpr double kSimplexSize = 1e-9;
constexpr int kMaxIterations = 20000;

}  // namespace

RestartResult compensation_restart(const CompensationProblem& p, std::uint64_t seed,
                                   std::size_t index) {
  auto eng = indexed_engine(seed, index);
  std::uniform_real_distribution<double> mix(0.0, pi / 2.0);
  std::uniform_real_distribution<double> phase(-pi, pi);
  const double a0 = mix(eng);
  const double b0 = phase(eng);
  const double c0 = phase(eng);

  gsl_multimin_function fn{&gsl_objective, 3, const_cast<CompensationProblem*>(&p)};
  gsl_vector* x = gsl_vector_alloc(3);
  gsl_vector* step = gsl_vector_alloc(3);
  gsl_vector_set(x, 0, a0);
  gsl_vector_set(x, 1, b0);
  gsl_vector_set(x, 2, c0);
  gsl_vector_set_all(step, 0.3);
  gsl_multimin_fminimizer* m =
      gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 3);
  gsl_multimin_fminimizer_set(m, &fn, x, step);

  for (int it = 0; it < kMaxIterations; ++it) {
    if (gsl_multimin_fminimizer_iterate(m) != GSL_SUCCESS) break;
    if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), kSimplexSize) == GSL_SUCCESS) break;
  }

  RestartResult r;
  r.residual = gsl_multimin_fminimizer_minimum(m);
  const gsl_vector* best = gsl_multimin_fminimizer_x(m);
  r.angles = {gsl_vector_get(best, 0), gsl_vector_get(best, 1), gsl_vector_get(best, 2)};
  gsl_multimin_fminimizer_free(m);
  gsl_vector_free(step);
  gsl_vector_free(x);
  return r;
}

double compensation_search(const CompensationProblem& p, int restarts, std::uint64_t seed) {
  if (restarts < 1) throw std::invalid_argument("compensation_search: restarts must be >= 1");
  std::vector<RestartResult> runs(static_cast<std::size_t>(restarts));
  kernels::omp::multistart(p, seed, runs);
  double best = runs.front().residual;
  for (const auto& r : runs) best = std::min(best, r.residual);
  return best;
}

double compensation_search(const TransferOperator& baseline, int D, double alpha, int restarts,
                           std::uint64_t seed) {
  if (D < 1) throw std::invalid_argument("compensation_search: D must be >= 1");
  return compensation_search(make_compensation_problem(baseline, default_modes(D), alpha),
                             restarts, seed);
}

}  // namespace pmm
