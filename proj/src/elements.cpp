#include "pmm/elements.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace pmm {

using std::numbers::pi;

DPParams::DPParams(double tp, double tq, double dphi, double a)
    : t_par(tp), t_perp(tq), delta_phi(wrap_phase(dphi)), alpha(a) {
  if (!(t_par > 0.0 && t_par <= 1.0) || !(t_perp > 0.0 && t_perp <= 1.0)) {
    throw std::invalid_argument("Dove prism transmissions must lie in (0, 1]; got t_par=" +
                                std::to_string(t_par) + ", t_perp=" + std::to_string(t_perp));
  }
  if (!std::isfinite(delta_phi) || !std::isfinite(alpha)) {
    throw std::invalid_argument("Dove prism angles must be finite");
  }
}

double wrap_phase(double phi) {
  if (!std::isfinite(phi)) return phi;
  double w = std::remainder(phi, 2.0 * pi);  // [-pi, pi]
  if (w <= -pi) w += 2.0 * pi;
  return w;
}

Jones rotator(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Jones r;
  r << c, s, -s, c;
  return r;
}

Jones dove_prism_jones(const DPParams& p, Direction dir, DpMount mount) {
  const double a = effective_angle(p.alpha, dir);
  const cplx d_par = std::sqrt(p.t_par);
  const cplx d_perp = std::sqrt(p.t_perp) * std::polar(1.0, p.delta_phi);
  Jones d = Jones::Zero();
  if (mount == DpMount::aligned) {
    d(0, 0) = d_par;
    d(1, 1) = d_perp;
  } else {
    d(0, 0) = d_perp;
    d(1, 1) = d_par;
  }
  return rotator(-a) * d * rotator(a);
}

cplx dove_prism_oam_phase(const DPParams& p, Direction dir, int l) {
  return std::polar(1.0, 2.0 * l * effective_angle(p.alpha, dir));
}

Jones half_wave_plate_jones(double theta, Direction dir) {
  const double t = 2.0 * effective_angle(theta, dir);
  Jones h;
  h << std::cos(t), std::sin(t), std::sin(t), -std::cos(t);
  return h;
}

Jones quarter_wave_plate_jones(double theta, Direction dir) {
  const double t = effective_angle(theta, dir);
  Jones q = Jones::Zero();
  q(0, 0) = 1.0;
  q(1, 1) = cplx(0.0, 1.0);
  return rotator(-t) * q * rotator(t);
}

TransferOperator lift(const Jones& j, int l_max) {
  const int n = mode_count(l_max);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  for (int p = 0; p < 2; ++p)
    for (int q = 0; q < 2; ++q)
      m.block(p * n, q * n, n, n).diagonal().setConstant(j(p, q));
  return TransferOperator(l_max, std::move(m));
}

TransferOperator dove_prism(const DPParams& p, Direction dir, int l_max, DpMount mount) {
  const Jones j = dove_prism_jones(p, dir, mount);
  const int n = mode_count(l_max);
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  for (int l = -l_max; l <= l_max; ++l) {
    const cplx ph = dove_prism_oam_phase(p, dir, l);
    const int k = l + l_max;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) m(a * n + k, b * n + k) = ph * j(a, b);
  }
  return TransferOperator(l_max, std::move(m));
}

TransferOperator half_wave_plate(double theta, Direction dir, int l_max) {
  return lift(half_wave_plate_jones(theta, dir), l_max);
}

TransferOperator quarter_wave_plate(double theta, Direction dir, int l_max) {
  return lift(quarter_wave_plate_jones(theta, dir), l_max);
}

TransferOperator polarization_projector(Polarization p, int l_max) {
  Jones j = Jones::Zero();
  j(pol_index(p), pol_index(p)) = 1.0;
  return lift(j, l_max);
}

PbsOutputs pbs_split(const HybridState& state) {
  const int n = mode_count(state.l_max());
  Eigen::VectorXcd h = state.amplitudes();
  Eigen::VectorXcd v = state.amplitudes();
  h.segment(n, n).setZero();
  v.segment(0, n).setZero();
  return {HybridState(state.l_max(), std::move(h)), HybridState(state.l_max(), std::move(v))};
}

HybridState pbs_merge(const HybridState& h_input, const HybridState& v_input) {
  if (h_input.l_max() != v_input.l_max()) {
    throw std::invalid_argument("pbs_merge: mismatched truncation bounds");
  }
  const int n = mode_count(h_input.l_max());
  const double h_leak = h_input.amplitudes().segment(n, n).cwiseAbs().maxCoeff();
  const double v_leak = v_input.amplitudes().segment(0, n).cwiseAbs().maxCoeff();
  if (h_leak > kAlgebraTol || v_leak > kAlgebraTol) {
    throw std::invalid_argument("pbs_merge: cross-polarized leakage in PBS input");
  }
  Eigen::VectorXcd out(2 * n);
  out.segment(0, n) = h_input.amplitudes().segment(0, n);
  out.segment(n, n) = v_input.amplitudes().segment(n, n);
  return HybridState(h_input.l_max(), std::move(out));
}

}  // namespace pmm
