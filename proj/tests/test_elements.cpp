#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "pmm/elements.hpp"

using namespace pmm;
using std::numbers::pi;

namespace {

Jones mat(cplx a, cplx b, cplx c, cplx d) {
  Jones m;
  m << a, b, c, d;
  return m;
}

double diff(const Jones& a, const Jones& b) { return (a - b).cwiseAbs().maxCoeff(); }

}  // namespace

TEST_CASE("rotator") {
  const double a = 0.37;
  CHECK(diff(rotator(a), mat(std::cos(a), std::sin(a), -std::sin(a), std::cos(a))) < kAlgebraTol);
  CHECK(diff(rotator(a) * rotator(-a), Jones::Identity()) < kAlgebraTol);
}

TEST_CASE("half-wave plate matrix") {
  for (double t : {0.0, pi / 8, pi / 4, -0.3, 1.234}) {
    const Jones expected = mat(std::cos(2 * t), std::sin(2 * t), std::sin(2 * t), -std::cos(2 * t));
    CHECK(diff(half_wave_plate_jones(t), expected) < kAlgebraTol);
    CHECK(diff(half_wave_plate_jones(t, Direction::b), half_wave_plate_jones(-t)) < kAlgebraTol);
    CHECK(diff(half_wave_plate_jones(t) * half_wave_plate_jones(t), Jones::Identity()) < kAlgebraTol);
  }
  // HWP at 22.5 deg takes H to diagonal.
  const Eigen::Vector2cd d = half_wave_plate_jones(pi / 8) * Eigen::Vector2cd(1, 0);
  CHECK(std::abs(d(0) - d(1)) < kAlgebraTol);
}

TEST_CASE("quarter-wave plate matrix") {
  CHECK(diff(quarter_wave_plate_jones(0.0), mat(1, 0, 0, cplx(0, 1))) < kAlgebraTol);
  // QWP at 45 deg: (1/sqrt2)-weighted circular retarder, oracle by hand.
  const double h = 0.5;
  const Jones q45 = mat(cplx(h, h), cplx(h, -h), cplx(h, -h), cplx(h, h));
  CHECK(diff(quarter_wave_plate_jones(pi / 4), q45) < kAlgebraTol);
  // Two quarter waves make a half wave up to a global phase.
  const Jones qq = quarter_wave_plate_jones(0.3) * quarter_wave_plate_jones(0.3);
  const Jones hw = half_wave_plate_jones(0.3);
  const cplx phase = qq(0, 0) / hw(0, 0);
  CHECK(diff(qq, phase * hw) < kAlgebraTol);
  CHECK(std::abs(std::abs(phase) - 1.0) < kAlgebraTol);
}

TEST_CASE("DPParams validation and phase wrapping") {
  CHECK_THROWS_AS(DPParams(0.0, 1.0, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(DPParams(1.0, 1.1, 0.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(DPParams(-0.1, 1.0, 0.0, 0.0), std::invalid_argument);
  CHECK(std::abs(DPParams(1, 1, 3 * pi, 0).delta_phi - pi) < kAlgebraTol);
  CHECK(std::abs(DPParams(1, 1, -pi, 0).delta_phi - pi) < kAlgebraTol);
  CHECK(std::abs(wrap_phase(2 * pi + 0.1) - 0.1) < kAlgebraTol);
}

TEST_CASE("Dove prism Jones matrix") {
  const DPParams p(0.8, 0.6, 0.7, 0.4);
  const double c = std::cos(p.alpha), s = std::sin(p.alpha);
  const Jones r = mat(c, s, -s, c);
  const Jones rinv = mat(c, -s, s, c);
  const Jones d = mat(std::sqrt(0.8), 0, 0, std::sqrt(0.6) * std::polar(1.0, 0.7));
  CHECK(diff(dove_prism_jones(p, Direction::a), rinv * d * r) < kAlgebraTol);
  CHECK(diff(dove_prism_jones(p, Direction::b), r * d * rinv) < kAlgebraTol);
  const Jones dx = mat(std::sqrt(0.6) * std::polar(1.0, 0.7), 0, 0, std::sqrt(0.8));
  CHECK(diff(dove_prism_jones(p, Direction::a, DpMount::crossed), rinv * dx * r) < kAlgebraTol);
  // Ideal prism is polarization-neutral at any angle.
  CHECK(diff(dove_prism_jones(DPParams::ideal(1.1), Direction::a), Jones::Identity()) < kAlgebraTol);
}

TEST_CASE("Dove prism OAM phase") {
  const DPParams p = DPParams::ideal(0.3);
  for (int l = -4; l <= 4; ++l) {
    CHECK(std::abs(dove_prism_oam_phase(p, Direction::a, l) - std::polar(1.0, 2 * l * 0.3)) < kAlgebraTol);
    CHECK(std::abs(dove_prism_oam_phase(p, Direction::b, l) - std::polar(1.0, -2 * l * 0.3)) < kAlgebraTol);
  }
  const TransferOperator op = dove_prism(DPParams(0.9, 0.7, 0.2, 0.3), Direction::a, 3);
  const Jones j = dove_prism_jones(DPParams(0.9, 0.7, 0.2, 0.3), Direction::a);
  for (int l = -3; l <= 3; ++l) {
    const cplx ph = std::polar(1.0, 2 * l * 0.3);
    CHECK(std::abs(op.element(Polarization::V, l, Polarization::H, l) - ph * j(1, 0)) < kAlgebraTol);
    CHECK(std::abs(op.element(Polarization::H, l, Polarization::H, l) - ph * j(0, 0)) < kAlgebraTol);
    for (int k = -3; k <= 3; ++k) {
      if (k != l) CHECK(op.element(Polarization::H, k, Polarization::H, l) == cplx(0.0));
    }
  }
}

TEST_CASE("lifted wave plates act identically on every mode") {
  const TransferOperator h = half_wave_plate(0.2, Direction::a, 2);
  const Jones j = half_wave_plate_jones(0.2);
  for (int l = -2; l <= 2; ++l) {
    CHECK(h.element(Polarization::H, l, Polarization::V, l) == j(0, 1));
    CHECK(h.element(Polarization::V, l, Polarization::V, l) == j(1, 1));
  }
  CHECK(h.unitarity_defect() < kAlgebraTol);
  CHECK(quarter_wave_plate(0.7, Direction::b, 2).unitarity_defect() < kAlgebraTol);
}

TEST_CASE("property: lossy Dove prisms are contractions") {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> t(0.01, 1.0), a(-pi, pi);
  for (int i = 0; i < 100; ++i) {
    const DPParams p(t(rng), t(rng), a(rng), a(rng));
    for (auto dir : {Direction::a, Direction::b}) {
      const TransferOperator op = dove_prism(p, dir, 2);
      CHECK(op.operator_norm() <= 1.0 + kAlgebraTol);
      CHECK(std::abs(op.operator_norm() - std::sqrt(std::max(p.t_par, p.t_perp))) < 1e-10);
    }
  }
}

TEST_CASE("property: merging the PBS arms restores the state") {
  std::mt19937_64 rng(22);
  std::normal_distribution<double> g;
  for (int i = 0; i < 50; ++i) {
    const int lm = 1 + i % 4;
    Eigen::VectorXcd v(hybrid_dim(lm));
    for (auto& x : v) x = cplx(g(rng), g(rng));
    const HybridState s(lm, v);
    const PbsOutputs o = pbs_split(s);
    CHECK(o.transmitted.polarization_part(Polarization::V).norm() == 0.0);
    CHECK(o.reflected.polarization_part(Polarization::H).norm() == 0.0);
    CHECK(max_abs_diff(pbs_merge(o.transmitted, o.reflected).amplitudes(), s.amplitudes()) == 0.0);
  }
  const HybridState h = make_state(1, {{Polarization::H, 0, 1.0}});
  CHECK_THROWS_AS(pbs_merge(h, h), std::invalid_argument);
}

TEST_CASE("polarization projectors") {
  const TransferOperator ph = polarization_projector(Polarization::H, 2);
  const TransferOperator pv = polarization_projector(Polarization::V, 2);
  CHECK(max_abs_diff(ph.matrix() + pv.matrix(), Eigen::MatrixXcd::Identity(10, 10)) == 0.0);
  CHECK(max_abs_diff(ph.matrix() * pv.matrix(), Eigen::MatrixXcd::Zero(10, 10)) == 0.0);
}
