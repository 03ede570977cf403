#include <cmath>
#include <numbers>
#include <random>

#include "doctest.h"
#include "pmm/analysis.hpp"
#include "pmm/circuits.hpp"

using namespace pmm;
using std::numbers::pi;

namespace {

// Hand-written 2x2 oracles, independent of the library's element builders.
Jones hwp(double t) {
  Jones m;
  m << std::cos(2 * t), std::sin(2 * t), std::sin(2 * t), -std::cos(2 * t);
  return m;
}

Jones rot(double a) {
  Jones m;
  m << std::cos(a), std::sin(a), -std::sin(a), std::cos(a);
  return m;
}

Jones diag(cplx a, cplx b) {
  Jones m = Jones::Zero();
  m(0, 0) = a;
  m(1, 1) = b;
  return m;
}

double diff(const Jones& a, const Jones& b) { return (a - b).cwiseAbs().maxCoeff(); }

HybridState balanced(int lm, int l) {
  return normalize(make_state(lm, {{Polarization::H, l, 1.0}, {Polarization::V, l, 1.0}}));
}

int mod4(int l) { return ((l % 4) + 4) % 4; }

}  // namespace

TEST_CASE("sandwich diagonalizes the Dove prism") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> t(0.1, 1.0), a(-pi, pi);
  for (int i = 0; i < 40; ++i) {
    const double alpha = a(rng);
    const DPParams dp(t(rng), t(rng), a(rng), alpha);
    const Jones d = diag(std::sqrt(dp.t_par), std::sqrt(dp.t_perp) * std::polar(1.0, dp.delta_phi));
    for (int l = -3; l <= 3; ++l) {
      const Jones expected = std::polar(1.0, 2 * l * alpha) * d;
      CHECK(diff(sandwich_block(dp, alpha / 2, alpha / 2, Direction::a, l), expected) < kAlgebraTol);
      CHECK(diff(mode_block(sandwich(alpha, dp, Direction::a, 3), l), expected) < kAlgebraTol);
      // The mirrored pass gives the conjugate OAM phase with the same polarization action.
      const Jones mirrored = std::polar(1.0, -2 * l * alpha) * d;
      CHECK(diff(sandwich_block(dp, alpha / 2, alpha / 2, Direction::b, l), mirrored) < kAlgebraTol);
    }
  }
}

TEST_CASE("sandwich with explicit element products") {
  const DPParams dp(0.9, 0.7, 0.5, 0.3);
  const double t1 = 0.11, t2 = -0.42;
  const int l = 2;
  const Jones d = diag(std::sqrt(0.9), std::sqrt(0.7) * std::polar(1.0, 0.5));
  const Jones dp_a = rot(-0.3) * d * rot(0.3);
  const Jones dp_b = rot(0.3) * d * rot(-0.3);
  const Jones a = std::polar(1.0, 2 * l * 0.3) * hwp(t2) * dp_a * hwp(t1);
  const Jones b = std::polar(1.0, -2 * l * 0.3) * hwp(-t1) * dp_b * hwp(-t2);
  CHECK(diff(mode_block(sandwich(dp, t1, t2, Direction::a, 3), l), a) < kAlgebraTol);
  CHECK(diff(mode_block(sandwich(dp, t1, t2, Direction::b, 3), l), b) < kAlgebraTol);
}

TEST_CASE("pmm matches the closed form for random parameters") {
  std::mt19937_64 rng(32);
  std::uniform_real_distribution<double> t(0.05, 1.0), a(-pi, pi);
  for (int i = 0; i < 60; ++i) {
    const double alpha = a(rng);
    const DPParams dp(t(rng), t(rng), a(rng), alpha);
    const TransferOperator op = pmm::pmm(alpha, dp, dp, 6);
    const cplx c = std::sqrt(dp.t_par * dp.t_perp) * std::polar(1.0, dp.delta_phi);
    for (int l = -6; l <= 6; ++l) {
      CHECK(diff(mode_block(op, l), diag(c, c * std::polar(1.0, -4.0 * l * alpha))) < kAlgebraTol);
    }
  }
}

TEST_CASE("pmm block helper agrees with the full operator") {
  PmmConfig cfg = PmmConfig::tied(0.4, DPParams(0.9, 0.8, 0.3, 0.4), DPParams(0.7, 0.95, -0.2, 0.4));
  cfg.angles.theta2 += 0.01;
  cfg.angles.theta3 -= 0.02;
  const TransferOperator op = pmm::pmm(cfg, 5);
  for (int l = -5; l <= 5; ++l) CHECK(diff(pmm_block(cfg, l), mode_block(op, l)) < kAlgebraTol);
}

TEST_CASE("pmm with different prisms keeps the closed-form structure") {
  // Each prism contributes its own loss: H and V see sqrt(t_par1 t_perp2), sqrt(t_perp1 t_par2).
  const double alpha = pi / 5;
  const DPParams dp1(0.9, 0.6, 0.4, alpha);
  const DPParams dp2(0.8, 0.7, -0.1, alpha);
  const TransferOperator op = pmm::pmm(alpha, dp1, dp2, 4);
  for (int l = -4; l <= 4; ++l) {
    const Jones b = mode_block(op, l);
    CHECK(std::abs(b(0, 1)) < kAlgebraTol);
    CHECK(std::abs(b(1, 0)) < kAlgebraTol);
    CHECK(std::abs(std::abs(b(0, 0)) - std::sqrt(0.9 * 0.7)) < kAlgebraTol);
    CHECK(std::abs(std::abs(b(1, 1)) - std::sqrt(0.6 * 0.8)) < kAlgebraTol);
  }
}

TEST_CASE("ideal pmm is unitary and lossy pmm contracts") {
  CHECK(pmm::pmm(0.7, DPParams::ideal(0.7), DPParams::ideal(0.7)).unitarity_defect() < kChainTol);
  std::mt19937_64 rng(33);
  std::uniform_real_distribution<double> t(0.05, 1.0), a(-pi, pi);
  for (int i = 0; i < 30; ++i) {
    const double alpha = a(rng);
    const TransferOperator op = pmm::pmm(alpha, DPParams(t(rng), t(rng), a(rng), alpha),
                                    DPParams(t(rng), t(rng), a(rng), alpha), 3);
    CHECK(op.operator_norm() <= 1.0 + kAlgebraTol);
  }
}

TEST_CASE("mismatched prism angles are rejected") {
  CHECK_THROWS_AS(pmm::pmm(0.5, DPParams::ideal(0.4), DPParams::ideal(0.5)), std::invalid_argument);
  CHECK_THROWS_AS(sandwich(0.5, DPParams::ideal(0.4), Direction::a), std::invalid_argument);
}

TEST_CASE("bare Dove prism Sagnac") {
  const double alpha = pi / 4;
  const TransferOperator op = bare_dp_sagnac(alpha, DPParams::ideal(alpha), 5);
  for (int l = -5; l <= 5; ++l) {
    const Jones expected = diag(std::polar(1.0, 2 * l * alpha), std::polar(1.0, -2 * l * alpha));
    CHECK(diff(mode_block(op, l), expected) < kAlgebraTol);
    CHECK(diff(bare_dp_sagnac_block(DPParams::ideal(alpha), l), expected) < kAlgebraTol);
  }
}

TEST_CASE("pbs_sagnac drops cross-polarized leakage") {
  const int lm = 1;
  const TransferOperator a = half_wave_plate(pi / 8, Direction::a, lm);
  const TransferOperator op = pbs_sagnac(a, a);
  for (int l = -1; l <= 1; ++l) {
    const Jones b = mode_block(op, l);
    CHECK(b(0, 1) == cplx(0.0));
    CHECK(b(1, 0) == cplx(0.0));
    CHECK(std::abs(b(0, 0) - std::cos(pi / 4)) < kAlgebraTol);
  }
}

TEST_CASE("detection sends odd orders to port1 after a pi/4 module") {
  const int lm = 10;
  const double alpha = pi / 4;
  const TransferOperator op = pmm::pmm(alpha, DPParams::ideal(alpha), DPParams::ideal(alpha), lm);
  const PortMap ports = detection(pi / 8);
  for (int l = -10; l <= 10; ++l) {
    const HybridState out = apply(op, balanced(lm, l));
    const double i1 = ports.intensity(out, Port::port1);
    const double i2 = ports.intensity(out, Port::port2);
    CHECK(std::abs(i1 + i2 - 1.0) < kAlgebraTol);
    if (l % 2 != 0) CHECK(std::abs(i1 - 1.0) < kAlgebraTol);
    else CHECK(std::abs(i2 - 1.0) < kAlgebraTol);
  }
}

TEST_CASE("port accepted polarization exits completely") {
  const PortMap ports = detection(0.3);
  for (auto port : {Port::port1, Port::port2}) {
    const Eigen::Vector2cd v = ports.accepted_polarization(port);
    CHECK(std::abs(v.norm() - 1.0) < kAlgebraTol);
    CHECK(std::abs((ports.analyzer(port) * v).norm() - 1.0) < kAlgebraTol);
    const Port other = port == Port::port1 ? Port::port2 : Port::port1;
    CHECK((ports.analyzer(other) * v).norm() < kAlgebraTol);
  }
}

TEST_CASE("cascade separates odd orders by residue mod 4") {
  const int lm = 10;
  const PortMap ports = detection(pi / 8);
  const TransferOperator first = pmm::pmm(pi / 4, DPParams::ideal(pi / 4), DPParams::ideal(pi / 4), lm);
  const TransferOperator second = pmm2_stage(DPParams::ideal(pi / 8), DPParams::ideal(pi / 8), lm);
  const TransferOperator chain =
      cascade({first, PortSelection::from_port(ports, Port::port1), second}, lm);
  for (int l = -9; l <= 9; l += 2) {
    const HybridState out = apply(chain, balanced(lm, l));
    const double i1 = ports.intensity(out, Port::port1);
    const double i2 = ports.intensity(out, Port::port2);
    CHECK(std::abs(i1 + i2 - 1.0) < kChainTol);
    if (mod4(l) == 1) CHECK(std::abs(i1 - 1.0) < kChainTol);
    else CHECK(std::abs(i2 - 1.0) < kChainTol);
  }
  // Even orders leave at the first port2 and never reach the second module.
  CHECK(apply(chain, balanced(lm, 2)).norm_squared() < kAlgebraTol);
}

TEST_CASE("cascade equals the hand-multiplied chain") {
  const int lm = 4;
  const double a1 = pi / 4, a2 = pi / 8;
  const PortMap ports = detection(pi / 8);
  const TransferOperator chain =
      cascade({pmm::pmm(a1, DPParams::ideal(a1), DPParams::ideal(a1), lm),
               PortSelection::from_port(ports, Port::port1),
               pmm2_stage(DPParams::ideal(a2), DPParams::ideal(a2), lm)},
              lm);
  // Oracle: ideal module blocks diag(1, e^{-i4 l a}), selector |d><d| with d = HWP(pi/8) V.
  const Eigen::Vector2cd d = hwp(pi / 8) * Eigen::Vector2cd(0, 1);
  const Jones sel = d * d.adjoint();
  for (int l = -lm; l <= lm; ++l) {
    const Jones m1 = diag(1, std::polar(1.0, -4 * l * a1));
    const Jones m2 = diag(1, std::polar(1.0, -4 * l * a2)) * diag(1, cplx(0, 1));
    const Jones expected = m2 * sel * m1;
    const Jones got = mode_block(chain, l);
    // Ideal prisms contribute no global phase; compare directly.
    CHECK(diff(got, expected) < kChainTol);
  }
}

TEST_CASE("cascade rejects adjacent selections") {
  const PortSelection s = PortSelection::polarization(Polarization::H);
  CHECK_THROWS(cascade({s, s}, 2));
}

TEST_CASE("rotation error of the whole module follows the cosine law") {
  for (int l = 1; l <= 10; ++l) {
    for (double deg : {0.0, 0.3, 1.0, 2.0}) {
      const double d = deg * pi / 180;
      CHECK(std::abs(simulated_rotation_error_fidelity(l, d) - (1 + std::cos(4 * l * d)) / 2) < kAlgebraTol);
    }
  }
}

TEST_CASE("circuit spec resolves tied angles") {
  CircuitSpec s;
  s.kind = CircuitKind::pmm;
  s.angles["alpha"] = pi / 4;
  s.prisms["dp1"] = DPParams::ideal(0.0);
  s.prisms["dp2"] = DPParams::ideal(0.0);
  const CircuitSpec r = s.resolved();
  CHECK(r.angle("theta1") == doctest::Approx(pi / 8));
  CHECK(r.angle("theta2") == doctest::Approx(pi / 8));
  CHECK(r.angle("theta3") == doctest::Approx(-pi / 8));
  CHECK(r.angle("theta4") == doctest::Approx(-pi / 8));
  CHECK(r.prisms.at("dp1").alpha == doctest::Approx(pi / 4));
  CHECK(max_abs_diff(build(s).matrix(), pmm::pmm(pi / 4, DPParams::ideal(pi / 4), DPParams::ideal(pi / 4)).matrix()) < kAlgebraTol);

  CircuitSpec missing;
  missing.kind = CircuitKind::pmm;
  missing.prisms = s.prisms;
  CHECK_THROWS_AS(missing.resolved(), std::invalid_argument);

  for (auto k : {CircuitKind::sandwich, CircuitKind::bare_dp_sagnac, CircuitKind::sandwich_sagnac,
                 CircuitKind::pmm, CircuitKind::pmm2_stage, CircuitKind::detection,
                 CircuitKind::custom_sequence}) {
    CHECK(circuit_kind_from_string(to_string(k)) == k);
  }
}

TEST_CASE("custom sequence reproduces a sandwich") {
  CircuitSpec s;
  s.kind = CircuitKind::custom_sequence;
  s.l_max = 3;
  const DPParams dp(0.9, 0.8, 0.2, 0.0);
  s.sequence = {{ElementKind::hwp, 0.2, Direction::a, {}},
                {ElementKind::dove_prism, 0.4, Direction::a, dp},
                {ElementKind::hwp, 0.2, Direction::a, {}}};
  CHECK(max_abs_diff(build(s).matrix(), sandwich(dp.with_alpha(0.4), 0.2, 0.2, Direction::a, 3).matrix()) < kAlgebraTol);
}
