#include "pmm/circuits.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

namespace pmm {

using std::numbers::pi;

namespace {

constexpr double kAngleTieTol = 1e-12;

void require_tied(double a, double b, const char* what) {
  if (std::abs(a - b) > kAngleTieTol) {
    throw std::invalid_argument(std::string(what) + ": Dove prism angle " + std::to_string(a) +
                                " does not match module angle " + std::to_string(b));
  }
}

Jones diag2(cplx h, cplx v) {
  Jones j = Jones::Zero();
  j(0, 0) = h;
  j(1, 1) = v;
  return j;
}

// The compensation prism is seen with its rotation mirrored relative to DP1 and
// its base normal crossed to the image of H under HWP3, so HWP3 sends H onto
// the perpendicular axis and the t_par / t_perp roles swap.
constexpr Direction kDp2Direction = Direction::b;
constexpr DpMount kDp2Mount = DpMount::crossed;

}  // namespace

PmmAngles PmmAngles::tied(double alpha) {
  return {alpha / 2.0, alpha / 2.0, -alpha / 2.0, -alpha / 2.0};
}

PmmConfig PmmConfig::tied(double alpha, const DPParams& dp1, const DPParams& dp2) {
  require_tied(dp1.alpha, alpha, "pmm DP1");
  require_tied(dp2.alpha, alpha, "pmm DP2");
  return {dp1, dp2, PmmAngles::tied(alpha)};
}

PmmConfig PmmConfig::ideal(double alpha) {
  return tied(alpha, DPParams::ideal(alpha), DPParams::ideal(alpha));
}

TransferOperator sandwich(double alpha, const DPParams& dp, Direction dir, int l_max) {
  require_tied(dp.alpha, alpha, "sandwich");
  return sandwich(dp, alpha / 2.0, alpha / 2.0, dir, l_max);
}

TransferOperator sandwich(const DPParams& dp, double theta1, double theta2, Direction dir,
                          int l_max) {
  const double first = dir == Direction::a ? theta1 : theta2;
  const double last = dir == Direction::a ? theta2 : theta1;
  return compose({half_wave_plate(first, dir, l_max), dove_prism(dp, dir, l_max),
                  half_wave_plate(last, dir, l_max)});
}

TransferOperator pbs_sagnac(const TransferOperator& inner_a, const TransferOperator& inner_b) {
  if (inner_a.l_max() != inner_b.l_max()) {
    throw std::invalid_argument("pbs_sagnac: inner operators differ in dimension");
  }
  const int n = mode_count(inner_a.l_max());
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
  m.block(0, 0, n, n) = inner_a.matrix().block(0, 0, n, n);
  m.block(n, n, n, n) = inner_b.matrix().block(n, n, n, n);
  return TransferOperator(inner_a.l_max(), std::move(m));
}

TransferOperator pmm(double alpha, const DPParams& dp1, const DPParams& dp2, int l_max) {
  return pmm(PmmConfig::tied(alpha, dp1, dp2), l_max);
}

TransferOperator pmm(const PmmConfig& cfg, int l_max) {
  const auto& a = cfg.angles;
  const TransferOperator loop =
      pbs_sagnac(sandwich(cfg.dp1, a.theta1, a.theta2, Direction::a, l_max),
                 sandwich(cfg.dp1, a.theta1, a.theta2, Direction::b, l_max));
  return compose({loop, half_wave_plate(a.theta3, Direction::a, l_max),
                  dove_prism(cfg.dp2, kDp2Direction, l_max, kDp2Mount),
                  half_wave_plate(a.theta4, Direction::a, l_max)});
}

TransferOperator bare_dp_sagnac(double alpha, const DPParams& dp, int l_max) {
  const DPParams p = dp.with_alpha(alpha);
  return pbs_sagnac(dove_prism(p, Direction::a, l_max), dove_prism(p, Direction::b, l_max));
}

TransferOperator pmm2_stage(const DPParams& dp3, const DPParams& dp4, int l_max) {
  const PmmConfig cfg = PmmConfig::tied(dp3.alpha, dp3, dp4);
  return compose({quarter_wave_plate(0.0, Direction::a, l_max), pmm(cfg, l_max)});
}

Jones sandwich_block(const DPParams& dp, double theta1, double theta2, Direction dir, int l) {
  const double first = dir == Direction::a ? theta1 : theta2;
  const double last = dir == Direction::a ? theta2 : theta1;
  return dove_prism_oam_phase(dp, dir, l) * half_wave_plate_jones(last, dir) *
         dove_prism_jones(dp, dir) * half_wave_plate_jones(first, dir);
}

Jones pmm_block(const PmmConfig& cfg, int l) {
  const auto& a = cfg.angles;
  const Jones sa = sandwich_block(cfg.dp1, a.theta1, a.theta2, Direction::a, l);
  const Jones sb = sandwich_block(cfg.dp1, a.theta1, a.theta2, Direction::b, l);
  const Jones stage = dove_prism_oam_phase(cfg.dp2, kDp2Direction, l) *
                      half_wave_plate_jones(a.theta4) *
                      dove_prism_jones(cfg.dp2, kDp2Direction, kDp2Mount) *
                      half_wave_plate_jones(a.theta3);
  return stage * diag2(sa(0, 0), sb(1, 1));
}

Jones bare_dp_sagnac_block(const DPParams& dp, int l) {
  const cplx h = dove_prism_oam_phase(dp, Direction::a, l) * dove_prism_jones(dp, Direction::a)(0, 0);
  const cplx v = dove_prism_oam_phase(dp, Direction::b, l) * dove_prism_jones(dp, Direction::b)(1, 1);
  return diag2(h, v);
}

Jones mode_block(const TransferOperator& op, int l) {
  const int lm = op.l_max();
  Jones j;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      j(a, b) = op.matrix()(canonical_index(static_cast<Polarization>(a), l, lm),
                            canonical_index(static_cast<Polarization>(b), l, lm));
  return j;
}

Jones PortMap::analyzer(Port port) const {
  const Jones p = port == Port::port1 ? diag2(0.0, 1.0) : diag2(1.0, 0.0);
  return p * half_wave_plate_jones(theta);
}

Eigen::Vector2cd PortMap::accepted_polarization(Port port) const {
  const Eigen::Vector2cd e = port == Port::port1 ? Eigen::Vector2cd(0.0, 1.0)
                                                 : Eigen::Vector2cd(1.0, 0.0);
  // HWP is a real symmetric involution, so its adjoint is itself.
  return half_wave_plate_jones(theta) * e;
}

Eigen::VectorXcd PortMap::port_amplitudes(const HybridState& state, Port port) const {
  const Jones an = analyzer(port);
  const int row = port == Port::port1 ? 1 : 0;
  const Eigen::VectorXcd h = state.polarization_part(Polarization::H);
  const Eigen::VectorXcd v = state.polarization_part(Polarization::V);
  return an(row, 0) * h + an(row, 1) * v;
}

double PortMap::intensity(const HybridState& state, Port port) const {
  return port_amplitudes(state, port).squaredNorm();
}

PortMap detection(double theta) {
  if (!std::isfinite(theta)) throw std::invalid_argument("detection: non-finite angle");
  return PortMap{theta};
}

PortSelection PortSelection::from_port(const PortMap& map, Port port) {
  const Eigen::Vector2cd d = map.accepted_polarization(port);
  return {d * d.adjoint()};
}

PortSelection PortSelection::polarization(Polarization p) {
  Jones j = Jones::Zero();
  j(pol_index(p), pol_index(p)) = 1.0;
  return {j};
}

TransferOperator cascade(const std::vector<CascadeStage>& stages, int l_max) {
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(hybrid_dim(l_max), hybrid_dim(l_max));
  bool last_was_selection = false;
  for (const auto& stage : stages) {
    if (const auto* op = std::get_if<TransferOperator>(&stage)) {
      if (op->l_max() != l_max) throw std::invalid_argument("cascade: dimension mismatch");
      acc = op->matrix() * acc;
      last_was_selection = false;
    } else {
      if (last_was_selection) {
        throw std::invalid_argument("cascade: consecutive port selections");
      }
      acc = lift(std::get<PortSelection>(stage).projector, l_max).matrix() * acc;
      last_was_selection = true;
    }
  }
  return TransferOperator(l_max, std::move(acc));
}

std::string to_string(CircuitKind k) {
  switch (k) {
    case CircuitKind::sandwich: return "sandwich";
    case CircuitKind::bare_dp_sagnac: return "bare_dp_sagnac";
    case CircuitKind::sandwich_sagnac: return "sandwich_sagnac";
    case CircuitKind::pmm: return "pmm";
    case CircuitKind::pmm2_stage: return "pmm2_stage";
    case CircuitKind::detection: return "detection";
    case CircuitKind::custom_sequence: return "custom_sequence";
  }
  return "unknown";
}

std::optional<CircuitKind> circuit_kind_from_string(const std::string& s) {
  for (auto k : {CircuitKind::sandwich, CircuitKind::bare_dp_sagnac, CircuitKind::sandwich_sagnac,
                 CircuitKind::pmm, CircuitKind::pmm2_stage, CircuitKind::detection,
                 CircuitKind::custom_sequence}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

double CircuitSpec::angle(const std::string& name) const {
  auto it = angles.find(name);
  if (it == angles.end()) {
    throw std::invalid_argument(to_string(kind) + " circuit requires angle '" + name + "'");
  }
  return it->second;
}

CircuitSpec CircuitSpec::resolved() const {
  CircuitSpec r = *this;
  auto need_prism = [&](const char* name) {
    if (!r.prisms.count(name)) {
      throw std::invalid_argument(to_string(kind) + " circuit requires prism '" + name + "'");
    }
  };
  auto default_angle = [&](const char* name, double v) { r.angles.try_emplace(name, v); };

  switch (kind) {
    case CircuitKind::pmm2_stage:
      default_angle("alpha", pi / 8.0);
      [[fallthrough]];
    case CircuitKind::pmm: {
      const double alpha = r.angle("alpha");
      need_prism("dp1");
      need_prism("dp2");
      default_angle("alpha1", alpha);
      default_angle("alpha2", alpha);
      const PmmAngles t = PmmAngles::tied(alpha);
      default_angle("theta1", t.theta1);
      default_angle("theta2", t.theta2);
      default_angle("theta3", t.theta3);
      default_angle("theta4", t.theta4);
      r.prisms["dp1"] = r.prisms["dp1"].with_alpha(r.angles["alpha1"]);
      r.prisms["dp2"] = r.prisms["dp2"].with_alpha(r.angles["alpha2"]);
      break;
    }
    case CircuitKind::sandwich:
    case CircuitKind::sandwich_sagnac: {
      const double alpha = r.angle("alpha");
      need_prism("dp1");
      default_angle("alpha1", alpha);
      default_angle("theta1", alpha / 2.0);
      default_angle("theta2", alpha / 2.0);
      r.prisms["dp1"] = r.prisms["dp1"].with_alpha(r.angles["alpha1"]);
      break;
    }
    case CircuitKind::bare_dp_sagnac: {
      const double alpha = r.angle("alpha");
      need_prism("dp1");
      r.prisms["dp1"] = r.prisms["dp1"].with_alpha(alpha);
      break;
    }
    case CircuitKind::detection:
      default_angle("detection_theta", pi / 8.0);
      break;
    case CircuitKind::custom_sequence:
      if (r.sequence.empty()) {
        throw std::invalid_argument("custom_sequence circuit requires at least one element");
      }
      break;
  }
  return r;
}

PmmConfig CircuitSpec::pmm_config() const {
  const CircuitSpec r = resolved();
  if (r.kind != CircuitKind::pmm && r.kind != CircuitKind::pmm2_stage) {
    throw std::invalid_argument("pmm_config: circuit is " + to_string(r.kind));
  }
  return {r.prisms.at("dp1"), r.prisms.at("dp2"),
          {r.angles.at("theta1"), r.angles.at("theta2"), r.angles.at("theta3"),
           r.angles.at("theta4")}};
}

TransferOperator build(const CircuitSpec& spec) {
  const CircuitSpec r = spec.resolved();
  const int lm = r.l_max;
  switch (r.kind) {
    case CircuitKind::sandwich:
      return sandwich(r.prisms.at("dp1"), r.angles.at("theta1"), r.angles.at("theta2"),
                      Direction::a, lm);
    case CircuitKind::sandwich_sagnac: {
      const auto& dp = r.prisms.at("dp1");
      const double t1 = r.angles.at("theta1");
      const double t2 = r.angles.at("theta2");
      return pbs_sagnac(sandwich(dp, t1, t2, Direction::a, lm),
                        sandwich(dp, t1, t2, Direction::b, lm));
    }
    case CircuitKind::bare_dp_sagnac:
      return bare_dp_sagnac(r.angles.at("alpha"), r.prisms.at("dp1"), lm);
    case CircuitKind::pmm:
      return pmm(r.pmm_config(), lm);
    case CircuitKind::pmm2_stage:
      return compose({quarter_wave_plate(0.0, Direction::a, lm), pmm(r.pmm_config(), lm)});
    case CircuitKind::detection:
      return half_wave_plate(r.angles.at("detection_theta"), Direction::a, lm);
    case CircuitKind::custom_sequence: {
      std::vector<TransferOperator> ops;
      ops.reserve(r.sequence.size());
      for (const auto& e : r.sequence) {
        switch (e.kind) {
          case ElementKind::hwp: ops.push_back(half_wave_plate(e.angle, e.direction, lm)); break;
          case ElementKind::qwp: ops.push_back(quarter_wave_plate(e.angle, e.direction, lm)); break;
          case ElementKind::dove_prism:
            ops.push_back(dove_prism(e.dp.with_alpha(e.angle), e.direction, lm));
            break;
        }
      }
      return compose(ops, lm);
    }
  }
  throw std::logic_error("build: unhandled circuit kind");
}

}  // namespace pmm
