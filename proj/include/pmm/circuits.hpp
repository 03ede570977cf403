#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "pmm/elements.hpp"
#include "pmm/state.hpp"

namespace pmm {

/// Wave-plate angles of a PMM. HWP1/HWP2 flank DP1 inside the loop, HWP3/HWP4
/// flank DP2 in the compensation stage.
struct PmmAngles {
  double theta1 = 0.0;
  double theta2 = 0.0;
  double theta3 = 0.0;
  double theta4 = 0.0;

  /// theta1 = theta2 = alpha/2, theta3 = theta4 = -alpha/2.
  static PmmAngles tied(double alpha);
};

/// Full PMM configuration. dp1.alpha / dp2.alpha are the prism angles; the
/// tied settings use dp1.alpha == dp2.alpha == alpha.
struct PmmConfig {
  DPParams dp1;
  DPParams dp2;
  PmmAngles angles;

  static PmmConfig tied(double alpha, const DPParams& dp1, const DPParams& dp2);
  static PmmConfig ideal(double alpha);
};

// Sandwich HWP(theta1)-DP-HWP(theta2). Direction b traverses the stack in reverse
// with mirrored axes.
TransferOperator sandwich(double alpha, const DPParams& dp, Direction dir,
                          int l_max = kDefaultLmax);
TransferOperator sandwich(const DPParams& dp, double theta1, double theta2, Direction dir,
                          int l_max = kDefaultLmax);

/// PBS single-path Sagnac: H circulates in direction a, V in direction b.
/// Cross-polarized light leaving either arm exits the wrong PBS port and is dropped.
TransferOperator pbs_sagnac(const TransferOperator& inner_a, const TransferOperator& inner_b);

TransferOperator pmm(double alpha, const DPParams& dp1, const DPParams& dp2,
                     int l_max = kDefaultLmax);
TransferOperator pmm(const PmmConfig& cfg, int l_max = kDefaultLmax);

/// Sagnac with a lone Dove prism in the loop and no compensation stage.
TransferOperator bare_dp_sagnac(double alpha, const DPParams& dp, int l_max = kDefaultLmax);

/// QWP(0) followed by a PMM at pi/8 (HWPs at +-pi/16).
TransferOperator pmm2_stage(const DPParams& dp3, const DPParams& dp4,
                            int l_max = kDefaultLmax);

// Per-mode 2x2 blocks of the same circuits. Every element here is block
// diagonal in l, so a single mode can be evaluated without the full operator.
Jones sandwich_block(const DPParams& dp, double theta1, double theta2, Direction dir, int l);
Jones pmm_block(const PmmConfig& cfg, int l);
Jones bare_dp_sagnac_block(const DPParams& dp, int l);

/// 2x2 block of a block-diagonal operator at mode l.
Jones mode_block(const TransferOperator& op, int l);

enum class Port { port1, port2 };

/**
 * Detection module: HWP(theta) then a PBS. port1 is the reflected (V) arm,
 * port2 the transmitted (H) arm. With theta = pi/8 after a PMM at pi/4, odd
 * orders leave through port1 and even orders through port2.
 */
struct PortMap {
  double theta = 0.0;

  /// Amplitude map of a port: P_port * HWP(theta).
  Jones analyzer(Port port) const;
  /// Polarization (pre-detection frame) that exits the port completely.
  Eigen::Vector2cd accepted_polarization(Port port) const;

  double intensity(const HybridState& state, Port port) const;
  /// OAM amplitudes reaching a port, index l + l_max.
  Eigen::VectorXcd port_amplitudes(const HybridState& state, Port port) const;
};

PortMap detection(double theta);

/// Projector used between cascade stages. Built from a detection port it keeps
/// the accepted polarization in the pre-detection frame; built from H/V it is
/// a bare polarizer.
struct PortSelection {
  Jones projector;

  static PortSelection from_port(const PortMap& map, Port port);
  static PortSelection polarization(Polarization p);
};

using CascadeStage = std::variant<TransferOperator, PortSelection>;

/// Chains operators with optional port projections in between. Selections are
/// intensity-lossy and nothing is renormalized.
TransferOperator cascade(const std::vector<CascadeStage>& stages, int l_max);

enum class CircuitKind {
  sandwich,
  bare_dp_sagnac,
  sandwich_sagnac,
  pmm,
  pmm2_stage,
  detection,
  custom_sequence,
};

std::string to_string(CircuitKind k);
std::optional<CircuitKind> circuit_kind_from_string(const std::string& s);

enum class ElementKind { hwp, qwp, dove_prism };

struct ElementSpec {
  ElementKind kind = ElementKind::hwp;
  double angle = 0.0;  // wave-plate axis, or Dove prism rotation
  Direction direction = Direction::a;
  DPParams dp;         // Dove prism only; dp.alpha is overwritten by angle
};

/**
 * Declarative circuit description.
 *
 * Named angles: alpha, theta1..theta4, detection_theta. Named prisms: dp1, dp2
 * (their alpha fields are taken from `alpha` unless alpha1/alpha2 are given).
 * Tied wave-plate angles are derived in resolve() and may be overridden.
 */
struct CircuitSpec {
  CircuitKind kind = CircuitKind::pmm;
  std::map<std::string, double> angles;
  std::map<std::string, DPParams> prisms;
  std::vector<ElementSpec> sequence;
  int l_max = kDefaultLmax;

  /// Applies defaults and checks the kind's required parameters.
  CircuitSpec resolved() const;
  PmmConfig pmm_config() const;
  double angle(const std::string& name) const;
};

TransferOperator build(const CircuitSpec& spec);

}  // namespace pmm
