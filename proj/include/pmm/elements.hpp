#pragma once

#include <utility>

#include <Eigen/Dense>

#include "pmm/state.hpp"

namespace pmm {

/// 2x2 polarization (Jones) matrix in the (H, V) basis.
using Jones = Eigen::Matrix2cd;

/// Propagation direction inside a Sagnac loop. Direction b sees every element
/// axis mirrored (theta -> -theta).
enum class Direction { a, b };

/// How a Dove prism's base normal sits relative to the frame its rotation
/// angle is quoted in. `crossed` puts the base normal a quarter turn away,
/// which swaps the roles of t_par and t_perp without changing the OAM phase.
enum class DpMount { aligned, crossed };

inline double effective_angle(double theta, Direction dir) {
  return dir == Direction::a ? theta : -theta;
}

/// Dove-prism physical parameters.
struct DPParams {
  double t_par = 1.0;      // intensity transmission, polarization parallel to base normal
  double t_perp = 1.0;     // intensity transmission, perpendicular
  double delta_phi = 0.0;  // relative TIR phase, wrapped into (-pi, pi]
  double alpha = 0.0;      // rotation angle

  DPParams() = default;
  DPParams(double t_par, double t_perp, double delta_phi, double alpha);

  static DPParams ideal(double alpha) { return DPParams(1.0, 1.0, 0.0, alpha); }
  DPParams with_alpha(double a) const { return DPParams(t_par, t_perp, delta_phi, a); }
};

/// Wraps an angle into (-pi, pi].
double wrap_phase(double phi);

/// [[cos a, sin a], [-sin a, cos a]]
Jones rotator(double angle);

/// R(-alpha) diag(sqrt t_par, sqrt t_perp e^{i dphi}) R(alpha), without the OAM phase.
Jones dove_prism_jones(const DPParams& p, Direction dir, DpMount mount = DpMount::aligned);
/// OAM-dependent phase e^{i 2 l alpha_eff} of one pass.
cplx dove_prism_oam_phase(const DPParams& p, Direction dir, int l);

Jones half_wave_plate_jones(double theta, Direction dir = Direction::a);
Jones quarter_wave_plate_jones(double theta, Direction dir = Direction::a);

/// Lifts a polarization-only matrix to the hybrid space (identity on OAM).
TransferOperator lift(const Jones& j, int l_max);

TransferOperator dove_prism(const DPParams& p, Direction dir, int l_max = kDefaultLmax,
                            DpMount mount = DpMount::aligned);
TransferOperator half_wave_plate(double theta, Direction dir = Direction::a,
                                 int l_max = kDefaultLmax);
TransferOperator quarter_wave_plate(double theta, Direction dir = Direction::a,
                                    int l_max = kDefaultLmax);

/// Projector onto one polarization, lifted to the hybrid space.
TransferOperator polarization_projector(Polarization p, int l_max);

struct PbsOutputs {
  HybridState transmitted;  // H
  HybridState reflected;    // V
};

PbsOutputs pbs_split(const HybridState& state);
/// Recombines the two PBS arms; each input must be purely H / purely V.
HybridState pbs_merge(const HybridState& h_input, const HybridState& v_input);

}  // namespace pmm
