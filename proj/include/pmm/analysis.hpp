#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pmm/circuits.hpp"
#include "pmm/elements.hpp"
#include "pmm/state.hpp"

namespace pmm {

/// F = I_max / (I_max + I_min). Caller orders the intensities.
double sorting_fidelity(double i_max, double i_min);
/// Orders two port intensities and returns the sorting fidelity.
double sorting_fidelity_unordered(double a, double b);

struct SampleSummary {
  double mean = 0.0;
  double stddev = 0.0;
  std::size_t count = 0;
};

struct FidelityReport {
  std::map<std::string, double> port_intensities;
  double sorting_fidelity = 1.0;
  std::optional<double> process_fidelity;
  std::optional<SampleSummary> samples;
  std::vector<std::string> notes;
};

/// Port intensities of a state at a detection module.
FidelityReport measure(const HybridState& state, const PortMap& ports);

/// Normalized OAM overlap of two states within one polarization:
/// |<a_p|b_p>| / (|a_p| |b_p|), or 0 when either part vanishes.
double oam_overlap(const HybridState& a, const HybridState& b, Polarization p);

/// OAM modes {0, ..., D-1}.
std::vector<int> default_modes(int D);

/// diag(e^{i 2 pi l / N}) over the mode list (D x D, OAM only).
Eigen::MatrixXcd zgate_target(int D, int N, std::span<const int> modes = {},
                              int l_max = kDefaultLmax);

enum class PhaseSign {
  as_written,  // e^{+i 2 pi l / N} on V
  conjugated,  // e^{-i 2 pi l / N}, the sign a PMM at pi/(2N) realizes
};

/// Identity on H; Z-gate phases on V for the listed modes; identity elsewhere.
TransferOperator cphase_target(int D, int N, int l_max = kDefaultLmax,
                               std::span<const int> modes = {},
                               PhaseSign sign = PhaseSign::as_written);

/// |Tr(T^dagger A)| / dim. The target must be unitary.
double process_fidelity(const TransferOperator& actual, const TransferOperator& target);
/// Same, restricted to the (H, l), (V, l) rows and columns of the listed modes.
double process_fidelity(const TransferOperator& actual, const TransferOperator& target,
                        std::span<const int> modes);

struct GateCheck {
  int N = 2;
  int D = 2;
  double alpha = 0.0;
  double process_fidelity = 0.0;
  std::string sign_convention;
};

/// Compares pmm(pi/(2N)) with the sign-aligned C-phase target on modes 0..D-1.
GateCheck cphase_gate_check(int N, int D, const DPParams& dp = DPParams::ideal(0.0),
                            int l_max = kDefaultLmax);

/// (1 + cos(4 l delta)) / 2
double rotation_error_fidelity(int l, double delta);

/// Sorting fidelity of (H+V)|l> through pmm(alpha + delta) and detection(pi/8).
double simulated_rotation_error_fidelity(int l, double delta,
                                         const DPParams& dp = DPParams::ideal(0.0),
                                         double alpha = std::numbers::pi / 4.0,
                                         int l_max = kDefaultLmax);

enum class ErrorDistribution { fixed, uniform };
enum class ElementId { dp1, dp2, hwp1, hwp2, hwp3, hwp4 };

std::string to_string(ElementId id);
std::optional<ElementId> element_id_from_string(const std::string& s);

/**
 * Angular error model for a PMM.
 *
 * `delta` is the lumped rotation error: the whole module is built at
 * alpha + delta with tied plates. `per_element` errors are added on top to
 * individual prisms/plates. For the uniform distribution every value is a
 * half-width and each draw is U[-b, b].
 */
struct ErrorModel {
  double delta = 0.0;
  std::map<ElementId, double> per_element;
  ErrorDistribution distribution = ErrorDistribution::fixed;

  void validate() const;
};

struct MonteCarloProblem {
  int l = 1;
  ErrorModel model;
  std::uint64_t seed = 0;
  double alpha = std::numbers::pi / 4.0;
  DPParams dp1 = DPParams::ideal(0.0);  // transmissions and phase; angle from alpha
  DPParams dp2 = DPParams::ideal(0.0);
  double detection_theta = std::numbers::pi / 8.0;
};

/// PMM configuration for one Monte-Carlo draw. Pure in (problem, index).
PmmConfig draw_configuration(const MonteCarloProblem& p, std::size_t index);
/// Sorting fidelity of one draw.
double mc_sample_fidelity(const MonteCarloProblem& p, std::size_t index);

SampleSummary summarize(std::span<const double> values);

FidelityReport monte_carlo_fidelity(const MonteCarloProblem& p, std::size_t samples);
FidelityReport monte_carlo_fidelity(int l, const ErrorModel& model, std::size_t samples,
                                    std::uint64_t seed);

/// Polarization-only compensator with three free angles:
/// [[e^{ib} cos a, e^{ic} sin a], [-e^{-ic} sin a, e^{-ib} cos a]].
Jones compensator(const std::array<double, 3>& angles);

/**
 * Compensation target for a bare-DP Sagnac: after an l-independent compensator
 * the canonical input (H+V)|l> should leave as (H + e^{-i4 l alpha} V)|l> for
 * every listed mode. Each mode is compared up to its own phase and loss.
 */
struct CompensationProblem {
  std::vector<int> modes;
  std::vector<Jones> blocks;
  double alpha = 0.0;
};

CompensationProblem make_compensation_problem(const TransferOperator& baseline,
                                              std::vector<int> modes, double alpha);

/// 1 - mean over modes of the normalized state fidelity.
double compensation_residual(const CompensationProblem& p, const std::array<double, 3>& angles);

struct RestartResult {
  double residual = 1.0;
  std::array<double, 3> angles{};
};

/// One Nelder-Mead run from a start point seeded by (seed, index).
RestartResult compensation_restart(const CompensationProblem& p, std::uint64_t seed,
                                   std::size_t index);

/// Best residual over `restarts` seeded local searches.
double compensation_search(const CompensationProblem& p, int restarts, std::uint64_t seed);
double compensation_search(const TransferOperator& baseline, int D, double alpha, int restarts,
                           std::uint64_t seed);

}  // namespace pmm
