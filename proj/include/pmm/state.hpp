#pragma once

#include <complex>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace pmm {

using cplx = std::complex<double>;

inline constexpr int kDefaultLmax = 10;

// Tolerances in max-entry norm.
inline constexpr double kAlgebraTol = 1e-12;
inline constexpr double kChainTol = 1e-10;

enum class Polarization { H = 0, V = 1 };

inline constexpr int pol_index(Polarization p) { return static_cast<int>(p); }

/// Signed OAM order bounded by a truncation |l| <= l_max.
class ModeIndex {
 public:
  ModeIndex(int l, int l_max);

  int value() const { return l_; }
  int l_max() const { return l_max_; }

 private:
  int l_;
  int l_max_;
};

/// Number of OAM modes kept for a truncation bound.
inline constexpr int mode_count(int l_max) { return 2 * l_max + 1; }
/// Dimension of the spin-OAM space: 2 * (2 l_max + 1).
inline constexpr int hybrid_dim(int l_max) { return 2 * mode_count(l_max); }

/// Canonical ordering is polarization-major, l ascending:
/// index = pol * (2 l_max + 1) + (l + l_max).
int canonical_index(Polarization p, int l, int l_max);

/**
 * Amplitude vector over the (polarization x OAM) basis.
 *
 * Immutable once built. The truncation bound travels with the state and is
 * never changed implicitly; use embed()/truncate() to move between bounds.
 */
class HybridState {
 public:
  HybridState(int l_max, Eigen::VectorXcd amplitudes, bool normalized = false);

  static HybridState zero(int l_max);

  int l_max() const { return l_max_; }
  int dim() const { return static_cast<int>(amps_.size()); }
  bool normalized() const { return normalized_; }

  const Eigen::VectorXcd& amplitudes() const { return amps_; }
  cplx amplitude(Polarization p, int l) const;

  double norm_squared() const { return amps_.squaredNorm(); }

  /// OAM amplitudes for one polarization, index l + l_max.
  Eigen::VectorXcd polarization_part(Polarization p) const;

 private:
  int l_max_;
  Eigen::VectorXcd amps_;
  bool normalized_;
};

/// Square operator over the same basis as HybridState.
class TransferOperator {
 public:
  TransferOperator(int l_max, Eigen::MatrixXcd matrix);

  static TransferOperator identity(int l_max);
  static TransferOperator zero(int l_max);

  int l_max() const { return l_max_; }
  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXcd& matrix() const { return m_; }

  cplx element(Polarization out_p, int out_l, Polarization in_p, int in_l) const;

  /// Max-entry norm of U^dagger U - I.
  double unitarity_defect() const;
  /// Largest singular value.
  double operator_norm() const;

 private:
  int l_max_;
  Eigen::MatrixXcd m_;
};

struct StateEntry {
  Polarization pol;
  int l;
  cplx amplitude;
};

/// Places amplitudes at canonical indices; repeated keys add. Not normalized.
HybridState make_state(int l_max, std::span<const StateEntry> entries);
HybridState make_state(int l_max, std::initializer_list<StateEntry> entries);

HybridState normalize(const HybridState& state);

/// Conjugate-linear in the first argument.
cplx inner_product(const HybridState& a, const HybridState& b);

HybridState apply(const TransferOperator& op, const HybridState& state);

/// Composes in propagation order: ops[0] acts first. Empty list is the identity.
TransferOperator compose(std::span<const TransferOperator> ops, int l_max);
TransferOperator compose(std::initializer_list<TransferOperator> ops);

/// Widens the truncation bound with zero padding.
HybridState embed(const HybridState& state, int new_l_max);
/// Narrows the truncation bound; throws if more than 1e-12 of amplitude is lost.
HybridState truncate(const HybridState& state, int new_l_max);

double max_abs_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);

}  // namespace pmm
