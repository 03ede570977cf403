#include "pmm/state.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace pmm {

namespace {

void require_bound(int l_max) {
  if (l_max < 0) throw std::invalid_argument("truncation bound must be non-negative");
}

void require_same_bound(int a, int b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": mismatched truncation bounds (" +
                                std::to_string(a) + " vs " + std::to_string(b) + ")");
  }
}

}  // namespace

ModeIndex::ModeIndex(int l, int l_max) : l_(l), l_max_(l_max) {
  require_bound(l_max);
  if (std::abs(l) > l_max) {
    throw std::out_of_range("OAM order " + std::to_string(l) + " outside |l| <= " +
                            std::to_string(l_max));
  }
}

int canonical_index(Polarization p, int l, int l_max) {
  ModeIndex m(l, l_max);
  return pol_index(p) * mode_count(l_max) + (m.value() + l_max);
}

HybridState::HybridState(int l_max, Eigen::VectorXcd amplitudes, bool normalized)
    : l_max_(l_max), amps_(std::move(amplitudes)), normalized_(normalized) {
  require_bound(l_max);
  if (amps_.size() != hybrid_dim(l_max)) {
    throw std::invalid_argument("state length " + std::to_string(amps_.size()) +
                                " does not match 2(2l_max+1) = " +
                                std::to_string(hybrid_dim(l_max)));
  }
  if (normalized_ && std::abs(amps_.squaredNorm() - 1.0) > kAlgebraTol) {
    throw std::invalid_argument("state flagged normalized but has squared norm " +
                                std::to_string(amps_.squaredNorm()));
  }
}

HybridState HybridState::zero(int l_max) {
  return HybridState(l_max, Eigen::VectorXcd::Zero(hybrid_dim(l_max)));
}

cplx HybridState::amplitude(Polarization p, int l) const {
  return amps_(canonical_index(p, l, l_max_));
}

Eigen::VectorXcd HybridState::polarization_part(Polarization p) const {
  const int n = mode_count(l_max_);
  return amps_.segment(pol_index(p) * n, n);
}

TransferOperator::TransferOperator(int l_max, Eigen::MatrixXcd matrix)
    : l_max_(l_max), m_(std::move(matrix)) {
  require_bound(l_max);
  const int d = hybrid_dim(l_max);
  if (m_.rows() != d || m_.cols() != d) {
    throw std::invalid_argument("operator shape " + std::to_string(m_.rows()) + "x" +
                                std::to_string(m_.cols()) + " does not match dimension " +
                                std::to_string(d));
  }
}

TransferOperator TransferOperator::identity(int l_max) {
  const int d = hybrid_dim(l_max);
  return TransferOperator(l_max, Eigen::MatrixXcd::Identity(d, d));
}

TransferOperator TransferOperator::zero(int l_max) {
  const int d = hybrid_dim(l_max);
  return TransferOperator(l_max, Eigen::MatrixXcd::Zero(d, d));
}

cplx TransferOperator::element(Polarization out_p, int out_l, Polarization in_p,
                               int in_l) const {
  return m_(canonical_index(out_p, out_l, l_max_), canonical_index(in_p, in_l, l_max_));
}

double TransferOperator::unitarity_defect() const {
  const Eigen::MatrixXcd g = m_.adjoint() * m_;
  return max_abs_diff(g, Eigen::MatrixXcd::Identity(dim(), dim()));
}

double TransferOperator::operator_norm() const {
  Eigen::JacobiSVD<Eigen::MatrixXcd> svd(m_);
  return svd.singularValues()(0);
}

HybridState make_state(int l_max, std::span<const StateEntry> entries) {
  if (entries.empty()) throw std::invalid_argument("make_state: empty entry list");
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(hybrid_dim(l_max));
  for (const auto& e : entries) v(canonical_index(e.pol, e.l, l_max)) += e.amplitude;
  return HybridState(l_max, std::move(v));
}

HybridState make_state(int l_max, std::initializer_list<StateEntry> entries) {
  return make_state(l_max, std::span<const StateEntry>(entries.begin(), entries.size()));
}

HybridState normalize(const HybridState& state) {
  const double n = state.amplitudes().stableNorm();
  if (n == 0.0) throw std::domain_error("normalize: zero-norm state");
  Eigen::VectorXcd v = state.amplitudes() / n;
  // One rescale can leave |norm^2 - 1| at a few ulps; a second pass pins it.
  v /= v.norm();
  return HybridState(state.l_max(), std::move(v), true);
}

cplx inner_product(const HybridState& a, const HybridState& b) {
  require_same_bound(a.l_max(), b.l_max(), "inner_product");
  return a.amplitudes().dot(b.amplitudes());
}

HybridState apply(const TransferOperator& op, const HybridState& state) {
  require_same_bound(op.l_max(), state.l_max(), "apply");
  return HybridState(state.l_max(), op.matrix() * state.amplitudes());
}

TransferOperator compose(std::span<const TransferOperator> ops, int l_max) {
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Identity(hybrid_dim(l_max), hybrid_dim(l_max));
  for (const auto& op : ops) {
    require_same_bound(op.l_max(), l_max, "compose");
    acc = op.matrix() * acc;
  }
  return TransferOperator(l_max, std::move(acc));
}

TransferOperator compose(std::initializer_list<TransferOperator> ops) {
  if (ops.size() == 0) return TransferOperator::identity(kDefaultLmax);
  return compose(std::span<const TransferOperator>(ops.begin(), ops.size()),
                 ops.begin()->l_max());
}

HybridState embed(const HybridState& state, int new_l_max) {
  if (new_l_max < state.l_max()) {
    throw std::invalid_argument("embed: target bound smaller than source; use truncate");
  }
  Eigen::VectorXcd v = Eigen::VectorXcd::Zero(hybrid_dim(new_l_max));
  const int old_n = mode_count(state.l_max());
  const int new_n = mode_count(new_l_max);
  const int shift = new_l_max - state.l_max();
  for (int p = 0; p < 2; ++p) {
    v.segment(p * new_n + shift, old_n) = state.amplitudes().segment(p * old_n, old_n);
  }
  return HybridState(new_l_max, std::move(v), state.normalized());
}

HybridState truncate(const HybridState& state, int new_l_max) {
  if (new_l_max > state.l_max()) {
    throw std::invalid_argument("truncate: target bound larger than source; use embed");
  }
  require_bound(new_l_max);
  const int old_n = mode_count(state.l_max());
  const int new_n = mode_count(new_l_max);
  const int shift = state.l_max() - new_l_max;
  Eigen::VectorXcd v(hybrid_dim(new_l_max));
  for (int p = 0; p < 2; ++p) {
    v.segment(p * new_n, new_n) = state.amplitudes().segment(p * old_n + shift, new_n);
  }
  const double lost = state.norm_squared() - v.squaredNorm();
  if (lost > kAlgebraTol) {
    throw std::domain_error("truncate: would discard amplitude (lost norm^2 " +
                            std::to_string(lost) + ")");
  }
  return HybridState(new_l_max, std::move(v));
}

double max_abs_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw std::invalid_argument("max_abs_diff: shape mismatch");
  }
  return (a - b).cwiseAbs().maxCoeff();
}

}  // namespace pmm
