#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <span>
#include <utility>
#include <vector>

#include "relfreq/common.hpp"
#include "relfreq/linalg.hpp"
#include "relfreq/rng.hpp"

namespace relfreq::hilbert {

// Normalized pure state. Tensor products of unit vectors drift from unit norm
// by at most one tol::norm per factor, so composite builders widen the check.
class StateVector {
 public:
  explicit StateVector(CVector amplitudes, double norm_tolerance = tol::norm)
      : amplitudes_(std::move(amplitudes)) {
    require(amplitudes_.size() >= 1, "state vector must have dimension >= 1");
    require(std::abs(amplitudes_.squaredNorm() - 1.0) <= norm_tolerance,
            "state vector is not normalized");
  }

  static StateVector normalized(const CVector& raw) {
    double n = raw.norm();
    require(n > 0.0, "cannot normalize the zero vector");
    return StateVector(raw / n);
  }

  Index dim() const { return amplitudes_.size(); }
  const CVector& amplitudes() const { return amplitudes_; }

 private:
  CVector amplitudes_;
};

// Hermitian idempotent matrix (an event). Validity is established here once;
// downstream operations assume it.
class Projector {
 public:
  explicit Projector(CMatrix matrix) : matrix_(std::move(matrix)) {
    require(matrix_.rows() == matrix_.cols() && matrix_.rows() >= 1,
            "projector matrix must be square");
    require(max_abs_diff(matrix_, matrix_.adjoint()) <= tol::op,
            "projector is not Hermitian");
    require(max_abs_diff(matrix_ * matrix_, matrix_) <= tol::op,
            "projector is not idempotent");
    Complex trace = matrix_.trace();
    rank_ = static_cast<int>(std::llround(trace.real()));
    require(rank_ >= 0 && rank_ <= matrix_.rows() &&
                std::abs(trace - Complex(static_cast<double>(rank_))) <= tol::op,
            "projector trace is not an admissible rank");
  }

  Index dim() const { return matrix_.rows(); }
  int rank() const { return rank_; }
  const CMatrix& matrix() const { return matrix_; }

 private:
  CMatrix matrix_;
  int rank_;
};

// Explicit matrix on the N-fold tensor space, tagged with its factorization.
class DenseOperator {
 public:
  DenseOperator(CMatrix matrix, int n_copies, Index single_dim)
      : matrix_(std::move(matrix)), n_copies_(n_copies), single_dim_(single_dim) {
    require(n_copies_ >= 1 && single_dim_ >= 1, "operator needs n_copies >= 1, d >= 1");
    long long expected = checked_power(single_dim_, n_copies_);
    require(expected <= limits::max_operator_dim,
            "operator dimension exceeds the dense size cap");
    require(matrix_.rows() == expected && matrix_.cols() == expected,
            "operator dimension must equal d^N");
  }

  const CMatrix& matrix() const { return matrix_; }
  int n_copies() const { return n_copies_; }
  Index single_dim() const { return single_dim_; }
  Index dim() const { return matrix_.rows(); }

 private:
  CMatrix matrix_;
  int n_copies_;
  Index single_dim_;
};

// p = <psi|P|psi>, clamped to [0,1]. A non-negligible imaginary part means the
// inputs were not a valid (state, projector) pair and is reported loudly.
inline double probability(const StateVector& psi, const Projector& p) {
  require(psi.dim() == p.dim(), "probability: dimension mismatch");
  Complex value = psi.amplitudes().dot(p.matrix() * psi.amplitudes());
  require(std::abs(value.imag()) < tol::op,
          "probability has a non-negligible imaginary part");
  return std::clamp(value.real(), 0.0, 1.0);
}

// The opposite event I - P. Involutive: orthocomplement(orthocomplement(P)) = P.
inline Projector orthocomplement(const Projector& p) {
  return Projector(CMatrix::Identity(p.dim(), p.dim()) - p.matrix());
}

// The four equivalent certainty conditions. They agree (all true or all
// false) for every valid pair; `consistent` records that the equivalence held
// numerically.
struct EeLinkReport {
  bool certainty;               // <psi|P|psi> = 1
  bool complement_zero;         // <psi|P_perp|psi> = 0
  bool complement_annihilates;  // || P_perp |psi> || = 0
  bool eigenvector;             // P|psi> = |psi>

  bool all_hold() const {
    return certainty && complement_zero && complement_annihilates && eigenvector;
  }
  bool none_hold() const {
    return !certainty && !complement_zero && !complement_annihilates && !eigenvector;
  }
  bool consistent() const { return all_hold() || none_hold(); }
};

inline EeLinkReport ee_link_check(const StateVector& psi, const Projector& p) {
  require(psi.dim() == p.dim(), "ee_link_check: dimension mismatch");
  Projector perp = orthocomplement(p);
  const CVector& v = psi.amplitudes();
  EeLinkReport report;
  report.certainty = std::abs(probability(psi, p) - 1.0) <= tol::op;
  report.complement_zero = probability(psi, perp) <= tol::op;
  report.complement_annihilates = (perp.matrix() * v).norm() <= tol::op;
  report.eigenvector = (p.matrix() * v - v).cwiseAbs().maxCoeff() <= tol::op;
  return report;
}

// |Psi> = |psi> tensored with itself N times.
inline StateVector tensor_power_state(const StateVector& psi, int n_copies) {
  require(n_copies >= 1, "tensor power needs at least one copy");
  long long dim = checked_power(psi.dim(), n_copies);
  require(dim <= limits::max_state_dim, "tensor power exceeds the state size cap");
  CVector acc = psi.amplitudes();
  for (int i = 1; i < n_copies; ++i) acc = kron(acc, psi.amplitudes());
  return StateVector(std::move(acc), static_cast<double>(n_copies) * tol::norm);
}

// Ordered tensor product of possibly distinct factors.
inline StateVector product_state(std::span<const StateVector> factors) {
  require(!factors.empty(), "product state needs at least one factor");
  Index d = factors.front().dim();
  for (const StateVector& f : factors)
    require(f.dim() == d, "product state factors must share one dimension");
  long long dim = checked_power(d, static_cast<int>(factors.size()));
  require(dim <= limits::max_state_dim, "product state exceeds the state size cap");
  CVector acc = factors.front().amplitudes();
  for (std::size_t i = 1; i < factors.size(); ++i) acc = kron(acc, factors[i].amplitudes());
  return StateVector(std::move(acc), static_cast<double>(factors.size()) * tol::norm);
}

inline double standard_normal(SplitMix64& rng) {
  // Box-Muller; the half-ulp offset keeps the log argument in (0,1).
  double u1 = (static_cast<double>(rng.next_u64() >> 11) + 0.5) * 0x1.0p-53;
  double u2 = rng.next_double();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

inline StateVector random_state(Index dim, SplitMix64& rng) {
  require(dim >= 1, "random_state: dimension must be >= 1");
  CVector v(dim);
  for (Index i = 0; i < dim; ++i)
    v(i) = Complex(standard_normal(rng), standard_normal(rng));
  return StateVector::normalized(v);
}

// Haar-uniform rank-r projector: orthonormalize r complex Gaussian vectors
// (their span is uniform on the Grassmannian) and sum the outer products.
inline Projector random_projector(Index dim, int rank, SplitMix64& rng) {
  require(dim >= 1 && rank >= 0 && rank <= dim, "random_projector: bad rank");
  if (rank == 0) return Projector(CMatrix::Zero(dim, dim));
  if (rank == dim) return Projector(CMatrix::Identity(dim, dim));

  std::vector<CVector> basis;
  basis.reserve(static_cast<std::size_t>(rank));
  while (basis.size() < static_cast<std::size_t>(rank)) {
    CVector v(dim);
    for (Index i = 0; i < dim; ++i)
      v(i) = Complex(standard_normal(rng), standard_normal(rng));
    for (int pass = 0; pass < 2; ++pass)  // modified Gram-Schmidt, twice
      for (const CVector& u : basis) v -= u * u.dot(v);
    double n = v.norm();
    if (n < 1e-8) continue;  // degenerate draw, try again
    basis.push_back(v / n);
  }

  CMatrix p = CMatrix::Zero(dim, dim);
  for (const CVector& u : basis) p += u * u.adjoint();
  p = 0.5 * (p + p.adjoint().eval());
  return Projector(std::move(p));
}

}  // namespace relfreq::hilbert
