#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <utility>
#include <vector>

#include "relfreq/common.hpp"
#include "relfreq/hilbert.hpp"
#include "relfreq/linalg.hpp"

namespace relfreq::freqop {

using hilbert::DenseOperator;
using hilbert::Projector;
using hilbert::StateVector;

namespace detail {

// I x ... x A (at `position`) x ... x I over n_copies factors of dimension d.
inline CMatrix embed_single(const CMatrix& a, int position, int n_copies) {
  Index d = a.rows();
  CMatrix identity = CMatrix::Identity(d, d);
  CMatrix acc = CMatrix::Identity(1, 1);
  for (int i = 0; i < n_copies; ++i) acc = kron(acc, i == position ? a : identity);
  return acc;
}

// Tensor product choosing `on` at the flagged positions and `off` elsewhere.
inline CMatrix tensor_select(const CMatrix& on, const CMatrix& off,
                             const std::vector<bool>& at_position) {
  CMatrix acc = CMatrix::Identity(1, 1);
  for (bool flag : at_position) acc = kron(acc, flag ? on : off);
  return acc;
}

// Lexicographic next k-combination of {0,...,n-1}; false once exhausted.
inline bool next_combination(std::vector<int>& c, int n) {
  int k = static_cast<int>(c.size());
  for (int i = k - 1; i >= 0; --i) {
    if (c[i] < n - k + i) {
      ++c[i];
      for (int j = i + 1; j < k; ++j) c[j] = c[j - 1] + 1;
      return true;
    }
  }
  return false;
}

inline void check_operator_size(const Projector& p, int n_copies) {
  require(n_copies >= 1, "need at least one copy");
  long long dim = checked_power(p.dim(), n_copies);
  require(dim <= limits::max_operator_dim,
          "dense operator dimension exceeds the size cap");
}

}  // namespace detail

// The relative-frequency operator (1/N) sum_n I x...x P_n x...x I. Hermitian
// with spectrum on the grid {K/N : K = 0..N}.
class FrequencyOperator {
 public:
  FrequencyOperator(Projector p, int n_copies)
      : source_(std::move(p)), op_(build(source_, n_copies), n_copies, source_.dim()) {}

  const CMatrix& matrix() const { return op_.matrix(); }
  const DenseOperator& op() const { return op_; }
  int n_copies() const { return op_.n_copies(); }
  Index dim() const { return op_.dim(); }
  const Projector& source_projector() const { return source_; }

 private:
  static CMatrix build(const Projector& p, int n_copies) {
    detail::check_operator_size(p, n_copies);
    Index dim = checked_power(p.dim(), n_copies);
    CMatrix acc = CMatrix::Zero(dim, dim);
    for (int n = 0; n < n_copies; ++n)
      acc += detail::embed_single(p.matrix(), n, n_copies);
    acc /= static_cast<double>(n_copies);
    require(max_abs_diff(acc, acc.adjoint()) <= tol::op,
            "frequency operator is not Hermitian");
    return acc;
  }

  Projector source_;
  DenseOperator op_;
};

inline FrequencyOperator build_frequency_operator(const Projector& p, int n_copies) {
  return FrequencyOperator(p, n_copies);
}

// Q_N^K: sum over all C(N,K) position combinations of tensor products with P
// at the chosen positions and P_perp elsewhere. Terms accumulate in place in
// lexicographic combination order.
inline DenseOperator build_eigenprojector(const Projector& p, int n_copies, int k) {
  detail::check_operator_size(p, n_copies);
  require(n_copies <= limits::max_enum_copies,
          "combination enumeration capped at N <= 12");
  require(k >= 0 && k <= n_copies, "eigenprojector index K must lie in 0..N");

  const CMatrix& on = p.matrix();
  CMatrix off = hilbert::orthocomplement(p).matrix();
  Index dim = checked_power(p.dim(), n_copies);
  CMatrix acc = CMatrix::Zero(dim, dim);

  std::vector<bool> at_position(static_cast<std::size_t>(n_copies), false);
  if (k == 0) {
    acc += detail::tensor_select(on, off, at_position);
  } else {
    std::vector<int> comb(static_cast<std::size_t>(k));
    for (int i = 0; i < k; ++i) comb[static_cast<std::size_t>(i)] = i;
    do {
      std::fill(at_position.begin(), at_position.end(), false);
      for (int pos : comb) at_position[static_cast<std::size_t>(pos)] = true;
      acc += detail::tensor_select(on, off, at_position);
    } while (detail::next_combination(comb, n_copies));
  }
  return DenseOperator(std::move(acc), n_copies, p.dim());
}

// The complete family {Q_N^K : K = 0..N}: mutually orthogonal, idempotent,
// and summing to the identity.
class EigenProjectorFamily {
 public:
  EigenProjectorFamily(Projector p, int n_copies) : source_(std::move(p)) {
    projectors_.reserve(static_cast<std::size_t>(n_copies) + 1);
    for (int k = 0; k <= n_copies; ++k)
      projectors_.push_back(build_eigenprojector(source_, n_copies, k));
  }

  int n_copies() const { return projectors_.front().n_copies(); }
  Index dim() const { return projectors_.front().dim(); }
  std::size_t size() const { return projectors_.size(); }
  const CMatrix& projector(int k) const {
    require(k >= 0 && static_cast<std::size_t>(k) < projectors_.size(),
            "eigenprojector index out of range");
    return projectors_[static_cast<std::size_t>(k)].matrix();
  }
  const Projector& source_projector() const { return source_; }

 private:
  Projector source_;
  std::vector<DenseOperator> projectors_;
};

inline EigenProjectorFamily build_eigenprojectors(const Projector& p, int n_copies) {
  return EigenProjectorFamily(p, n_copies);
}

struct SpectrumLine {
  double eigenvalue;       // grid value K/N
  long long multiplicity;  // count of computed eigenvalues snapping to it
};

struct SpectrumReport {
  std::vector<SpectrumLine> lines;  // occupied grid points, ascending
  double max_grid_deviation = 0.0;
  bool on_grid = false;
  // Set only for d = 2, rank 1, where the multiplicity of K/N is "N over K".
  std::optional<bool> multiplicities_binomial;

  bool passed() const { return on_grid && multiplicities_binomial.value_or(true); }
};

// Diagonalizes F and checks that every eigenvalue sits on the K/N grid.
inline SpectrumReport verify_spectrum(const FrequencyOperator& f) {
  RVector eigenvalues = hermitian_eigenvalues(f.matrix());
  int n = f.n_copies();
  std::vector<long long> multiplicity(static_cast<std::size_t>(n) + 1, 0);

  SpectrumReport report;
  for (Index i = 0; i < eigenvalues.size(); ++i) {
    long long k = std::llround(eigenvalues(i) * n);
    k = std::clamp<long long>(k, 0, n);
    double deviation = std::abs(eigenvalues(i) - static_cast<double>(k) / n);
    report.max_grid_deviation = std::max(report.max_grid_deviation, deviation);
    ++multiplicity[static_cast<std::size_t>(k)];
  }
  report.on_grid = report.max_grid_deviation <= tol::eig;

  for (int k = 0; k <= n; ++k)
    if (multiplicity[static_cast<std::size_t>(k)] > 0)
      report.lines.push_back({static_cast<double>(k) / n,
                              multiplicity[static_cast<std::size_t>(k)]});

  const Projector& p = f.source_projector();
  if (p.dim() == 2 && p.rank() == 1) {
    bool ok = true;
    for (int k = 0; k <= n; ++k)
      ok = ok && multiplicity[static_cast<std::size_t>(k)] == binomial_coefficient(n, k);
    report.multiplicities_binomial = ok;
  }
  return report;
}

namespace detail {

inline void check_same_construction(const FrequencyOperator& f,
                                    const EigenProjectorFamily& q) {
  require(f.n_copies() == q.n_copies() && f.dim() == q.dim() &&
              max_abs_diff(f.source_projector().matrix(),
                           q.source_projector().matrix()) <= tol::op,
          "frequency operator and eigenprojector family do not match");
}

}  // namespace detail

// max-entry deviation of F from its spectral form sum_K (K/N) Q_N^K.
inline double spectral_reconstruction_check(const FrequencyOperator& f,
                                            const EigenProjectorFamily& q) {
  detail::check_same_construction(f, q);
  int n = f.n_copies();
  CMatrix acc = CMatrix::Zero(f.dim(), f.dim());
  for (int k = 0; k <= n; ++k)
    acc += (static_cast<double>(k) / n) * q.projector(k);
  return max_abs_diff(f.matrix(), acc);
}

// <Psi|F|Psi>; equals the single-copy probability p when Psi is the tensor
// power of psi.
inline double expectation(const FrequencyOperator& f, const StateVector& psi) {
  require(psi.dim() == f.dim(), "expectation: dimension mismatch");
  Complex value = psi.amplitudes().dot(f.matrix() * psi.amplitudes());
  require(std::abs(value.imag()) < tol::op,
          "expectation has a non-negligible imaginary part");
  return value.real();
}

// <Psi|Q_N^K|Psi>, the probability of the theoretical relative frequency K/N.
inline double eigenprojector_probability(const EigenProjectorFamily& q, int k,
                                         const StateVector& psi) {
  require(psi.dim() == q.dim(), "eigenprojector_probability: dimension mismatch");
  Complex value = psi.amplitudes().dot(q.projector(k) * psi.amplitudes());
  require(std::abs(value.imag()) < tol::op,
          "eigenprojector probability has a non-negligible imaginary part");
  return std::clamp(value.real(), 0.0, 1.0);
}

inline std::vector<double> eigenprojector_probabilities(const EigenProjectorFamily& q,
                                                        const StateVector& psi) {
  std::vector<double> probs;
  probs.reserve(q.size());
  for (int k = 0; k <= q.n_copies(); ++k)
    probs.push_back(eigenprojector_probability(q, k, psi));
  return probs;
}

// The variance <Psi|(F - p)^2|Psi> through three algebraically equal routes:
//   centered_square   explicit square of the centered operator,
//   moment_minus_p2   second moment minus p^2,
//   distance_squared  ||F Psi - p Psi||^2.
// All three equal p(1-p)/N on a tensor-power state.
struct VarianceForms {
  double centered_square = 0.0;
  double moment_minus_p2 = 0.0;
  double distance_squared = 0.0;

  double max_disagreement() const {
    double a = std::abs(centered_square - moment_minus_p2);
    double b = std::abs(centered_square - distance_squared);
    double c = std::abs(moment_minus_p2 - distance_squared);
    return std::max({a, b, c});
  }
};

inline VarianceForms variance_forms(const FrequencyOperator& f, const StateVector& psi,
                                    double p) {
  require(psi.dim() == f.dim(), "variance_forms: dimension mismatch");
  const CMatrix& fm = f.matrix();
  const CVector& v = psi.amplitudes();

  VarianceForms forms;
  CMatrix centered = fm - p * CMatrix::Identity(f.dim(), f.dim());
  CMatrix squared = centered * centered;
  Complex direct = v.dot(squared * v);
  require(std::abs(direct.imag()) < tol::op,
          "variance has a non-negligible imaginary part");
  forms.centered_square = direct.real();

  CVector fv = fm * v;
  forms.moment_minus_p2 = fv.squaredNorm() - p * p;
  forms.distance_squared = (fv - p * v).squaredNorm();
  return forms;
}

// Turns the algebraic equality of the three forms into a runtime self-check:
// disagreement beyond tol::op signals a numeric defect and throws.
inline double variance_exact(const FrequencyOperator& f, const StateVector& psi,
                             double p) {
  VarianceForms forms = variance_forms(f, psi, p);
  require(forms.max_disagreement() <= tol::op,
          "variance forms disagree beyond tolerance");
  return forms.centered_square;
}

// sum_K (K/N) <Psi|Q_N^K|Psi>; equals the single-copy probability p.
inline double spectral_mean(const EigenProjectorFamily& q, const StateVector& psi) {
  int n = q.n_copies();
  double acc = 0.0;
  for (int k = 0; k <= n; ++k)
    acc += static_cast<double>(k) / n * eigenprojector_probability(q, k, psi);
  return acc;
}

// sum_K (K/N - p)^2 <Psi|Q_N^K|Psi>, the spectral route to the variance.
inline double variance_spectral_sum(const EigenProjectorFamily& q,
                                    const StateVector& psi, double p) {
  require(psi.dim() == q.dim(), "variance_spectral_sum: dimension mismatch");
  int n = q.n_copies();
  double acc = 0.0;
  for (int k = 0; k <= n; ++k) {
    double offset = static_cast<double>(k) / n - p;
    acc += offset * offset * eigenprojector_probability(q, k, psi);
  }
  return acc;
}

// Spectral-route variance, cross-checked against variance_exact on the same
// construction; a mismatch throws.
inline double variance_spectral(const EigenProjectorFamily& q, const StateVector& psi,
                                double p) {
  double spectral = variance_spectral_sum(q, psi, p);
  FrequencyOperator f(q.source_projector(), q.n_copies());
  double exact = variance_exact(f, psi, p);
  require(std::abs(spectral - exact) <= tol::op,
          "spectral variance disagrees with the exact value");
  return spectral;
}

}  // namespace relfreq::freqop
