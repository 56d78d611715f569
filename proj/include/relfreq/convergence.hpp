#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "relfreq/binom.hpp"
#include "relfreq/common.hpp"

namespace relfreq::convergence {

// The explicit ensemble-size threshold: the unique integer N with
// p(1-p)/(eps^2 omega) <= N < p(1-p)/(eps^2 omega) + 1. Beyond it the
// outside-epsilon probability drops below omega.
struct ConvergenceBound {
  double p;
  double eps;
  double omega;
  long long n_threshold;
};

inline ConvergenceBound n_epsilon_omega(double p, double eps, double omega) {
  require(p > 0.0 && p < 1.0,
          "threshold requires non-extreme p (the extreme cases are certainty)");
  require(eps > 0.0 && omega > 0.0, "eps and omega must be positive");
  double ratio = p * (1.0 - p) / (eps * eps * omega);
  require(ratio < 9e15, "threshold too large to represent exactly");

  // The sandwich admits exactly one integer; when the quotient is an integer
  // up to 1e-12 relative, float dust must not bump the ceiling past it.
  double nearest = std::round(ratio);
  long long n;
  if (nearest >= 1.0 && std::abs(ratio - nearest) <= 1e-12 * nearest)
    n = static_cast<long long>(nearest);
  else
    n = static_cast<long long>(std::ceil(ratio));
  if (n < 1) n = 1;
  return {p, eps, omega, n};
}

inline double chebyshev_ceiling(double p, long long n, double eps) {
  return p * (1.0 - p) / (static_cast<double>(n) * eps * eps);
}

// Independent re-check of the threshold sandwich in extended precision.
inline bool sandwich_holds(const ConvergenceBound& bound) {
  long double ratio = static_cast<long double>(bound.p) *
                      (1.0L - static_cast<long double>(bound.p)) /
                      (static_cast<long double>(bound.eps) *
                       static_cast<long double>(bound.eps) *
                       static_cast<long double>(bound.omega));
  long double n = static_cast<long double>(bound.n_threshold);
  // One ulp of slack absorbs the double-precision quotient rounding.
  long double slack = ratio * 1e-15L;
  return ratio - slack <= n && n < ratio + 1.0L + slack;
}

// One certified ensemble size. The summed tail check is an exact binomial
// computation; the per-term check mirrors the derivation, which bounds each
// outside index individually. Both readings are carried side by side.
struct CertificationRow {
  long long n = 0;
  double tail = 0.0;
  double log_tail = binom::neg_inf;
  double ceiling = 0.0;                       // p(1-p)/(N eps^2)
  double worst_term_log = binom::neg_inf;     // largest single outside term
  bool summed_positive = false;               // 0 < tail, asserted in log space
  bool summed_below_omega = false;            // tail < omega, strict
  bool per_term_below_omega = false;          // every outside term < omega, strict

  bool passed() const {
    return summed_positive && summed_below_omega && per_term_below_omega;
  }
};

struct ConvergenceCertification {
  double p = 0.0;
  double eps = 0.0;
  double omega = 0.0;
  long long n_threshold = 0;
  std::vector<CertificationRow> rows;
  bool all_passed = false;
};

namespace detail {

// Largest single outside-epsilon term. Each side of the outside set is
// unimodal, so the maximum sits at a side boundary or at the mode when the
// mode itself falls outside.
inline double worst_outside_term_log(double p, long long n, double eps) {
  binom::detail::OutsideSplit split = binom::detail::split_outside(p, n, eps);
  long long mode = static_cast<long long>(std::floor((static_cast<double>(n) + 1.0) * p));
  double worst = binom::neg_inf;
  if (split.lower_end >= 0) {
    worst = std::max(worst, binom::log_eigprob(p, n, split.lower_end));
    long long clamped = std::clamp<long long>(mode, 0, split.lower_end);
    worst = std::max(worst, binom::log_eigprob(p, n, clamped));
  }
  if (split.upper_start <= n) {
    worst = std::max(worst, binom::log_eigprob(p, n, split.upper_start));
    long long clamped = std::clamp<long long>(mode, split.upper_start, n);
    worst = std::max(worst, binom::log_eigprob(p, n, clamped));
  }
  return worst;
}

}  // namespace detail

// Certifies probabilistic convergence at the given ensemble sizes: for every
// N at or beyond the threshold, the outside-epsilon probability is strictly
// positive yet strictly below omega.
inline ConvergenceCertification certify_convergence(
    double p, double eps, double omega, std::span<const long long> n_values) {
  ConvergenceBound bound = n_epsilon_omega(p, eps, omega);
  ConvergenceCertification report;
  report.p = p;
  report.eps = eps;
  report.omega = omega;
  report.n_threshold = bound.n_threshold;
  report.all_passed = true;

  for (long long n : n_values) {
    require(n >= bound.n_threshold,
            "certification requires N at or beyond the threshold");
    CertificationRow row;
    row.n = n;
    row.log_tail = binom::log_tail_outside_epsilon(p, n, eps);
    row.tail = row.log_tail == binom::neg_inf ? 0.0 : std::exp(row.log_tail);
    row.ceiling = chebyshev_ceiling(p, n, eps);
    row.worst_term_log = detail::worst_outside_term_log(p, n, eps);
    row.summed_positive = std::isfinite(row.log_tail);
    row.summed_below_omega = row.tail < omega;
    row.per_term_below_omega =
        std::isfinite(row.worst_term_log) && row.worst_term_log < std::log(omega);
    report.all_passed = report.all_passed && row.passed();
    report.rows.push_back(row);
  }
  return report;
}

// The per-index bound behind the threshold argument: every outside-epsilon
// index carries probability strictly below p(1-p)/(N eps^2). An empty outside
// set passes vacuously.
struct ChebyshevChainReport {
  long long outside_count = 0;
  double ceiling = 0.0;
  std::optional<double> worst_margin;  // min over outside terms of ceiling - prob
  bool passed = false;
  bool vacuous() const { return outside_count == 0; }
};

inline ChebyshevChainReport chebyshev_chain_check(double p, long long n, double eps) {
  require(p > 0.0 && p < 1.0, "chebyshev chain requires non-extreme p");
  require(n >= 1, "ensemble size N must be >= 1");
  require(eps > 0.0, "epsilon must be positive");

  binom::detail::OutsideSplit split = binom::detail::split_outside(p, n, eps);
  ChebyshevChainReport report;
  report.ceiling = chebyshev_ceiling(p, n, eps);
  report.passed = true;

  auto visit = [&](long long k) {
    double prob = binom::eigprob(p, n, k);
    double margin = report.ceiling - prob;
    if (!report.worst_margin || margin < *report.worst_margin)
      report.worst_margin = margin;
    report.passed = report.passed && prob < report.ceiling;
    ++report.outside_count;
  };
  for (long long k = 0; k <= split.lower_end; ++k) visit(k);
  for (long long k = split.upper_start; k <= n; ++k) visit(k);
  return report;
}

}  // namespace relfreq::convergence
