#pragma once

#include <cmath>
#include <limits>
#include <vector>
#include <span>
#include <utility>

#include "relfreq/common.hpp"

namespace relfreq::binom {

inline constexpr double neg_inf = -std::numeric_limits<double>::infinity();

// Probability tables are materialized up to this many entries; pointwise
// evaluation has no such cap.
inline constexpr long long max_table_entries = (1LL << 24) + 1;

namespace detail {

inline void check_args(double p, long long n) {
  require(n >= 1, "ensemble size N must be >= 1");
  require(p >= 0.0 && p <= 1.0, "probability p must lie in [0,1]");
}

inline double log_sum_exp(double a, double b) {
  if (a == neg_inf) return b;
  if (b == neg_inf) return a;
  double hi = std::max(a, b);
  double lo = std::min(a, b);
  return hi + std::log1p(std::exp(lo - hi));
}

// stirlerr(n) = lgamma(n+1) - [(n + 1/2) log n - n + log(2 pi)/2]. Tabulated
// for small n, asymptotic series beyond; full double accuracy either way.
inline double stirlerr(long long n) {
  static const std::vector<double> table = [] {
    std::vector<double> t(16);
    const double half_log_2pi = 0.5 * std::log(2.0 * 3.141592653589793238462643383279503);
    t[0] = 0.0;
    for (int i = 1; i < 16; ++i)
      t[i] = std::lgamma(i + 1.0) -
             ((i + 0.5) * std::log(static_cast<double>(i)) - i + half_log_2pi);
    return t;
  }();
  constexpr double S0 = 1.0 / 12.0;
  constexpr double S1 = 1.0 / 360.0;
  constexpr double S2 = 1.0 / 1260.0;
  constexpr double S3 = 1.0 / 1680.0;
  constexpr double S4 = 1.0 / 1188.0;
  if (n < 16) return table[static_cast<std::size_t>(n)];
  double n1 = 1.0 / static_cast<double>(n);
  double n2 = n1 * n1;
  if (n > 500) return (S0 - S1 * n2) * n1;
  if (n > 80) return (S0 - (S1 - S2 * n2) * n2) * n1;
  if (n > 35) return (S0 - (S1 - (S2 - S3 * n2) * n2) * n2) * n1;
  return (S0 - (S1 - (S2 - (S3 - S4 * n2) * n2) * n2) * n2) * n1;
}

// Binomial deviance x log(x/m) + m - x, evaluated by series when x is close
// to m to dodge the cancellation in the direct form.
inline double bd0(double x, double m) {
  if (std::abs(x - m) < 0.1 * (x + m)) {
    double v = (x - m) / (x + m);
    double s = (x - m) * v;
    double ej = 2.0 * x * v;
    for (int j = 1;; ++j) {
      ej *= v * v;
      double s1 = s + ej / (2 * j + 1);
      if (s1 == s) return s1;
      s = s1;
    }
  }
  return x * std::log(x / m) + m - x;
}

// Neumaier-compensated accumulation for the table folds.
struct CompensatedSum {
  double sum = 0.0;
  double compensation = 0.0;
  void add(double value) {
    double t = sum + value;
    if (std::abs(sum) >= std::abs(value))
      compensation += (sum - t) + value;
    else
      compensation += (value - t) + sum;
    sum = t;
  }
  double value() const { return sum + compensation; }
};

}  // namespace detail

// log of C(N,K) p^K (1-p)^(N-K), kept in log space so that N up to 1e9 stays
// in range; exponentiation happens only at output. The saddle-point form
// (Loader) avoids the cancellation of raw log-gamma differences, whose error
// grows like ulp(N log N) and would breach the summation tolerance by N ~ 1e6.
// Extreme p never takes the log route: the distribution degenerates to a
// Kronecker delta exactly.
inline double log_eigprob(double p, long long n, long long k) {
  detail::check_args(p, n);
  require(k >= 0 && k <= n, "relative-frequency index K must lie in 0..N");
  if (p == 0.0) return k == 0 ? 0.0 : neg_inf;
  if (p == 1.0) return k == n ? 0.0 : neg_inf;
  double nd = static_cast<double>(n);
  if (k == 0) return nd * std::log1p(-p);
  if (k == n) return nd * std::log(p);
  double kd = static_cast<double>(k);
  double nk = static_cast<double>(n - k);
  double lc = detail::stirlerr(n) - detail::stirlerr(k) - detail::stirlerr(n - k) -
              detail::bd0(kd, nd * p) - detail::bd0(nk, nd * (1.0 - p));
  constexpr double two_pi = 2.0 * 3.141592653589793238462643383279503;
  return lc + 0.5 * std::log(nd / (two_pi * kd * nk));
}

// <Psi|Q_N^K|Psi> in closed form.
inline double eigprob(double p, long long n, long long k) {
  detail::check_args(p, n);
  require(k >= 0 && k <= n, "relative-frequency index K must lie in 0..N");
  if (p == 0.0) return k == 0 ? 1.0 : 0.0;
  if (p == 1.0) return k == n ? 1.0 : 0.0;
  return std::exp(log_eigprob(p, n, k));
}

// Full distribution of the theoretical relative frequency over K = 0..N,
// kept in log space. For 0 < p < 1 every entry is finite; -inf appears only
// at the extremes, where all mass sits on one index.
class BinomialDistribution {
 public:
  BinomialDistribution(double p, long long n) : p_(p), n_(n) {
    detail::check_args(p, n);
    require(n + 1 <= max_table_entries, "distribution table would be too large");
    log_probs_.resize(static_cast<std::size_t>(n) + 1);
    for (long long k = 0; k <= n; ++k)
      log_probs_[static_cast<std::size_t>(k)] = log_eigprob(p, n, k);

    detail::CompensatedSum total;
    for (double lp : log_probs_) total.add(lp == neg_inf ? 0.0 : std::exp(lp));
    require(std::abs(total.value() - 1.0) <= tol::sum,
            "distribution does not sum to one within tolerance");
  }

  double p() const { return p_; }
  long long n() const { return n_; }
  double log_prob(long long k) const {
    require(k >= 0 && k <= n_, "index K out of range");
    return log_probs_[static_cast<std::size_t>(k)];
  }
  double prob(long long k) const {
    double lp = log_prob(k);
    return lp == neg_inf ? 0.0 : std::exp(lp);
  }
  std::span<const double> log_probs() const { return log_probs_; }

 private:
  double p_;
  long long n_;
  std::vector<double> log_probs_;
};

inline BinomialDistribution distribution(double p, long long n) {
  return BinomialDistribution(p, n);
}

// sum_K (K/N) prob[K]; equals p.
inline double mean(const BinomialDistribution& dist) {
  detail::CompensatedSum acc;
  long long n = dist.n();
  for (long long k = 0; k <= n; ++k)
    acc.add(static_cast<double>(k) / static_cast<double>(n) * dist.prob(k));
  return acc.value();
}

// sum_K (K/N - p)^2 prob[K]; equals p(1-p)/N.
inline double variance(const BinomialDistribution& dist) {
  detail::CompensatedSum acc;
  long long n = dist.n();
  double p = dist.p();
  for (long long k = 0; k <= n; ++k) {
    double offset = static_cast<double>(k) / static_cast<double>(n) - p;
    acc.add(offset * offset * dist.prob(k));
  }
  return acc.value();
}

// Strict outside-epsilon predicate, |K/N - p| > eps, evaluated in the
// integer-scaled form |K - N p| > N eps (one rounding per side). Boundary
// indices with |K/N - p| = eps count as inside; the same predicate is shared
// with the measurement simulation so empirical and exact tails agree on the
// boundary convention.
inline bool outside_epsilon(double p, long long n, long long k, double eps) {
  detail::check_args(p, n);
  require(k >= 0 && k <= n, "relative-frequency index K must lie in 0..N");
  require(eps > 0.0, "epsilon must be positive");
  return std::abs(static_cast<double>(k) - static_cast<double>(n) * p) >
         static_cast<double>(n) * eps;
}

namespace detail {

// The outside set is [0, lower_end] united with [upper_start, n]; either side
// may be empty (lower_end = -1, upper_start = n + 1). Boundaries are located
// with the shared predicate so the split is exact by construction.
struct OutsideSplit {
  long long lower_end;
  long long upper_start;
};

inline long long clamp_to_index_range(double value, long long n) {
  if (!(value >= -4.0)) return -4;  // also catches -inf
  if (!(value <= static_cast<double>(n) + 4.0)) return n + 4;
  return static_cast<long long>(value);
}

inline OutsideSplit split_outside(double p, long long n, double eps) {
  OutsideSplit split{-1, n + 1};

  double np = static_cast<double>(n) * p;
  double neps = static_cast<double>(n) * eps;
  long long guess = clamp_to_index_range(std::floor(np - neps), n);
  for (long long k = guess + 2; k >= guess - 2; --k) {
    if (k < 0 || k > n) continue;
    if (outside_epsilon(p, n, k, eps) && static_cast<double>(k) < np) {
      split.lower_end = k;
      break;
    }
  }
  guess = clamp_to_index_range(std::ceil(np + neps), n);
  for (long long k = guess - 2; k <= guess + 2; ++k) {
    if (k < 0 || k > n) continue;
    if (outside_epsilon(p, n, k, eps) && static_cast<double>(k) > np) {
      split.upper_start = k;
      break;
    }
  }
  return split;
}

// Sums log-probabilities over [first, last] from the smallest term toward the
// boundary term, the side's largest. When the side is monotone toward the
// boundary, terms below boundary - (50 + log(n+1)) are skipped: their total
// is under e^-50 of the boundary term, far below the summation tolerance.
inline double log_sum_side(double p, long long n, long long first, long long last,
                           bool ascending) {
  if (first > last) return neg_inf;
  long long boundary = ascending ? last : first;
  double boundary_log = log_eigprob(p, n, boundary);
  double cutoff = boundary_log - (50.0 + std::log(static_cast<double>(n) + 1.0));

  // Monotonicity toward the boundary holds when the whole side sits on one
  // flank of the mode; otherwise sum everything.
  double mode = (static_cast<double>(n) + 1.0) * p;
  bool monotone = ascending ? static_cast<double>(last) <= mode - 1.0
                            : static_cast<double>(first) >= mode;
  if (monotone) {
    long long lo = first;
    long long hi = last;
    if (ascending) {
      while (lo < hi) {  // first index with log >= cutoff
        long long mid = lo + (hi - lo) / 2;
        if (log_eigprob(p, n, mid) >= cutoff)
          hi = mid;
        else
          lo = mid + 1;
      }
      first = lo;
    } else {
      while (lo < hi) {  // last index with log >= cutoff
        long long mid = lo + (hi - lo + 1) / 2;
        if (log_eigprob(p, n, mid) >= cutoff)
          lo = mid;
        else
          hi = mid - 1;
      }
      last = lo;
    }
  }

  double acc = neg_inf;
  if (ascending) {
    for (long long k = first; k <= last; ++k)
      acc = log_sum_exp(acc, log_eigprob(p, n, k));
  } else {
    for (long long k = last; k >= first; --k)
      acc = log_sum_exp(acc, log_eigprob(p, n, k));
  }
  return acc;
}

}  // namespace detail

// log of the outside-epsilon probability sum_{|K/N - p| > eps} eigprob(K);
// -inf when no index lies strictly outside. Extreme p is rejected: its
// distribution is a Kronecker delta and has no meaningful tail.
inline double log_tail_outside_epsilon(double p, long long n, double eps) {
  detail::check_args(p, n);
  require(p > 0.0 && p < 1.0, "tail requires non-extreme p");
  require(eps > 0.0, "epsilon must be positive");
  detail::OutsideSplit split = detail::split_outside(p, n, eps);
  double lower = detail::log_sum_side(p, n, 0, split.lower_end, true);
  double upper = detail::log_sum_side(p, n, split.upper_start, n, false);
  return detail::log_sum_exp(lower, upper);
}

inline double tail_outside_epsilon(double p, long long n, double eps) {
  double lt = log_tail_outside_epsilon(p, n, eps);
  return lt == neg_inf ? 0.0 : std::exp(lt);
}

}  // namespace relfreq::binom
