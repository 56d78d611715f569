#pragma once

#include <stdexcept>
#include <string>

namespace relfreq {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline void require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

// Exact integer "n over k" for the small n used in dense enumeration and
// multiplicity checks. The multiplicative form keeps every intermediate an
// exact integer; n <= 60 stays inside 64 bits.
inline long long binomial_coefficient(int n, int k) {
  require(n >= 0 && k >= 0 && k <= n && n <= 60,
          "binomial_coefficient: outside the exact integer range");
  if (k > n - k) k = n - k;
  long long result = 1;
  for (int i = 0; i < k; ++i) {
    result *= n - i;
    result /= i + 1;
  }
  return result;
}

// Tolerances, double precision. Exact tensor identities at the allowed sizes
// accumulate error well below these.
namespace tol {
inline constexpr double norm = 1e-12;  // state normalization
inline constexpr double op = 1e-10;    // operator identities, matrix entries
inline constexpr double eig = 1e-8;    // eigensolvers lose ~2 digits vs entries
inline constexpr double sum = 1e-9;    // relative, log-space sums up to 1e6 terms
}  // namespace tol

// Size caps for dense construction. State-only operations allow larger
// vectors than operator construction, where a D x D complex matrix at
// D = 2^13 is already 1 GiB.
namespace limits {
inline constexpr long long max_state_dim = 1LL << 16;
inline constexpr long long max_operator_dim = 1LL << 13;
// Eigen-projector assembly enumerates C(N,K) position combinations per
// eigenvalue; C(12,6) = 924 keeps this feasible at d = 2.
inline constexpr int max_enum_copies = 12;
}  // namespace limits

}  // namespace relfreq
