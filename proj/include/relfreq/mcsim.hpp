#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "relfreq/binom.hpp"
#include "relfreq/common.hpp"
#include "relfreq/freqop.hpp"
#include "relfreq/hilbert.hpp"
#include "relfreq/rng.hpp"

namespace relfreq::mcsim {

using hilbert::Projector;
using hilbert::StateVector;

// One simulated ensemble measurement: N yes/no outcomes of the event, the
// occurrence count K, and the seed path that reproduces it bit for bit.
struct TrialRecord {
  std::vector<std::uint8_t> outcomes;  // 1 = event occurred
  long long k_count = 0;
  long long n_copies = 0;
  std::uint64_t master_seed = 0;
  std::uint64_t trial_index = 0;

  double relative_frequency() const {
    return static_cast<double>(k_count) / static_cast<double>(n_copies);
  }
};

namespace detail {

// One uniform draw per copy, no batching, so records are reproducible at the
// bit level and the counting path below consumes the identical stream.
inline bool draw_occurrence(double p, SplitMix64& stream) {
  return stream.next_double() < p;
}

}  // namespace detail

inline TrialRecord simulate_trial(double p, long long n, std::uint64_t master_seed,
                                  std::uint64_t trial_index) {
  require(p >= 0.0 && p <= 1.0, "probability p must lie in [0,1]");
  require(n >= 1, "ensemble size N must be >= 1");
  SplitMix64 stream = SplitMix64::stream(master_seed, trial_index);
  TrialRecord record;
  record.n_copies = n;
  record.master_seed = master_seed;
  record.trial_index = trial_index;
  record.outcomes.resize(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    bool occurred = detail::draw_occurrence(p, stream);
    record.outcomes[static_cast<std::size_t>(i)] = occurred ? 1 : 0;
    record.k_count += occurred ? 1 : 0;
  }
  return record;
}

// Lueders update for a complete nondemolition measurement: the state collapses
// onto the measured eigenspace and is renormalized. Repeating the same outcome
// leaves the state unchanged.
inline StateVector post_measurement_state(const StateVector& psi, const Projector& p,
                                          int outcome) {
  require(psi.dim() == p.dim(), "post_measurement_state: dimension mismatch");
  require(outcome == 0 || outcome == 1, "outcome must be 0 or 1");
  CVector projected = outcome == 1
                          ? p.matrix() * psi.amplitudes()
                          : hilbert::orthocomplement(p).matrix() * psi.amplitudes();
  double weight = projected.squaredNorm();
  require(weight > tol::op,
          "unreachable outcome: the projected state has zero norm");
  return StateVector(projected / std::sqrt(weight));
}

// Checks that a simulated trial realizes the theoretical relative frequency:
// the post-measurement ensemble state is invariant under Q_N^K and an
// eigenvector of the frequency operator with eigenvalue K/N. The K = 0 case
// is flagged: the eigenrelation F Psi' = 0 is still asserted there.
struct BridgingReport {
  double k_over_n = 0.0;
  double q_deviation = 0.0;  // max entry of Q_N^K Psi' - Psi'
  double f_deviation = 0.0;  // max entry of F Psi' - (K/N) Psi'
  bool q_invariant = false;
  bool f_eigenvector = false;
  bool k_zero = false;

  bool passed() const { return q_invariant && f_eigenvector; }
};

namespace detail {

inline StateVector ensemble_after_measurement(const StateVector& psi, const Projector& p,
                                              const TrialRecord& record) {
  std::vector<StateVector> factors;
  factors.reserve(record.outcomes.size());
  for (std::uint8_t outcome : record.outcomes)
    factors.push_back(post_measurement_state(psi, p, outcome));
  return hilbert::product_state(factors);
}

inline BridgingReport check_bridging(const CMatrix& q_k, const CMatrix& f,
                                     const StateVector& ensemble, long long k,
                                     long long n) {
  const CVector& v = ensemble.amplitudes();
  double k_over_n = static_cast<double>(k) / static_cast<double>(n);
  BridgingReport report;
  report.k_over_n = k_over_n;
  report.k_zero = k == 0;
  report.q_deviation = (q_k * v - v).cwiseAbs().maxCoeff();
  report.f_deviation = (f * v - k_over_n * v).cwiseAbs().maxCoeff();
  report.q_invariant = report.q_deviation <= tol::op;
  report.f_eigenvector = report.f_deviation <= tol::op;
  return report;
}

}  // namespace detail

inline BridgingReport verify_bridging(const StateVector& psi, const Projector& p,
                                      const TrialRecord& record) {
  require(psi.dim() == p.dim(), "verify_bridging: dimension mismatch");
  require(record.n_copies >= 1 &&
              record.k_count >= 0 && record.k_count <= record.n_copies,
          "malformed trial record");
  require(record.n_copies <= limits::max_enum_copies,
          "bridging verification needs dense operators; N exceeds the enumeration cap");
  int n = static_cast<int>(record.n_copies);
  StateVector ensemble = detail::ensemble_after_measurement(psi, p, record);
  freqop::FrequencyOperator f(p, n);
  hilbert::DenseOperator q_k =
      freqop::build_eigenprojector(p, n, static_cast<int>(record.k_count));
  return detail::check_bridging(q_k.matrix(), f.matrix(), ensemble, record.k_count,
                                record.n_copies);
}

// Batch form: the frequency operator and the eigenprojector family are built
// once and reused across records.
inline std::vector<BridgingReport> verify_bridging_batch(
    const StateVector& psi, const Projector& p, std::span<const TrialRecord> records) {
  std::vector<BridgingReport> reports;
  if (records.empty()) return reports;
  require(records.front().n_copies >= 1 &&
              records.front().n_copies <= limits::max_enum_copies,
          "bridging verification needs dense operators; N exceeds the enumeration cap");
  int n = static_cast<int>(records.front().n_copies);
  for (const TrialRecord& record : records)
    require(record.n_copies == n, "batch records must share one ensemble size");
  freqop::FrequencyOperator f(p, n);
  freqop::EigenProjectorFamily family(p, n);
  reports.reserve(records.size());
  for (const TrialRecord& record : records) {
    StateVector ensemble = detail::ensemble_after_measurement(psi, p, record);
    reports.push_back(detail::check_bridging(family.projector(static_cast<int>(record.k_count)),
                                             f.matrix(), ensemble, record.k_count,
                                             record.n_copies));
  }
  return reports;
}

// Empirical tail frequency over R independent trials against the exact
// binomial tail. The outside predicate is shared with the closed-form module
// so both sides use the same strict boundary convention.
struct ExperimentSummary {
  long long trials = 0;
  double p = 0.0;
  long long n_copies = 0;
  double eps = 0.0;
  double empirical_tail = 0.0;
  double exact_tail = 0.0;
  double std_error = 0.0;
  std::uint64_t master_seed = 0;
};

inline ExperimentSummary run_experiment(double p, long long n, double eps,
                                        long long trials, std::uint64_t master_seed,
                                        std::vector<TrialRecord>* records_out = nullptr) {
  require(p > 0.0 && p < 1.0, "experiment requires non-extreme p");
  require(n >= 1 && trials >= 1, "experiment needs N >= 1 and R >= 1");
  require(eps > 0.0, "epsilon must be positive");

  ExperimentSummary summary;
  summary.trials = trials;
  summary.p = p;
  summary.n_copies = n;
  summary.eps = eps;
  summary.master_seed = master_seed;
  summary.exact_tail = binom::tail_outside_epsilon(p, n, eps);
  summary.std_error =
      std::sqrt(summary.exact_tail * (1.0 - summary.exact_tail) /
                static_cast<double>(trials));

  // Per-trial streams derive from (master_seed, index), so any parallel
  // schedule folds to the same counts; the loop below is the index-order fold.
  long long outside_count = 0;
  if (records_out) records_out->reserve(static_cast<std::size_t>(trials));
  for (long long r = 0; r < trials; ++r) {
    long long k;
    if (records_out) {
      TrialRecord record = simulate_trial(p, n, master_seed, static_cast<std::uint64_t>(r));
      k = record.k_count;
      records_out->push_back(std::move(record));
    } else {
      SplitMix64 stream = SplitMix64::stream(master_seed, static_cast<std::uint64_t>(r));
      k = 0;
      for (long long i = 0; i < n; ++i) k += detail::draw_occurrence(p, stream) ? 1 : 0;
    }
    if (binom::outside_epsilon(p, n, k, eps)) ++outside_count;
  }
  summary.empirical_tail =
      static_cast<double>(outside_count) / static_cast<double>(trials);
  return summary;
}

}  // namespace relfreq::mcsim
