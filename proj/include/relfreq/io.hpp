#pragma once

#include <cstdio>
#include <cstdlib>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "relfreq/binom.hpp"
#include "relfreq/convergence.hpp"
#include "relfreq/freqop.hpp"
#include "relfreq/hilbert.hpp"
#include "relfreq/linalg.hpp"
#include "relfreq/mcsim.hpp"
#include "relfreq/rng.hpp"

namespace relfreq::io {

using nlohmann::json;

// Shortest decimal that round-trips the double exactly.
inline std::string format_double(double value) {
  char buffer[40];
  for (int precision = 15; precision <= 17; ++precision) {
    std::snprintf(buffer, sizeof(buffer), "%.*g", precision, value);
    if (std::strtod(buffer, nullptr) == value) break;
  }
  return buffer;
}

// Complex numbers serialize as [re, im]; matrices as row-major nested arrays.
inline json to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

inline json to_json(const CVector& v) {
  json out = json::array();
  for (Index i = 0; i < v.size(); ++i) out.push_back(to_json(v(i)));
  return out;
}

inline json to_json(const CMatrix& m) {
  json out = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(to_json(m(i, j)));
    out.push_back(row);
  }
  return out;
}

inline Complex complex_from_json(const json& j) {
  require(j.is_array() && j.size() == 2, "complex number must be a [re, im] pair");
  return Complex(j[0].get<double>(), j[1].get<double>());
}

inline CVector vector_from_json(const json& j) {
  require(j.is_array() && !j.empty(), "vector must be a nonempty array");
  CVector v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i)
    v(static_cast<Index>(i)) = complex_from_json(j[i]);
  return v;
}

inline CMatrix matrix_from_json(const json& j) {
  require(j.is_array() && !j.empty(), "matrix must be a nonempty array of rows");
  std::size_t rows = j.size();
  require(j[0].is_array() && !j[0].empty(), "matrix rows must be nonempty arrays");
  std::size_t cols = j[0].size();
  CMatrix m(static_cast<Index>(rows), static_cast<Index>(cols));
  for (std::size_t i = 0; i < rows; ++i) {
    require(j[i].is_array() && j[i].size() == cols, "matrix rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Index>(i), static_cast<Index>(c)) = complex_from_json(j[i][c]);
  }
  return m;
}

inline json to_json(const hilbert::StateVector& psi) {
  return json{{"dim", psi.dim()}, {"amplitudes", to_json(psi.amplitudes())}};
}

inline hilbert::StateVector state_from_json(const json& j) {
  require(j.contains("amplitudes"), "state needs an \"amplitudes\" field");
  CVector v = vector_from_json(j.at("amplitudes"));
  if (j.contains("dim"))
    require(j.at("dim").get<Index>() == v.size(), "state dim does not match amplitudes");
  return hilbert::StateVector(std::move(v));
}

inline json to_json(const hilbert::Projector& p) {
  return json{{"dim", p.dim()}, {"rank", p.rank()}, {"matrix", to_json(p.matrix())}};
}

inline hilbert::Projector projector_from_json(const json& j) {
  require(j.contains("matrix"), "projector needs a \"matrix\" field");
  hilbert::Projector p(matrix_from_json(j.at("matrix")));
  if (j.contains("dim"))
    require(j.at("dim").get<Index>() == p.dim(), "projector dim does not match matrix");
  if (j.contains("rank"))
    require(j.at("rank").get<int>() == p.rank(), "projector rank does not match matrix");
  return p;
}

inline json to_json(const freqop::SpectrumReport& report) {
  json lines = json::array();
  for (const freqop::SpectrumLine& line : report.lines)
    lines.push_back({{"eigenvalue", line.eigenvalue}, {"multiplicity", line.multiplicity}});
  json out{{"eigenvalues", lines},
           {"max_grid_deviation", report.max_grid_deviation},
           {"on_grid", report.on_grid},
           {"passed", report.passed()}};
  if (report.multiplicities_binomial)
    out["multiplicities_binomial"] = *report.multiplicities_binomial;
  return out;
}

inline std::string spectrum_to_csv(const freqop::SpectrumReport& report) {
  std::string out = "eigenvalue,multiplicity\n";
  for (const freqop::SpectrumLine& line : report.lines)
    out += format_double(line.eigenvalue) + "," + std::to_string(line.multiplicity) + "\n";
  return out;
}

// One emitted bound row: the threshold plus the exact tail evaluated there.
struct BoundRow {
  convergence::ConvergenceBound bound;
  double tail_at_threshold = 0.0;
  double chebyshev_ceiling = 0.0;
};

inline json to_json(const BoundRow& row) {
  return json{{"p", row.bound.p},
              {"eps", row.bound.eps},
              {"omega", row.bound.omega},
              {"n_threshold", row.bound.n_threshold},
              {"tail_at_threshold", row.tail_at_threshold},
              {"chebyshev_ceiling", row.chebyshev_ceiling}};
}

inline std::string bounds_to_csv(std::span<const BoundRow> rows) {
  std::string out = "p,eps,omega,n_threshold,tail_at_threshold,chebyshev_ceiling\n";
  for (const BoundRow& row : rows) {
    out += format_double(row.bound.p) + "," + format_double(row.bound.eps) + "," +
           format_double(row.bound.omega) + "," + std::to_string(row.bound.n_threshold) +
           "," + format_double(row.tail_at_threshold) + "," +
           format_double(row.chebyshev_ceiling) + "\n";
  }
  return out;
}

inline json to_json(const convergence::CertificationRow& row) {
  return json{{"n", row.n},
              {"tail", row.tail},
              {"log_tail", row.log_tail},
              {"chebyshev_ceiling", row.ceiling},
              {"summed_tail_check", "empirical (exact binomial)"},
              {"summed_positive", row.summed_positive},
              {"summed_below_omega", row.summed_below_omega},
              {"per_term_check", "analytic bound (per-term)"},
              {"per_term_below_omega", row.per_term_below_omega},
              {"passed", row.passed()}};
}

inline json to_json(const convergence::ConvergenceCertification& report) {
  json rows = json::array();
  for (const convergence::CertificationRow& row : report.rows) rows.push_back(to_json(row));
  return json{{"p", report.p},
              {"eps", report.eps},
              {"omega", report.omega},
              {"n_threshold", report.n_threshold},
              {"rows", rows},
              {"all_passed", report.all_passed}};
}

// Distribution dump, one row per relative-frequency index.
inline std::string distribution_to_csv(const binom::BinomialDistribution& dist) {
  std::string out = "K,K/N,prob,log_prob\n";
  for (long long k = 0; k <= dist.n(); ++k) {
    out += std::to_string(k) + "," +
           format_double(static_cast<double>(k) / static_cast<double>(dist.n())) + "," +
           format_double(dist.prob(k)) + "," + format_double(dist.log_prob(k)) + "\n";
  }
  return out;
}

inline json to_json(const mcsim::ExperimentSummary& summary) {
  return json{{"params",
               {{"p", summary.p},
                {"n", summary.n_copies},
                {"eps", summary.eps},
                {"trials", summary.trials}}},
              {"empirical_tail", summary.empirical_tail},
              {"exact_tail", summary.exact_tail},
              {"std_error", summary.std_error},
              {"seed", summary.master_seed},
              {"rng_name", std::string(SplitMix64::name())}};
}

inline std::string trials_to_csv(std::span<const mcsim::TrialRecord> records) {
  std::string out = "trial,K,K/N\n";
  for (const mcsim::TrialRecord& record : records) {
    out += std::to_string(record.trial_index) + "," + std::to_string(record.k_count) +
           "," + format_double(record.relative_frequency()) + "\n";
  }
  return out;
}

}  // namespace relfreq::io
