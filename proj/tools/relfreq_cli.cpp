// relfreq: command-line front end for the relative-frequency laboratory.
// Subcommands: verify, bound, spectrum, simulate. Exit codes: 0 success,
// 1 assertion failure, 2 usage error. All randomness flows from --seed; the
// default is the fixed value 12345, never entropy, so runs are reproducible.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relfreq/binom.hpp"
#include "relfreq/convergence.hpp"
#include "relfreq/freqop.hpp"
#include "relfreq/hilbert.hpp"
#include "relfreq/io.hpp"
#include "relfreq/mcsim.hpp"
#include "relfreq/rng.hpp"

namespace {

using nlohmann::json;
using namespace relfreq;

constexpr std::uint64_t kDefaultSeed = 12345;

constexpr int kExitSuccess = 0;
constexpr int kExitAssertionFailure = 1;
constexpr int kExitUsageError = 2;

struct OutputOptions {
  std::string path;           // empty = stdout
  std::string format = "json";
};

void add_output_options(CLI::App* cmd, OutputOptions* out) {
  cmd->add_option("-o,--output", out->path, "Write the report to this file (default: stdout)");
  cmd->add_option("--format", out->format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->capture_default_str();
  cmd->set_config("--config", "", "Flat key=value config file; flags take precedence");
}

void emit(const OutputOptions& out, const std::string& text) {
  if (out.path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream file(out.path, std::ios::binary | std::ios::trunc);
  require(file.good(), "cannot open output file: " + out.path);
  file << text;
  require(file.good(), "failed writing output file: " + out.path);
}

std::string render(const OutputOptions& out, const json& report, const std::string& csv) {
  return out.format == "csv" ? csv : report.dump(2) + "\n";
}

hilbert::Projector load_projector(const std::string& path) {
  std::ifstream file(path);
  require(file.good(), "cannot open projector file: " + path);
  json j = json::parse(file, nullptr, true, true);
  return io::projector_from_json(j);
}

// ---------------------------------------------------------------------------
// verify: the exact-vs-closed-form identity suite over random (psi, P) pairs.

struct VerifyParams {
  int d = 2;
  int rank = 1;
  int n_max = 6;
  int trials = 10;
  std::uint64_t seed = kDefaultSeed;
};

struct IdentityRow {
  std::string name;
  double max_deviation = 0.0;
  double tolerance = 0.0;
  bool passed() const { return max_deviation <= tolerance; }
};

class IdentityTable {
 public:
  void record(const std::string& name, double deviation, double tolerance) {
    for (IdentityRow& row : rows_) {
      if (row.name == name) {
        row.max_deviation = std::max(row.max_deviation, deviation);
        return;
      }
    }
    rows_.push_back({name, deviation, tolerance});
  }

  bool all_passed() const {
    for (const IdentityRow& row : rows_)
      if (!row.passed()) return false;
    return true;
  }

  json to_json() const {
    json out = json::array();
    for (const IdentityRow& row : rows_)
      out.push_back({{"name", row.name},
                     {"max_deviation", row.max_deviation},
                     {"tolerance", row.tolerance},
                     {"passed", row.passed()}});
    return out;
  }

  std::string to_csv() const {
    std::string out = "name,max_deviation,tolerance,passed\n";
    for (const IdentityRow& row : rows_)
      out += row.name + "," + io::format_double(row.max_deviation) + "," +
             io::format_double(row.tolerance) + "," + (row.passed() ? "true" : "false") +
             "\n";
    return out;
  }

 private:
  std::vector<IdentityRow> rows_;
};

void verify_instance(const hilbert::Projector& p, const hilbert::StateVector& psi,
                     int n_copies, bool extreme, IdentityTable& table) {
  double prob = hilbert::probability(psi, p);
  freqop::FrequencyOperator f(p, n_copies);
  freqop::EigenProjectorFamily family(p, n_copies);
  hilbert::StateVector ensemble = hilbert::tensor_power_state(psi, n_copies);

  freqop::SpectrumReport spectrum = freqop::verify_spectrum(f);
  table.record("spectrum_on_grid", spectrum.max_grid_deviation, tol::eig);
  if (spectrum.multiplicities_binomial)
    table.record("spectrum_multiplicities_binomial",
                 *spectrum.multiplicities_binomial ? 0.0 : 1.0, 0.0);

  CMatrix completeness = CMatrix::Zero(f.dim(), f.dim());
  for (int k = 0; k <= n_copies; ++k) completeness += family.projector(k);
  table.record("eigenprojector_completeness",
               max_abs_diff(completeness, CMatrix::Identity(f.dim(), f.dim())), tol::op);
  table.record("spectral_reconstruction",
               freqop::spectral_reconstruction_check(f, family), tol::op);

  std::vector<double> dense_probs = freqop::eigenprojector_probabilities(family, ensemble);

  if (extreme) {
    // Degenerate single-copy probability: all mass on one relative frequency.
    // The closed form is evaluated at the exact extreme value; the measured
    // probability is checked against it separately.
    bool full_rank = p.rank() == p.dim();
    double exact_p = full_rank ? 1.0 : 0.0;
    long long delta_index = full_rank ? n_copies : 0;
    table.record("probability_extreme", std::abs(prob - exact_p), tol::op);
    double dense_dev = 0.0;
    double closed_dev = 0.0;
    for (int k = 0; k <= n_copies; ++k) {
      double expected = k == delta_index ? 1.0 : 0.0;
      dense_dev = std::max(dense_dev, std::abs(dense_probs[static_cast<std::size_t>(k)] -
                                               expected));
      closed_dev = std::max(closed_dev,
                            std::abs(binom::eigprob(exact_p, n_copies, k) - expected));
    }
    table.record("delta_distribution_dense", dense_dev, tol::op);
    table.record("delta_distribution_closed_form", closed_dev, 0.0);
    return;
  }

  table.record("expectation_single_copy",
               std::abs(freqop::expectation(f, ensemble) - prob), tol::op);

  freqop::VarianceForms forms = freqop::variance_forms(f, ensemble, prob);
  double closed_variance = prob * (1.0 - prob) / n_copies;
  table.record("variance_forms_agree", forms.max_disagreement(), tol::op);
  table.record("variance_closed_form",
               std::abs(forms.centered_square - closed_variance), tol::op);
  table.record("distance_squared_closed_form",
               std::abs(forms.distance_squared - closed_variance), tol::op);
  table.record("spectral_mean",
               std::abs(freqop::spectral_mean(family, ensemble) - prob), tol::op);
  table.record("variance_spectral",
               std::abs(freqop::variance_spectral_sum(family, ensemble, prob) -
                        forms.centered_square),
               tol::op);

  double binom_dev = 0.0;
  for (int k = 0; k <= n_copies; ++k)
    binom_dev = std::max(binom_dev, std::abs(dense_probs[static_cast<std::size_t>(k)] -
                                             binom::eigprob(prob, n_copies, k)));
  table.record("eigenprojector_probabilities_binomial", binom_dev, tol::op);
}

int run_verify(const VerifyParams& params, const OutputOptions& out) {
  require(params.d >= 1 && params.rank >= 0 && params.rank <= params.d,
          "verify: rank must lie in 0..d");
  require(params.n_max >= 1 && params.trials >= 1, "verify: n-max and trials must be >= 1");
  require(params.n_max <= limits::max_enum_copies,
          "verify: n-max exceeds the enumeration cap");
  require(checked_power(params.d, params.n_max) <= limits::max_operator_dim,
          "verify: d^n-max exceeds the dense operator size cap");

  bool extreme = params.rank == 0 || params.rank == params.d;
  SplitMix64 rng(params.seed);
  IdentityTable table;
  for (int t = 0; t < params.trials; ++t) {
    hilbert::Projector p = hilbert::random_projector(params.d, params.rank, rng);
    hilbert::StateVector psi = hilbert::random_state(params.d, rng);
    for (int n = 1; n <= params.n_max; ++n)
      verify_instance(p, psi, n, extreme, table);
  }

  json report{{"command", "verify"},
              {"params",
               {{"d", params.d},
                {"rank", params.rank},
                {"n_max", params.n_max},
                {"trials", params.trials},
                {"seed", params.seed},
                {"regime", extreme ? "extreme" : "non-extreme"}}},
              {"identities", table.to_json()},
              {"all_passed", table.all_passed()}};
  emit(out, render(out, report, table.to_csv()));
  return table.all_passed() ? kExitSuccess : kExitAssertionFailure;
}

// ---------------------------------------------------------------------------
// bound: threshold table over a (p, eps, omega) grid, or a plot-ready
// (n, tail, ceiling, omega) series for a single cell.

int run_bound_series(double p, double eps, double omega,
                     const std::vector<long long>& ns, const OutputOptions& out) {
  std::vector<long long> sorted = ns;
  std::sort(sorted.begin(), sorted.end());
  convergence::ConvergenceCertification report =
      convergence::certify_convergence(p, eps, omega, sorted);

  std::string csv = "n,tail,ceiling,omega\n";
  for (const convergence::CertificationRow& row : report.rows)
    csv += std::to_string(row.n) + "," + io::format_double(row.tail) + "," +
           io::format_double(row.ceiling) + "," + io::format_double(omega) + "\n";

  json report_json = io::to_json(report);
  report_json["command"] = "bound";
  report_json["series"] = true;
  emit(out, render(out, report_json, csv));
  return report.all_passed ? kExitSuccess : kExitAssertionFailure;
}

int run_bound(const std::vector<double>& ps, const std::vector<double>& epss,
              const std::vector<double>& omegas, const std::vector<long long>& series,
              const OutputOptions& out) {
  require(!ps.empty() && !epss.empty() && !omegas.empty(), "bound: empty grid");
  if (!series.empty()) {
    require(ps.size() == 1 && epss.size() == 1 && omegas.size() == 1,
            "bound: --series needs exactly one (p, eps, omega) cell");
    return run_bound_series(ps.front(), epss.front(), omegas.front(), series, out);
  }

  std::vector<io::BoundRow> rows;
  bool all_ok = true;
  for (double p : ps) {
    for (double eps : epss) {
      for (double omega : omegas) {
        io::BoundRow row;
        row.bound = convergence::n_epsilon_omega(p, eps, omega);
        row.tail_at_threshold =
            binom::tail_outside_epsilon(p, row.bound.n_threshold, eps);
        row.chebyshev_ceiling =
            convergence::chebyshev_ceiling(p, row.bound.n_threshold, eps);
        all_ok = all_ok && convergence::sandwich_holds(row.bound);
        rows.push_back(row);
      }
    }
  }

  json rows_json = json::array();
  for (const io::BoundRow& row : rows) rows_json.push_back(io::to_json(row));
  json report{{"command", "bound"}, {"rows", rows_json}, {"all_passed", all_ok}};
  emit(out, render(out, report, io::bounds_to_csv(rows)));
  return all_ok ? kExitSuccess : kExitAssertionFailure;
}

// ---------------------------------------------------------------------------
// spectrum: eigenvalues and multiplicities of one frequency operator.

struct SpectrumParams {
  int d = 2;
  int rank = 1;
  int n = 3;
  std::uint64_t seed = kDefaultSeed;
  std::string projector_file;
};

int run_spectrum(const SpectrumParams& params, const OutputOptions& out) {
  hilbert::Projector p = [&] {
    if (!params.projector_file.empty()) return load_projector(params.projector_file);
    require(params.d >= 1 && params.rank >= 0 && params.rank <= params.d,
            "spectrum: rank must lie in 0..d");
    SplitMix64 rng(params.seed);
    return hilbert::random_projector(params.d, params.rank, rng);
  }();

  freqop::FrequencyOperator f(p, params.n);
  freqop::SpectrumReport spectrum = freqop::verify_spectrum(f);

  json report{{"command", "spectrum"},
              {"params",
               {{"d", p.dim()}, {"rank", p.rank()}, {"n", params.n}, {"seed", params.seed}}},
              {"spectrum", io::to_json(spectrum)}};
  emit(out, render(out, report, io::spectrum_to_csv(spectrum)));
  return spectrum.passed() ? kExitSuccess : kExitAssertionFailure;
}

// ---------------------------------------------------------------------------
// simulate: Monte Carlo tail experiment with optional certification and
// dense bridging verification.

struct SimulateParams {
  double p = 0.0;
  long long n = 0;
  double eps = 0.0;
  long long trials = 10000;
  double omega = 0.05;
  std::uint64_t seed = kDefaultSeed;
  bool verify_bridging = false;
  std::string trials_csv;
};

int run_simulate(const SimulateParams& params, const OutputOptions& out) {
  bool want_records = params.verify_bridging || !params.trials_csv.empty();
  std::vector<mcsim::TrialRecord> records;
  mcsim::ExperimentSummary summary =
      mcsim::run_experiment(params.p, params.n, params.eps, params.trials, params.seed,
                            want_records ? &records : nullptr);

  json report = io::to_json(summary);
  report["command"] = "simulate";
  bool all_ok = true;

  // Certification applies once N reaches the explicit threshold.
  convergence::ConvergenceBound bound =
      convergence::n_epsilon_omega(params.p, params.eps, params.omega);
  json cert{{"omega", params.omega}, {"n_threshold", bound.n_threshold}};
  if (params.n >= bound.n_threshold) {
    long long n_values[] = {params.n};
    convergence::ConvergenceCertification certification =
        convergence::certify_convergence(params.p, params.eps, params.omega, n_values);
    cert["applicable"] = true;
    cert["certification"] = io::to_json(certification);
    all_ok = all_ok && certification.all_passed;
  } else {
    cert["applicable"] = false;
  }
  report["convergence"] = cert;

  if (params.verify_bridging) {
    // Canonical qubit realization of the event: P = diag(1,0) and
    // psi = (sqrt(p), sqrt(1-p)), so <psi|P|psi> = p.
    CMatrix pm = CMatrix::Zero(2, 2);
    pm(0, 0) = 1.0;
    hilbert::Projector p2(pm);
    CVector amplitudes(2);
    amplitudes << std::sqrt(params.p), std::sqrt(1.0 - params.p);
    hilbert::StateVector psi(amplitudes);

    std::vector<mcsim::BridgingReport> reports =
        mcsim::verify_bridging_batch(psi, p2, records);
    long long passed = 0;
    double max_q = 0.0;
    double max_f = 0.0;
    for (const mcsim::BridgingReport& r : reports) {
      passed += r.passed() ? 1 : 0;
      max_q = std::max(max_q, r.q_deviation);
      max_f = std::max(max_f, r.f_deviation);
    }
    bool bridging_ok = passed == static_cast<long long>(reports.size());
    report["bridging"] = json{{"trials", reports.size()},
                              {"passed", passed},
                              {"max_q_deviation", max_q},
                              {"max_f_deviation", max_f},
                              {"all_passed", bridging_ok}};
    all_ok = all_ok && bridging_ok;
  }

  if (!params.trials_csv.empty()) {
    OutputOptions csv_out;
    csv_out.path = params.trials_csv;
    emit(csv_out, io::trials_to_csv(records));
  }

  std::string csv =
      "p,n,eps,trials,seed,empirical_tail,exact_tail,std_error\n" +
      io::format_double(summary.p) + "," + std::to_string(summary.n_copies) + "," +
      io::format_double(summary.eps) + "," + std::to_string(summary.trials) + "," +
      std::to_string(summary.master_seed) + "," +
      io::format_double(summary.empirical_tail) + "," +
      io::format_double(summary.exact_tail) + "," +
      io::format_double(summary.std_error) + "\n";
  emit(out, render(out, report, csv));
  return all_ok ? kExitSuccess : kExitAssertionFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"relfreq: verification laboratory for the quantum weak law of large numbers"};
  app.require_subcommand(1);

  VerifyParams verify_params;
  OutputOptions verify_out;
  CLI::App* verify = app.add_subcommand(
      "verify", "Run the exact-vs-closed-form identity suite on random (state, projector) pairs");
  verify->add_option("--d", verify_params.d, "Single-system dimension")->capture_default_str();
  verify->add_option("--rank", verify_params.rank, "Projector rank")->capture_default_str();
  verify->add_option("--n-max", verify_params.n_max, "Largest ensemble size N")
      ->capture_default_str();
  verify->add_option("--trials", verify_params.trials, "Random instances")
      ->capture_default_str();
  verify->add_option("--seed", verify_params.seed, "Master seed")->capture_default_str();
  add_output_options(verify, &verify_out);

  std::vector<double> bound_p, bound_eps, bound_omega;
  std::vector<long long> bound_series;
  OutputOptions bound_out;
  CLI::App* bound = app.add_subcommand("bound", "Emit the explicit convergence threshold table");
  bound->add_option("--p", bound_p, "Single-copy probabilities, each in (0,1)")->required();
  bound->add_option("--eps", bound_eps, "Frequency deviations, each > 0")->required();
  bound->add_option("--omega", bound_omega, "Probability budgets, each > 0")->required();
  bound->add_option("--series", bound_series,
                    "Ensemble sizes (each >= the threshold): emit a plot-ready "
                    "(n, tail, ceiling, omega) series instead of the table");
  add_output_options(bound, &bound_out);

  SpectrumParams spectrum_params;
  OutputOptions spectrum_out;
  CLI::App* spectrum =
      app.add_subcommand("spectrum", "Diagonalize one frequency operator and report multiplicities");
  spectrum->add_option("--d", spectrum_params.d, "Single-system dimension")->capture_default_str();
  spectrum->add_option("--rank", spectrum_params.rank, "Projector rank")->capture_default_str();
  spectrum->add_option("--n", spectrum_params.n, "Ensemble size N")->capture_default_str();
  spectrum->add_option("--seed", spectrum_params.seed, "Master seed")->capture_default_str();
  spectrum->add_option("--projector-file", spectrum_params.projector_file,
                       "JSON file with a \"matrix\" field; overrides --d/--rank/--seed");
  add_output_options(spectrum, &spectrum_out);

  SimulateParams simulate_params;
  OutputOptions simulate_out;
  CLI::App* simulate =
      app.add_subcommand("simulate", "Monte Carlo measurement experiment against the exact tail");
  simulate->add_option("--p", simulate_params.p, "Single-copy probability in (0,1)")->required();
  simulate->add_option("--n", simulate_params.n, "Ensemble size N")->required();
  simulate->add_option("--eps", simulate_params.eps, "Frequency deviation")->required();
  simulate->add_option("--r", simulate_params.trials, "Number of trials")->capture_default_str();
  simulate->add_option("--omega", simulate_params.omega, "Probability budget for certification")
      ->capture_default_str();
  simulate->add_option("--seed", simulate_params.seed, "Master seed")->capture_default_str();
  simulate->add_flag("--verify-bridging", simulate_params.verify_bridging,
                     "Verify the dense ensemble eigenrelations for every trial (needs small N)");
  simulate->add_option("--trials-csv", simulate_params.trials_csv,
                       "Also write per-trial records (trial, K, K/N) to this CSV file");
  add_output_options(simulate, &simulate_out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kExitSuccess : kExitUsageError;
  }

  try {
    if (verify->parsed()) return run_verify(verify_params, verify_out);
    if (bound->parsed()) return run_bound(bound_p, bound_eps, bound_omega, bound_series, bound_out);
    if (spectrum->parsed()) return run_spectrum(spectrum_params, spectrum_out);
    if (simulate->parsed()) return run_simulate(simulate_params, simulate_out);
  } catch (const Error& e) {
    std::cerr << "relfreq: " << e.what() << "\n";
    return kExitUsageError;
  } catch (const std::exception& e) {
    std::cerr << "relfreq: unexpected error: " << e.what() << "\n";
    return kExitUsageError;
  }
  return kExitUsageError;
}
