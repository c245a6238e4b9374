#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "freqid/loewner.hpp"
#include "freqid/lnnm_solver.hpp"
#include "freqid/sysmodel.hpp"

namespace freqid {

/// The fourth-order benchmark system
///   (0.12 z + 0.18 z^2) / (1 - 1.4 z + 1.443 z^2 - 1.123 z^3 + 0.7729 z^4).
TransferFunction true_system();

/// M x N i.i.d. draws uniform on the complex disk of radius eta_bar:
/// radius eta_bar sqrt(U1), phase 2 pi U2. Deterministic per seed.
Eigen::MatrixXcd gen_noise(std::size_t M, std::size_t N, double eta_bar, std::uint64_t seed);

struct MeasurementSet {
    FrequencyGrid grid;
    /// M x N, one experiment per column.
    Eigen::MatrixXcd W;
};

/// W = w_bar 1^T + gen_noise(...). Throws UnstableSystem.
MeasurementSet gen_data(const TransferFunction &tf, const FrequencyGrid &grid, std::size_t N,
                        double eta_bar, std::uint64_t seed);

struct GridSpec {
    enum class Kind { Uniform, Log };
    Kind kind = Kind::Uniform;
    double delta_m = 0.1;
    double theta_min = 0.01;
    double theta_max = 3.0;

    static GridSpec uniform(double dm) { return {Kind::Uniform, dm, 0.0, 0.0}; }
    static GridSpec log(double a, double b) { return {Kind::Log, 0.0, a, b}; }

    FrequencyGrid make(std::size_t M) const;
    /// "uniform:<dm>" or "log:<a>,<b>". Throws ParseError.
    static GridSpec parse(const std::string &text);
    std::string to_string() const;
};

struct ExperimentConfig {
    TransferFunction system = true_system();
    GridSpec grid = GridSpec::uniform(0.1);
    std::size_t M = 32;
    std::size_t N = 30;
    double eta_bar = 0.5;
    /// nullopt selects tau_star from the bounds with the true decay constants.
    std::optional<double> tau = 7.0;
    std::size_t trials = 20;
    std::uint64_t seed = 0;
    std::size_t hinf_grid_density = 4096;
    std::size_t max_iter = 5000;
    double solver_tol = 1e-8;
    /// Failure probability used when tau is tau_star.
    double delta_prob = 0.05;

    /// Throws InvalidConfig.
    void validate() const;
    /// The tau actually used by every trial.
    double resolved_tau() const;
};

/// One Monte-Carlo trial. Errors are sup-norm gaps on the unit circle between
/// the realized model and the truth; sv ratios are sigma_{kappa+1}/sigma_1 of
/// the Loewner matrix of the estimate (0 when M <= kappa).
struct TrialRecord {
    std::size_t trial_id = 0;
    std::uint64_t seed = 0;
    double hinf_lnnm = 0.0;
    double hinf_avg = 0.0;
    double sv_ratio_lnnm = 0.0;
    double sv_ratio_avg = 0.0;
    double cert_dual_norm = 0.0;
    double cert_gap = 0.0;
    std::size_t iterations = 0;
    /// max_r |w_hat_r - w_bar_r| and the same for the row means.
    double sampled_lnnm = 0.0;
    double sampled_avg = 0.0;
    bool stable_lnnm = false;
    bool stable_avg = false;
    bool converged = false;
    /// Order select_order picks for the LNNM estimate at rank_tol 1e-8.
    std::size_t auto_order_lnnm = 0;
    /// "ok" or the error code that interrupted the trial; failed metrics are NaN.
    std::string status = "ok";

    bool operator==(const TrialRecord &) const = default;
};

/// Per-trial seed mix_seed(cfg.seed, trial_id).
std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial_id);

TrialRecord run_trial(const ExperimentConfig &cfg, std::size_t trial_id);
TrialRecord run_trial(const ExperimentConfig &cfg, const LoewnerContext &ctx, std::size_t trial_id);

/// Runs cfg.trials trials in parallel and returns them sorted by trial_id.
/// Parallelism is capped by FREQID_THREADS when set.
std::vector<TrialRecord> run_trials(const ExperimentConfig &cfg);

/// Worker count: hardware concurrency capped by FREQID_THREADS, at least 1.
std::size_t worker_count();

enum class SweepVariable { N, M, Eta };
SweepVariable parse_sweep_variable(const std::string &text);
std::string to_string(SweepVariable v);

struct SweepRow {
    std::string variable;
    double value = 0.0;
    TrialRecord record;

    bool operator==(const SweepRow &) const = default;
};

struct SweepResult {
    SweepVariable variable = SweepVariable::N;
    std::vector<double> values;
    std::vector<SweepRow> rows;
    /// Medians over trials with finite errors, one per value.
    std::vector<double> median_lnnm;
    std::vector<double> median_avg;
    /// Log-log slope of the medians; NaN when fewer than two finite points.
    double slope_lnnm = 0.0;
    double slope_avg = 0.0;
};

/// For each value: copy cfg, substitute the variable, run all trials.
SweepResult sweep(const ExperimentConfig &cfg, SweepVariable variable,
                  const std::vector<double> &values);

/// Median of the finite entries; NaN if none.
double median(std::vector<double> xs);

/// Least-squares slope of ln y against ln x. Throws DegenerateFit.
double fit_loglog_slope(const std::vector<double> &xs, const std::vector<double> &ys);

struct CheckResult {
    std::string name;
    double delta_m = 0.0;
    std::size_t M = 0;
    double lhs = 0.0;
    double rhs = 0.0;
    bool passed = false;
    std::string detail;
};

struct ValidationReport {
    std::vector<CheckResult> checks;
    bool all_passed() const;
};

struct ValidationOptions {
    /// Include the sampled minimum-gain check.
    bool min_gain = true;
    std::size_t min_gain_samples = 1000;
    /// Random complete graphs per size for the connectivity check.
    std::size_t graphs = 5;
    double quad_tol = 1e-9;
};

/// Numerical checks of the supporting lemmas on uniform grids:
///   trig_integral    2-D quadrature of 1/(2 - 2cos(theta - t)) = -2 ln sin dm
///   frobenius_ratio  ||L(w_bar)||_F / ||w_bar|| against its closed-form cap
///   connectivity     lambda_2 of complete graphs with weights >= c is >= c n
///   gram_floor       lambda_min(F_in) >= M/2 and lambda_2(E_in) >= M/2
///   midpoint_sum     (1/M^2) sum |C_rs|^2 <= -2 ln sin dm / (pi - 2dm)^2
///   min_gain         sampled cone ratio >= min_gain_lower(sqrt2 - 1)
/// A failing or throwing check becomes a failed entry; the run never aborts.
ValidationReport validate_lemmas(const std::vector<double> &delta_m_values,
                                 const std::vector<std::size_t> &M_values, std::uint64_t seed,
                                 const ValidationOptions &options = {});

/// Double integral of 1/(2 - 2cos(theta - t)) over
/// theta in [dm, pi - dm], t in [-pi + dm, -dm] by nested adaptive
/// Gauss-Kronrod quadrature.
double trig_integral(double delta_m, double tol = 1e-9);

/// Column order of the sweep CSV.
const std::vector<std::string> &csv_columns();

/// Header plus one line per row, reals with 17 significant digits.
void write_csv(std::ostream &os, const std::vector<SweepRow> &rows);
void emit_csv(const std::string &path, const std::vector<SweepRow> &rows);
/// Inverse of write_csv. Throws ParseError.
std::vector<SweepRow> read_csv(std::istream &is);
std::vector<SweepRow> parse_csv(const std::string &path);

} // namespace freqid
