#include "freqid/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <iomanip>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <Eigen/Eigenvalues>

#include "freqid/bounds.hpp"
#include "freqid/realization.hpp"
#include "freqid/rng.hpp"

namespace freqid {

namespace {

constexpr double nan_v = std::numeric_limits<double>::quiet_NaN();

std::string fmt_real(double x) {
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

double parse_real(const std::string &s) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size())
            throw Error(ErrorCode::ParseError, "trailing characters in number '" + s + "'");
        return v;
    } catch (const std::logic_error &) {
        throw Error(ErrorCode::ParseError, "not a number: '" + s + "'");
    }
}

std::uint64_t parse_uint(const std::string &s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw Error(ErrorCode::ParseError, "not an unsigned integer: '" + s + "'");
    try {
        return std::stoull(s);
    } catch (const std::logic_error &) {
        throw Error(ErrorCode::ParseError, "integer out of range: '" + s + "'");
    }
}

std::vector<std::string> split(const std::string &line, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(line);
    while (std::getline(is, cur, sep))
        out.push_back(cur);
    if (!line.empty() && line.back() == sep)
        out.emplace_back();
    return out;
}

/// Runs fn(i) for i in [0, n) on worker_count() threads. The first
/// exception is rethrown after all workers stop.
template <class Fn>
void parallel_for(std::size_t n, Fn fn) {
    const std::size_t workers = std::min(worker_count(), std::max<std::size_t>(n, 1));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mu;
    auto body = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n)
                return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(failure_mu);
                if (!failure)
                    failure = std::current_exception();
                next.store(n);
            }
        }
    };
    if (workers <= 1) {
        body();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t t = 0; t < workers; ++t)
            pool.emplace_back(body);
        for (auto &th : pool)
            th.join();
    }
    if (failure)
        std::rethrow_exception(failure);
}

CheckResult new_check(const char *name, double dm, std::size_t M) {
    CheckResult c;
    c.name = name;
    c.delta_m = dm;
    c.M = M;
    return c;
}

} // namespace

TransferFunction true_system() {
    return TransferFunction{{0.0, 0.12, 0.18}, {1.0, -1.4, 1.443, -1.123, 0.7729}};
}

Eigen::MatrixXcd gen_noise(std::size_t M, std::size_t N, double eta_bar, std::uint64_t seed) {
    if (!(eta_bar >= 0.0) || !std::isfinite(eta_bar))
        throw Error(ErrorCode::InvalidParams, "eta_bar must be nonnegative");
    const auto m = static_cast<Eigen::Index>(M);
    const auto n = static_cast<Eigen::Index>(N);
    Eigen::MatrixXcd V(m, n);
    Rng rng(seed);
    // Column-major fill keeps each experiment's draws contiguous in the stream.
    for (Eigen::Index s = 0; s < n; ++s) {
        for (Eigen::Index r = 0; r < m; ++r) {
            const double radius = eta_bar * std::sqrt(rng.uniform());
            const double phase = 2.0 * pi * rng.uniform();
            V(r, s) = std::polar(radius, phase);
        }
    }
    return V;
}

MeasurementSet gen_data(const TransferFunction &tf, const FrequencyGrid &grid, std::size_t N,
                        double eta_bar, std::uint64_t seed) {
    if (!is_stable(tf))
        throw Error(ErrorCode::UnstableSystem, "data generation needs a stable system");
    if (N < 1)
        throw Error(ErrorCode::InvalidParams, "N must be positive");
    const Eigen::VectorXcd w_bar = responses(tf, grid);
    MeasurementSet ms{grid, gen_noise(grid.size(), N, eta_bar, seed)};
    ms.W.colwise() += w_bar;
    return ms;
}

FrequencyGrid GridSpec::make(std::size_t M) const {
    if (kind == Kind::Uniform)
        return make_uniform_grid(M, delta_m);
    return make_log_grid(M, theta_min, theta_max);
}

GridSpec GridSpec::parse(const std::string &text) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw Error(ErrorCode::ParseError, "grid must be uniform:<dm> or log:<a>,<b>");
    const std::string kind = text.substr(0, colon);
    const std::string rest = text.substr(colon + 1);
    if (kind == "uniform")
        return uniform(parse_real(rest));
    if (kind == "log") {
        const auto parts = split(rest, ',');
        if (parts.size() != 2)
            throw Error(ErrorCode::ParseError, "log grid needs two bounds");
        return log(parse_real(parts[0]), parse_real(parts[1]));
    }
    throw Error(ErrorCode::ParseError, "unknown grid kind '" + kind + "'");
}

std::string GridSpec::to_string() const {
    if (kind == Kind::Uniform)
        return "uniform:" + fmt_real(delta_m);
    return "log:" + fmt_real(theta_min) + "," + fmt_real(theta_max);
}

void ExperimentConfig::validate() const {
    system.validate();
    if (M < 1 || N < 1 || trials < 1)
        throw Error(ErrorCode::InvalidConfig, "M, N and trials must be positive");
    if (!(eta_bar >= 0.0) || !std::isfinite(eta_bar))
        throw Error(ErrorCode::InvalidConfig, "eta_bar must be nonnegative");
    if (tau && !(*tau >= 0.0 && std::isfinite(*tau)))
        throw Error(ErrorCode::InvalidConfig, "tau must be nonnegative");
    if (hinf_grid_density < 2)
        throw Error(ErrorCode::InvalidConfig, "hinf grid density must be at least 2");
    if (max_iter < 1 || !(solver_tol > 0.0))
        throw Error(ErrorCode::InvalidConfig, "solver limits must be positive");
}

double ExperimentConfig::resolved_tau() const {
    if (tau)
        return *tau;
    const DecayParams dp = decay_params(system);
    BoundParams p;
    p.kappa = dp.kappa;
    p.K = dp.K;
    p.rho = dp.rho;
    p.eta_bar = eta_bar;
    p.delta_m = grid.kind == GridSpec::Kind::Uniform ? grid.delta_m
                                                     : std::min(grid.theta_min, pi - grid.theta_max);
    p.M = M;
    p.N = N;
    p.delta_prob = delta_prob;
    return tau_star(p);
}

std::uint64_t trial_seed(std::uint64_t seed, std::size_t trial_id) {
    return mix_seed(seed, static_cast<std::uint64_t>(trial_id));
}

TrialRecord run_trial(const ExperimentConfig &cfg, std::size_t trial_id) {
    cfg.validate();
    const LoewnerContext ctx(cfg.grid.make(cfg.M));
    return run_trial(cfg, ctx, trial_id);
}

TrialRecord run_trial(const ExperimentConfig &cfg, const LoewnerContext &ctx, std::size_t trial_id) {
    TrialRecord rec;
    rec.trial_id = trial_id;
    rec.seed = trial_seed(cfg.seed, trial_id);
    rec.hinf_lnnm = rec.hinf_avg = nan_v;
    rec.sv_ratio_lnnm = rec.sv_ratio_avg = nan_v;
    rec.cert_dual_norm = rec.cert_gap = nan_v;
    rec.sampled_lnnm = rec.sampled_avg = nan_v;

    auto fail = [&rec](const Error &e) {
        if (rec.status == "ok")
            rec.status = std::string(to_string(e.code()));
    };

    Eigen::VectorXcd w_bar, w_hat, w_avg;
    try {
        const MeasurementSet data = gen_data(cfg.system, ctx.grid(), cfg.N, cfg.eta_bar, rec.seed);
        w_bar = responses(cfg.system, ctx.grid());
        SolverConfig sc;
        sc.tau = cfg.resolved_tau();
        sc.max_iter = cfg.max_iter;
        sc.tol_primal = sc.tol_dual = cfg.solver_tol;
        const SolveResult sol = solve_admm(ctx, data.W, sc);
        w_hat = sol.w_hat;
        w_avg = average_baseline(data.W);
        rec.cert_dual_norm = sol.cert_dual_norm;
        rec.cert_gap = sol.cert_gap;
        rec.iterations = sol.iterations;
        rec.converged = sol.converged;
        rec.sampled_lnnm = (w_hat - w_bar).cwiseAbs().maxCoeff();
        rec.sampled_avg = (w_avg - w_bar).cwiseAbs().maxCoeff();
    } catch (const Error &e) {
        fail(e);
        return rec;
    }

    const std::size_t kappa = mcmillan_degree(cfg.system);
    RealizationConfig rc;
    rc.order = kappa;
    rc.d_policy = DPolicy::dc_gain(dc_gain(cfg.system));
    const Model truth = cfg.system;

    auto assess = [&](const Eigen::VectorXcd &w, double &hinf, double &ratio, bool &stable,
                      std::size_t *auto_order) {
        try {
            const Realization real = realize(ctx, w, rc);
            const Eigen::VectorXd &sv = real.singular_values;
            ratio = sv.size() > static_cast<Eigen::Index>(kappa) && sv[0] > 0.0
                        ? sv[static_cast<Eigen::Index>(kappa)] / sv[0]
                        : 0.0;
            if (auto_order)
                *auto_order = select_order(sv, 1e-8);
            stable = is_stable(real.ss);
            hinf = circle_peak_distance(real.ss, truth, cfg.hinf_grid_density);
        } catch (const Error &e) {
            fail(e);
        }
    };
    assess(w_hat, rec.hinf_lnnm, rec.sv_ratio_lnnm, rec.stable_lnnm, &rec.auto_order_lnnm);
    assess(w_avg, rec.hinf_avg, rec.sv_ratio_avg, rec.stable_avg, nullptr);
    return rec;
}

std::size_t worker_count() {
    std::size_t n = std::max(1u, std::thread::hardware_concurrency());
    if (const char *env = std::getenv("FREQID_THREADS"); env && *env) {
        const std::uint64_t cap = parse_uint(env);
        if (cap < 1)
            throw Error(ErrorCode::InvalidConfig, "FREQID_THREADS must be positive");
        n = std::min<std::size_t>(n, cap);
    }
    return n;
}

std::vector<TrialRecord> run_trials(const ExperimentConfig &cfg) {
    cfg.validate();
    const LoewnerContext ctx(cfg.grid.make(cfg.M));
    std::vector<TrialRecord> out(cfg.trials);
    parallel_for(cfg.trials, [&](std::size_t i) { out[i] = run_trial(cfg, ctx, i); });
    return out;
}

SweepVariable parse_sweep_variable(const std::string &text) {
    if (text == "N")
        return SweepVariable::N;
    if (text == "M")
        return SweepVariable::M;
    if (text == "eta")
        return SweepVariable::Eta;
    throw Error(ErrorCode::ParseError, "sweep variable must be N, M or eta");
}

std::string to_string(SweepVariable v) {
    switch (v) {
    case SweepVariable::N:
        return "N";
    case SweepVariable::M:
        return "M";
    case SweepVariable::Eta:
        return "eta";
    }
    return "?";
}

double median(std::vector<double> xs) {
    xs.erase(std::remove_if(xs.begin(), xs.end(), [](double x) { return !std::isfinite(x); }), xs.end());
    if (xs.empty())
        return nan_v;
    std::sort(xs.begin(), xs.end());
    const std::size_t n = xs.size();
    return n % 2 ? xs[n / 2] : 0.5 * (xs[n / 2 - 1] + xs[n / 2]);
}

double fit_loglog_slope(const std::vector<double> &xs, const std::vector<double> &ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw Error(ErrorCode::DegenerateFit, "need at least two paired points");
    const auto n = static_cast<double>(xs.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (!(xs[i] > 0.0) || !(ys[i] > 0.0))
            throw Error(ErrorCode::DegenerateFit, "log-log fit needs positive values");
        mx += std::log(xs[i]);
        my += std::log(ys[i]);
    }
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double dx = std::log(xs[i]) - mx;
        sxx += dx * dx;
        sxy += dx * (std::log(ys[i]) - my);
    }
    if (!(sxx > 0.0))
        throw Error(ErrorCode::DegenerateFit, "all abscissae are equal");
    return sxy / sxx;
}

SweepResult sweep(const ExperimentConfig &cfg, SweepVariable variable, const std::vector<double> &values) {
    if (values.empty())
        throw Error(ErrorCode::InvalidConfig, "sweep needs at least one value");
    if (!std::is_sorted(values.begin(), values.end()))
        throw Error(ErrorCode::InvalidConfig, "sweep values must be ascending");
    SweepResult res;
    res.variable = variable;
    res.values = values;
    const std::string name = to_string(variable);
    for (double v : values) {
        ExperimentConfig c = cfg;
        if (variable == SweepVariable::Eta) {
            c.eta_bar = v;
        } else {
            if (!(v >= 1.0) || v != std::floor(v))
                throw Error(ErrorCode::InvalidConfig, name + " values must be positive integers");
            (variable == SweepVariable::N ? c.N : c.M) = static_cast<std::size_t>(v);
        }
        const auto recs = run_trials(c);
        std::vector<double> el, ea;
        for (const auto &r : recs) {
            res.rows.push_back({name, v, r});
            el.push_back(r.hinf_lnnm);
            ea.push_back(r.hinf_avg);
        }
        res.median_lnnm.push_back(median(el));
        res.median_avg.push_back(median(ea));
    }
    auto slope = [&](const std::vector<double> &meds) {
        std::vector<double> xs, ys;
        for (std::size_t i = 0; i < meds.size(); ++i) {
            if (std::isfinite(meds[i]) && meds[i] > 0.0) {
                xs.push_back(values[i]);
                ys.push_back(meds[i]);
            }
        }
        try {
            return fit_loglog_slope(xs, ys);
        } catch (const Error &) {
            return nan_v;
        }
    };
    res.slope_lnnm = slope(res.median_lnnm);
    res.slope_avg = slope(res.median_avg);
    return res;
}

double trig_integral(double delta_m, double tol) {
    if (!(delta_m > 0.0 && delta_m <= pi / 2))
        throw Error(ErrorCode::InvalidMargin, "delta_m must lie in (0, pi/2]");
    if (delta_m == pi / 2)
        return 0.0;
    using gk = boost::math::quadrature::gauss_kronrod<double, 31>;
    auto inner = [delta_m, tol](double t) {
        auto f = [t](double theta) { return 1.0 / (2.0 - 2.0 * std::cos(theta - t)); };
        return gk::integrate(f, delta_m, pi - delta_m, 15, tol);
    };
    return gk::integrate(inner, -pi + delta_m, -delta_m, 15, tol);
}

bool ValidationReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(), [](const CheckResult &c) { return c.passed; });
}

ValidationReport validate_lemmas(const std::vector<double> &delta_m_values,
                                 const std::vector<std::size_t> &M_values, std::uint64_t seed,
                                 const ValidationOptions &options) {
    ValidationReport rep;
    auto guarded = [&rep](CheckResult c, auto &&fn) {
        try {
            fn(c);
        } catch (const std::exception &e) {
            c.passed = false;
            c.detail = e.what();
        }
        rep.checks.push_back(std::move(c));
    };

    const TransferFunction tf = true_system();
    const DecayParams dp = decay_params(tf);

    for (double dm : delta_m_values) {
        guarded(new_check("trig_integral", dm, 0), [&](CheckResult &c) {
            c.lhs = trig_integral(dm, options.quad_tol);
            c.rhs = -2.0 * std::log(std::sin(dm));
            c.passed = std::abs(c.lhs - c.rhs) <= 1e-6;
        });
    }

    for (std::size_t M : M_values) {
        guarded(new_check("connectivity", 0.0, M), [&](CheckResult &c) {
            if (M < 2)
                throw Error(ErrorCode::InvalidParams, "connectivity needs at least two vertices");
            Rng rng(mix_seed(seed, 0xC0FFEEULL + M));
            const auto n = static_cast<Eigen::Index>(M);
            const double floor_w = 1.0;
            double worst = std::numeric_limits<double>::infinity();
            for (std::size_t g = 0; g < options.graphs; ++g) {
                Eigen::MatrixXd Lap = Eigen::MatrixXd::Zero(n, n);
                for (Eigen::Index i = 0; i < n; ++i) {
                    for (Eigen::Index j = i + 1; j < n; ++j) {
                        const double w = floor_w * (1.0 + 3.0 * rng.uniform());
                        Lap(i, j) = Lap(j, i) = -w;
                        Lap(i, i) += w;
                        Lap(j, j) += w;
                    }
                }
                const Eigen::VectorXd ev =
                    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(Lap, Eigen::EigenvaluesOnly).eigenvalues();
                worst = std::min(worst, ev[1]);
            }
            c.lhs = worst;
            c.rhs = floor_w * static_cast<double>(M);
            c.passed = c.lhs >= c.rhs;
        });
    }

    std::uint64_t stream = 0;
    for (double dm : delta_m_values) {
        for (std::size_t M : M_values) {
            ++stream;
            std::optional<LoewnerContext> ctx;
            try {
                ctx.emplace(make_uniform_grid(M, dm));
            } catch (const std::exception &e) {
                CheckResult c = new_check("grid", dm, M);
                c.detail = e.what();
                rep.checks.push_back(std::move(c));
                continue;
            }
            const double m = static_cast<double>(M);
            const double gap = pi - 2.0 * dm;
            const double nls = -std::log(std::sin(dm));

            guarded(new_check("frobenius_ratio", dm, M), [&](CheckResult &c) {
                const Eigen::VectorXcd w = responses(tf, ctx->grid());
                c.lhs = ctx->build(w).norm() / w.norm();
                c.rhs = 3.0 * std::sqrt(1.0 + 2.0 * dp.K / (dp.rho - 1.0)) * std::sqrt(m * nls) / gap;
                c.passed = c.lhs <= c.rhs;
            });
            guarded(new_check("gram_floor", dm, M), [&](CheckResult &c) {
                const Eigen::VectorXd &ee = ctx->e_gram_eigenvalues();
                const Eigen::VectorXd fe = ctx->f_gram_eigenvalues();
                c.lhs = std::min(fe[0], M >= 2 ? ee[1] : fe[0]);
                c.rhs = m / 2.0;
                c.passed = c.lhs >= c.rhs;
                std::ostringstream os;
                os << std::setprecision(17) << "lambda_min(F_in)=" << fe[0];
                if (M >= 2)
                    os << " lambda_2(E_in)=" << ee[1];
                c.detail = os.str();
            });
            guarded(new_check("midpoint_sum", dm, M), [&](CheckResult &c) {
                c.lhs = ctx->cauchy().cwiseAbs2().sum() / (m * m);
                c.rhs = 2.0 * nls / (gap * gap);
                c.passed = c.lhs <= c.rhs;
            });
            if (options.min_gain) {
                guarded(new_check("min_gain", dm, M), [&](CheckResult &c) {
                    const double alpha = std::sqrt(2.0) - 1.0;
                    BoundParams p;
                    p.kappa = dp.kappa;
                    p.K = dp.K;
                    p.rho = dp.rho;
                    p.delta_m = dm;
                    p.M = M;
                    const Eigen::VectorXcd w = responses(tf, ctx->grid());
                    const MinGainSample s =
                        sample_min_gain(*ctx, w, alpha, options.min_gain_samples, mix_seed(seed, stream));
                    c.lhs = s.min_ratio;
                    c.rhs = min_gain_lower(p, alpha);
                    c.passed = s.accepted == options.min_gain_samples && c.lhs >= c.rhs;
                    c.detail = "accepted " + std::to_string(s.accepted) + " of " + std::to_string(s.drawn);
                });
            }
        }
    }
    return rep;
}

const std::vector<std::string> &csv_columns() {
    static const std::vector<std::string> cols = {
        "variable",     "value",       "trial",       "seed",       "hinf_lnnm",      "hinf_avg",
        "sv_ratio_lnnm", "sv_ratio_avg", "cert_dual_norm", "cert_gap", "iterations",  "sampled_lnnm",
        "sampled_avg",  "stable_lnnm", "stable_avg",  "converged",  "auto_order_lnnm", "status"};
    return cols;
}

void write_csv(std::ostream &os, const std::vector<SweepRow> &rows) {
    const auto &cols = csv_columns();
    for (std::size_t i = 0; i < cols.size(); ++i)
        os << (i ? "," : "") << cols[i];
    os << '\n';
    for (const auto &row : rows) {
        const TrialRecord &r = row.record;
        os << row.variable << ',' << fmt_real(row.value) << ',' << r.trial_id << ',' << r.seed << ','
           << fmt_real(r.hinf_lnnm) << ',' << fmt_real(r.hinf_avg) << ',' << fmt_real(r.sv_ratio_lnnm) << ','
           << fmt_real(r.sv_ratio_avg) << ',' << fmt_real(r.cert_dual_norm) << ',' << fmt_real(r.cert_gap) << ','
           << r.iterations << ',' << fmt_real(r.sampled_lnnm) << ',' << fmt_real(r.sampled_avg) << ','
           << int(r.stable_lnnm) << ',' << int(r.stable_avg) << ',' << int(r.converged) << ','
           << r.auto_order_lnnm << ',' << r.status << '\n';
    }
}

void emit_csv(const std::string &path, const std::vector<SweepRow> &rows) {
    std::ofstream os(path, std::ios::binary);
    if (!os)
        throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    write_csv(os, rows);
    if (!os)
        throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

std::vector<SweepRow> read_csv(std::istream &is) {
    const auto &cols = csv_columns();
    std::string line;
    if (!std::getline(is, line))
        throw Error(ErrorCode::ParseError, "missing CSV header");
    if (split(line, ',') != cols)
        throw Error(ErrorCode::ParseError, "unexpected CSV header");
    auto flag = [](const std::string &s) {
        if (s != "0" && s != "1")
            throw Error(ErrorCode::ParseError, "boolean column must be 0 or 1");
        return s == "1";
    };
    std::vector<SweepRow> rows;
    while (std::getline(is, line)) {
        if (line.empty())
            continue;
        const auto f = split(line, ',');
        if (f.size() != cols.size())
            throw Error(ErrorCode::ParseError, "CSV row has " + std::to_string(f.size()) + " fields");
        SweepRow row;
        row.variable = f[0];
        row.value = parse_real(f[1]);
        TrialRecord &r = row.record;
        r.trial_id = parse_uint(f[2]);
        r.seed = parse_uint(f[3]);
        r.hinf_lnnm = parse_real(f[4]);
        r.hinf_avg = parse_real(f[5]);
        r.sv_ratio_lnnm = parse_real(f[6]);
        r.sv_ratio_avg = parse_real(f[7]);
        r.cert_dual_norm = parse_real(f[8]);
        r.cert_gap = parse_real(f[9]);
        r.iterations = parse_uint(f[10]);
        r.sampled_lnnm = parse_real(f[11]);
        r.sampled_avg = parse_real(f[12]);
        r.stable_lnnm = flag(f[13]);
        r.stable_avg = flag(f[14]);
        r.converged = flag(f[15]);
        r.auto_order_lnnm = parse_uint(f[16]);
        r.status = f[17];
        rows.push_back(std::move(row));
    }
    return rows;
}

std::vector<SweepRow> parse_csv(const std::string &path) {
    std::ifstream is(path, std::ios::binary);
    if (!is)
        throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
    return read_csv(is);
}

} // namespace freqid
