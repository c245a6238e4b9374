#include "freqid/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include <Eigen/Eigenvalues>

#include "freqid/rng.hpp"

namespace freqid {

namespace {

constexpr double sqrt2 = 1.41421356237309504880168872420969808;

double neg_log_sin(double dm) { return -std::log(std::sin(dm)); }

double gap(double dm) { return pi - 2.0 * dm; }

/// sqrt(1 + 2K/(rho-1)).
double decay_factor(const BoundParams &p) { return std::sqrt(1.0 + 2.0 * p.K / (p.rho - 1.0)); }

/// ln of sqrt(M ln(M/delta)), summed in log space.
double log_sqrt_m_lnm(const BoundParams &p) {
    const double m = static_cast<double>(p.M);
    return 0.5 * (std::log(m) + std::log(std::log(m / p.delta_prob)));
}

/// sqrt(-N ln(sin dm) ln(M/delta)).
double noise_root(const BoundParams &p) {
    const double n = static_cast<double>(p.N);
    const double m = static_cast<double>(p.M);
    return std::exp(0.5 * (std::log(n) + std::log(neg_log_sin(p.delta_m)) + std::log(std::log(m / p.delta_prob))));
}

double hermitian_nuclear(const Eigen::MatrixXcd &X) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(0.5 * (X + X.adjoint()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

} // namespace

void BoundParams::validate() const {
    if (kappa < 1)
        throw Error(ErrorCode::InvalidParams, "kappa must be positive");
    if (!(K > 0.0) || !std::isfinite(K))
        throw Error(ErrorCode::InvalidParams, "K must be positive");
    if (!(rho > 1.0) || !std::isfinite(rho))
        throw Error(ErrorCode::InvalidParams, "rho must exceed 1");
    if (!(eta_bar >= 0.0) || !std::isfinite(eta_bar))
        throw Error(ErrorCode::InvalidParams, "eta_bar must be nonnegative");
    if (!(delta_m > 0.0 && delta_m < pi / 2))
        throw Error(ErrorCode::InvalidParams, "delta_m must lie in (0, pi/2)");
    if (M < 1 || N < 1)
        throw Error(ErrorCode::InvalidParams, "M and N must be positive");
    if (!(delta_prob > 0.0 && delta_prob < 1.0))
        throw Error(ErrorCode::InvalidParams, "delta must lie in (0, 1)");
}

double sampled_error_bound(const BoundParams &p) {
    p.validate();
    const double c = 96.0 * (1.0 + sqrt2) * (1.0 + sqrt2);
    const double root = std::exp(log_sqrt_m_lnm(p) - 0.5 * std::log(static_cast<double>(p.N)));
    return c * std::sqrt(2.0 * static_cast<double>(p.kappa)) * decay_factor(p) * p.eta_bar *
           neg_log_sin(p.delta_m) / (gap(p.delta_m) * gap(p.delta_m)) * root;
}

double noise_term_bound(const BoundParams &p) {
    p.validate();
    return 16.0 * p.eta_bar * noise_root(p) / gap(p.delta_m);
}

double tau_star(const BoundParams &p) {
    return (1.0 + sqrt2) * static_cast<double>(p.M) * noise_term_bound(p);
}

double alpha_upper(const BoundParams &p, double tau) {
    if (!(tau > 0.0) || !std::isfinite(tau))
        throw Error(ErrorCode::InvalidParams, "tau must be positive");
    return static_cast<double>(p.M) / tau * noise_term_bound(p);
}

double min_gain_lower(const BoundParams &p, double alpha) {
    p.validate();
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw Error(ErrorCode::InvalidParams, "alpha must lie in [0, 1]");
    const double root = std::sqrt(2.0 * static_cast<double>(p.kappa) * static_cast<double>(p.M) *
                                  neg_log_sin(p.delta_m));
    return (1.0 - alpha) * gap(p.delta_m) / (6.0 * decay_factor(p) * root);
}

double pre_optimization_bound(const BoundParams &p, double tau, double alpha) {
    p.validate();
    if (!(tau >= 0.0) || !std::isfinite(tau))
        throw Error(ErrorCode::InvalidParams, "tau must be nonnegative");
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw Error(ErrorCode::InvalidParams, "alpha must lie in [0, 1)");
    const double m = static_cast<double>(p.M);
    const double n = static_cast<double>(p.N);
    const double s = neg_log_sin(p.delta_m);
    const double lead = 6.0 * std::sqrt(2.0 * static_cast<double>(p.kappa)) * decay_factor(p) /
                        ((1.0 - alpha) * gap(p.delta_m));
    const double reg = tau / n * std::sqrt(s / m);
    const double noise = 16.0 * p.eta_bar * s * std::exp(log_sqrt_m_lnm(p) - 0.5 * std::log(n)) / gap(p.delta_m);
    return lead * (reg + noise);
}

double psi(double delta_bar, double rho) {
    if (!(delta_bar >= 0.0 && delta_bar <= pi))
        throw Error(ErrorCode::InvalidParams, "delta_bar must lie in [0, pi]");
    if (!(rho > 1.0))
        throw Error(ErrorCode::InvalidParams, "rho must exceed 1");
    const double s = std::sin(0.5 * delta_bar);
    const double r2 = rho * rho - 1.0;
    return 2.0 * rho * s / std::sqrt(r2 * r2 + 4.0 * rho * rho * s * s);
}

double full_frequency_bound(double eps, double K, double psi_val) {
    if (!(eps >= 0.0) || !std::isfinite(eps))
        throw Error(ErrorCode::InvalidParams, "eps must be nonnegative");
    if (!(K > 0.0) || !std::isfinite(K))
        throw Error(ErrorCode::InvalidParams, "K must be positive");
    if (!(psi_val >= 0.0 && psi_val <= 1.0))
        throw Error(ErrorCode::InvalidParams, "psi must lie in [0, 1]");
    return 2.0 * (eps + K * psi_val) / (1.0 + eps / K * psi_val);
}

double max_arc_distance(const FrequencyGrid &grid) {
    if (grid.size() == 0)
        throw Error(ErrorCode::EmptyGrid, "grid has no points");
    std::vector<double> a;
    a.reserve(2 * grid.size());
    for (double t : grid.thetas()) {
        a.push_back(t);
        a.push_back(-t);
    }
    std::sort(a.begin(), a.end());
    double best = a.front() + 2.0 * pi - a.back();
    for (std::size_t i = 1; i < a.size(); ++i)
        best = std::max(best, a[i] - a[i - 1]);
    return best;
}

BoundsSummary evaluate_bounds(const BoundParams &p) {
    p.validate();
    BoundsSummary s;
    s.eps_sampled = sampled_error_bound(p);
    s.noise_bound = noise_term_bound(p);
    s.tau_star = tau_star(p);
    s.alpha_at_tau_star = s.tau_star > 0.0 ? alpha_upper(p, s.tau_star) : 0.0;
    s.phi_lower = min_gain_lower(p, std::min(s.alpha_at_tau_star, 1.0));
    s.delta_bar = max_arc_distance(make_uniform_grid(p.M, p.delta_m));
    s.psi = psi(s.delta_bar, p.rho);
    s.eps_all_freq = full_frequency_bound(s.eps_sampled, p.K, s.psi);
    return s;
}

MinGainSample sample_min_gain(const LoewnerContext &ctx, const Eigen::VectorXcd &w_bar,
                              double alpha, std::size_t samples, std::uint64_t seed,
                              std::size_t max_draws) {
    if (w_bar.size() != static_cast<Eigen::Index>(ctx.size()))
        throw Error(ErrorCode::DimensionMismatch, "w_bar length must match the grid size");
    if (!(alpha >= 0.0 && alpha <= 1.0))
        throw Error(ErrorCode::InvalidParams, "alpha must lie in [0, 1]");
    const auto M = w_bar.size();
    const double base = hermitian_nuclear(ctx.build(w_bar));
    Rng rng(seed);
    MinGainSample out;
    out.min_ratio = std::numeric_limits<double>::infinity();
    Eigen::VectorXcd u(M);
    while (out.accepted < samples && out.drawn < max_draws) {
        ++out.drawn;
        const double scale = std::pow(10.0, -3.0 + 4.0 * rng.uniform());
        for (Eigen::Index i = 0; i < M; ++i) {
            const double re = rng.normal();
            u[i] = scale * cplx(re, rng.normal());
        }
        const double lu = hermitian_nuclear(ctx.build(u));
        if (!(lu > 0.0))
            continue;
        if (hermitian_nuclear(ctx.build(w_bar + u)) > base + alpha * lu)
            continue;
        ++out.accepted;
        out.min_ratio = std::min(out.min_ratio, u.norm() / lu);
    }
    return out;
}

} // namespace freqid
