#pragma once

#include <cstddef>
#include <cstdint>

#include <Eigen/Dense>

#include "freqid/loewner.hpp"
#include "freqid/sysmodel.hpp"

namespace freqid {

/// Parameters of the a-priori error bounds. kappa, K and rho describe the
/// true system and are not estimated from data.
struct BoundParams {
    std::size_t kappa = 1;
    double K = 1.0;
    double rho = 2.0;
    /// Almost-sure bound on |noise|. Zero is accepted (noiseless limit).
    double eta_bar = 1.0;
    double delta_m = 0.1;
    std::size_t M = 1;
    std::size_t N = 1;
    /// Failure probability delta.
    double delta_prob = 0.05;

    /// Throws InvalidParams.
    void validate() const;
};

/// Sampled-frequency error bound, holding with probability 1 - delta:
///   96 (1+sqrt2)^2 sqrt(2 kappa) sqrt(1 + 2K/(rho-1)) eta (-ln sin dm)
///     / (pi - 2 dm)^2 * sqrt(M ln(M/delta) / N).
double sampled_error_bound(const BoundParams &p);

/// Regularization weight minimizing the bound:
///   (1+sqrt2) 16 eta M sqrt(-N ln(sin dm) ln(M/delta)) / (pi - 2 dm).
double tau_star(const BoundParams &p);

/// (M/tau) 16 eta sqrt(-N ln(sin dm) ln(M/delta)) / (pi - 2 dm).
double alpha_upper(const BoundParams &p, double tau);

/// (1-alpha)(pi - 2 dm) / (6 sqrt(1 + 2K/(rho-1)) sqrt(-2 kappa M ln sin dm)).
/// alpha must lie in [0, 1]; alpha = 1 gives 0.
double min_gain_lower(const BoundParams &p, double alpha);

/// 16 eta sqrt(-N ln(sin dm) ln(M/delta)) / (pi - 2 dm), a high-probability
/// bound on the spectral norm of the summed inverse-adjoint noise.
double noise_term_bound(const BoundParams &p);

/// The error bound before tau and alpha are fixed:
///   D (tau/N sqrt(-ln(sin dm)/M)
///      + 16 eta (-ln sin dm) sqrt(M ln(M/delta)) / ((pi - 2 dm) sqrt N)),
///   D = 6 sqrt(2 kappa) sqrt(1 + 2K/(rho-1)) / ((1-alpha)(pi - 2 dm)).
/// At tau_star and alpha = sqrt2 - 1 it equals sampled_error_bound.
double pre_optimization_bound(const BoundParams &p, double tau, double alpha);

/// 2 rho sin(d/2) / sqrt((rho^2-1)^2 + 4 rho^2 sin^2(d/2)).
double psi(double delta_bar, double rho);

/// 2 (eps + K psi) / (1 + (eps/K) psi).
double full_frequency_bound(double eps, double K, double psi_val);

/// Largest angular gap of {theta_r} u {-theta_r} around the full circle.
/// For the uniform grid this is 2 dm + (pi - 2 dm)/M.
double max_arc_distance(const FrequencyGrid &grid);

/// Everything the bounds CLI reports for one parameter set, with the grid
/// taken uniform with the given margin.
struct BoundsSummary {
    double eps_sampled = 0.0;
    double tau_star = 0.0;
    double alpha_at_tau_star = 0.0;
    double phi_lower = 0.0;
    double noise_bound = 0.0;
    double delta_bar = 0.0;
    double psi = 0.0;
    double eps_all_freq = 0.0;
};

BoundsSummary evaluate_bounds(const BoundParams &p);

struct MinGainSample {
    /// min ||u||_2 / ||L(u)||_* over accepted directions.
    double min_ratio = 0.0;
    std::size_t accepted = 0;
    std::size_t drawn = 0;
};

/// Rejection-samples directions u from the descent cone
///   ||L(w_bar + u)||_* <= ||L(w_bar)||_* + alpha ||L(u)||_*
/// until `samples` are accepted (or max_draws is hit). Directions have
/// i.i.d. standard normal real and imaginary parts scaled by 10^U,
/// U uniform on [-3, 1], so both the small-step regime (where the cone is
/// narrow) and large steps are visited.
MinGainSample sample_min_gain(const LoewnerContext &ctx, const Eigen::VectorXcd &w_bar,
                              double alpha, std::size_t samples, std::uint64_t seed,
                              std::size_t max_draws = 1000000);

} // namespace freqid
