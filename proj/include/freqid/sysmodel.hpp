#pragma once

#include <complex>
#include <cstddef>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "freqid/error.hpp"

namespace freqid {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;

/// Pole moduli must exceed this to count as stable.
inline constexpr double stability_margin = 1.0 + 1e-9;

/// Rational model G(z) = num(z) / den(z) with coefficients stored in
/// ascending powers of z. The variable follows the power-series convention
/// G(z) = sum_k g(k) z^k, i.e. the reciprocal of the usual z-transform
/// variable, so a stable system has every pole strictly outside the unit disk.
struct TransferFunction {
    std::vector<double> num;
    std::vector<double> den;

    /// Throws InvalidParams when den is empty or den[0] == 0.
    void validate() const;
};

/// x(k+1) = A x(k) + B u(k), y = C x(k) + D u(k); evaluated as
/// G(z) = C (z^-1 I - A)^-1 B + D.
struct StateSpace {
    Eigen::MatrixXd A;
    Eigen::VectorXd B;
    Eigen::RowVectorXd C;
    double D = 0.0;

    std::size_t order() const { return static_cast<std::size_t>(A.rows()); }
    void validate() const;
};

/// Either representation; anything hinf_distance can compare.
using Model = std::variant<TransferFunction, StateSpace>;

/// Frequency points e^{j theta_r} on the open upper unit semicircle.
class FrequencyGrid {
public:
    FrequencyGrid() = default;

    /// Validates 0 < theta < pi and strict monotonicity.
    FrequencyGrid(std::vector<double> thetas, double margin);

    std::size_t size() const { return thetas_.size(); }
    const std::vector<double> &thetas() const { return thetas_; }
    const Eigen::VectorXcd &points() const { return points_; }
    double margin() const { return margin_; }

    /// Points reflected theta -> pi - theta, re-sorted ascending.
    FrequencyGrid reflected() const;

private:
    std::vector<double> thetas_;
    Eigen::VectorXcd points_;
    double margin_ = 0.0;
};

struct DecayParams {
    double rho = 0.0;
    double K = 0.0;
    std::size_t kappa = 0;
};

cplx eval_tf(const TransferFunction &tf, cplx z);
cplx eval_ss(const StateSpace &ss, cplx z);
cplx eval_model(const Model &m, cplx z);

/// Responses at every grid point.
Eigen::VectorXcd responses(const Model &m, const FrequencyGrid &grid);

/// theta_r = dm + (pi - 2 dm)(r - 1/2)/M, r = 1..M.
FrequencyGrid make_uniform_grid(std::size_t M, double delta_m);

/// Geometric spacing between theta_min and theta_max inclusive.
FrequencyGrid make_log_grid(std::size_t M, double theta_min, double theta_max);

/// Roots of the polynomial with ascending coefficients (companion-matrix
/// eigenvalues). Trailing zero coefficients are dropped first.
std::vector<cplx> poly_roots(const std::vector<double> &coeffs);

/// Poles of the model in the power-series variable. For a state space these
/// are the reciprocals of the nonzero eigenvalues of A.
std::vector<cplx> poles(const Model &m);

bool is_stable(const Model &m);

/// sup over the unit circle of |g1 - g2|, estimated on a uniform theta grid
/// over [0, pi] (both models have real coefficients) followed by a
/// golden-section refinement around the best grid point. Accuracy improves
/// with grid_density; the result never decreases when the density is doubled.
/// Throws UnstableSystem if either model has a pole on or inside the circle.
double hinf_distance(const Model &g1, const Model &g2,
                     std::size_t grid_density = 4096);

/// Same estimate without the stability precondition. Used where the peak
/// gap on the circle is wanted even for models that may be unstable.
double circle_peak_distance(const Model &g1, const Model &g2,
                            std::size_t grid_density = 4096);

/// First n_terms coefficients of the power series of num/den.
std::vector<double> impulse_response(const TransferFunction &tf,
                                     std::size_t n_terms);

/// Decay constants of the impulse response. K is the empirical supremum of
/// |g(t+k)| rho^k / |g(t)| over the computed terms with |g(t)| > 1e-12.
DecayParams decay_params(const TransferFunction &tf, std::size_t n_terms = 128);

/// McMillan degree after cancelling common numerator/denominator roots.
std::size_t mcmillan_degree(const TransferFunction &tf, double tol = 1e-8);

double dc_gain(const TransferFunction &tf);

} // namespace freqid
