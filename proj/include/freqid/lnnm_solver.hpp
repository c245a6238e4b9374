#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "freqid/loewner.hpp"

namespace freqid {

struct SolverConfig {
    double tau = 0.0;
    /// ADMM penalty; defaults to the number of experiments N.
    std::optional<double> penalty;
    std::size_t max_iter = 5000;
    double tol_primal = 1e-8;
    double tol_dual = 1e-8;
    double tol_certificate = 1e-6;

    void validate() const;
};

struct SolveResult {
    Eigen::VectorXcd w_hat;
    std::size_t iterations = 0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    /// Spectral norm of inverse_adjoint(sum_s (w_s - w_hat)), the dual
    /// matrix restricted to the Loewner span.
    double cert_dual_norm = 0.0;
    /// |Re<sum_s (w_s - w_hat), w_hat> - (tau/M) ||L(w_hat)||_*|.
    double cert_gap = 0.0;
    /// Spectral norm of the scaled ADMM multiplier. The multiplier is a
    /// nuclear-norm subgradient whose adjoint reproduces the data residual up
    /// to the dual residual, so it certifies optimality even when the
    /// span-restricted matrix above exceeds tau/M.
    double multiplier_dual_norm = 0.0;
    bool converged = false;
};

/// Frobenius-orthogonal eigenvalue shrinkage: every eigenvalue moves toward
/// zero by threshold (clipped at zero). Throws NotHermitian.
Eigen::MatrixXcd svt(const Eigen::MatrixXcd &X, double threshold);

/// Sum of |eigenvalues| of a Hermitian matrix. Throws NotHermitian.
double nuclear_norm(const Eigen::MatrixXcd &X);

/// Row means of the M x N measurement matrix.
Eigen::VectorXcd average_baseline(const Eigen::MatrixXcd &W_tilde);

/// tau ||L(w)||_* / M + 1/2 sum_s ||w - w_s||^2.
double lnnm_objective(const LoewnerContext &ctx, const Eigen::VectorXcd &w,
                      const Eigen::MatrixXcd &W_tilde, double tau);

struct Certificate {
    double dual_norm = 0.0;
    double gap = 0.0;
};

/// Evaluates both optimality conditions at w_hat.
Certificate certificate(const LoewnerContext &ctx, const Eigen::VectorXcd &w_hat,
                        const Eigen::MatrixXcd &W_tilde, double tau);

/// ADMM on the split X = L(w):
///   w   <- (N I + beta G)^-1 (sum_s w_s + beta L^*(X - U)),   G = L^* L
///   X   <- svt(L(w) + U, tau / (M beta))
///   U   <- U + L(w) - X
/// started from the row means. Convergence requires the primal and dual
/// residuals below tolerance and the complementarity gap within
/// tol_certificate * max(1, tau ||L(w)||_* / M). Never throws for
/// non-convergence; the last iterate is returned with converged = false.
SolveResult solve_admm(const LoewnerContext &ctx, const Eigen::MatrixXcd &W_tilde,
                       const SolverConfig &config);

} // namespace freqid
