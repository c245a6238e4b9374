#include "freqid/lnnm_solver.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Eigenvalues>

namespace freqid {

namespace {

void require_hermitian(const Eigen::MatrixXcd &X) {
    if (X.rows() != X.cols())
        throw Error(ErrorCode::DimensionMismatch, "matrix must be square");
    const double scale = std::max(1.0, X.cwiseAbs().maxCoeff());
    const double skew = (X - X.adjoint()).cwiseAbs().maxCoeff();
    if (skew > 1e-10 * scale)
        throw Error(ErrorCode::NotHermitian, "matrix is not Hermitian");
}

Eigen::MatrixXcd hermitian_part(const Eigen::MatrixXcd &X) {
    return 0.5 * (X + X.adjoint());
}

Eigen::MatrixXcd shrink(const Eigen::MatrixXcd &H, double threshold) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
    const Eigen::VectorXd lam = es.eigenvalues().unaryExpr([threshold](double l) {
        const double m = std::max(std::abs(l) - threshold, 0.0);
        return l < 0.0 ? -m : m;
    });
    const Eigen::MatrixXcd &V = es.eigenvectors();
    Eigen::MatrixXcd out = V * lam.cast<cplx>().asDiagonal() * V.adjoint();
    return hermitian_part(out);
}

double hermitian_nuclear(const Eigen::MatrixXcd &H) {
    if (H.size() == 0)
        return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().sum();
}

double hermitian_spectral(const Eigen::MatrixXcd &H) {
    if (H.size() == 0)
        return 0.0;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H, Eigen::EigenvaluesOnly);
    return es.eigenvalues().cwiseAbs().maxCoeff();
}

void check_data(const LoewnerContext &ctx, const Eigen::MatrixXcd &W) {
    if (W.rows() != static_cast<Eigen::Index>(ctx.size()))
        throw Error(ErrorCode::DimensionMismatch, "measurement rows must match the grid size");
    if (W.cols() < 1)
        throw Error(ErrorCode::DimensionMismatch, "need at least one experiment");
}

} // namespace

void SolverConfig::validate() const {
    if (!(tau >= 0.0) || !std::isfinite(tau))
        throw Error(ErrorCode::InvalidConfig, "tau must be finite and nonnegative");
    if (penalty && !(*penalty > 0.0 && std::isfinite(*penalty)))
        throw Error(ErrorCode::InvalidConfig, "penalty must be positive");
    if (max_iter < 1)
        throw Error(ErrorCode::InvalidConfig, "max_iter must be positive");
    if (!(tol_primal > 0.0 && tol_dual > 0.0 && tol_certificate > 0.0))
        throw Error(ErrorCode::InvalidConfig, "tolerances must be positive");
}

Eigen::MatrixXcd svt(const Eigen::MatrixXcd &X, double threshold) {
    if (!(threshold >= 0.0))
        throw Error(ErrorCode::InvalidParams, "threshold must be nonnegative");
    require_hermitian(X);
    if (threshold == 0.0)
        return X;
    return shrink(hermitian_part(X), threshold);
}

double nuclear_norm(const Eigen::MatrixXcd &X) {
    require_hermitian(X);
    return hermitian_nuclear(hermitian_part(X));
}

Eigen::VectorXcd average_baseline(const Eigen::MatrixXcd &W_tilde) {
    if (W_tilde.cols() < 1)
        throw Error(ErrorCode::DimensionMismatch, "need at least one experiment");
    return W_tilde.rowwise().mean();
}

double lnnm_objective(const LoewnerContext &ctx, const Eigen::VectorXcd &w,
                      const Eigen::MatrixXcd &W_tilde, double tau) {
    check_data(ctx, W_tilde);
    const double fit = 0.5 * (W_tilde.colwise() - w).squaredNorm();
    const auto M = static_cast<double>(ctx.size());
    return tau * hermitian_nuclear(hermitian_part(ctx.build(w))) / M + fit;
}

Certificate certificate(const LoewnerContext &ctx, const Eigen::VectorXcd &w_hat,
                        const Eigen::MatrixXcd &W_tilde, double tau) {
    check_data(ctx, W_tilde);
    if (w_hat.size() != W_tilde.rows())
        throw Error(ErrorCode::DimensionMismatch, "w_hat length must match the grid size");
    const Eigen::VectorXcd resid = W_tilde.rowwise().sum() - static_cast<double>(W_tilde.cols()) * w_hat;
    Certificate c;
    c.dual_norm = hermitian_spectral(hermitian_part(ctx.inverse_adjoint(resid)));
    const double inner = to_real(resid).dot(to_real(w_hat));
    const auto M = static_cast<double>(ctx.size());
    c.gap = std::abs(inner - tau / M * hermitian_nuclear(hermitian_part(ctx.build(w_hat))));
    return c;
}

SolveResult solve_admm(const LoewnerContext &ctx, const Eigen::MatrixXcd &W_tilde,
                       const SolverConfig &config) {
    config.validate();
    check_data(ctx, W_tilde);
    const auto M = static_cast<Eigen::Index>(ctx.size());
    const double N = static_cast<double>(W_tilde.cols());
    const double beta = config.penalty.value_or(N);
    const double tau = config.tau;
    const double level = tau / (static_cast<double>(M) * beta);

    // The normal matrix N I + beta blkdiag(E_in, F_in) splits into two
    // independent M x M positive-definite blocks.
    Eigen::MatrixXd ea = beta * ctx.e_gram();
    ea.diagonal().array() += N;
    Eigen::MatrixXd fa = beta * ctx.f_gram();
    fa.diagonal().array() += N;
    const Eigen::LLT<Eigen::MatrixXd> e_llt(ea);
    const Eigen::LLT<Eigen::MatrixXd> f_llt(fa);
    const Eigen::VectorXd data_sum = to_real(W_tilde.rowwise().sum());

    Eigen::VectorXcd w = average_baseline(W_tilde);
    Eigen::MatrixXcd X = ctx.build(w);
    Eigen::MatrixXcd U = Eigen::MatrixXcd::Zero(M, M);

    SolveResult res;
    res.w_hat = w;
    for (std::size_t it = 1; it <= config.max_iter; ++it) {
        const Eigen::VectorXd rhs = data_sum + beta * ctx.adjoint(X - U);
        Eigen::VectorXd u(2 * M);
        u.head(M) = e_llt.solve(rhs.head(M));
        u.tail(M) = f_llt.solve(rhs.tail(M));
        w = to_complex(u);

        const Eigen::MatrixXcd Lw = ctx.build(w);
        const Eigen::MatrixXcd V = hermitian_part(Lw + U);
        const Eigen::MatrixXcd X_prev = X;
        X = level > 0.0 ? shrink(V, level) : V;
        U = hermitian_part(U + Lw - X);

        res.iterations = it;
        res.primal_residual = (Lw - X).norm();
        res.dual_residual = beta * ctx.adjoint(X - X_prev).norm();
        res.w_hat = w;
        if (res.primal_residual > config.tol_primal || res.dual_residual > config.tol_dual)
            continue;

        const Certificate cert = certificate(ctx, w, W_tilde, tau);
        const double scale = std::max(1.0, tau * hermitian_nuclear(Lw) / static_cast<double>(M));
        if (cert.gap <= config.tol_certificate * scale) {
            res.converged = true;
            break;
        }
    }

    const Certificate cert = certificate(ctx, res.w_hat, W_tilde, tau);
    res.cert_dual_norm = cert.dual_norm;
    res.cert_gap = cert.gap;
    res.multiplier_dual_norm = beta * hermitian_spectral(U);
    return res;
}

} // namespace freqid
