#include "freqid/realization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

namespace freqid {

namespace {

void check_length(const LoewnerContext &ctx, const Eigen::VectorXcd &w) {
    if (w.size() != static_cast<Eigen::Index>(ctx.size()))
        throw Error(ErrorCode::DimensionMismatch, "response vector length must match the grid size");
}

double max_abs(const Eigen::MatrixXcd &X) {
    return X.size() == 0 ? 0.0 : X.cwiseAbs().maxCoeff();
}

/// Real part of X after checking the imaginary residue.
Eigen::MatrixXd real_part(const Eigen::MatrixXcd &X, const char *what) {
    const double scale = max_abs(X);
    const double im = X.size() == 0 ? 0.0 : X.imag().cwiseAbs().maxCoeff();
    if (im > 1e-8 * std::max(scale, 1e-300)) {
        std::ostringstream os;
        os << what << " keeps an imaginary part of relative size " << im / scale;
        throw Error(ErrorCode::ComplexRealization, os.str());
    }
    return X.real();
}

} // namespace

void RealizationConfig::validate() const {
    if (!(rank_tol > 0.0 && rank_tol < 1.0))
        throw Error(ErrorCode::InvalidConfig, "rank_tol must lie in (0, 1)");
    if (order && *order == 0)
        throw Error(ErrorCode::InvalidConfig, "order must be positive; use AUTO for rank 0");
    if (d_policy.kind == DPolicy::Kind::DcGain && !std::isfinite(d_policy.dc))
        throw Error(ErrorCode::InvalidConfig, "DC gain must be finite");
}

Eigen::MatrixXcd shifted_loewner(const LoewnerContext &ctx, const Eigen::VectorXcd &w) {
    check_length(ctx, w);
    const Eigen::VectorXcd &z = ctx.points();
    const Eigen::MatrixXcd &C = ctx.cauchy();
    const auto M = w.size();
    Eigen::MatrixXcd S(M, M);
    for (Eigen::Index s = 0; s < M; ++s)
        for (Eigen::Index r = 0; r < M; ++r)
            S(r, s) = (std::conj(z[r]) * std::conj(w[r]) - z[s] * w[s]) * C(r, s);
    return S;
}

std::size_t select_order(const Eigen::VectorXd &singular_values, double rank_tol) {
    if (singular_values.size() == 0)
        return 0;
    const double top = singular_values.maxCoeff();
    if (!(top > 0.0))
        return 0;
    return static_cast<std::size_t>((singular_values.array() >= rank_tol * top).count());
}

Realization realize(const LoewnerContext &ctx, const Eigen::VectorXcd &w,
                    const RealizationConfig &config) {
    config.validate();
    check_length(ctx, w);
    const auto M = w.size();
    const Eigen::VectorXcd &z = ctx.points();

    // Reciprocal-variable pencil: left points z_r with values conj(w_r),
    // right points conj(z_s) with values w_s.
    Eigen::MatrixXcd Lc(M, M), Sc(M, M);
    for (Eigen::Index s = 0; s < M; ++s) {
        for (Eigen::Index r = 0; r < M; ++r) {
            const cplx den = z[r] - std::conj(z[s]);
            Lc(r, s) = (std::conj(w[r]) - w[s]) / den;
            Sc(r, s) = (z[r] * std::conj(w[r]) - std::conj(z[s]) * w[s]) / den;
        }
    }
    Lc = 0.5 * (Lc + Lc.adjoint()).eval();
    Sc = 0.5 * (Sc + Sc.adjoint()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(Lc);
    std::vector<Eigen::Index> idx(static_cast<std::size_t>(M));
    for (Eigen::Index i = 0; i < M; ++i)
        idx[static_cast<std::size_t>(i)] = i;
    const Eigen::VectorXd &lam = es.eigenvalues();
    std::stable_sort(idx.begin(), idx.end(),
                     [&lam](Eigen::Index a, Eigen::Index b) { return std::abs(lam[a]) > std::abs(lam[b]); });

    Realization out;
    out.singular_values.resize(M);
    for (Eigen::Index i = 0; i < M; ++i)
        out.singular_values[i] = std::abs(lam[idx[static_cast<std::size_t>(i)]]);

    const std::size_t rank = select_order(out.singular_values, config.rank_tol);
    const std::size_t n = config.order.value_or(rank);
    if (n > rank) {
        std::ostringstream os;
        os << "requested order " << n << " exceeds numerical rank " << rank;
        throw Error(ErrorCode::RankDeficient, os.str());
    }
    out.order = n;
    const auto ni = static_cast<Eigen::Index>(n);

    Eigen::MatrixXcd U(M, ni);
    for (Eigen::Index i = 0; i < ni; ++i)
        U.col(i) = es.eigenvectors().col(idx[static_cast<std::size_t>(i)]);

    const Eigen::MatrixXcd E = -U.adjoint() * Lc * U;
    const Eigen::MatrixXcd A0 = -U.adjoint() * Sc * U;
    const Eigen::VectorXcd b0 = U.adjoint() * w.conjugate();
    const Eigen::RowVectorXcd c0 = w.transpose() * U;
    const Eigen::VectorXcd p = U.adjoint() * Eigen::VectorXcd::Ones(M);

    double d = 0.0;
    if (config.d_policy.kind == DPolicy::Kind::DcGain) {
        const double dc = config.d_policy.dc;
        if (ni == 0) {
            d = dc;
        } else {
            // R_d(1) = (c0 - d p*)(Phi - d p p*)^-1 (b0 - d p) + d is a Moebius
            // function of d; solve R_d(1) = dc in closed form.
            const Eigen::MatrixXcd Phi = E - A0;
            Eigen::PartialPivLU<Eigen::MatrixXcd> lu(Phi);
            if (!(lu.rcond() > 1e3 * std::numeric_limits<double>::epsilon()))
                throw Error(ErrorCode::SingularE, "pencil is singular at z = 1");
            const Eigen::VectorXcd pb = lu.solve(b0);
            const Eigen::VectorXcd pp = lu.solve(p);
            const cplx h = (c0 * pb)(0);
            const cplx al = (p.adjoint() * pp)(0);
            const cplx be = (c0 * pp)(0);
            const cplx ga = (p.adjoint() * pb)(0);
            const cplx den = dc * al + 1.0 - be - ga - h * al + be * ga;
            if (std::abs(den) > 1e-12)
                d = ((dc - h) / den).real();
        }
    }

    out.ss.D = d;
    if (ni == 0) {
        out.ss.A.resize(0, 0);
        out.ss.B.resize(0);
        out.ss.C.resize(0);
        out.interpolation_error = (w.array() - d).abs().maxCoeff();
        return out;
    }

    const Eigen::MatrixXcd Ad = A0 + d * p * p.adjoint();
    const Eigen::VectorXcd Bd = b0 - d * p;
    const Eigen::RowVectorXcd Cd = c0 - d * p.adjoint();

    Eigen::PartialPivLU<Eigen::MatrixXcd> elu(E);
    const double e_scale = out.singular_values[0];
    if (!(elu.rcond() > config.rank_tol) || !(max_abs(E) > config.rank_tol * e_scale))
        throw Error(ErrorCode::SingularE, "projected descriptor matrix is singular");
    Eigen::MatrixXcd A = elu.solve(Ad);
    Eigen::MatrixXcd B = elu.solve(Bd);
    Eigen::MatrixXcd C = Cd;

    // A real-coefficient transfer function has a real realization; the
    // observability matrix maps this one onto it. O P = R with R real.
    Eigen::MatrixXcd O(ni, ni);
    Eigen::RowVectorXcd row = C;
    for (Eigen::Index k = 0; k < ni; ++k) {
        O.row(k) = row;
        row = row * A;
    }
    const Eigen::MatrixXd G = (O.adjoint() * O).real();
    Eigen::LLT<Eigen::MatrixXd> llt(G);
    Eigen::PartialPivLU<Eigen::MatrixXcd> olu(O);
    if (llt.info() != Eigen::Success || !(olu.rcond() > 1e-13))
        throw Error(ErrorCode::ComplexRealization, "realization is not observable");
    const Eigen::MatrixXd R = llt.matrixU();
    const Eigen::MatrixXcd P = olu.solve(R.cast<cplx>());
    Eigen::PartialPivLU<Eigen::MatrixXcd> plu(P);

    out.ss.A = real_part(plu.solve(A * P), "A");
    out.ss.B = real_part(plu.solve(B), "B");
    out.ss.C = real_part(C * P, "C");

    double err = 0.0;
    for (Eigen::Index r = 0; r < M; ++r)
        err = std::max(err, std::abs(eval_ss(out.ss, z[r]) - w[r]));
    out.interpolation_error = err;
    return out;
}

} // namespace freqid
