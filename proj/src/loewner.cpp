#include "freqid/loewner.hpp"

#include <sstream>

#include <Eigen/Eigenvalues>

namespace freqid {

Eigen::VectorXd to_real(const Eigen::VectorXcd &w) {
    const Eigen::Index M = w.size();
    Eigen::VectorXd ab(2 * M);
    ab.head(M) = w.real();
    ab.tail(M) = w.imag();
    return ab;
}

Eigen::VectorXcd to_complex(const Eigen::VectorXd &ab) {
    const Eigen::Index M = ab.size() / 2;
    Eigen::VectorXcd w(M);
    w.real() = ab.head(M);
    w.imag() = ab.tail(M);
    return w;
}

double real_inner(const Eigen::MatrixXcd &X, const Eigen::MatrixXcd &Y) {
    return (X.conjugate().cwiseProduct(Y)).sum().real();
}

LoewnerContext::LoewnerContext(FrequencyGrid grid) : grid_(std::move(grid)) {
    const auto M = static_cast<Eigen::Index>(grid_.size());
    if (M == 0)
        throw Error(ErrorCode::EmptyGrid, "Loewner context needs at least one point");
    const Eigen::VectorXcd &z = grid_.points();
    cauchy_.resize(M, M);
    for (Eigen::Index r = 0; r < M; ++r)
        for (Eigen::Index s = 0; s < M; ++s)
            cauchy_(r, s) = 1.0 / (std::conj(z[r]) - z[s]);

    const Eigen::MatrixXd q = 2.0 * cauchy_.cwiseAbs2();
    e_in_ = -q;
    f_in_ = q;
    for (Eigen::Index r = 0; r < M; ++r) {
        const double off = q.row(r).sum() - q(r, r);
        e_in_(r, r) = off;
        f_in_(r, r) = off + 2.0 * q(r, r);
    }

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(e_in_);
    e_eval_ = es.eigenvalues();
    e_evec_ = es.eigenvectors();
    // The kernel is exactly span{1}; drop eigenvalues at round-off scale.
    const double cutoff = 1e-10 * std::max(1.0, e_eval_.cwiseAbs().maxCoeff());
    e_eval_inv_ = e_eval_.unaryExpr([cutoff](double l) { return l > cutoff ? 1.0 / l : 0.0; });

    f_llt_.compute(f_in_);
    if (f_llt_.info() != Eigen::Success)
        throw Error(ErrorCode::InvalidParams, "F_in is not positive definite on this grid");
}

void LoewnerContext::check_size(Eigen::Index n, const char *what) const {
    if (n != static_cast<Eigen::Index>(size())) {
        std::ostringstream os;
        os << what << ": expected dimension " << size() << ", got " << n;
        throw Error(ErrorCode::DimensionMismatch, os.str());
    }
}

Eigen::MatrixXcd LoewnerContext::build(const Eigen::VectorXcd &w) const {
    check_size(w.size(), "build");
    const auto M = w.size();
    Eigen::MatrixXcd X(M, M);
    for (Eigen::Index s = 0; s < M; ++s)
        for (Eigen::Index r = 0; r < M; ++r)
            X(r, s) = (std::conj(w[r]) - w[s]) * cauchy_(r, s);
    return X;
}

Eigen::VectorXd LoewnerContext::e_pinv_apply(const Eigen::VectorXd &a) const {
    check_size(a.size(), "E_in pseudo-inverse");
    return e_evec_ * (e_eval_inv_.asDiagonal() * (e_evec_.transpose() * a));
}

Eigen::VectorXd LoewnerContext::f_inv_apply(const Eigen::VectorXd &b) const {
    check_size(b.size(), "F_in inverse");
    return f_llt_.solve(b);
}

Eigen::VectorXd LoewnerContext::f_gram_eigenvalues() const {
    return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(f_in_, Eigen::EigenvaluesOnly).eigenvalues();
}

Eigen::VectorXd LoewnerContext::adjoint(const Eigen::MatrixXcd &X) const {
    check_size(X.rows(), "adjoint rows");
    check_size(X.cols(), "adjoint cols");
    // E_k and F_k only touch row k and column k, with entries built from the
    // Cauchy matrix; both inner products reduce to row/column sums.
    const Eigen::MatrixXcd P = cauchy_.conjugate().cwiseProduct(X);
    const Eigen::VectorXcd rows = P.rowwise().sum();
    const Eigen::VectorXcd cols = P.colwise().sum().transpose();
    const auto M = X.rows();
    Eigen::VectorXd ab(2 * M);
    ab.head(M) = (rows - cols).real();
    ab.tail(M) = -(rows + cols).imag();
    return ab;
}

Eigen::MatrixXcd LoewnerContext::inverse_adjoint(const Eigen::VectorXd &ab) const {
    if (ab.size() != 2 * static_cast<Eigen::Index>(size()))
        throw Error(ErrorCode::DimensionMismatch, "inverse_adjoint expects a 2M-vector");
    const auto M = static_cast<Eigen::Index>(size());
    Eigen::VectorXd coords(2 * M);
    coords.head(M) = e_pinv_apply(ab.head(M));
    coords.tail(M) = f_inv_apply(ab.tail(M));
    // sum_k c_k E_k + d_k F_k = L(c + j d).
    return build(to_complex(coords));
}

Eigen::VectorXcd LoewnerContext::invert(const Eigen::MatrixXcd &X, double tol) const {
    const Eigen::VectorXd ab = adjoint(X);
    const auto M = static_cast<Eigen::Index>(size());
    Eigen::VectorXd coords(2 * M);
    coords.head(M) = e_pinv_apply(ab.head(M));
    coords.tail(M) = f_inv_apply(ab.tail(M));
    Eigen::VectorXcd w = to_complex(coords);
    const double xn = X.norm();
    const double resid = (build(w) - X).norm();
    if (resid > tol * xn) {
        std::ostringstream os;
        os << "matrix is not a Loewner image (relative residual " << resid / xn << ")";
        throw Error(ErrorCode::NotInSpan, os.str());
    }
    return w;
}

Eigen::MatrixXcd LoewnerContext::basis(std::size_t k, BasisKind kind) const {
    if (k < 1 || k > size())
        throw Error(ErrorCode::IndexOutOfRange, "basis index must lie in [1, M]");
    const auto M = static_cast<Eigen::Index>(size());
    const auto i = static_cast<Eigen::Index>(k - 1);
    Eigen::MatrixXcd B = Eigen::MatrixXcd::Zero(M, M);
    const cplx j(0.0, 1.0);
    for (Eigen::Index s = 0; s < M; ++s) {
        if (s == i)
            continue;
        if (kind == BasisKind::E) {
            B(i, s) = cauchy_(i, s);
            B(s, i) = -cauchy_(s, i);
        } else {
            B(i, s) = -j * cauchy_(i, s);
            B(s, i) = -j * cauchy_(s, i);
        }
    }
    if (kind == BasisKind::F)
        B(i, i) = -2.0 * j * cauchy_(i, i);
    return B;
}

} // namespace freqid
