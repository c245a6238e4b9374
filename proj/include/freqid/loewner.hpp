#pragma once

#include <cstddef>

#include <Eigen/Dense>

#include "freqid/sysmodel.hpp"

namespace freqid {

/// Complex response vector w <-> real coordinates [Re w; Im w].
Eigen::VectorXd to_real(const Eigen::VectorXcd &w);
Eigen::VectorXcd to_complex(const Eigen::VectorXd &ab);

/// Real inner product Re Tr(X^* Y) on C^{M x M}.
double real_inner(const Eigen::MatrixXcd &X, const Eigen::MatrixXcd &Y);

enum class BasisKind { E, F };

/// The Loewner operator on a fixed grid, built with the conjugate partition
///
///     L(w)_{rs} = (conj(w_r) - w_s) / (conj(z_r) - z_s).
///
/// L is real-linear in [Re w; Im w] and its images are Hermitian. Its kernel
/// is spanned by the all-ones real direction, so inversion picks the
/// representative with sum(Re w) = 0. The Gram matrices of the image basis,
///
///     E_in(r,k) = Re<E_r, E_k>,   F_in(r,k) = Re<F_r, F_k>,
///
/// are assembled in closed form at construction together with the
/// factorizations every per-call operation reuses. Immutable after
/// construction; safe to share between threads.
class LoewnerContext {
public:
    explicit LoewnerContext(FrequencyGrid grid);

    std::size_t size() const { return grid_.size(); }
    const FrequencyGrid &grid() const { return grid_; }
    const Eigen::VectorXcd &points() const { return grid_.points(); }

    /// 1 / (conj(z_r) - z_s).
    const Eigen::MatrixXcd &cauchy() const { return cauchy_; }
    const Eigen::MatrixXd &e_gram() const { return e_in_; }
    const Eigen::MatrixXd &f_gram() const { return f_in_; }

    Eigen::MatrixXcd build(const Eigen::VectorXcd &w) const;

    /// Minimum-norm preimage of X (sum Re w = 0). Throws NotInSpan when
    /// ||build(w) - X||_F > tol ||X||_F.
    Eigen::VectorXcd invert(const Eigen::MatrixXcd &X, double tol = 1e-8) const;

    /// E_k or F_k for k in [1, M].
    Eigen::MatrixXcd basis(std::size_t k, BasisKind kind) const;

    /// [Re<E_k, X>; Re<F_k, X>], a real 2M-vector.
    Eigen::VectorXd adjoint(const Eigen::MatrixXcd &X) const;

    /// sum_k (E_in^+ a)_k E_k + sum_k (F_in^-1 b)_k F_k.
    Eigen::MatrixXcd inverse_adjoint(const Eigen::VectorXd &ab) const;
    Eigen::MatrixXcd inverse_adjoint(const Eigen::VectorXcd &v) const {
        return inverse_adjoint(to_real(v));
    }

    /// E_in^+ a (result orthogonal to the ones vector).
    Eigen::VectorXd e_pinv_apply(const Eigen::VectorXd &a) const;
    Eigen::VectorXd f_inv_apply(const Eigen::VectorXd &b) const;

    /// Eigenvalues of E_in (ascending) and F_in (ascending).
    const Eigen::VectorXd &e_gram_eigenvalues() const { return e_eval_; }
    Eigen::VectorXd f_gram_eigenvalues() const;

private:
    void check_size(Eigen::Index n, const char *what) const;

    FrequencyGrid grid_;
    Eigen::MatrixXcd cauchy_;
    Eigen::MatrixXd e_in_;
    Eigen::MatrixXd f_in_;
    Eigen::VectorXd e_eval_;
    Eigen::MatrixXd e_evec_;
    Eigen::VectorXd e_eval_inv_; // pseudo-inverse spectrum, zero on the kernel
    Eigen::LLT<Eigen::MatrixXd> f_llt_;
};

} // namespace freqid
