#pragma once

#include <cstddef>
#include <optional>

#include <Eigen/Dense>

#include "freqid/loewner.hpp"
#include "freqid/sysmodel.hpp"

namespace freqid {

/// How the feedthrough term is fixed. The Loewner pencil leaves D free.
struct DPolicy {
    enum class Kind { Zero, DcGain };
    Kind kind = Kind::Zero;
    /// Target G(1) for Kind::DcGain.
    double dc = 0.0;

    static DPolicy zero() { return {}; }
    static DPolicy dc_gain(double value) { return {Kind::DcGain, value}; }
};

struct RealizationConfig {
    /// nullopt selects the order from the singular values.
    std::optional<std::size_t> order;
    double rank_tol = 1e-8;
    DPolicy d_policy;

    void validate() const;
};

struct Realization {
    StateSpace ss;
    std::size_t order = 0;
    /// Singular values of the Loewner matrix, nonincreasing.
    Eigen::VectorXd singular_values;
    /// max_r |G(z_r) - w_r| of the realized model.
    double interpolation_error = 0.0;
};

/// (conj(z_r) conj(w_r) - z_s w_s) / (conj(z_r) - z_s).
Eigen::MatrixXcd shifted_loewner(const LoewnerContext &ctx, const Eigen::VectorXcd &w);

/// Number of sigma_i >= rank_tol * sigma_1; 0 for an all-zero sequence.
std::size_t select_order(const Eigen::VectorXd &singular_values, double rank_tol);

/// Loewner-pencil realization of the data w on the context grid.
///
/// The pencil is assembled with left points z_r (values conj(w_r)) and right
/// points conj(z_r) (values w_r) in the reciprocal variable x = 1/z, where
/// both Loewner matrices are Hermitian. It is compressed onto the dominant
/// eigenvectors of the Loewner matrix, the feedthrough enters as a rank-one
/// update of the pencil, and the descriptor form is made explicit and real by
/// a similarity transform. The result evaluates as C (z^-1 I - A)^-1 B + D.
///
/// Throws RankDeficient when the requested order exceeds the numerical rank,
/// SingularE when the projected descriptor matrix is singular, and
/// ComplexRealization when no real similarity transform exists to tolerance.
Realization realize(const LoewnerContext &ctx, const Eigen::VectorXcd &w,
                    const RealizationConfig &config);

} // namespace freqid
