#include <doctest.h>

#include <cmath>

#include "freqid/harness.hpp"
#include "freqid/realization.hpp"
#include "freqid/rng.hpp"

using namespace freqid;

namespace {

/// Multiplies polynomials in ascending coefficients.
std::vector<double> poly_mul(const std::vector<double> &a, const std::vector<double> &b) {
    std::vector<double> c(a.size() + b.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t j = 0; j < b.size(); ++j)
            c[i + j] += a[i] * b[j];
    return c;
}

/// Random real stable system of order kappa: den = prod (1 - p z) with
/// |p| <= 0.85, so every root 1/p lies outside the unit circle.
TransferFunction random_stable(Rng &rng, std::size_t kappa) {
    std::vector<double> den{1.0};
    std::size_t left = kappa;
    while (left > 0) {
        const double r = 0.2 + 0.65 * rng.uniform();
        if (left >= 2 && rng.uniform() < 0.6) {
            const double ang = pi * rng.uniform();
            den = poly_mul(den, {1.0, -2.0 * r * std::cos(ang), r * r});
            left -= 2;
        } else {
            den = poly_mul(den, {1.0, rng.uniform() < 0.5 ? -r : r});
            left -= 1;
        }
    }
    std::vector<double> num(kappa + 1);
    for (double &c : num)
        c = rng.normal();
    return {num, den};
}

RealizationConfig fixed(std::size_t order, double dc) {
    RealizationConfig rc;
    rc.order = order;
    rc.d_policy = DPolicy::dc_gain(dc);
    return rc;
}

} // namespace

TEST_CASE("shifted Loewner examples") {
    const LoewnerContext ctx(make_uniform_grid(6, 0.1));
    CHECK(shifted_loewner(ctx, Eigen::VectorXcd::Zero(6)).norm() == 0.0);

    const LoewnerContext one(FrequencyGrid({pi / 2}, pi / 2));
    Eigen::VectorXcd w(1);
    w[0] = cplx(0.0, 2.5);
    CHECK(std::abs(shifted_loewner(one, w)(0, 0)) < 1e-15);

    Rng rng(30);
    Eigen::VectorXcd v(6);
    for (Eigen::Index i = 0; i < 6; ++i)
        v[i] = cplx(rng.normal(), rng.normal());
    const Eigen::MatrixXcd S = shifted_loewner(ctx, v);
    const Eigen::VectorXcd &z = ctx.points();
    for (Eigen::Index r = 0; r < 6; ++r)
        for (Eigen::Index s = 0; s < 6; ++s) {
            const cplx e = (std::conj(z[r]) * std::conj(v[r]) - z[s] * v[s]) / (std::conj(z[r]) - z[s]);
            CHECK(std::abs(S(r, s) - e) < 1e-12);
        }
    CHECK_THROWS_AS(shifted_loewner(ctx, Eigen::VectorXcd::Zero(5)), Error);
}

TEST_CASE("benchmark pencil has rank four") {
    const LoewnerContext ctx(make_uniform_grid(16, 0.1));
    const Eigen::VectorXcd w = responses(true_system(), ctx.grid());
    Eigen::MatrixXcd P(16, 32);
    P << ctx.build(w), shifted_loewner(ctx, w);
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(P).singularValues();
    CHECK(select_order(sv, 1e-8) == 4);
}

TEST_CASE("select_order examples") {
    Eigen::VectorXd s(3);
    s << 5.0, 3.0, 1e-12;
    CHECK(select_order(s, 1e-8) == 2);
    CHECK(select_order(Eigen::VectorXd::Zero(4), 1e-8) == 0);
    CHECK(select_order(Eigen::VectorXd(0), 1e-8) == 0);
    const LoewnerContext ctx(make_uniform_grid(16, 0.1));
    const Eigen::VectorXd sv =
        Eigen::JacobiSVD<Eigen::MatrixXcd>(ctx.build(responses(true_system(), ctx.grid()))).singularValues();
    for (double tol : {1e-10, 1e-8, 1e-6})
        CHECK(select_order(sv, tol) == 4);
}

TEST_CASE("noiseless benchmark round trip") {
    const TransferFunction g = true_system();
    const LoewnerContext ctx(make_uniform_grid(32, 0.1));
    const Realization r = realize(ctx, responses(g, ctx.grid()), fixed(4, dc_gain(g)));
    CHECK(r.order == 4);
    CHECK(r.ss.order() == 4);
    CHECK(hinf_distance(r.ss, g) < 1e-6);
    CHECK(r.interpolation_error < 1e-8);
    CHECK(std::abs(dc_gain(g) - eval_ss(r.ss, 1.0).real()) < 1e-9);
}

TEST_CASE("automatic order on noiseless data") {
    const TransferFunction g = true_system();
    const LoewnerContext ctx(make_uniform_grid(32, 0.1));
    RealizationConfig rc;
    rc.d_policy = DPolicy::dc_gain(dc_gain(g));
    const Realization r = realize(ctx, responses(g, ctx.grid()), rc);
    CHECK(r.order == 4);
    CHECK(hinf_distance(r.ss, g) < 1e-6);
}

TEST_CASE("constant system realizes as pure feedthrough") {
    const LoewnerContext ctx(make_uniform_grid(8, 0.1));
    RealizationConfig rc;
    rc.d_policy = DPolicy::dc_gain(1.25);
    const Realization r = realize(ctx, Eigen::VectorXcd::Constant(8, 1.25), rc);
    CHECK(r.order == 0);
    CHECK(r.ss.A.size() == 0);
    CHECK(r.ss.D == 1.25);
    CHECK(r.interpolation_error < 1e-14);
}

TEST_CASE("zero feedthrough policy") {
    // G(z) = z / (1 - 0.5 z) has G(0) = 0, so D = 0 is exact.
    const TransferFunction g{{0.0, 1.0}, {1.0, -0.5}};
    const LoewnerContext ctx(make_uniform_grid(8, 0.1));
    RealizationConfig rc;
    rc.order = 1;
    const Realization r = realize(ctx, responses(g, ctx.grid()), rc);
    CHECK(r.ss.D == 0.0);
    CHECK(hinf_distance(r.ss, g) < 1e-8);
}

TEST_CASE("random stable systems interpolate their data") {
    Rng rng(31);
    for (int t = 0; t < 30; ++t) {
        const std::size_t kappa = 1 + static_cast<std::size_t>(t % 6);
        const TransferFunction g = random_stable(rng, kappa);
        const std::size_t M = 2 * kappa + 4 + static_cast<std::size_t>(t % 3) * 4;
        const LoewnerContext ctx(make_uniform_grid(M, 0.1));
        const Eigen::VectorXcd w = responses(g, ctx.grid());
        const Realization r = realize(ctx, w, fixed(kappa, dc_gain(g)));
        CAPTURE(kappa);
        CAPTURE(M);
        CHECK(r.interpolation_error <= 1e-6 * w.cwiseAbs().maxCoeff());
        CHECK(hinf_distance(r.ss, g) <= 1e-6 * std::max(1.0, hinf_distance(g, TransferFunction{{0.0}, {1.0}})));
    }
}

TEST_CASE("order recovery across rank tolerances") {
    Rng rng(32);
    for (int t = 0; t < 10; ++t) {
        const std::size_t kappa = 1 + static_cast<std::size_t>(t % 4);
        const TransferFunction g = random_stable(rng, kappa);
        const LoewnerContext ctx(make_uniform_grid(16, 0.1));
        const Eigen::VectorXd sv =
            Eigen::JacobiSVD<Eigen::MatrixXcd>(ctx.build(responses(g, ctx.grid()))).singularValues();
        for (double tol : {1e-10, 1e-8, 1e-6})
            CHECK(select_order(sv, tol) == kappa);
    }
}

TEST_CASE("a real constant shift leaves the pencil rank unchanged") {
    const TransferFunction g = true_system();
    const LoewnerContext ctx(make_uniform_grid(16, 0.1));
    const Eigen::VectorXcd w = responses(g, ctx.grid());
    RealizationConfig rc;
    rc.d_policy = DPolicy::dc_gain(dc_gain(g));
    const Realization a = realize(ctx, w, rc);
    rc.d_policy = DPolicy::dc_gain(dc_gain(g) + 0.7);
    const Realization b = realize(ctx, w.array() + 0.7, rc);
    CHECK(a.order == b.order);
    CHECK((a.singular_values - b.singular_values).norm() < 1e-12 * a.singular_values[0]);
    // Shifting the data by 0.7 shifts the model by 0.7.
    for (double th : {0.0, 0.5, 2.0, pi}) {
        const cplx x = std::polar(1.0, th);
        CHECK(std::abs(eval_ss(b.ss, x) - eval_ss(a.ss, x) - 0.7) < 1e-6);
    }
}

TEST_CASE("realization errors") {
    const TransferFunction g = true_system();
    const LoewnerContext ctx(make_uniform_grid(16, 0.1));
    const Eigen::VectorXcd w = responses(g, ctx.grid());
    try {
        realize(ctx, w, fixed(6, dc_gain(g)));
        FAIL("expected RankDeficient");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::RankDeficient);
    }
    CHECK_THROWS_AS(realize(ctx, Eigen::VectorXcd::Zero(3), RealizationConfig{}), Error);
    RealizationConfig bad;
    bad.rank_tol = 1.0;
    CHECK_THROWS_AS(realize(ctx, w, bad), Error);
    bad.rank_tol = 1e-8;
    bad.order = 0;
    CHECK_THROWS_AS(realize(ctx, w, bad), Error);
    bad.order = 17;
    CHECK_THROWS_AS(realize(ctx, w, bad), Error);
}
