#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "freqid/harness.hpp"
#include "freqid/loewner.hpp"
#include "freqid/rng.hpp"

using namespace freqid;

namespace {

Eigen::VectorXcd random_cvec(Rng &rng, Eigen::Index n) {
    Eigen::VectorXcd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double re = rng.normal();
        v[i] = cplx(re, rng.normal());
    }
    return v;
}

Eigen::MatrixXcd random_hermitian(Rng &rng, Eigen::Index n) {
    Eigen::MatrixXcd X(n, n);
    for (Eigen::Index c = 0; c < n; ++c)
        X.col(c) = random_cvec(rng, n);
    return X + X.adjoint();
}

/// Entry-by-entry definition, independent of LoewnerContext::build.
Eigen::MatrixXcd loewner_direct(const Eigen::VectorXcd &z, const Eigen::VectorXcd &w) {
    const auto M = z.size();
    Eigen::MatrixXcd X(M, M);
    for (Eigen::Index r = 0; r < M; ++r)
        for (Eigen::Index s = 0; s < M; ++s)
            X(r, s) = (std::conj(w[r]) - w[s]) / (std::conj(z[r]) - z[s]);
    return X;
}

FrequencyGrid single_point() { return FrequencyGrid({pi / 2}, pi / 2); }

} // namespace

TEST_CASE("build matches the entrywise definition and is Hermitian") {
    Rng rng(1);
    for (std::size_t M : {2, 8, 32}) {
        const LoewnerContext ctx(make_uniform_grid(M, 0.1));
        for (int i = 0; i < 30; ++i) {
            const Eigen::VectorXcd w = random_cvec(rng, static_cast<Eigen::Index>(M));
            const Eigen::MatrixXcd X = ctx.build(w);
            CHECK((X - loewner_direct(ctx.points(), w)).cwiseAbs().maxCoeff() < 1e-13);
            CHECK((X - X.adjoint()).cwiseAbs().maxCoeff() <= 1e-12 * std::max(1.0, X.cwiseAbs().maxCoeff()));
        }
    }
}

TEST_CASE("kernel is the real constant direction") {
    const LoewnerContext ctx(make_uniform_grid(9, 0.2));
    CHECK(ctx.build(Eigen::VectorXcd::Constant(9, 3.7)).cwiseAbs().maxCoeff() == 0.0);
    // An imaginary constant is not in the kernel.
    CHECK(ctx.build(Eigen::VectorXcd::Constant(9, cplx(0.0, 1.0))).norm() > 1.0);
}

TEST_CASE("single-point examples") {
    const LoewnerContext ctx(single_point());
    const double b = 1.75;
    Eigen::VectorXcd w(1);
    w[0] = cplx(0.0, b);
    CHECK(std::abs(ctx.build(w)(0, 0) - cplx(b)) < 1e-15);
    CHECK(std::abs(ctx.basis(1, BasisKind::F)(0, 0) - cplx(1.0)) < 1e-15);
}

TEST_CASE("build rejects the wrong length") {
    const LoewnerContext ctx(make_uniform_grid(4, 0.1));
    try {
        ctx.build(Eigen::VectorXcd::Zero(3));
        FAIL("expected DimensionMismatch");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
}

TEST_CASE("benchmark responses give a rank-4 Loewner matrix") {
    const LoewnerContext ctx(make_uniform_grid(16, 0.1));
    const Eigen::MatrixXcd X = ctx.build(responses(true_system(), ctx.grid()));
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXcd>(X).singularValues();
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        rank += sv[i] > 1e-8 * sv[0];
    CHECK(rank == 4);
}

TEST_CASE("invert returns the minimum-norm preimage") {
    Rng rng(2);
    const LoewnerContext ctx(make_uniform_grid(10, 0.1));
    CHECK(ctx.invert(Eigen::MatrixXcd::Zero(10, 10)).norm() == 0.0);
    for (int i = 0; i < 10; ++i) {
        const Eigen::VectorXcd w0 = random_cvec(rng, 10);
        const Eigen::VectorXcd w = ctx.invert(ctx.build(w0));
        const Eigen::VectorXcd expect = w0.array() - w0.real().mean();
        CHECK((w - expect).norm() < 1e-9 * w0.norm());
        CHECK(std::abs(w.real().sum()) < 1e-10);
    }
}

TEST_CASE("invert of a basis element") {
    const LoewnerContext ctx(make_uniform_grid(6, 0.3));
    const Eigen::VectorXcd w = ctx.invert(ctx.basis(3, BasisKind::E));
    Eigen::VectorXd expect = Eigen::VectorXd::Constant(6, -1.0 / 6.0);
    expect[2] += 1.0;
    CHECK((w.real() - expect).norm() < 1e-10);
    CHECK(w.imag().norm() < 1e-10);
}

TEST_CASE("invert rejects matrices outside the span") {
    const LoewnerContext ctx(make_uniform_grid(5, 0.1));
    Eigen::MatrixXcd X = Eigen::MatrixXcd::Identity(5, 5);
    try {
        ctx.invert(X);
        FAIL("expected NotInSpan");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::NotInSpan);
    }
}

TEST_CASE("basis matrices are images of unit vectors") {
    Rng rng(3);
    const LoewnerContext ctx(make_uniform_grid(8, 0.1));
    for (std::size_t k = 1; k <= 8; ++k) {
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(8);
        e[static_cast<Eigen::Index>(k - 1)] = 1.0;
        const Eigen::MatrixXcd Ek = ctx.basis(k, BasisKind::E);
        const Eigen::MatrixXcd Fk = ctx.basis(k, BasisKind::F);
        CHECK((ctx.build(e) - Ek).cwiseAbs().maxCoeff() < 1e-14);
        CHECK((ctx.build(cplx(0.0, 1.0) * e) - Fk).cwiseAbs().maxCoeff() < 1e-14);
        const auto i = static_cast<Eigen::Index>(k - 1);
        CHECK(Ek(i, i) == cplx(0.0));
        // F_k(k,k) = -2j / (conj z_k - z_k) = 1 / Im z_k.
        CHECK(std::abs(Fk(i, i) - cplx(1.0 / ctx.points()[i].imag())) < 1e-13);
    }
    CHECK_THROWS_AS(ctx.basis(0, BasisKind::E), Error);
    CHECK_THROWS_AS(ctx.basis(9, BasisKind::F), Error);
}

TEST_CASE("Gram matrices equal explicit basis inner products") {
    const LoewnerContext ctx(make_uniform_grid(7, 0.25));
    for (std::size_t r = 1; r <= 7; ++r) {
        for (std::size_t k = 1; k <= 7; ++k) {
            const auto i = static_cast<Eigen::Index>(r - 1), j = static_cast<Eigen::Index>(k - 1);
            const double e = real_inner(ctx.basis(r, BasisKind::E), ctx.basis(k, BasisKind::E));
            const double f = real_inner(ctx.basis(r, BasisKind::F), ctx.basis(k, BasisKind::F));
            const double x = real_inner(ctx.basis(r, BasisKind::E), ctx.basis(k, BasisKind::F));
            CHECK(std::abs(ctx.e_gram()(i, j) - e) < 1e-12);
            CHECK(std::abs(ctx.f_gram()(i, j) - f) < 1e-12);
            CHECK(std::abs(x) < 1e-12);
        }
    }
}

TEST_CASE("adjoint agrees with its trace definition and the Gram identity") {
    Rng rng(4);
    const LoewnerContext ctx(make_uniform_grid(9, 0.1));
    CHECK(ctx.adjoint(Eigen::MatrixXcd::Zero(9, 9)).norm() == 0.0);
    for (int t = 0; t < 10; ++t) {
        Eigen::MatrixXcd X(9, 9);
        for (Eigen::Index c = 0; c < 9; ++c)
            X.col(c) = random_cvec(rng, 9);
        const Eigen::VectorXd ab = ctx.adjoint(X);
        for (std::size_t k = 1; k <= 9; ++k) {
            const auto i = static_cast<Eigen::Index>(k - 1);
            CHECK(std::abs(ab[i] - real_inner(ctx.basis(k, BasisKind::E), X)) < 1e-11);
            CHECK(std::abs(ab[9 + i] - real_inner(ctx.basis(k, BasisKind::F), X)) < 1e-11);
        }
        const Eigen::VectorXcd u = random_cvec(rng, 9);
        const Eigen::VectorXd ru = to_real(u);
        Eigen::VectorXd gram(18);
        gram.head(9) = ctx.e_gram() * ru.head(9);
        gram.tail(9) = ctx.f_gram() * ru.tail(9);
        CHECK((ctx.adjoint(ctx.build(u)) - gram).norm() < 1e-10 * gram.norm());

        const Eigen::MatrixXcd H = random_hermitian(rng, 9);
        const Eigen::MatrixXcd Lu = ctx.build(u);
        CHECK(std::abs(real_inner(Lu, H) - ru.dot(ctx.adjoint(H))) < 1e-10 * std::max(1.0, Lu.norm() * H.norm()));
    }
}

TEST_CASE("inverse adjoint round trips") {
    Rng rng(5);
    const LoewnerContext ctx(make_uniform_grid(12, 0.1));
    CHECK(ctx.inverse_adjoint(Eigen::VectorXd(Eigen::VectorXd::Zero(24))).norm() == 0.0);
    const Eigen::MatrixXcd E1 = ctx.basis(1, BasisKind::E);
    CHECK((ctx.inverse_adjoint(ctx.adjoint(E1)) - E1).norm() < 1e-10);
    for (int t = 0; t < 10; ++t) {
        const Eigen::MatrixXcd X = ctx.build(random_cvec(rng, 12));
        CHECK((ctx.inverse_adjoint(ctx.adjoint(X)) - X).norm() < 1e-8);
    }
    // The a-part comes back projected off the ones vector.
    Eigen::VectorXd ab(24);
    for (Eigen::Index i = 0; i < 24; ++i)
        ab[i] = rng.normal();
    Eigen::VectorXd expect = ab;
    expect.head(12).array() -= ab.head(12).mean();
    CHECK((ctx.adjoint(ctx.inverse_adjoint(ab)) - expect).norm() < 1e-9 * ab.norm());
    CHECK_THROWS_AS(ctx.inverse_adjoint(Eigen::VectorXd(Eigen::VectorXd::Zero(5))), Error);
}

TEST_CASE("E_in is a graph Laplacian with the expected spectrum") {
    for (std::size_t M : {4, 8, 16, 32}) {
        for (double dm : {0.05, 0.1, 0.5}) {
            const LoewnerContext ctx(make_uniform_grid(M, dm));
            const Eigen::MatrixXd &E = ctx.e_gram();
            const auto m = static_cast<Eigen::Index>(M);
            CHECK((E * Eigen::VectorXd::Ones(m)).cwiseAbs().maxCoeff() < 1e-10 * E.cwiseAbs().maxCoeff());
            for (Eigen::Index r = 0; r < m; ++r)
                for (Eigen::Index s = 0; s < m; ++s)
                    if (r != s) {
                        CHECK(E(r, s) <= 0.0);
                        CHECK(-E(r, s) >= 0.5 * (1.0 - 1e-12));
                    }
            const double half = static_cast<double>(M) / 2.0;
            CHECK(ctx.e_gram_eigenvalues()[1] >= half);
            CHECK(ctx.f_gram_eigenvalues()[0] >= half);
            CHECK(std::abs(ctx.e_gram_eigenvalues()[0]) < 1e-9 * ctx.e_gram_eigenvalues()[m - 1]);
        }
    }
}

TEST_CASE("build is injective off the kernel") {
    Rng rng(6);
    const LoewnerContext ctx(make_uniform_grid(8, 0.1));
    for (int t = 0; t < 10; ++t) {
        Eigen::VectorXcd w = random_cvec(rng, 8);
        w.array() -= w.real().mean();
        CHECK(ctx.build(w).norm() > 1e-3 * w.norm());
    }
}
