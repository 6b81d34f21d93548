#include <Eigen/Eigenvalues>
#include <cmath>

#include "doctest.h"
#include "kssc/kernel.hpp"
#include "kssc/rng.hpp"

using kssc::Matrix;
using kssc::Vector;

namespace {

Matrix random_matrix(Eigen::Index d, Eigen::Index n, std::uint64_t seed) {
    kssc::SplitMix64 rng(seed);
    Matrix x(d, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < d; ++i) x(i, j) = rng.next_normal();
    return x;
}

// Centering oracle: explicit (I - E) Kappa (I - E) product.
Matrix centered_by_product(const Matrix& kappa) {
    const Eigen::Index n = kappa.rows();
    const Matrix p = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / double(n));
    return p * kappa * p;
}

}  // namespace

TEST_CASE("eval_kernel matches the closed forms") {
    const Vector e1 = Vector::Unit(2, 0), e2 = Vector::Unit(2, 1);
    CHECK(kssc::eval_kernel(kssc::KernelSpec::linear(), e1, e2) == 0.0);
    CHECK(kssc::eval_kernel(kssc::KernelSpec::gaussian(1.0), e1, e1) == 1.0);
    CHECK(kssc::eval_kernel(kssc::KernelSpec::polynomial(1.0, 2), e1, e1) == 4.0);

    Vector x(2), y(2);
    x << 1, 2;
    y << 3, 4;
    CHECK(kssc::eval_kernel(kssc::KernelSpec::linear(), x, y) == 11.0);
    // exp(-||e1-e2||^2 / 2) with sigma2 = 1
    CHECK(kssc::eval_kernel(kssc::KernelSpec::gaussian(1.0), e1, e2) ==
          doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("eval_kernel is symmetric in its arguments") {
    kssc::SplitMix64 rng(3);
    Vector x(5), y(5);
    for (int i = 0; i < 5; ++i) x[i] = rng.next_normal(), y[i] = rng.next_normal();
    for (const auto& spec : {kssc::KernelSpec::linear(), kssc::KernelSpec::polynomial(0.5, 3),
                             kssc::KernelSpec::gaussian(2.0)})
        CHECK(kssc::eval_kernel(spec, x, y) == kssc::eval_kernel(spec, y, x));
}

TEST_CASE("eval_kernel rejects mismatched dimensions") {
    CHECK_THROWS_AS(kssc::eval_kernel(kssc::KernelSpec::linear(), Vector::Zero(2), Vector::Zero(3)),
                    kssc::DimensionError);
}

TEST_CASE("kernel spec validation") {
    CHECK_THROWS_AS(kssc::KernelSpec::gaussian(0.0), kssc::InvalidArgumentError);
    CHECK_THROWS_AS(kssc::KernelSpec::gaussian(-1.0), kssc::InvalidArgumentError);
    CHECK_THROWS_AS(kssc::KernelSpec::polynomial(1.0, 0), kssc::InvalidArgumentError);
    CHECK_THROWS_AS(kssc::KernelSpec::polynomial(-0.5, 2), kssc::InvalidArgumentError);
    CHECK_NOTHROW(kssc::KernelSpec::polynomial(0.0, 1));
}

TEST_CASE("gram on orthonormal columns") {
    const Matrix x = Matrix::Identity(2, 2);
    CHECK(kssc::gram(kssc::KernelSpec::linear(), x).entries.isApprox(Matrix::Identity(2, 2)));

    const Matrix g = kssc::gram(kssc::KernelSpec::gaussian(1.0), x).entries;
    CHECK(g(0, 0) == 1.0);
    CHECK(g(1, 1) == 1.0);
    CHECK(g(0, 1) == doctest::Approx(std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("polynomial b=0 d=1 equals the linear gram") {
    const Matrix x = random_matrix(4, 7, 11);
    const Matrix a = kssc::gram(kssc::KernelSpec::linear(), x).entries;
    const Matrix b = kssc::gram(kssc::KernelSpec::polynomial(0.0, 1), x).entries;
    CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("gram matrices are exactly symmetric and near-PSD") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Matrix x = random_matrix(6, 15, seed);
        for (const auto& spec : {kssc::KernelSpec::linear(), kssc::KernelSpec::polynomial(1.0, 2),
                                 kssc::KernelSpec::gaussian(0.7)}) {
            const kssc::GramMatrix g = kssc::gram(spec, x);
            CHECK((g.entries - g.entries.transpose()).cwiseAbs().maxCoeff() == 0.0);

            Eigen::SelfAdjointEigenSolver<Matrix> eig(g.entries);
            const double lam_max = eig.eigenvalues().maxCoeff();
            CHECK(eig.eigenvalues().minCoeff() >= -1e-8 * lam_max);

            const kssc::GramMatrix k = kssc::center_gram(g);
            Eigen::SelfAdjointEigenSolver<Matrix> eig_c(k.entries);
            CHECK(eig_c.eigenvalues().minCoeff() >= -1e-8 * eig_c.eigenvalues().maxCoeff());
        }
    }
}

TEST_CASE("gram rejects fewer than two samples") {
    CHECK_THROWS_AS(kssc::gram(kssc::KernelSpec::linear(), Matrix::Zero(3, 1)),
                    kssc::InvalidArgumentError);
    CHECK_THROWS_AS(kssc::gram(kssc::KernelSpec::linear(), Matrix(3, 0)),
                    kssc::InvalidArgumentError);
}

TEST_CASE("center_gram closed forms") {
    kssc::GramMatrix ones;
    ones.entries = Matrix::Constant(2, 2, 1.0);
    CHECK(kssc::center_gram(ones).entries.cwiseAbs().maxCoeff() <= 1e-15);

    kssc::GramMatrix twice;
    twice.entries = 2.0 * Matrix::Identity(2, 2);
    Matrix expected(2, 2);
    expected << 1, -1, -1, 1;
    CHECK(kssc::center_gram(twice).entries.isApprox(expected, 1e-14));
}

TEST_CASE("center_gram matches the dense product oracle and annihilates rows") {
    const Matrix x = random_matrix(5, 12, 21);
    const kssc::GramMatrix g = kssc::gram(kssc::KernelSpec::gaussian(1.3), x);
    const kssc::GramMatrix k = kssc::center_gram(g);
    CHECK(k.centered);
    CHECK((k.entries - centered_by_product(g.entries)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((k.entries * Vector::Ones(12)).cwiseAbs().maxCoeff() < 1e-8 * k.entries.norm());
    // projection idempotence: re-centering a centered matrix changes nothing
    kssc::GramMatrix k_raw;
    k_raw.entries = k.entries;
    CHECK((kssc::center_gram(k_raw).entries - k.entries).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("center_gram refuses an already-centered input") {
    kssc::GramMatrix k;
    k.entries = Matrix::Identity(3, 3);
    k.centered = true;
    CHECK_THROWS_AS(kssc::center_gram(k), kssc::InvalidArgumentError);
}

TEST_CASE("kernel_vector reproduces gram columns on training points") {
    const Matrix x = random_matrix(4, 9, 31);
    for (const auto& spec : {kssc::KernelSpec::linear(), kssc::KernelSpec::polynomial(2.0, 3),
                             kssc::KernelSpec::gaussian(0.5)}) {
        const kssc::GramMatrix g = kssc::gram(spec, x);
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const kssc::KernelVector kv = kssc::kernel_vector(spec, x, x.col(j));
            CHECK((kv.entries - g.entries.col(j)).cwiseAbs().maxCoeff() < 1e-12);
        }
    }
}

TEST_CASE("kernel_vector closed form and range") {
    const Matrix x = Matrix::Identity(2, 2);
    Vector p(2);
    p << 1, 1;
    const kssc::KernelVector kv = kssc::kernel_vector(kssc::KernelSpec::linear(), x, p);
    CHECK(kv.entries(0) == 1.0);
    CHECK(kv.entries(1) == 1.0);
    CHECK_FALSE(kv.centered);

    const Matrix r = random_matrix(3, 8, 41);
    const kssc::KernelVector gv =
        kssc::kernel_vector(kssc::KernelSpec::gaussian(1.0), r, Vector::Zero(3));
    CHECK(gv.entries.minCoeff() > 0.0);
    CHECK(gv.entries.maxCoeff() <= 1.0);

    CHECK_THROWS_AS(kssc::kernel_vector(kssc::KernelSpec::linear(), r, Vector::Zero(4)),
                    kssc::DimensionError);
}

TEST_CASE("center_kernel_vector train/test consistency") {
    const Matrix x = random_matrix(6, 10, 51);
    const kssc::GramMatrix g = kssc::gram(kssc::KernelSpec::polynomial(1.0, 2), x);
    const kssc::GramMatrix k = kssc::center_gram(g);
    const double scale = k.entries.cwiseAbs().maxCoeff();
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
        kssc::KernelVector col;
        col.entries = g.entries.col(j);
        const kssc::KernelVector ck = kssc::center_kernel_vector(g, col);
        CHECK(ck.centered);
        CHECK((ck.entries - k.entries.col(j)).cwiseAbs().maxCoeff() < 1e-10 * scale);
        CHECK(std::abs(ck.entries.sum()) < 1e-10 * scale);
    }
}

TEST_CASE("center_kernel_vector annihilates the constant direction") {
    kssc::GramMatrix ones;
    ones.entries = Matrix::Constant(3, 3, 1.0);
    kssc::KernelVector kv;
    kv.entries = Vector::Constant(3, 0.25);
    CHECK(kssc::center_kernel_vector(ones, kv).entries.cwiseAbs().maxCoeff() < 1e-15);
}

TEST_CASE("center_kernel_vector validates lengths and flags") {
    const Matrix x = random_matrix(2, 5, 61);
    const kssc::GramMatrix g = kssc::gram(kssc::KernelSpec::linear(), x);
    kssc::KernelVector wrong;
    wrong.entries = Vector::Zero(4);
    CHECK_THROWS_AS(kssc::center_kernel_vector(g, wrong), kssc::DimensionError);

    kssc::KernelVector flagged;
    flagged.entries = Vector::Zero(5);
    flagged.centered = true;
    CHECK_THROWS_AS(kssc::center_kernel_vector(g, flagged), kssc::InvalidArgumentError);
}
