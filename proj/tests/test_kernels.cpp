#include <gtest/gtest.h>

#include <cmath>

#include "c2st/errors.hpp"
#include "c2st/kernels.hpp"
#include "c2st/rng.hpp"

using namespace c2st;
using kernels::KernelSpec;

namespace {

Matrix random_matrix(Eigen::Index n, Eigen::Index p, Rng& r) {
    Matrix m(n, p);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < p; ++j) m(i, j) = r.normal();
    return m;
}

} // namespace

TEST(Kernel, IdentityAndUnitExponent) {
    const KernelSpec k{kernels::Family::Gaussian, 2.5, 1.0};
    Vector a(3), b(3);
    a << 1, 2, 3;
    b = a;
    EXPECT_DOUBLE_EQ(kernels::kernel_eval(k, a, b), 1.0);
    b(0) += std::sqrt(2.5);
    EXPECT_NEAR(kernels::kernel_eval(k, a, b), std::exp(-1.0), 1e-15);
}

TEST(Kernel, SymmetricExactly) {
    Rng r(1, 0);
    const KernelSpec k;
    for (int t = 0; t < 100; ++t) {
        Vector a(4), b(4);
        for (int j = 0; j < 4; ++j) {
            a(j) = r.normal();
            b(j) = r.normal();
        }
        EXPECT_EQ(kernels::kernel_eval(k, a, b), kernels::kernel_eval(k, b, a));
    }
}

TEST(Kernel, ValidationAndDimensions) {
    EXPECT_THROW((KernelSpec{kernels::Family::Gaussian, 0.0, 1.0}.validate()), ConfigError);
    EXPECT_THROW((KernelSpec{kernels::Family::Gaussian, 1.0, -1.0}.validate()), ConfigError);
    EXPECT_THROW(kernels::kernel_eval(KernelSpec{}, Vector::Zero(2), Vector::Zero(3)), DimensionMismatch);
    EXPECT_THROW(kernels::gram(KernelSpec{}, Matrix::Zero(2, 2), Matrix::Zero(2, 3)), DimensionMismatch);
}

TEST(Gram, DiagonalTransposeAndSingleRow) {
    Rng r(2, 0);
    const KernelSpec k{kernels::Family::Gaussian, 3.0, 1.0};
    const Matrix a = random_matrix(7, 3, r), b = random_matrix(5, 3, r);
    const Matrix gaa = kernels::gram(k, a, a);
    for (Eigen::Index i = 0; i < 7; ++i) EXPECT_DOUBLE_EQ(gaa(i, i), 1.0);
    EXPECT_EQ(kernels::gram(k, a, b), kernels::gram(k, b, a).transpose());
    const Matrix one = kernels::gram(k, a.topRows(1), b.topRows(1));
    ASSERT_EQ(one.rows(), 1);
    ASSERT_EQ(one.cols(), 1);
    EXPECT_DOUBLE_EQ(one(0, 0), kernels::kernel_eval(k, a.row(0).transpose(), b.row(0).transpose()));
}

TEST(Gram, PositiveSemidefinite) {
    Rng r(3, 0);
    const KernelSpec k;
    for (int t = 0; t < 20; ++t) {
        const Matrix a = random_matrix(20, 2, r);
        const Matrix g = kernels::gram(k, a, a);
        EXPECT_EQ(g, g.transpose());
        Eigen::SelfAdjointEigenSolver<Matrix> es(g);
        EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8 * 20);
    }
}

TEST(Gram, AmplitudeScalesEveryEntry) {
    Rng r(4, 0);
    const Matrix a = random_matrix(6, 2, r), b = random_matrix(4, 2, r);
    const KernelSpec k{kernels::Family::Gaussian, 1.0, 1.0};
    const KernelSpec k4{kernels::Family::Gaussian, 1.0, 4.0};
    EXPECT_EQ(kernels::gram(k4, a, b), 4.0 * kernels::gram(k, a, b));
}
