#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <Eigen/Dense>

#include "bfl/banded_linalg.hpp"
#include "bfl/rng.hpp"

using namespace bfl;

namespace {

Eigen::MatrixXd first_difference(Eigen::Index p) {
    Eigen::MatrixXd d = Eigen::MatrixXd::Zero(p - 1, p);
    for (Eigen::Index j = 0; j + 1 < p; ++j) {
        d(j, j) = -1.0;
        d(j, j + 1) = 1.0;
    }
    return d;
}

Eigen::VectorXd random_positive(Eigen::Index n, std::mt19937_64& eng) {
    std::uniform_real_distribution<double> logu(-3.0, 3.0);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = std::exp(logu(eng));
    return v;
}

Eigen::MatrixXd random_spd(Eigen::Index p, std::mt19937_64& eng) {
    std::normal_distribution<double> nd;
    Eigen::MatrixXd b(p, p);
    for (Eigen::Index i = 0; i < p; ++i)
        for (Eigen::Index j = 0; j < p; ++j) b(i, j) = nd(eng);
    return b * b.transpose() + 0.5 * Eigen::MatrixXd::Identity(p, p);
}

} // namespace

TEST(FusedPrecision, TwoByTwo) {
    const auto t = build_fused_precision(Eigen::Vector2d(1, 1), Eigen::VectorXd::Ones(1));
    Eigen::Matrix2d expected;
    expected << 2, -1, -1, 2;
    EXPECT_EQ(t.to_dense(), Eigen::MatrixXd(expected));
}

TEST(FusedPrecision, ThreeByThreeByHand) {
    const auto t = build_fused_precision(Eigen::Vector3d(1, 1, 1), Eigen::Vector2d(0.5, 0.25));
    EXPECT_EQ(t.diag, Eigen::Vector3d(3, 7, 5));
    EXPECT_EQ(t.offdiag, Eigen::Vector2d(-2, -4));
}

TEST(FusedPrecision, DifferenceIdentityOnRandomInstances) {
    std::mt19937_64 eng(1);
    std::uniform_int_distribution<int> pick(2, 20);
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
        const int p = pick(eng);
        const Eigen::VectorXd tau2 = random_positive(p, eng);
        const Eigen::VectorXd ttau2 = random_positive(p - 1, eng);
        const Eigen::MatrixXd d = first_difference(p);
        const Eigen::MatrixXd oracle = Eigen::MatrixXd(tau2.cwiseInverse().asDiagonal()) +
                                       d.transpose() * ttau2.cwiseInverse().asDiagonal() * d;
        const Eigen::MatrixXd got = build_fused_precision(tau2, ttau2).to_dense();
        worst = std::max(worst, (got - oracle).cwiseAbs().maxCoeff());
        ASSERT_EQ(Eigen::LLT<Eigen::MatrixXd>(got).info(), Eigen::Success);
    }
    EXPECT_LT(worst, 1e-10);
}

TEST(HorseshoePrecision, CollapsesToFused) {
    const Eigen::VectorXd tau2 = Eigen::Vector4d(0.3, 2.0, 1.5, 0.7);
    const auto a = build_horseshoe_precision(tau2, Eigen::VectorXd::Ones(3), 1.0);
    const auto b = build_fused_precision(tau2, Eigen::VectorXd::Ones(3));
    EXPECT_EQ(a.to_dense(), b.to_dense());
}

TEST(HorseshoePrecision, TwoByTwo) {
    const auto t = build_horseshoe_precision(Eigen::Vector2d(1, 1), Eigen::VectorXd::Constant(1, 2.0), 0.5);
    Eigen::Matrix2d expected;
    expected << 2, -1, -1, 2;
    EXPECT_EQ(t.to_dense(), Eigen::MatrixXd(expected));
}

TEST(HorseshoePrecision, DifferenceIdentityOnRandomInstances) {
    std::mt19937_64 eng(2);
    std::uniform_int_distribution<int> pick(2, 20);
    double worst = 0.0;
    for (int rep = 0; rep < 1000; ++rep) {
        const int p = pick(eng);
        const Eigen::VectorXd tau2 = random_positive(p, eng);
        const Eigen::VectorXd lambda2 = random_positive(p - 1, eng);
        const double tt = random_positive(1, eng)[0];
        const Eigen::MatrixXd d = first_difference(p);
        const Eigen::VectorXd diff_prec = (lambda2 * tt).cwiseInverse();
        const Eigen::MatrixXd oracle =
            Eigen::MatrixXd(tau2.cwiseInverse().asDiagonal()) + d.transpose() * diff_prec.asDiagonal() * d;
        worst = std::max(worst, (build_horseshoe_precision(tau2, lambda2, tt).to_dense() - oracle).cwiseAbs().maxCoeff());
    }
    EXPECT_LT(worst, 1e-10);
}

TEST(PrecisionBuilders, RejectBadInput) {
    EXPECT_THROW(build_fused_precision(Eigen::Vector2d(1, 0), Eigen::VectorXd::Ones(1)), domain_error);
    EXPECT_THROW(build_fused_precision(Eigen::Vector2d(1, 1), Eigen::VectorXd::Constant(1, -1.0)), domain_error);
    EXPECT_THROW(build_fused_precision(Eigen::Vector3d(1, 1, 1), Eigen::VectorXd::Ones(1)), dimension_error);
    EXPECT_THROW(build_horseshoe_precision(Eigen::Vector2d(1, 1), Eigen::VectorXd::Ones(1), 0.0), domain_error);
    EXPECT_THROW(build_horseshoe_precision(Eigen::Vector2d(1, 1), Eigen::VectorXd::Ones(2), 1.0), dimension_error);
    EXPECT_THROW(build_diagonal_precision(Eigen::Vector2d(1, std::nan(""))), domain_error);
}

TEST(AddTridiagonal, ZeroDenseGivesTridiagonal) {
    const auto t = build_fused_precision(Eigen::Vector3d(1, 2, 3), Eigen::Vector2d(0.5, 4));
    EXPECT_EQ(add_tridiagonal(Eigen::MatrixXd::Zero(3, 3), t), t.to_dense());
}

TEST(AddTridiagonal, DiagonalOnly) {
    SymTridiagonal t{Eigen::Vector3d(1, 2, 3), Eigen::Vector2d::Zero()};
    Eigen::MatrixXd a = Eigen::MatrixXd::Constant(3, 3, 0.5);
    Eigen::MatrixXd expected = a;
    expected.diagonal() += Eigen::Vector3d(1, 2, 3);
    EXPECT_EQ(add_tridiagonal(a, t), expected);
}

TEST(AddTridiagonal, MatchesDenseAddition) {
    std::mt19937_64 eng(3);
    for (int rep = 0; rep < 100; ++rep) {
        const Eigen::MatrixXd a = random_spd(6, eng);
        const auto t = build_fused_precision(random_positive(6, eng), random_positive(5, eng));
        EXPECT_EQ(add_tridiagonal(a, t), a + t.to_dense());
    }
    EXPECT_THROW(add_tridiagonal(Eigen::MatrixXd::Zero(2, 3), SymTridiagonal{Eigen::Vector2d(1, 1), Eigen::VectorXd::Zero(1)}),
                 dimension_error);
}

TEST(GaussianFromPrecision, IdentityCase) {
    RngStream rng(4, 0);
    PrecisionSystem sys{Eigen::MatrixXd::Identity(3, 3), Eigen::VectorXd::Zero(3)};
    const int n = 100000;
    Eigen::MatrixXd x(n, 3);
    for (int i = 0; i < n; ++i) x.row(i) = sample_gaussian_from_precision(sys, rng).transpose();
    const Eigen::RowVectorXd mean = x.colwise().mean();
    const Eigen::MatrixXd c = x.rowwise() - mean;
    const Eigen::MatrixXd cov = c.transpose() * c / (n - 1);
    EXPECT_LT(mean.cwiseAbs().maxCoeff(), 0.02);
    EXPECT_LT((cov - Eigen::MatrixXd::Identity(3, 3)).cwiseAbs().maxCoeff(), 0.02);
}

TEST(GaussianFromPrecision, DiagonalCase) {
    RngStream rng(5, 0);
    PrecisionSystem sys{Eigen::Matrix2d(Eigen::Vector2d(4, 4).asDiagonal()), Eigen::Vector2d(4, 8)};
    const int n = 100000;
    Eigen::MatrixXd x(n, 2);
    for (int i = 0; i < n; ++i) x.row(i) = sample_gaussian_from_precision(sys, rng).transpose();
    EXPECT_NEAR(x.col(0).mean(), 1.0, 0.02);
    EXPECT_NEAR(x.col(1).mean(), 2.0, 0.02);
    for (int j = 0; j < 2; ++j) {
        const double v = (x.col(j).array() - x.col(j).mean()).square().sum() / (n - 1);
        EXPECT_NEAR(v, 0.25, 0.01);
    }
}

TEST(GaussianFromPrecision, CovarianceMatchesDenseInverse) {
    std::mt19937_64 eng(6);
    const Eigen::MatrixXd a = random_spd(5, eng);
    const Eigen::VectorXd m = Eigen::VectorXd::LinSpaced(5, -1, 1);
    const Eigen::MatrixXd sigma = a.inverse();
    const Eigen::VectorXd mu = sigma * m;
    RngStream rng(6, 0);
    const int n = 1000000;
    Eigen::VectorXd sum = Eigen::VectorXd::Zero(5);
    Eigen::MatrixXd outer = Eigen::MatrixXd::Zero(5, 5);
    PrecisionSystem sys{a, m};
    for (int i = 0; i < n; ++i) {
        const Eigen::VectorXd d = sample_gaussian_from_precision(sys, rng) - mu;
        sum += d;
        outer.noalias() += d * d.transpose();
    }
    const Eigen::MatrixXd cov = outer / n;
    for (int i = 0; i < 5; ++i) {
        EXPECT_LT(std::abs(sum[i] / n), 3.0 * std::sqrt(sigma(i, i) / n) + 1e-12) << i;
        for (int j = 0; j < 5; ++j) {
            // sd of a sample covariance entry: sqrt((s_ii s_jj + s_ij^2) / n)
            const double se = std::sqrt((sigma(i, i) * sigma(j, j) + sigma(i, j) * sigma(i, j)) / n);
            EXPECT_LT(std::abs(cov(i, j) - sigma(i, j)), 3.0 * se) << i << "," << j;
        }
    }
}

TEST(GaussianFromPrecision, LogDensityMatchesDenseOracle) {
    std::mt19937_64 eng(7);
    RngStream rng(7, 0);
    for (int p = 1; p <= 10; ++p) {
        const Eigen::MatrixXd a = random_spd(p, eng);
        const Eigen::VectorXd m = random_positive(p, eng);
        PrecisionSystem sys{a, m};
        const Eigen::MatrixXd sigma = a.inverse();
        const Eigen::VectorXd mu = sigma * m;
        for (int k = 0; k < 5; ++k) {
            const Eigen::VectorXd x = sample_gaussian_from_precision(sys, rng);
            const double oracle = -0.5 * p * std::log(2.0 * M_PI) - 0.5 * std::log(sigma.determinant()) -
                                  0.5 * (x - mu).dot(sigma.inverse() * (x - mu));
            EXPECT_NEAR(gaussian_log_density_from_precision(sys, x), oracle, 1e-8);
        }
    }
}

TEST(GaussianFromPrecision, FailsOnIndefinite) {
    RngStream rng(8, 0);
    Eigen::Matrix2d a;
    a << 1, 2, 2, 1;
    EXPECT_THROW(sample_gaussian_from_precision(PrecisionSystem{a, Eigen::Vector2d::Zero()}, rng), factorization_error);
    Eigen::Matrix2d nanm = Eigen::Matrix2d::Identity();
    nanm(0, 0) = std::nan("");
    EXPECT_THROW(sample_gaussian_from_precision(PrecisionSystem{nanm, Eigen::Vector2d::Zero()}, rng), factorization_error);
}

TEST(GaussianFromPrecision, Deterministic) {
    std::mt19937_64 eng(9);
    PrecisionSystem sys{random_spd(4, eng), Eigen::Vector4d(1, 2, 3, 4)};
    RngStream a(9, 1), b(9, 1);
    for (int i = 0; i < 50; ++i) EXPECT_EQ(sample_gaussian_from_precision(sys, a), sample_gaussian_from_precision(sys, b));
}
