#include <gtest/gtest.h>

#include <cmath>

#include "bfl/simulation.hpp"

using namespace bfl;

TEST(BetaStar, Shapes) {
    const auto b1 = make_beta_star(1, BetaVariant::b1);
    EXPECT_EQ(b1.size(), 20);
    EXPECT_EQ((b1.array() != 0.0).count(), 10);
    EXPECT_EQ(b1.segment(0, 5), Eigen::VectorXd::Ones(5));
    EXPECT_EQ(b1.segment(5, 5), Eigen::VectorXd::Zero(5));
    const auto b4 = make_beta_star(4, BetaVariant::b4);
    EXPECT_EQ(b4.size(), 400);
    EXPECT_EQ((b4.array() != 0.0).count(), 60);
    EXPECT_EQ(b4[210], 1.5);
    EXPECT_EQ(b4[229], 1.5);
    EXPECT_EQ(b4[230], 0.0);
    const auto b2 = make_beta_star(2, BetaVariant::b2);
    int boundaries = 0;
    for (int j = 0; j + 1 < 20; ++j) boundaries += b2[j + 1] != b2[j];
    EXPECT_EQ(boundaries, 3);
    EXPECT_NE(b2[4], b2[5]);
    EXPECT_NE(b2[9], b2[10]);
    EXPECT_NE(b2[14], b2[15]);
}

TEST(BetaStar, InvalidCombinations) {
    EXPECT_THROW(make_beta_star(1, BetaVariant::b4), domain_error);
    EXPECT_THROW(make_beta_star(4, BetaVariant::b1), domain_error);
    EXPECT_THROW(make_beta_star(5, BetaVariant::b1), domain_error);
}

TEST(Sigma, CaseOne) {
    const auto b1 = make_beta_star(1, BetaVariant::b1);
    EXPECT_EQ(make_sigma(1, b1, 0.0), Eigen::MatrixXd::Identity(20, 20));
    Eigen::Matrix3d expected;
    expected << 1, .5, .5, .5, 1, .5, .5, .5, 1;
    EXPECT_EQ(make_sigma(1, Eigen::Vector3d(1, 0, 1), 0.5), Eigen::MatrixXd(expected));
}

TEST(Sigma, CaseThreeEntries) {
    const auto b1 = make_beta_star(1, BetaVariant::b1);
    const auto s = make_sigma(3, b1);
    EXPECT_EQ(s(0, 2), 0.25);
    EXPECT_EQ(s(4, 5), 0.0);
    EXPECT_EQ(s(0, 4), 0.0625);
    EXPECT_EQ(s(10, 14), 0.0625);
    EXPECT_EQ(s(0, 10), 0.0);  // same value, distance beyond 4
}

TEST(Sigma, StructuralProperties) {
    for (int c : {1, 2, 3}) {
        for (auto v : {BetaVariant::b1, BetaVariant::b2}) {
            const auto b = make_beta_star(c, v);
            const auto s = make_sigma(c, b, 0.5);
            EXPECT_EQ(s, s.transpose());
            EXPECT_EQ(s.diagonal(), Eigen::VectorXd::Ones(20));
            if (c == 1) continue;
            for (int i = 0; i < 20; ++i)
                for (int j = 0; j < 20; ++j) {
                    if (i != j && (std::abs(i - j) > 4 || b[i] != b[j])) {
                        EXPECT_EQ(s(i, j), 0.0);
                    }
                }
            // Toeplitz within a constant block
            for (int blk = 0; blk < 4; ++blk) {
                const Eigen::MatrixXd sub = s.block(5 * blk, 5 * blk, 5, 5);
                for (int i = 1; i < 5; ++i)
                    for (int j = 1; j < 5; ++j) EXPECT_EQ(sub(i, j), sub(i - 1, j - 1));
            }
        }
    }
    EXPECT_EQ(make_sigma(4, make_beta_star(4, BetaVariant::b4)), Eigen::MatrixXd::Identity(400, 400));
}

TEST(Sigma, NonPositiveDefiniteRejected) {
    EXPECT_THROW(make_sigma(1, Eigen::Vector3d(1, 0, 1), -0.9), factorization_error);
}

TEST(GenerateDataset, NullTruthGivesFairCoin) {
    RngStream rng(5, 0);
    const Dataset d = detail::draw_design(Eigen::MatrixXd::Identity(4, 4), Eigen::VectorXd::Zero(4), 10000, rng);
    EXPECT_NEAR(d.y.mean(), 0.5, 0.015);
}

TEST(GenerateDataset, FeatureCovariance) {
    CaseSpec spec{1, BetaVariant::b1, 0.0, 500, 1, 1000, 3};
    const auto [train, test] = generate_dataset(spec, 0);
    EXPECT_EQ(train.n(), 500);
    EXPECT_EQ(test.n(), 1000);
    const Eigen::MatrixXd c = train.X.rowwise() - train.X.colwise().mean();
    const Eigen::MatrixXd cov = c.transpose() * c / 499.0;
    EXPECT_LT((cov - Eigen::MatrixXd::Identity(20, 20)).cwiseAbs().maxCoeff(), 0.15);

    CaseSpec c2{2, BetaVariant::b2, 0.0, 5000, 1, 10, 4};
    const auto [t2, unused] = generate_dataset(c2, 0);
    const Eigen::MatrixXd d2 = t2.X.rowwise() - t2.X.colwise().mean();
    const Eigen::MatrixXd cov2 = d2.transpose() * d2 / 4999.0;
    EXPECT_LT((cov2 - make_sigma(2, make_beta_star(2, BetaVariant::b2))).cwiseAbs().maxCoeff(), 0.1);
}

TEST(GenerateDataset, DeterministicAndDisjointStreams) {
    CaseSpec spec;
    spec.n = 50;
    spec.test_size = 50;
    const auto [a_train, a_test] = generate_dataset(spec, 2);
    const auto [b_train, b_test] = generate_dataset(spec, 2);
    EXPECT_EQ(a_train.X, b_train.X);
    EXPECT_EQ(a_train.y, b_train.y);
    EXPECT_EQ(a_test.X, b_test.X);
    EXPECT_NE(a_train.X, a_test.X);
    const auto [c_train, c_test] = generate_dataset(spec, 3);
    EXPECT_NE(a_train.X, c_train.X);
}

TEST(CaseSpecValidate, Rules) {
    CaseSpec s;
    s.case_id = 0;
    EXPECT_THROW(s.validate(), domain_error);
    s = CaseSpec{};
    s.rho = 1.0;
    EXPECT_THROW(s.validate(), domain_error);
    s = CaseSpec{};
    s.rho = 0.3;
    EXPECT_NO_THROW(s.validate());
    s = CaseSpec{};
    s.n = 0;
    EXPECT_THROW(s.validate(), domain_error);
}

TEST(RunExperiment, SingleReplicationHasZeroSd) {
    CaseSpec spec;
    spec.replications = 1;
    spec.n = 200;
    spec.test_size = 200;
    HyperConfig h;
    h.iterations = 600;
    h.burnin = 300;
    const auto r = run_experiment(spec, ModelTag::lbfl, h, 1);
    EXPECT_EQ(r.table.completed, 1);
    EXPECT_EQ(r.table.failed, 0);
    EXPECT_EQ(r.table.mse.sd, 0.0);
    EXPECT_EQ(r.table.el.sd, 0.0);
    EXPECT_EQ(r.table.av.sd, 0.0);
    EXPECT_EQ(r.table.el_sum.mean, r.table.el.mean * 200);
    for (double v : {r.table.pv->mean, r.table.pzv->mean, r.table.av.mean, r.table.pf->mean, r.table.pnf->mean,
                     r.table.af.mean}) {
        EXPECT_GE(v, 0.0);
        EXPECT_LE(v, 1.0);
    }
}

TEST(RunExperiment, ThreadCountDoesNotChangeResults) {
    CaseSpec spec;
    spec.replications = 3;
    spec.n = 100;
    spec.test_size = 100;
    HyperConfig h;
    h.iterations = 400;
    h.burnin = 200;
    const auto a = run_experiment(spec, ModelTag::lbfh, h, 1);
    const auto b = run_experiment(spec, ModelTag::lbfh, h, 3);
    EXPECT_EQ(a.squared_errors, b.squared_errors);
    EXPECT_EQ(a.el, b.el);
}

TEST(Presets, Sizes) {
    CaseSpec s;
    HyperConfig h;
    apply_preset(Preset::desk, s, h);
    EXPECT_EQ(s.replications, 10);
    EXPECT_EQ(h.iterations, 4000);
    EXPECT_EQ(h.burnin, 2000);
    EXPECT_EQ(s.n, 500);
    s.case_id = 4;
    s.beta_variant = BetaVariant::b4;
    apply_preset(Preset::paper, s, h);
    EXPECT_EQ(s.replications, 100);
    EXPECT_EQ(h.iterations, 10000);
    EXPECT_EQ(h.burnin, 6000);
    EXPECT_EQ(s.n, 300);
    EXPECT_THROW(parse_preset("huge"), domain_error);
}
