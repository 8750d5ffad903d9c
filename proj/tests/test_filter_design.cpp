// SPDX-License-Identifier: Apache-2.0

#include "oracles.hpp"

#include <cfmimo/filter_design.hpp>

#include <gtest/gtest.h>

using namespace cfmimo;

TEST(OptimalFilter, DiagonalDenominator) {
    Eigen::MatrixXd D(2, 2);
    D << 2.0, 0.0, 0.0, 1.0;
    const FilterSolution s = optimal_filter(RankOneForm{Eigen::Vector2d(1.0, 1.0), 1.0}, D);
    EXPECT_NEAR(s.t(0), 1.0 / std::sqrt(5.0), 1e-12);
    EXPECT_NEAR(s.t(1), 2.0 / std::sqrt(5.0), 1e-12);
    EXPECT_NEAR(s.lambda_max, 1.5, 1e-12);
}

TEST(OptimalFilter, IdentityDenominatorGivesMatchedFilter) {
    const Eigen::Vector3d v(3.0, -4.0, 0.0);
    const FilterSolution s = optimal_filter(RankOneForm{v, 2.0}, Eigen::Matrix3d::Identity());
    EXPECT_TRUE(s.t.isApprox(v / 5.0, 1e-14));
    EXPECT_NEAR(s.lambda_max, 50.0, 1e-12);
}

TEST(OptimalFilter, SignNormalization) {
    const FilterSolution s = optimal_filter(RankOneForm{Eigen::Vector2d(-1.0, -2.0), 1.0}, Eigen::Matrix2d::Identity());
    EXPECT_GT(s.t(0), 0.0);
    Eigen::VectorXd z(3);
    z << 0.0, -1.0, 2.0;
    normalize_sign(z);
    EXPECT_EQ(z(1), 1.0);
}

TEST(OptimalFilter, AgreesWithDenseEigensolverAndBeatsRandomFilters) {
    Rng rng = make_rng(21, 0, StreamPurpose::test);
    std::normal_distribution<double> n;
    std::uniform_int_distribution<int> dim(1, 12);
    for (int i = 0; i < 100; ++i) {
        const int M = dim(rng);
        Eigen::MatrixXd G(M, M);
        for (Eigen::Index j = 0; j < G.size(); ++j) G.data()[j] = n(rng);
        const Eigen::MatrixXd D = G * G.transpose() + Eigen::MatrixXd::Identity(M, M);
        Eigen::VectorXd v(M);
        for (int j = 0; j < M; ++j) v(j) = n(rng);
        const RankOneForm N{v, 0.5 + std::abs(n(rng))};
        const FilterSolution s = optimal_filter(N, D);
        EXPECT_NEAR(s.t.norm(), 1.0, 1e-14);

        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(N.dense(), D);
        Eigen::VectorXd ref = ges.eigenvectors().col(M - 1).normalized();
        normalize_sign(ref);
        EXPECT_LT((s.t - ref).cwiseAbs().maxCoeff(), 1e-8);
        EXPECT_NEAR(s.lambda_max, ges.eigenvalues()(M - 1), 1e-8 * s.lambda_max);
        // Rayleigh quotient at the solution equals lambda_max
        EXPECT_NEAR(N.quad(s.t) / s.t.dot(D * s.t), s.lambda_max, 1e-10 * s.lambda_max);

        for (int trial = 0; trial < 10; ++trial) {
            Eigen::VectorXd u(M);
            for (int j = 0; j < M; ++j) u(j) = n(rng);
            EXPECT_LE(N.quad(u) / u.dot(D * u), s.lambda_max * (1.0 + 1e-12));
        }
    }
}

TEST(OptimalFilter, ScaleEquivariance) {
    Eigen::MatrixXd D(3, 3);
    D << 4, 1, 0, 1, 3, 1, 0, 1, 2;
    const Eigen::Vector3d v(1.0, 0.5, -0.2);
    const FilterSolution a = optimal_filter(RankOneForm{v, 1.0}, D);
    const FilterSolution b = optimal_filter(RankOneForm{v, 7.0}, 3.0 * D);
    EXPECT_TRUE(a.t.isApprox(b.t, 1e-14));
    EXPECT_NEAR(b.lambda_max, a.lambda_max * 7.0 / 3.0, 1e-12);
}

TEST(OptimalFilter, DenseNumeratorEntryPoint) {
    Eigen::MatrixXd D(2, 2);
    D << 2.0, 0.0, 0.0, 1.0;
    const FilterSolution s = optimal_filter(Eigen::MatrixXd::Ones(2, 2), D);
    EXPECT_NEAR(s.lambda_max, 1.5, 1e-12);
    EXPECT_THROW(optimal_filter(Eigen::MatrixXd::Zero(2, 2), D), std::invalid_argument);
}

TEST(OptimalFilter, ReportsNonPositiveDefiniteUser) {
    Eigen::MatrixXd D(2, 2);
    D << 1.0, 2.0, 2.0, 1.0;
    try {
        optimal_filter(RankOneForm{Eigen::Vector2d(1.0, 1.0), 1.0}, D, 4);
        FAIL() << "expected NotPositiveDefinite";
    } catch (const NotPositiveDefinite& e) {
        EXPECT_EQ(e.user(), 4);
    }
    EXPECT_THROW(optimal_filter(RankOneForm{Eigen::Vector3d::Ones(), 1.0}, D), std::invalid_argument);
}

TEST(OptimalFilters, ZeroPowerUserStillGetsDirection) {
    const NetworkRealization r = oracle::synthetic(5, 2, 1, 22);
    PowerVector p(2);
    p << 0.0, 1.0;
    const FilterBank t = optimal_filters(r, p);
    const QuadraticForms f = build_forms(r, p);
    const Eigen::VectorXd expect = f.denominator[0].llt().solve(r.xi.col(0)).normalized();
    EXPECT_TRUE(t.filter(0).isApprox(expect, 1e-12));
}

TEST(OptimalFilters, NoOtherFilterRaisesAnyUsersSinr) {
    Rng rng = make_rng(23, 0, StreamPurpose::test);
    std::normal_distribution<double> n;
    for (int i = 0; i < 20; ++i) {
        const NetworkRealization r = oracle::synthetic(8, 4, 2, 400 + static_cast<std::uint64_t>(i));
        const PowerVector p = PowerVector::Constant(4, 0.6);
        const Eigen::VectorXd best = sinr_closed_form(r, optimal_filters(r, p), p);
        Eigen::MatrixXd u(8, 4);
        for (Eigen::Index j = 0; j < u.size(); ++j) u.data()[j] = n(rng);
        const Eigen::VectorXd other = sinr_closed_form(r, FilterBank(u), p);
        for (int k = 0; k < 4; ++k) EXPECT_LE(other(k), best(k) * (1.0 + 1e-12));
        const Eigen::VectorXd uni = sinr_closed_form(r, FilterBank::uniform(8, 4), p);
        for (int k = 0; k < 4; ++k) EXPECT_LE(uni(k), best(k) * (1.0 + 1e-12));
    }
}
