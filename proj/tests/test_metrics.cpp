// SPDX-License-Identifier: Apache-2.0

#include <cfmimo/metrics.hpp>

#include <gtest/gtest.h>

using namespace cfmimo;

TEST(Jain, AnalyticCases) {
    for (int K : {1, 2, 5, 10, 33}) {
        std::vector<double> ones(static_cast<std::size_t>(K), 1.0);
        std::vector<double> single(static_cast<std::size_t>(K), 0.0);
        single[0] = 2.5;
        EXPECT_EQ(jain_index(ones), 1.0);
        EXPECT_EQ(jain_index(single), 1.0 / K);
    }
    EXPECT_NEAR(jain_index(std::vector<double>{1, 2, 3}), 36.0 / 42.0, 1e-15);
}

TEST(Jain, BoundsAndScaleInvariance) {
    const std::vector<double> r{0.3, 1.1, 0.0, 2.4};
    const double j = jain_index(r);
    EXPECT_GE(j, 0.25);
    EXPECT_LE(j, 1.0);
    std::vector<double> scaled;
    for (double x : r) scaled.push_back(7.0 * x);
    EXPECT_NEAR(jain_index(scaled), j, 1e-15);
}

TEST(Jain, Errors) {
    EXPECT_THROW(jain_index(std::vector<double>{}), std::invalid_argument);
    EXPECT_THROW(jain_index(std::vector<double>{1.0, -0.1}), std::invalid_argument);
    EXPECT_THROW(jain_index(std::vector<double>{0.0, 0.0}), std::domain_error);
}

TEST(MeanAndErrorTest, SingleAndPair) {
    const MeanAndError one = mean_and_error(std::vector<double>{4.2});
    EXPECT_EQ(one.mean, 4.2);
    EXPECT_EQ(one.std_err, 0.0);
    const MeanAndError two = mean_and_error(std::vector<double>{2.0, 4.0});
    EXPECT_DOUBLE_EQ(two.mean, 3.0);
    EXPECT_DOUBLE_EQ(two.std_err, 1.0);
    EXPECT_THROW(mean_and_error(std::vector<double>{}), std::invalid_argument);
}

TEST(Cdf, StepFunctionAndTies) {
    const std::vector<double> s{3.0, 1.0, 2.0, 2.0};
    EXPECT_EQ(empirical_cdf(s, 0.5), 0.0);
    EXPECT_EQ(empirical_cdf(s, 2.0), 0.75);
    EXPECT_EQ(empirical_cdf(s, 3.0), 1.0);
    const auto table = cdf_table(s);
    ASSERT_EQ(table.size(), 3u);
    EXPECT_EQ(table[0], std::make_pair(1.0, 0.25));
    EXPECT_EQ(table[1], std::make_pair(2.0, 0.75));
    EXPECT_EQ(table[2], std::make_pair(3.0, 1.0));
}

TEST(Quantile, LinearInterpolation) {
    const std::vector<double> s{4.0, 1.0, 3.0, 2.0};
    EXPECT_DOUBLE_EQ(quantile(s, 0.5), 2.5);
    EXPECT_DOUBLE_EQ(quantile(s, 0.0), 1.0);
    EXPECT_DOUBLE_EQ(quantile(s, 1.0), 4.0);
    EXPECT_DOUBLE_EQ(quantile(s, 0.25), 1.75);
    EXPECT_THROW(quantile(s, 1.5), std::invalid_argument);
    EXPECT_THROW(quantile({}, 0.5), std::invalid_argument);
}
