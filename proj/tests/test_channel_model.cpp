// SPDX-License-Identifier: Apache-2.0

#include <cfmimo/channel_model.hpp>

#include <gtest/gtest.h>

#include <sstream>

using namespace cfmimo;

// Desk-calculated reference values (double-precision evaluation of the
// closed-form expressions with the default parameters).
namespace ref {
constexpr double L = 140.71508370390842;
constexpr double pl_below_d0 = -81.1996337689487;
constexpr double pl_200m = -116.25113355214776;
constexpr double pl_30m = -90.74205886334195;
constexpr double noise_w = 6.36241029449455e-13;
constexpr double noise_dbm = -91.96378327858432;
constexpr double rho = 314346278757.0644;
constexpr double rho_db = 114.97408323522413;
constexpr double lognormal_mean_8db = 5.45540791870232; // exp((8 ln10 / 10)^2 / 2)
} // namespace ref

TEST(Topology, WrapAroundDistance) {
    EXPECT_NEAR(wrap_distance_m({0.0, 0.0}, {990.0, 0.0}, 1000.0), 10.0, 1e-12);
    EXPECT_NEAR(wrap_distance_m({5.0, 995.0}, {995.0, 5.0}, 1000.0), std::hypot(10.0, 10.0), 1e-9);
    const auto d = wrap_distances_km({{0.0, 0.0}}, {{990.0, 0.0}}, 1000.0);
    EXPECT_NEAR(d(0, 0), 0.01, 1e-15);
}

TEST(Topology, CoincidentPointsClampToOneMeter) {
    const auto d = wrap_distances_km({{300.0, 300.0}}, {{300.0, 300.0}}, 1000.0);
    EXPECT_DOUBLE_EQ(d(0, 0), 0.001);
}

TEST(Topology, DeterministicAndBounded) {
    SimConfig cfg;
    const Geometry a = generate_topology(cfg, 3);
    const Geometry b = generate_topology(cfg, 3);
    const Geometry c = generate_topology(cfg, 4);
    ASSERT_EQ(a.dist_km.rows(), cfg.num_aps);
    ASSERT_EQ(a.dist_km.cols(), cfg.num_users);
    EXPECT_TRUE(a.dist_km == b.dist_km);
    EXPECT_FALSE(a.dist_km == c.dist_km);
    const double max_km = cfg.area_side_m / std::sqrt(2.0) / 1000.0;
    EXPECT_GT(a.dist_km.minCoeff(), 0.0);
    EXPECT_LE(a.dist_km.maxCoeff(), max_km + 1e-12);
    for (const auto& p : a.ap_xy) {
        EXPECT_GE(p.x, 0.0);
        EXPECT_LT(p.x, cfg.area_side_m);
    }
}

TEST(PathLoss, ConstantMatchesDeskValue) {
    EXPECT_NEAR(path_loss_constant_db(SimConfig{}), ref::L, 1e-9);
}

TEST(PathLoss, FlatBelowD0) {
    SimConfig cfg;
    for (double d : {0.001, 0.005, 0.0099, 0.01})
        EXPECT_NEAR(path_loss_db(d, cfg), ref::pl_below_d0, 1e-9) << d;
}

TEST(PathLoss, SlopesBetweenAndBeyondBreakpoints) {
    SimConfig cfg;
    EXPECT_NEAR(path_loss_db(0.2, cfg), ref::pl_200m, 1e-9);
    EXPECT_NEAR(path_loss_db(0.03, cfg), ref::pl_30m, 1e-9);
    EXPECT_GT(path_loss_db(0.1, cfg), path_loss_db(0.5, cfg));
}

TEST(PathLoss, ContinuousAtBreakpoints) {
    SimConfig cfg;
    const double d1 = cfg.d1_m / 1000.0;
    const double d0 = cfg.d0_m / 1000.0;
    const double L = path_loss_constant_db(cfg);
    // branch expressions evaluated exactly at the breakpoints
    EXPECT_LT(std::abs((-L - 35.0 * std::log10(d1)) - (-L - 15.0 * std::log10(d1) - 20.0 * std::log10(d1))), 1e-9);
    EXPECT_LT(std::abs((-L - 15.0 * std::log10(d1) - 20.0 * std::log10(d0)) - path_loss_db(d0, cfg)), 1e-9);
    // and the function itself across them
    EXPECT_LT(std::abs(path_loss_db(d1 * (1 + 1e-12), cfg) - path_loss_db(d1, cfg)), 1e-9);
    EXPECT_LT(std::abs(path_loss_db(d0 * (1 + 1e-12), cfg) - path_loss_db(d0, cfg)), 1e-9);
    EXPECT_LT(std::abs(path_loss_db(0.05 - 1e-9, cfg) - path_loss_db(0.05 + 1e-9, cfg)), 0.02);
}

TEST(LargeScaleFading, ZeroShadowingIsPathLossOnly) {
    SimConfig cfg;
    cfg.shadow_std_db = 0.0;
    const Geometry g = generate_topology(cfg, 0);
    Rng r1 = make_rng(1, 0, StreamPurpose::shadowing);
    Rng r2 = make_rng(2, 0, StreamPurpose::shadowing);
    const Eigen::MatrixXd a = large_scale_fading(g, cfg, r1);
    const Eigen::MatrixXd b = large_scale_fading(g, cfg, r2);
    EXPECT_TRUE(a == b);
    EXPECT_DOUBLE_EQ(a(0, 0), std::pow(10.0, path_loss_db(g.dist_km(0, 0), cfg) / 10.0));
}

TEST(LargeScaleFading, ZeroDrawGivesPathLoss) {
    SimConfig cfg;
    Eigen::MatrixXd dist(2, 2);
    dist << 0.005, 0.03, 0.2, 0.7;
    const Eigen::MatrixXd beta = large_scale_fading(dist, cfg, Eigen::MatrixXd::Zero(2, 2));
    for (int i = 0; i < 4; ++i)
        EXPECT_DOUBLE_EQ(beta.data()[i], std::pow(10.0, path_loss_db(dist.data()[i], cfg) / 10.0));
    EXPECT_THROW(large_scale_fading(dist, cfg, Eigen::MatrixXd::Zero(1, 2)), std::invalid_argument);
}

TEST(LargeScaleFading, ShadowingHasLognormalMean) {
    SimConfig cfg;
    const int n = 100000;
    Geometry g;
    g.dist_km = Eigen::MatrixXd::Constant(1, n, 0.2);
    Rng rng = make_rng(99, 0, StreamPurpose::shadowing);
    const Eigen::MatrixXd beta = large_scale_fading(g, cfg, rng);
    const Eigen::ArrayXd factor = beta.row(0).array() / std::pow(10.0, path_loss_db(0.2, cfg) / 10.0);
    const double mean = factor.mean();
    const double se = std::sqrt((factor - mean).square().sum() / (n - 1) / n);
    EXPECT_LT(std::abs(mean - ref::lognormal_mean_8db), 3.0 * se) << "mean " << mean << " se " << se;
}

TEST(NoiseAndSnr, ReferenceParameters) {
    const NoiseAndSnr s = noise_and_snr(SimConfig{});
    EXPECT_NEAR(s.noise_w / ref::noise_w, 1.0, 1e-12);
    EXPECT_NEAR(10.0 * std::log10(s.noise_w * 1e3), ref::noise_dbm, 1e-9);
    EXPECT_NEAR(s.rho / ref::rho, 1.0, 1e-12);
    EXPECT_NEAR(linear_to_db(s.rho), ref::rho_db, 1e-9);
    EXPECT_DOUBLE_EQ(s.rho, s.rho_p);
}

TEST(NoiseAndSnr, UnitNoiseFigure) {
    SimConfig cfg;
    cfg.noise_figure_db = 0.0;
    EXPECT_DOUBLE_EQ(noise_and_snr(cfg).noise_w, cfg.bandwidth_hz * kBoltzmann * cfg.noise_temp_k);
}

TEST(Pilots, DistinctAssignmentIsIdentity) {
    EXPECT_TRUE(pilot_gram_from_indices({0, 1, 2, 3}) == Eigen::MatrixXd::Identity(4, 4));
}

TEST(Pilots, SinglePilotFullyContaminated) {
    Rng rng = make_rng(1, 0, StreamPurpose::pilots);
    const PilotAssignment a = assign_pilots(2, 1, rng);
    EXPECT_TRUE(a.gram == Eigen::MatrixXd::Ones(2, 2));
}

TEST(Pilots, GramSymmetricUnitDiagonalBinary) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng = make_rng(seed, 0, StreamPurpose::pilots);
        const PilotAssignment a = assign_pilots(12, 4, rng);
        EXPECT_TRUE(a.gram == a.gram.transpose());
        EXPECT_TRUE(a.gram.diagonal() == Eigen::VectorXd::Ones(12));
        EXPECT_TRUE(((a.gram.array() == 0.0) || (a.gram.array() == 1.0)).all());
        for (int i : a.index) {
            EXPECT_GE(i, 0);
            EXPECT_LT(i, 4);
        }
    }
    Rng rng = make_rng(0, 0, StreamPurpose::pilots);
    EXPECT_THROW(assign_pilots(3, 0, rng), std::invalid_argument);
}

TEST(MmseGain, SingleUserFormula) {
    const double beta = 3e-3, rho_p = 50.0;
    const int tau = 2;
    Eigen::MatrixXd b(1, 1);
    b << beta;
    const Eigen::MatrixXd xi = mmse_gain(b, Eigen::MatrixXd::Ones(1, 1), tau, rho_p);
    const double expect = tau * rho_p * beta * beta / (tau * rho_p * beta + 1.0);
    EXPECT_NEAR(xi(0, 0) / expect, 1.0, 1e-14);
}

TEST(MmseGain, PerfectEstimationLimit) {
    Eigen::MatrixXd b(3, 2);
    b << 1e-3, 0.5, 2e-2, 1.0, 0.3, 7e-3;
    const Eigen::MatrixXd xi = mmse_gain(b, Eigen::MatrixXd::Identity(2, 2), 1, 1e10);
    EXPECT_LT(((xi.array() / b.array()) - 1.0).abs().maxCoeff(), 1e-6);
}

TEST(MmseGain, StrictlyBetweenZeroAndBeta) {
    SimConfig cfg;
    cfg.tau = 3;
    for (std::uint64_t i = 0; i < 10; ++i) {
        const NetworkRealization r = generate_realization(cfg, i);
        EXPECT_TRUE((r.xi.array() > 0.0).all());
        EXPECT_TRUE((r.xi.array() < r.beta.array()).all());
        EXPECT_TRUE((r.beta.array() > 0.0).all());
    }
    EXPECT_THROW(mmse_gain(Eigen::MatrixXd::Zero(1, 1), Eigen::MatrixXd::Ones(1, 1), 1, 1.0),
                 std::invalid_argument);
}

TEST(MmseGain, WeightTimesScaleIsGain) {
    SimConfig cfg;
    const NetworkRealization r = generate_realization(cfg, 5);
    const Eigen::MatrixXd w = mmse_weight(r.beta, r.pilot_gram, r.tau, r.rho_p);
    const Eigen::MatrixXd via_weight = std::sqrt(r.tau * r.rho_p) * w.cwiseProduct(r.beta);
    EXPECT_LT(((via_weight.array() / r.xi.array()) - 1.0).abs().maxCoeff(), 1e-12);
}

TEST(Realization, DeterministicPerIndex) {
    SimConfig cfg;
    const NetworkRealization a = generate_realization(cfg, 11);
    const NetworkRealization b = generate_realization(cfg, 11);
    EXPECT_TRUE(a.beta == b.beta);
    EXPECT_TRUE(a.xi == b.xi);
    EXPECT_EQ(a.pilot_index, b.pilot_index);
    cfg.master_seed += 1;
    EXPECT_FALSE(generate_realization(cfg, 11).beta == a.beta);
}

TEST(Realization, TableDump) {
    const NetworkRealization r = make_realization((Eigen::MatrixXd(2, 1) << 0.5, 0.25).finished(), {0}, 1.0, 1.0, 1, 10);
    std::ostringstream os;
    write_realization_table(os, r);
    std::istringstream in(os.str());
    std::string line;
    std::getline(in, line);
    EXPECT_EQ(line, "ap,user,pilot,beta,xi");
    std::getline(in, line);
    EXPECT_EQ(line.rfind("0,0,0,0.5,", 0), 0u);
    int rows = 1;
    while (std::getline(in, line)) ++rows;
    EXPECT_EQ(rows, 2);
}

TEST(Realization, RejectsBadPilots) {
    const Eigen::MatrixXd b = Eigen::MatrixXd::Constant(2, 2, 0.1);
    EXPECT_THROW(make_realization(b, {0}, 1, 1, 2, 10), std::invalid_argument);
    EXPECT_THROW(make_realization(b, {0, 2}, 1, 1, 2, 10), std::invalid_argument);
}
