// SPDX-License-Identifier: Apache-2.0
//
// Self-checks behind `cfmimo-pf validate`: sampled SINR against the closed
// form, analytic gradients against central differences, and the rank-one
// filter against a dense generalized eigensolver.

#pragma once

#include <cfmimo/channel_model.hpp>
#include <cfmimo/filter_design.hpp>
#include <cfmimo/monte_carlo.hpp>
#include <cfmimo/power_gp.hpp>
#include <cfmimo/rng.hpp>
#include <cfmimo/sinr.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>
#include <vector>

namespace cfmimo {

struct CheckResult {
    std::string name;
    bool passed = false;
    double worst = 0.0;     // worst observed statistic
    double threshold = 0.0; // pass if worst < threshold (or <= for z-scores)
};

/// Unit-norm filters with i.i.d. uniform(0, 1] entries.
inline FilterBank random_filters(int M, int K, Rng& rng) {
    std::uniform_real_distribution<double> u(1e-3, 1.0);
    Eigen::MatrixXd t(M, K);
    for (Eigen::Index j = 0; j < t.size(); ++j) t.data()[j] = u(rng);
    return FilterBank(std::move(t));
}

inline PowerVector random_powers(int K, Rng& rng, double lo = 0.05) {
    std::uniform_real_distribution<double> u(lo, 1.0);
    PowerVector p(K);
    for (int k = 0; k < K; ++k) p(k) = u(rng);
    return p;
}

/// Largest |z| = |mc - closed| / se over users and trials.
inline CheckResult check_monte_carlo(const SimConfig& cfg, int trials, long draws, std::uint64_t seed) {
    CheckResult res{"monte-carlo SINR vs closed form", true, 0.0, 3.0};
    for (int i = 0; i < trials; ++i) {
        const NetworkRealization r = generate_realization(cfg, static_cast<std::uint64_t>(i));
        Rng rng = make_rng(seed, static_cast<std::uint64_t>(i), StreamPurpose::monte_carlo);
        const FilterBank t = random_filters(r.num_aps(), r.num_users(), rng);
        const PowerVector p = random_powers(r.num_users(), rng);
        const Eigen::VectorXd closed = sinr_closed_form(r, t, p);
        const MonteCarloSinrEstimate mc = monte_carlo_sinr(r, t, p, draws, rng);
        for (int k = 0; k < r.num_users(); ++k) {
            const double z = std::abs(mc.mean_sinr(k) - closed(k)) / mc.std_err(k);
            res.worst = std::max(res.worst, z);
        }
    }
    res.passed = res.worst <= res.threshold;
    return res;
}

namespace detail {

// Objective evaluated in long double from the coefficients, so that central
// differences with small h are not swamped by cancellation.
inline long double objective_ld(const SinrCoefficients& c, const std::vector<long double>& p, ObjectiveKind kind) {
    const std::size_t K = p.size();
    long double f = 0.0L;
    for (std::size_t k = 0; k < K; ++k) {
        long double den = c.delta(static_cast<Eigen::Index>(k));
        for (std::size_t i = 0; i < K; ++i) {
            const auto ki = static_cast<Eigen::Index>(k), ii = static_cast<Eigen::Index>(i);
            den += (static_cast<long double>(c.eta(ki, ii)) + c.chi(ki, ii)) * p[i];
        }
        const long double sinr = c.alpha(static_cast<Eigen::Index>(k)) * p[k] / den;
        const long double rate = std::log2(1.0L + sinr);
        f += kind == ObjectiveKind::sum_rate ? rate : std::log2(rate);
    }
    return f;
}

} // namespace detail

/// Relative error |g - fd| / |fd| of the analytic gradient against central
/// differences, both objectives, at random interior points.
inline CheckResult check_gradient(const SimConfig& cfg, int instances, int points, std::uint64_t seed,
                                  double h = 1e-6) {
    CheckResult res{"analytic gradient vs central differences", true, 0.0, 1e-6};
    for (int i = 0; i < instances; ++i) {
        const NetworkRealization r = generate_realization(cfg, static_cast<std::uint64_t>(i));
        Rng rng = make_rng(seed, static_cast<std::uint64_t>(i), StreamPurpose::test);
        const FilterBank t = random_filters(r.num_aps(), r.num_users(), rng);
        const SinrCoefficients c = sinr_coefficients(r, t);
        for (int n = 0; n < points; ++n) {
            const PowerVector p = random_powers(r.num_users(), rng, 0.1).cwiseMin(1.0 - 10.0 * h);
            for (ObjectiveKind kind : {ObjectiveKind::proportional_fairness, ObjectiveKind::sum_rate}) {
                const Eigen::VectorXd g = gradient(c, p, kind);
                for (int j = 0; j < r.num_users(); ++j) {
                    std::vector<long double> up(p.data(), p.data() + p.size()), dn = up;
                    up[static_cast<std::size_t>(j)] += h;
                    dn[static_cast<std::size_t>(j)] -= h;
                    const double fd = static_cast<double>(
                        (detail::objective_ld(c, up, kind) - detail::objective_ld(c, dn, kind)) / (2.0L * h));
                    res.worst = std::max(res.worst, std::abs(fd - g(j)) / std::abs(fd));
                }
            }
        }
    }
    res.passed = res.worst < res.threshold;
    return res;
}

/// Rank-one filter vs Eigen's dense generalized self-adjoint eigensolver.
inline CheckResult check_filter_eigensolver(int instances, int max_m, std::uint64_t seed) {
    CheckResult res{"rank-one filter vs dense generalized eigensolver", true, 0.0, 1e-8};
    Rng rng = make_rng(seed, 0, StreamPurpose::test);
    std::uniform_int_distribution<int> dim(1, max_m);
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> pos(0.1, 2.0);
    for (int i = 0; i < instances; ++i) {
        const int M = dim(rng);
        Eigen::MatrixXd G(M, M);
        for (Eigen::Index j = 0; j < G.size(); ++j) G.data()[j] = normal(rng);
        Eigen::MatrixXd D = G * G.transpose() + static_cast<double>(M) * Eigen::MatrixXd::Identity(M, M);
        Eigen::VectorXd v(M);
        for (int j = 0; j < M; ++j) v(j) = pos(rng);
        const RankOneForm num{v, pos(rng)};

        const FilterSolution fs = optimal_filter(num, D);
        Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> ges(num.dense(), D);
        const Eigen::Index top = M - 1;
        Eigen::VectorXd ref = ges.eigenvectors().col(top);
        ref.normalize();
        normalize_sign(ref);
        const double lam = ges.eigenvalues()(top);
        res.worst = std::max(res.worst, (fs.t - ref).cwiseAbs().maxCoeff());
        res.worst = std::max(res.worst, std::abs(fs.lambda_max - lam) / std::abs(lam));
    }
    res.passed = res.worst < res.threshold;
    return res;
}

} // namespace cfmimo
