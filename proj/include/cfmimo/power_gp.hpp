// SPDX-License-Identifier: Apache-2.0
//
// Box-constrained gradient projection with Armijo backtracking for the
// power subproblem at fixed receive filters.
//
// Cost per iteration: O(K^2) for the gradient plus O(m K^2) for m Armijo
// trials; the filters enter only through the precomputed coefficients.

#pragma once

#include <cfmimo/sinr.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <string_view>
#include <vector>

namespace cfmimo {

enum class ObjectiveKind {
    proportional_fairness, // sum_k log2(R_k)
    sum_rate,              // sum_k R_k
};

inline std::string_view to_string(ObjectiveKind kind) {
    return kind == ObjectiveKind::proportional_fairness ? "pf" : "srm";
}

struct GpSettings {
    double step_size = 1.0;        // delta
    double armijo_sigma = 0.1;
    double armijo_backtrack = 0.5;
    double tol = 1e-3;
    int max_iters = 500;
    int max_armijo_trials = 60;

    void validate() const {
        if (!(armijo_sigma > 0.0 && armijo_sigma < 1.0))
            throw std::invalid_argument("GpSettings: armijo_sigma must lie in (0, 1)");
        if (!(armijo_backtrack > 0.0 && armijo_backtrack < 1.0))
            throw std::invalid_argument("GpSettings: armijo_backtrack must lie in (0, 1)");
        if (!(step_size > 0.0)) throw std::invalid_argument("GpSettings: step_size must be positive");
        if (!(tol > 0.0)) throw std::invalid_argument("GpSettings: tol must be positive");
        if (max_iters < 1 || max_armijo_trials < 1)
            throw std::invalid_argument("GpSettings: iteration limits must be positive");
    }
};

/// PF value is -infinity as soon as one user has zero rate; it is never NaN.
inline double objective(const SinrCoefficients& c, const PowerVector& p, ObjectiveKind kind) {
    const Eigen::VectorXd sinr = sinr_from_coefficients(c, p);
    double f = 0.0;
    for (Eigen::Index k = 0; k < sinr.size(); ++k) {
        const double rate = std::log2(1.0 + sinr(k));
        if (kind == ObjectiveKind::sum_rate) {
            f += rate;
        } else {
            if (!(rate > 0.0)) return -std::numeric_limits<double>::infinity();
            f += std::log2(rate);
        }
    }
    return f;
}

inline bool is_unbounded_below(double f) { return std::isinf(f) && f < 0.0; }

/// Analytic gradient. Per user k with I_k its interference-plus-noise and
/// T_k = alpha_k p_k + I_k, d ln(1+SINR_k)/dp_i = a_ki / T_k - b_ki / I_k where
/// a_kk = alpha_k + chi_kk, b_kk = chi_kk and a_ki = b_ki = eta_ki + chi_ki for
/// i != k. PF weighs user k by log2(e)/ln(1+SINR_k), sum rate by log2(e).
inline Eigen::VectorXd gradient(const SinrCoefficients& c, const PowerVector& p, ObjectiveKind kind) {
    const int K = c.num_users();
    if (p.size() != K) throw std::invalid_argument("gradient: power vector length must equal K");
    Eigen::VectorXd g = Eigen::VectorXd::Zero(K);
    for (int k = 0; k < K; ++k) {
        const double interf = c.interference(p, k);
        const double total = c.alpha(k) * p(k) + interf;
        double weight = std::numbers::log2e;
        if (kind == ObjectiveKind::proportional_fairness) {
            const double r_nat = std::log1p(c.alpha(k) * p(k) / interf);
            if (!(r_nat > 0.0))
                throw std::domain_error("gradient: proportional-fairness objective is unbounded below at this point");
            weight /= r_nat;
        }
        for (int i = 0; i < K; ++i) {
            double d;
            if (i == k) {
                d = (c.alpha(k) + c.chi(k, k)) / total - c.chi(k, k) / interf;
            } else {
                const double cross = c.eta(k, i) + c.chi(k, i);
                d = cross / total - cross / interf;
            }
            g(i) += weight * d;
        }
    }
    return g;
}

inline PowerVector project_box(const PowerVector& p) { return p.cwiseMax(0.0).cwiseMin(1.0); }

struct GpStepResult {
    PowerVector p;
    int armijo_trials = 0; // m_n
    bool stalled = false;
    double descent_term = 0.0; // sum_k grad_k (p_bar_k - p_k), always >= 0
    double value = 0.0;        // objective at the returned point
};

/// One projected-gradient iteration with Armijo step-length selection.
inline GpStepResult gp_step(const SinrCoefficients& c, const PowerVector& p, ObjectiveKind kind,
                            const GpSettings& s) {
    const double f0 = objective(c, p, kind);
    if (!std::isfinite(f0)) throw std::invalid_argument("gp_step: objective is not finite at the current point");
    const Eigen::VectorXd g = gradient(c, p, kind);
    const PowerVector p_bar = project_box(p + s.step_size * g);
    const Eigen::VectorXd dir = p_bar - p;

    GpStepResult out;
    out.descent_term = g.dot(dir);
    if (out.descent_term < 0.0) {
        // g . (p_bar - p) >= 0 for any box projection; only rounding breaks it.
        if (out.descent_term < -1e-12 * (1.0 + g.norm() * dir.norm()))
            throw std::logic_error("gp_step: projected direction is not an ascent direction");
        out.descent_term = 0.0;
    }

    double step = 1.0;
    for (int m = 0; m < s.max_armijo_trials; ++m) {
        PowerVector cand = project_box(p + step * dir);
        const double fc = objective(c, cand, kind);
        if (fc - f0 >= s.armijo_sigma * step * out.descent_term) {
            out.p = std::move(cand);
            out.armijo_trials = m;
            out.value = fc;
            return out;
        }
        step *= s.armijo_backtrack;
    }
    out.p = p;
    out.armijo_trials = s.max_armijo_trials;
    out.stalled = true;
    out.value = f0;
    return out;
}

/// |f1 - f0| / |f0|, falling back to the absolute change when |f0| < 1e-9.
inline double relative_change(double f0, double f1) {
    const double diff = std::abs(f1 - f0);
    return std::abs(f0) < 1e-9 ? diff : diff / std::abs(f0);
}

struct GpResult {
    PowerVector p;
    std::vector<double> trace; // objective at p0 and after every iteration
    int iterations = 0;
    bool converged = false;
    bool stalled = false;
};

inline GpResult gp_solve(const SinrCoefficients& c, const PowerVector& p0, ObjectiveKind kind,
                         const GpSettings& s) {
    s.validate();
    if (p0.size() != c.num_users()) throw std::invalid_argument("gp_solve: power vector length must equal K");
    if (!in_power_box(p0)) throw std::invalid_argument("gp_solve: initial powers must lie in [0, 1]");
    const double f_init = objective(c, p0, kind);
    if (!std::isfinite(f_init))
        throw std::invalid_argument("gp_solve: objective is not finite at the initial powers");

    GpResult out;
    out.p = p0;
    out.trace.push_back(f_init);
    for (int n = 0; n < s.max_iters; ++n) {
        GpStepResult step = gp_step(c, out.p, kind, s);
        const double f_prev = out.trace.back();
        out.p = std::move(step.p);
        out.trace.push_back(step.value);
        out.iterations = n + 1;
        if (step.stalled) {
            out.stalled = true;
            out.converged = true;
            break;
        }
        if (relative_change(f_prev, step.value) <= s.tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

} // namespace cfmimo
