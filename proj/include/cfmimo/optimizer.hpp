// SPDX-License-Identifier: Apache-2.0
//
// Alternating optimization of receive filters and transmit powers.
//
// Each outer iteration solves the K decoupled filter problems at fixed powers
// and then the power problem at fixed filters. Both half-steps can only raise
// the objective, so the outer trace is nondecreasing; this is checked at run
// time and a violation is reported as an internal error.
//
// Cost per outer iteration is O(K M^3) for the filters (one Cholesky per user)
// plus O(n (K M^2 + K^2 M + m K)) for n gradient-projection iterations with m
// Armijo trials each.

#pragma once

#include <cfmimo/filter_design.hpp>
#include <cfmimo/power_gp.hpp>
#include <cfmimo/sinr.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace cfmimo {

/// Power-control strategy of a full solve.
enum class Scheme { pf, srm, maxmin };

inline std::string_view to_string(Scheme s) {
    switch (s) {
    case Scheme::pf: return "pf";
    case Scheme::srm: return "srm";
    case Scheme::maxmin: return "maxmin";
    }
    return "?";
}

inline Scheme parse_scheme(std::string_view name) {
    if (name == "pf") return Scheme::pf;
    if (name == "srm") return Scheme::srm;
    if (name == "maxmin") return Scheme::maxmin;
    throw std::invalid_argument("unknown objective '" + std::string(name) + "' (expected pf, srm or maxmin)");
}

struct OptimizerSettings {
    GpSettings gp;
    int max_outer_iters = 50;
    double monotonicity_slack = 1e-9;
    double bisection_rel_tol = 1e-4;
};

struct SolveResult {
    FilterBank filters;
    PowerVector powers;
    Eigen::VectorXd sinr;
    Eigen::VectorXd net_rates;
    std::vector<double> objective_trace; // value before the first iteration, then one per outer iteration
    int outer_iters = 0;
    bool converged = false;
};

/// The alternation is started from equal-weight filters and full power.
inline FilterBank initial_filters(const NetworkRealization& r) {
    return FilterBank::uniform(r.num_aps(), r.num_users());
}

inline PowerVector initial_powers(const NetworkRealization& r) {
    return PowerVector::Ones(r.num_users());
}

namespace detail {

inline void check_monotone(double before, double after, double slack, const char* stage, int iter) {
    if (after < before - slack) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "internal error: objective decreased during " << stage << " at outer iteration " << iter
            << " (" << before << " -> " << after << ")";
        throw std::logic_error(msg.str());
    }
}

inline SolveResult finish(const NetworkRealization& r, FilterBank t, PowerVector p) {
    SolveResult out;
    out.sinr = sinr_closed_form(r, t, p);
    out.net_rates = rates(out.sinr, r.tau, r.tau_c).net_rate;
    out.filters = std::move(t);
    out.powers = std::move(p);
    return out;
}

} // namespace detail

/// Alternating filter / gradient-projection solve for PF or SRM.
inline SolveResult solve_alternating(const NetworkRealization& r, ObjectiveKind kind,
                                     const OptimizerSettings& s = {}) {
    s.gp.validate();
    FilterBank t = initial_filters(r);
    PowerVector p = initial_powers(r);
    double f = objective(sinr_coefficients(r, t), p, kind);
    std::vector<double> trace{f};
    bool converged = false;
    int iter = 0;
    while (iter < s.max_outer_iters) {
        ++iter;
        t = optimal_filters(r, p);
        const SinrCoefficients c = sinr_coefficients(r, t);
        const double f_filters = objective(c, p, kind);
        detail::check_monotone(f, f_filters, s.monotonicity_slack, "filter update", iter);

        GpResult gp = gp_solve(c, p, kind, s.gp);
        const double f_powers = gp.trace.back();
        detail::check_monotone(f_filters, f_powers, s.monotonicity_slack, "power update", iter);
        p = std::move(gp.p);

        const double f_prev = f;
        f = f_powers;
        trace.push_back(f);
        if (relative_change(f_prev, f) <= s.gp.tol) {
            converged = true;
            break;
        }
    }
    SolveResult out = detail::finish(r, std::move(t), std::move(p));
    out.objective_trace = std::move(trace);
    out.outer_iters = iter;
    out.converged = converged;
    return out;
}

inline SolveResult solve_pf(const NetworkRealization& r, const OptimizerSettings& s = {}) {
    return solve_alternating(r, ObjectiveKind::proportional_fairness, s);
}

inline SolveResult solve_srm(const NetworkRealization& r, const OptimizerSettings& s = {}) {
    return solve_alternating(r, ObjectiveKind::sum_rate, s);
}

/// Powers that give every user exactly SINR `target`, if they fit in the
/// box. They solve (diag(alpha) - target A) p = target delta with
/// A = eta + chi; a positive solution certifies the system matrix is a
/// nonsingular M-matrix, so no smaller feasible power vector exists.
inline std::optional<PowerVector> equal_sinr_powers(const SinrCoefficients& c, double target) {
    const int K = c.num_users();
    if (target <= 0.0) return std::nullopt;
    Eigen::MatrixXd A = c.eta + c.chi;
    Eigen::MatrixXd sys = -target * A;
    sys.diagonal() += c.alpha;
    const Eigen::VectorXd rhs = target * c.delta;
    Eigen::PartialPivLU<Eigen::MatrixXd> lu(sys);
    PowerVector p = lu.solve(rhs);
    if (!p.allFinite() || (p.array() <= 0.0).any() || (p.array() > 1.0).any()) return std::nullopt;
    if ((sys * p - rhs).norm() > 1e-9 * rhs.norm() * static_cast<double>(K)) return std::nullopt;
    return p;
}

struct MaxMinPowers {
    PowerVector p;
    double sinr = 0.0; // common SINR reached by every user
};

/// Bisection on the common SINR target. `feasible_floor` must be a target
/// known to be feasible (or 0); `fallback` is returned if no positive target
/// can be certified.
inline MaxMinPowers maxmin_powers(const SinrCoefficients& c, double feasible_floor, const PowerVector& fallback,
                                  double rel_tol) {
    const int K = c.num_users();
    // SINR_k <= alpha_k p_k / (chi_kk p_k + delta_k) <= alpha_k / (chi_kk + delta_k)
    double hi = std::numeric_limits<double>::infinity();
    for (int k = 0; k < K; ++k) hi = std::min(hi, c.alpha(k) / (c.chi(k, k) + c.delta(k)));
    double lo = std::max(0.0, feasible_floor);

    MaxMinPowers best;
    if (auto p = equal_sinr_powers(c, lo)) {
        best.p = *p;
        best.sinr = lo;
    } else {
        best.p = fallback;
        best.sinr = sinr_from_coefficients(c, fallback).minCoeff();
        lo = std::min(lo, best.sinr);
    }
    while (hi - lo > rel_tol * hi) {
        const double mid = 0.5 * (lo + hi);
        if (auto p = equal_sinr_powers(c, mid)) {
            lo = mid;
            best.p = *p;
            best.sinr = mid;
        } else {
            hi = mid;
        }
    }
    // Scaling all powers up raises every SINR; use the slack the bisection
    // tolerance left below the box.
    const double peak = best.p.maxCoeff();
    if (peak > 0.0 && peak < 1.0) {
        best.p /= peak;
        best.p = best.p.cwiseMin(1.0);
        best.sinr = sinr_from_coefficients(c, best.p).minCoeff();
    }
    return best;
}

/// Max-min SINR baseline: optimal filters alternated with bisection power
/// control. The trace holds the common rate log2(1 + SINR).
inline SolveResult solve_maxmin(const NetworkRealization& r, const OptimizerSettings& s = {}) {
    FilterBank t = initial_filters(r);
    PowerVector p = initial_powers(r);
    double f = std::log2(1.0 + sinr_from_coefficients(sinr_coefficients(r, t), p).minCoeff());
    std::vector<double> trace{f};
    bool converged = false;
    int iter = 0;
    while (iter < s.max_outer_iters) {
        ++iter;
        t = optimal_filters(r, p);
        const SinrCoefficients c = sinr_coefficients(r, t);
        const double floor = sinr_from_coefficients(c, p).minCoeff();
        detail::check_monotone(f, std::log2(1.0 + floor), s.monotonicity_slack, "filter update", iter);
        MaxMinPowers mm = maxmin_powers(c, floor, p, s.bisection_rel_tol);
        p = std::move(mm.p);
        const double f_prev = f;
        f = std::log2(1.0 + sinr_from_coefficients(c, p).minCoeff());
        detail::check_monotone(f_prev, f, s.monotonicity_slack, "power update", iter);
        trace.push_back(f);
        if (relative_change(f_prev, f) <= s.gp.tol) {
            converged = true;
            break;
        }
    }
    SolveResult out = detail::finish(r, std::move(t), std::move(p));
    out.objective_trace = std::move(trace);
    out.outer_iters = iter;
    out.converged = converged;
    return out;
}

inline SolveResult solve(const NetworkRealization& r, Scheme scheme, const OptimizerSettings& s = {}) {
    switch (scheme) {
    case Scheme::pf: return solve_pf(r, s);
    case Scheme::srm: return solve_srm(r, s);
    case Scheme::maxmin: return solve_maxmin(r, s);
    }
    throw std::invalid_argument("solve: unknown scheme");
}

} // namespace cfmimo
