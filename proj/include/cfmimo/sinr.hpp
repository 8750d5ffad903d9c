// SPDX-License-Identifier: Apache-2.0
//
// Closed-form uplink SINR under channel hardening, written two ways: as a
// ratio of quadratic forms in the receive filter (used by the filter design)
// and as a ratio of affine functions of the power vector (used by the power
// allocation).

#pragma once

#include <cfmimo/channel_model.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace cfmimo {

/// Normalized transmit powers, one per user, in [0, 1].
using PowerVector = Eigen::VectorXd;

inline bool in_power_box(const PowerVector& p) {
    return (p.array() >= 0.0).all() && (p.array() <= 1.0).all();
}

/// K receive filters stored as the columns of an M x K matrix. Every column
/// has unit Euclidean norm.
class FilterBank {
public:
    FilterBank() = default;

    /// Normalizes each column; throws on a zero column.
    explicit FilterBank(Eigen::MatrixXd columns) : t_(std::move(columns)) {
        for (Eigen::Index k = 0; k < t_.cols(); ++k) {
            const double n = t_.col(k).norm();
            if (!(n > 0.0) || !std::isfinite(n))
                throw std::invalid_argument("FilterBank: filter " + std::to_string(k) + " has zero norm");
            t_.col(k) /= n;
        }
    }

    /// Equal weights 1/sqrt(M) for every user.
    static FilterBank uniform(int num_aps, int num_users) {
        return FilterBank(Eigen::MatrixXd::Constant(num_aps, num_users, 1.0));
    }

    int num_aps() const { return static_cast<int>(t_.rows()); }
    int num_users() const { return static_cast<int>(t_.cols()); }

    auto filter(int k) const { return t_.col(k); }
    const Eigen::MatrixXd& matrix() const { return t_; }

    void set_filter(int k, const Eigen::VectorXd& t) {
        const double n = t.norm();
        if (!(n > 0.0)) throw std::invalid_argument("FilterBank: zero filter");
        t_.col(k) = t / n;
    }

private:
    Eigen::MatrixXd t_;
};

/// Numerator N_k = scale * v v^T, kept in factored form.
struct RankOneForm {
    Eigen::VectorXd v;
    double scale = 0.0;

    Eigen::MatrixXd dense() const { return scale * v * v.transpose(); }
    double quad(const Eigen::Ref<const Eigen::VectorXd>& t) const {
        const double a = v.dot(t);
        return scale * a * a;
    }
};

struct QuadraticForms {
    std::vector<RankOneForm> numerator;        // N_k
    std::vector<Eigen::MatrixXd> denominator;  // D_k
};

/// Pilot-contamination vector s_k^{k'} = gram(k,k') * xi_k .* beta_k' ./ beta_k.
inline Eigen::VectorXd contamination_vector(const NetworkRealization& r, int k, int kp) {
    return r.pilot_gram(k, kp)
           * (r.xi.col(k).array() * r.beta.col(kp).array() / r.beta.col(k).array()).matrix();
}

/// Denominator matrix D_k for one user.
inline Eigen::MatrixXd denominator_matrix(const NetworkRealization& r, const PowerVector& p, int k) {
    const int K = r.num_users();
    // diagonal part: Xi_k + sum_k' rho p_k' diag(xi_k .* beta_k')
    Eigen::VectorXd diag = r.xi.col(k);
    diag.array() += r.rho * r.xi.col(k).array() * (r.beta * p).array();
    Eigen::MatrixXd D = diag.asDiagonal();
    for (int kp = 0; kp < K; ++kp) {
        if (kp == k || r.pilot_gram(k, kp) == 0.0 || p(kp) == 0.0) continue;
        const Eigen::VectorXd s = contamination_vector(r, k, kp);
        D.noalias() += (r.rho * p(kp)) * s * s.transpose();
    }
    return D;
}

inline QuadraticForms build_forms(const NetworkRealization& r, const PowerVector& p) {
    const int K = r.num_users();
    if (p.size() != K) throw std::invalid_argument("build_forms: power vector length must equal K");
    if (!in_power_box(p)) throw std::invalid_argument("build_forms: powers must lie in [0, 1]");
    QuadraticForms f;
    f.numerator.reserve(static_cast<std::size_t>(K));
    f.denominator.reserve(static_cast<std::size_t>(K));
    for (int k = 0; k < K; ++k) {
        f.numerator.push_back(RankOneForm{r.xi.col(k), r.rho * p(k)});
        f.denominator.push_back(denominator_matrix(r, p, k));
    }
    return f;
}

/// Per-user SINR as the ratio t^T N t / t^T D t.
inline Eigen::VectorXd sinr_closed_form(const NetworkRealization& r, const FilterBank& t,
                                        const PowerVector& p) {
    const QuadraticForms f = build_forms(r, p);
    const int K = r.num_users();
    Eigen::VectorXd sinr(K);
    for (int k = 0; k < K; ++k) {
        const auto tk = t.filter(k);
        sinr(k) = f.numerator[k].quad(tk) / tk.dot(f.denominator[k] * tk);
    }
    return sinr;
}

/// Coefficients that make SINR_k an affine ratio in p:
///   SINR_k = alpha_k p_k / (sum_{k'!=k} eta(k,k') p_k' + sum_k' chi(k,k') p_k' + delta_k)
struct SinrCoefficients {
    Eigen::VectorXd alpha;
    Eigen::MatrixXd eta; // zero diagonal
    Eigen::MatrixXd chi;
    Eigen::VectorXd delta;

    int num_users() const { return static_cast<int>(alpha.size()); }

    /// Interference-plus-noise term of user k (denominator of the ratio).
    double interference(const PowerVector& p, int k) const {
        return eta.row(k).dot(p) + chi.row(k).dot(p) + delta(k);
    }
};

inline SinrCoefficients sinr_coefficients(const NetworkRealization& r, const FilterBank& t) {
    const int K = r.num_users();
    SinrCoefficients c;
    c.alpha.resize(K);
    c.delta.resize(K);
    c.eta = Eigen::MatrixXd::Zero(K, K);
    c.chi.resize(K, K);
    for (int k = 0; k < K; ++k) {
        const Eigen::VectorXd tk = t.filter(k);
        const Eigen::ArrayXd t2 = tk.array().square();
        const double a = r.xi.col(k).dot(tk);
        c.alpha(k) = r.rho * a * a;
        c.delta(k) = (t2 * r.xi.col(k).array()).sum();
        for (int kp = 0; kp < K; ++kp) {
            c.chi(k, kp) = r.rho * (t2 * r.xi.col(k).array() * r.beta.col(kp).array()).sum();
            if (kp != k && r.pilot_gram(k, kp) != 0.0) {
                const double ts = tk.dot(contamination_vector(r, k, kp));
                c.eta(k, kp) = r.rho * ts * ts;
            }
        }
    }
    return c;
}

inline Eigen::VectorXd sinr_from_coefficients(const SinrCoefficients& c, const PowerVector& p) {
    const int K = c.num_users();
    if (p.size() != K) throw std::invalid_argument("sinr_from_coefficients: power vector length must equal K");
    Eigen::VectorXd sinr(K);
    for (int k = 0; k < K; ++k) sinr(k) = c.alpha(k) * p(k) / c.interference(p, k);
    return sinr;
}

/// Fraction of each coherence interval carrying uplink data.
inline double net_rate_factor(int tau, int tau_c) {
    return (1.0 - static_cast<double>(tau) / static_cast<double>(tau_c)) / 2.0;
}

struct Rates {
    Eigen::VectorXd rate;     // log2(1 + SINR), bit/s/Hz
    Eigen::VectorXd net_rate; // after training and downlink overhead
};

inline Rates rates(const Eigen::VectorXd& sinr, int tau, int tau_c) {
    if ((sinr.array() < 0.0).any()) throw std::invalid_argument("rates: SINR must be non-negative");
    Rates out;
    out.rate = sinr.array().log1p() / std::log(2.0);
    out.net_rate = net_rate_factor(tau, tau_c) * out.rate;
    return out;
}

} // namespace cfmimo
