// SPDX-License-Identifier: Apache-2.0
//
// Per-user receive filter: maximize t^T N t / t^T D t over unit vectors.
// With N = c v v^T the top generalized eigenvector of (N, D) is D^{-1} v up
// to scale and the top eigenvalue is c v^T D^{-1} v, so one Cholesky
// factorization solves the problem exactly.

#pragma once

#include <cfmimo/sinr.hpp>

#include <Eigen/Dense>

#include <stdexcept>
#include <string>

namespace cfmimo {

class NotPositiveDefinite : public std::runtime_error {
public:
    explicit NotPositiveDefinite(int user)
        : std::runtime_error("denominator matrix of user " + std::to_string(user) + " is not positive definite"),
          user_(user) {}
    int user() const noexcept { return user_; }

private:
    int user_;
};

struct FilterSolution {
    Eigen::VectorXd t;     // unit norm
    double lambda_max = 0.0;
};

/// Flips v so its first nonzero entry is non-negative.
inline void normalize_sign(Eigen::VectorXd& v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (v(i) != 0.0) {
            if (v(i) < 0.0) v = -v;
            return;
        }
    }
}

/// Zero numerator scale (p_k = 0) still yields the D^{-1} v direction, with
/// lambda_max = 0.
inline FilterSolution optimal_filter(const RankOneForm& numerator, const Eigen::MatrixXd& denominator,
                                     int user = 0) {
    if (denominator.rows() != denominator.cols() || denominator.rows() != numerator.v.size())
        throw std::invalid_argument("optimal_filter: dimension mismatch");
    Eigen::LLT<Eigen::MatrixXd> llt(denominator);
    if (llt.info() != Eigen::Success) throw NotPositiveDefinite(user);
    Eigen::VectorXd w = llt.solve(numerator.v);
    const double n = w.norm();
    if (!(n > 0.0)) throw std::invalid_argument("optimal_filter: numerator vector of user " + std::to_string(user) + " is zero");
    FilterSolution out;
    out.lambda_max = numerator.scale * numerator.v.dot(w);
    out.t = w / n;
    normalize_sign(out.t);
    return out;
}

/// Dense-numerator entry point. N must be symmetric PSD with rank <= 1; its
/// factor is recovered from the column with the largest diagonal entry.
inline FilterSolution optimal_filter(const Eigen::MatrixXd& numerator, const Eigen::MatrixXd& denominator,
                                     int user = 0) {
    Eigen::Index j = 0;
    const double peak = numerator.diagonal().maxCoeff(&j);
    if (!(peak > 0.0))
        throw std::invalid_argument("optimal_filter: dense numerator is zero; pass the rank-one factor instead");
    RankOneForm f{numerator.col(j) / std::sqrt(peak), 1.0};
    return optimal_filter(f, denominator, user);
}

/// Optimal filters for all users at fixed powers. The K problems decouple.
inline FilterBank optimal_filters(const NetworkRealization& r, const PowerVector& p) {
    const QuadraticForms forms = build_forms(r, p);
    Eigen::MatrixXd t(r.num_aps(), r.num_users());
    for (int k = 0; k < r.num_users(); ++k)
        t.col(k) = optimal_filter(forms.numerator[k], forms.denominator[k], k).t;
    return FilterBank(std::move(t));
}

} // namespace cfmimo
