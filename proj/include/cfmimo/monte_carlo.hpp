// SPDX-License-Identifier: Apache-2.0
//
// Sample-based SINR of the statistics-aware CPU receiver, built from first
// principles: complex Rayleigh channels, pilot transmission with MMSE
// estimation at each AP, matched filtering and CPU combining. Used to check
// the closed-form SINR; the optimizer never calls this.

#pragma once

#include <cfmimo/channel_model.hpp>
#include <cfmimo/rng.hpp>
#include <cfmimo/sinr.hpp>

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>

namespace cfmimo {

struct MonteCarloSinrEstimate {
    Eigen::VectorXd mean_sinr;
    Eigen::VectorXd std_err;
    // per-user empirical signal and impairment powers
    Eigen::VectorXd desired;         // |DS_k|^2
    Eigen::VectorXd beam_uncertainty; // E|BU_k|^2
    Eigen::VectorXd interference;     // sum_k'!=k E|IUI_k^k'|^2
    Eigen::VectorXd noise;            // E|TN_k|^2
};

inline constexpr int kMonteCarloBatches = 50;
inline constexpr int kMinDrawsPerBatch = 2;

namespace detail {

// Running sums for one batch (or the pooled total).
struct McSums {
    Eigen::MatrixXcd gain_sum;   // (k, k') sum of sum_m t_k^m conj(hhat_k^m) h_k'^m
    Eigen::MatrixXd gain_sq_sum; // (k, k') sum of |...|^2
    Eigen::VectorXd noise_sq_sum;
    long draws = 0;

    explicit McSums(int K)
        : gain_sum(Eigen::MatrixXcd::Zero(K, K)), gain_sq_sum(Eigen::MatrixXd::Zero(K, K)),
          noise_sq_sum(Eigen::VectorXd::Zero(K)) {}

    void add(const McSums& o) {
        gain_sum += o.gain_sum;
        gain_sq_sum += o.gain_sq_sum;
        noise_sq_sum += o.noise_sq_sum;
        draws += o.draws;
    }
};

struct McComponents {
    Eigen::VectorXd ds, bu, iui, tn, sinr;
};

inline McComponents mc_components(const McSums& s, const NetworkRealization& r, const PowerVector& p) {
    const int K = r.num_users();
    const double n = static_cast<double>(s.draws);
    McComponents c{Eigen::VectorXd(K), Eigen::VectorXd(K), Eigen::VectorXd::Zero(K), Eigen::VectorXd(K),
                   Eigen::VectorXd(K)};
    for (int k = 0; k < K; ++k) {
        const std::complex<double> mean_gain = s.gain_sum(k, k) / n;
        c.ds(k) = r.rho * p(k) * std::norm(mean_gain);
        c.bu(k) = std::max(0.0, r.rho * p(k) * (s.gain_sq_sum(k, k) / n - std::norm(mean_gain)));
        for (int kp = 0; kp < K; ++kp)
            if (kp != k) c.iui(k) += r.rho * p(kp) * s.gain_sq_sum(k, kp) / n;
        c.tn(k) = s.noise_sq_sum(k) / n;
        c.sinr(k) = c.ds(k) / (c.bu(k) + c.iui(k) + c.tn(k));
    }
    return c;
}

} // namespace detail

/// SINR ratio of expectations estimated over `n_draws` independent channel,
/// pilot-noise and receiver-noise draws. Standard errors come from
/// kMonteCarloBatches equal batches.
inline MonteCarloSinrEstimate monte_carlo_sinr(const NetworkRealization& r, const FilterBank& t,
                                               const PowerVector& p, long n_draws, Rng& rng) {
    const int M = r.num_aps();
    const int K = r.num_users();
    if (n_draws < static_cast<long>(kMonteCarloBatches) * kMinDrawsPerBatch)
        throw std::invalid_argument("monte_carlo_sinr: need at least "
                                    + std::to_string(kMonteCarloBatches * kMinDrawsPerBatch)
                                    + " draws to form batches");
    if (t.num_aps() != M || t.num_users() != K || p.size() != K)
        throw std::invalid_argument("monte_carlo_sinr: dimension mismatch");

    const double tp = r.tau * r.rho_p;
    const double sqrt_tp = std::sqrt(tp);
    const Eigen::MatrixXd weight = mmse_weight(r.beta, r.pilot_gram, r.tau, r.rho_p);
    const Eigen::MatrixXd sqrt_beta = r.beta.cwiseSqrt();

    // CN(0, 1): real and imaginary parts each N(0, 1/2)
    std::normal_distribution<double> normal(0.0, std::sqrt(0.5));
    auto cn = [&] { return std::complex<double>(normal(rng), normal(rng)); };

    Eigen::MatrixXcd h(M, K);
    Eigen::MatrixXcd pilot_noise(M, r.tau);
    Eigen::MatrixXcd h_hat(M, K);
    Eigen::VectorXcd rx_noise(M);

    const long base = n_draws / kMonteCarloBatches;
    const long extra = n_draws % kMonteCarloBatches;
    detail::McSums total(K);
    Eigen::MatrixXd batch_sinr(kMonteCarloBatches, K);

    for (int b = 0; b < kMonteCarloBatches; ++b) {
        detail::McSums batch(K);
        const long draws = base + (b < extra ? 1 : 0);
        for (long d = 0; d < draws; ++d) {
            for (int k = 0; k < K; ++k)
                for (int m = 0; m < M; ++m) h(m, k) = sqrt_beta(m, k) * cn();
            for (int i = 0; i < r.tau; ++i)
                for (int m = 0; m < M; ++m) pilot_noise(m, i) = cn();
            for (int m = 0; m < M; ++m) rx_noise(m) = cn();

            // decorrelated pilot observation: sqrt(tau rho_p) sum_{k' on the
            // same pilot} h_k' + phi_k^H n_p, then the LMMSE weight
            for (int k = 0; k < K; ++k) {
                const int pk = r.pilot_index[static_cast<std::size_t>(k)];
                for (int m = 0; m < M; ++m) {
                    std::complex<double> obs = pilot_noise(m, pk);
                    for (int kp = 0; kp < K; ++kp)
                        if (r.pilot_index[static_cast<std::size_t>(kp)] == pk) obs += sqrt_tp * h(m, kp);
                    h_hat(m, k) = weight(m, k) * obs;
                }
            }

            for (int k = 0; k < K; ++k) {
                const auto tk = t.filter(k);
                // combiner seen by user k: t_k^m conj(hhat_k^m)
                Eigen::VectorXcd comb(M);
                for (int m = 0; m < M; ++m) comb(m) = tk(m) * std::conj(h_hat(m, k));
                for (int kp = 0; kp < K; ++kp) {
                    const std::complex<double> g = comb.transpose() * h.col(kp);
                    batch.gain_sum(k, kp) += g;
                    batch.gain_sq_sum(k, kp) += std::norm(g);
                }
                const std::complex<double> tn = comb.transpose() * rx_noise;
                batch.noise_sq_sum(k) += std::norm(tn);
            }
            ++batch.draws;
        }
        batch_sinr.row(b) = detail::mc_components(batch, r, p).sinr.transpose();
        total.add(batch);
    }

    const detail::McComponents pooled = detail::mc_components(total, r, p);
    MonteCarloSinrEstimate out;
    out.mean_sinr = pooled.sinr;
    out.desired = pooled.ds;
    out.beam_uncertainty = pooled.bu;
    out.interference = pooled.iui;
    out.noise = pooled.tn;
    out.std_err.resize(K);
    for (int k = 0; k < K; ++k) {
        const Eigen::VectorXd col = batch_sinr.col(k);
        const double mean = col.mean();
        const double var = (col.array() - mean).square().sum() / (kMonteCarloBatches - 1);
        out.std_err(k) = std::sqrt(var / kMonteCarloBatches);
    }
    return out;
}

} // namespace cfmimo
