// SPDX-License-Identifier: Apache-2.0
//
// Network drops: AP/user geometry on a wrap-around square, three-slope path
// loss with log-normal shadowing, random pilot assignment and the MMSE
// estimation gains the optimizer runs on.

#pragma once

#include <cfmimo/config.hpp>
#include <cfmimo/rng.hpp>

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <ostream>
#include <random>
#include <stdexcept>
#include <vector>

namespace cfmimo {

inline constexpr double kBoltzmann = 1.381e-23; // J/K
inline constexpr double kMinDistanceM = 1.0;

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double x) { return 10.0 * std::log10(x); }

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct Geometry {
    std::vector<Point> ap_xy;   // meters
    std::vector<Point> user_xy; // meters
    Eigen::MatrixXd dist_km;    // M x K, wrap-around metric
};

/// Torus distance between two points of a side x side square, in meters,
/// clamped below at kMinDistanceM.
inline double wrap_distance_m(Point a, Point b, double side) {
    double dx = std::abs(a.x - b.x);
    double dy = std::abs(a.y - b.y);
    dx = std::min(dx, side - dx);
    dy = std::min(dy, side - dy);
    return std::max(std::hypot(dx, dy), kMinDistanceM);
}

inline Eigen::MatrixXd wrap_distances_km(const std::vector<Point>& aps,
                                         const std::vector<Point>& users, double side) {
    Eigen::MatrixXd d(static_cast<Eigen::Index>(aps.size()), static_cast<Eigen::Index>(users.size()));
    for (Eigen::Index m = 0; m < d.rows(); ++m)
        for (Eigen::Index k = 0; k < d.cols(); ++k)
            d(m, k) = wrap_distance_m(aps[m], users[k], side) / 1000.0;
    return d;
}

/// Uniform AP and user drop for one realization; deterministic in
/// (config.master_seed, realization_index).
inline Geometry generate_topology(const SimConfig& cfg, std::uint64_t realization_index) {
    cfg.validate();
    Rng rng = make_rng(cfg.master_seed, realization_index, StreamPurpose::geometry);
    std::uniform_real_distribution<double> coord(0.0, cfg.area_side_m);
    Geometry g;
    g.ap_xy.resize(static_cast<std::size_t>(cfg.num_aps));
    g.user_xy.resize(static_cast<std::size_t>(cfg.num_users));
    for (auto& p : g.ap_xy) {
        p.x = coord(rng);
        p.y = coord(rng);
    }
    for (auto& p : g.user_xy) {
        p.x = coord(rng);
        p.y = coord(rng);
    }
    g.dist_km = wrap_distances_km(g.ap_xy, g.user_xy, cfg.area_side_m);
    return g;
}

/// Hata-style constant L of the three-slope model (carrier in MHz, heights in m).
inline double path_loss_constant_db(const SimConfig& cfg) {
    const double lf = std::log10(cfg.carrier_mhz);
    return 46.3 + 33.9 * lf - 13.82 * std::log10(cfg.ap_height_m)
           - (1.1 * lf - 0.7) * cfg.user_height_m + (1.56 * lf - 0.8);
}

/// Three-slope path loss in dB, signed so that 10^(PL/10) is the channel
/// gain: slope 35 beyond d1, slope 20 between d0 and d1, flat below d0.
inline double path_loss_db(double d_km, const SimConfig& cfg) {
    const double L = path_loss_constant_db(cfg);
    const double d1 = cfg.d1_m / 1000.0;
    const double d0 = cfg.d0_m / 1000.0;
    if (d_km > d1) return -L - 35.0 * std::log10(d_km);
    if (d_km > d0) return -L - 15.0 * std::log10(d1) - 20.0 * std::log10(d_km);
    return -L - 15.0 * std::log10(d1) - 20.0 * std::log10(d0);
}

/// beta = 10^(PL/10) * 10^(sigma_sh * z / 10) for a given standard-normal
/// matrix z.
inline Eigen::MatrixXd large_scale_fading(const Eigen::MatrixXd& dist_km, const SimConfig& cfg,
                                          const Eigen::MatrixXd& z) {
    if (z.rows() != dist_km.rows() || z.cols() != dist_km.cols())
        throw std::invalid_argument("large_scale_fading: shadowing matrix shape mismatch");
    Eigen::MatrixXd beta(dist_km.rows(), dist_km.cols());
    for (Eigen::Index m = 0; m < beta.rows(); ++m)
        for (Eigen::Index k = 0; k < beta.cols(); ++k)
            beta(m, k) = db_to_linear(path_loss_db(dist_km(m, k), cfg))
                         * db_to_linear(cfg.shadow_std_db * z(m, k));
    return beta;
}

/// Draws uncorrelated shadowing and applies it at every distance.
inline Eigen::MatrixXd large_scale_fading(const Geometry& geo, const SimConfig& cfg, Rng& rng) {
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::MatrixXd z(geo.dist_km.rows(), geo.dist_km.cols());
    for (Eigen::Index m = 0; m < z.rows(); ++m)
        for (Eigen::Index k = 0; k < z.cols(); ++k) z(m, k) = normal(rng);
    return large_scale_fading(geo.dist_km, cfg, z);
}

struct NoiseAndSnr {
    double noise_w = 0.0; // rho_n
    double rho = 0.0;     // normalized data SNR
    double rho_p = 0.0;   // normalized pilot SNR
};

inline NoiseAndSnr noise_and_snr(const SimConfig& cfg) {
    NoiseAndSnr out;
    out.noise_w = cfg.bandwidth_hz * kBoltzmann * cfg.noise_temp_k * db_to_linear(cfg.noise_figure_db);
    out.rho = cfg.data_power_w / out.noise_w;
    out.rho_p = cfg.pilot_power_w / out.noise_w;
    return out;
}

/// Pilot assignment over the tau x tau identity basis.
struct PilotAssignment {
    std::vector<int> index;  // pilot index per user, in [0, tau)
    Eigen::MatrixXd gram;    // K x K, |phi_k^H phi_k'|^2, entries 0/1
};

inline Eigen::MatrixXd pilot_gram_from_indices(const std::vector<int>& index) {
    const auto K = static_cast<Eigen::Index>(index.size());
    Eigen::MatrixXd gram(K, K);
    for (Eigen::Index a = 0; a < K; ++a)
        for (Eigen::Index b = 0; b < K; ++b) gram(a, b) = index[a] == index[b] ? 1.0 : 0.0;
    return gram;
}

/// Each user draws a pilot index uniformly with replacement.
inline PilotAssignment assign_pilots(int num_users, int tau, Rng& rng) {
    if (tau < 1) throw std::invalid_argument("assign_pilots: tau must be >= 1");
    if (num_users < 1) throw std::invalid_argument("assign_pilots: K must be >= 1");
    std::uniform_int_distribution<int> pick(0, tau - 1);
    PilotAssignment out;
    out.index.resize(static_cast<std::size_t>(num_users));
    for (auto& i : out.index) i = pick(rng);
    out.gram = pilot_gram_from_indices(out.index);
    return out;
}

/// LMMSE combining weight vartheta of the decorrelated pilot observation.
inline Eigen::MatrixXd mmse_weight(const Eigen::MatrixXd& beta, const Eigen::MatrixXd& gram, int tau,
                                   double rho_p) {
    const double tp = tau * rho_p;
    Eigen::MatrixXd weight(beta.rows(), beta.cols());
    // received pilot power at AP m on user k's pilot: sum_k' beta_k'^m gram(k, k')
    const Eigen::MatrixXd contaminated = beta * gram;
    for (Eigen::Index m = 0; m < beta.rows(); ++m)
        for (Eigen::Index k = 0; k < beta.cols(); ++k)
            weight(m, k) = std::sqrt(tp) * beta(m, k) / (tp * contaminated(m, k) + 1.0);
    return weight;
}

/// Estimate variance xi = E|h_hat|^2 = sqrt(tau rho_p) vartheta beta.
inline Eigen::MatrixXd mmse_gain(const Eigen::MatrixXd& beta, const Eigen::MatrixXd& gram, int tau,
                                 double rho_p) {
    if ((beta.array() <= 0.0).any()) throw std::invalid_argument("mmse_gain: beta must be positive");
    if (gram.rows() != beta.cols() || gram.cols() != beta.cols())
        throw std::invalid_argument("mmse_gain: pilot gram must be K x K");
    const double tp = tau * rho_p;
    const Eigen::MatrixXd contaminated = beta * gram;
    Eigen::MatrixXd xi(beta.rows(), beta.cols());
    for (Eigen::Index m = 0; m < beta.rows(); ++m)
        for (Eigen::Index k = 0; k < beta.cols(); ++k)
            xi(m, k) = tp * beta(m, k) * beta(m, k) / (tp * contaminated(m, k) + 1.0);
    return xi;
}

/// Everything the optimizer needs about one network drop. Only channel
/// statistics are stored; instantaneous channels are never materialized here.
struct NetworkRealization {
    Eigen::MatrixXd beta;          // M x K
    Eigen::MatrixXd xi;            // M x K
    Eigen::MatrixXd pilot_gram;    // K x K
    std::vector<int> pilot_index;  // K
    double rho = 0.0;
    double rho_p = 0.0;
    int tau = 1;
    int tau_c = 1;

    int num_aps() const { return static_cast<int>(beta.rows()); }
    int num_users() const { return static_cast<int>(beta.cols()); }
};

/// Assembles a realization from given large-scale fading and pilots.
inline NetworkRealization make_realization(Eigen::MatrixXd beta, const std::vector<int>& pilot_index,
                                           double rho, double rho_p, int tau, int tau_c) {
    if (static_cast<Eigen::Index>(pilot_index.size()) != beta.cols())
        throw std::invalid_argument("make_realization: one pilot index per user required");
    for (int i : pilot_index)
        if (i < 0 || i >= tau) throw std::invalid_argument("make_realization: pilot index out of range");
    if (tau < 1 || tau > tau_c) throw std::invalid_argument("make_realization: need 1 <= tau <= tau_c");
    NetworkRealization r;
    r.pilot_index = pilot_index;
    r.pilot_gram = pilot_gram_from_indices(pilot_index);
    r.xi = mmse_gain(beta, r.pilot_gram, tau, rho_p);
    r.beta = std::move(beta);
    r.rho = rho;
    r.rho_p = rho_p;
    r.tau = tau;
    r.tau_c = tau_c;
    return r;
}

/// Full drop for realization `index`: geometry, shadowing and pilots each
/// come from their own substream of the master seed.
inline NetworkRealization generate_realization(const SimConfig& cfg, std::uint64_t index) {
    const Geometry geo = generate_topology(cfg, index);
    Rng shadow_rng = make_rng(cfg.master_seed, index, StreamPurpose::shadowing);
    Rng pilot_rng = make_rng(cfg.master_seed, index, StreamPurpose::pilots);
    Eigen::MatrixXd beta = large_scale_fading(geo, cfg, shadow_rng);
    const PilotAssignment pilots = assign_pilots(cfg.num_users, cfg.tau, pilot_rng);
    const NoiseAndSnr snr = noise_and_snr(cfg);
    return make_realization(std::move(beta), pilots.index, snr.rho, snr.rho_p, cfg.tau, cfg.tau_c);
}

/// Columnar text dump: one row per (AP, user) pair.
inline void write_realization_table(std::ostream& os, const NetworkRealization& r) {
    const auto flags = os.flags();
    const auto prec = os.precision();
    os << std::setprecision(12);
    os << "ap,user,pilot,beta,xi\n";
    for (int m = 0; m < r.num_aps(); ++m)
        for (int k = 0; k < r.num_users(); ++k)
            os << m << ',' << k << ',' << r.pilot_index[static_cast<std::size_t>(k)] << ','
               << r.beta(m, k) << ',' << r.xi(m, k) << '\n';
    os.flags(flags);
    os.precision(prec);
}

} // namespace cfmimo
