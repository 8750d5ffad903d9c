// SPDX-License-Identifier: Apache-2.0
//
// Fairness and distribution statistics over user rates.

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cfmimo {

/// Jain's index (sum R)^2 / (K sum R^2); lies in [1/K, 1].
inline double jain_index(std::span<const double> rates) {
    if (rates.empty()) throw std::invalid_argument("jain_index: empty rate vector");
    double sum = 0.0;
    double sum_sq = 0.0;
    for (double r : rates) {
        if (r < 0.0) throw std::invalid_argument("jain_index: negative rate");
        sum += r;
        sum_sq += r * r;
    }
    if (!(sum_sq > 0.0)) throw std::domain_error("jain_index: all rates are zero");
    return sum * sum / (static_cast<double>(rates.size()) * sum_sq);
}

struct MeanAndError {
    double mean = 0.0;
    double std_err = 0.0; // sample standard deviation / sqrt(n); 0 for n = 1
};

inline MeanAndError mean_and_error(std::span<const double> xs) {
    if (xs.empty()) throw std::invalid_argument("mean_and_error: no samples");
    const double n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    if (xs.size() == 1) return {mean, 0.0};
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

/// Step CDF F(x) = P(R <= x).
inline double empirical_cdf(std::span<const double> samples, double x) {
    if (samples.empty()) throw std::invalid_argument("empirical_cdf: no samples");
    const auto below = std::count_if(samples.begin(), samples.end(), [x](double v) { return v <= x; });
    return static_cast<double>(below) / static_cast<double>(samples.size());
}

/// Sorted (value, F(value)) pairs; tied values share the cumulative fraction
/// of the last tie.
inline std::vector<std::pair<double, double>> cdf_table(std::vector<double> samples) {
    if (samples.empty()) throw std::invalid_argument("cdf_table: no samples");
    std::sort(samples.begin(), samples.end());
    const double n = static_cast<double>(samples.size());
    std::vector<std::pair<double, double>> out;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (i + 1 < samples.size() && samples[i + 1] == samples[i]) continue;
        out.emplace_back(samples[i], static_cast<double>(i + 1) / n);
    }
    return out;
}

/// Linear-interpolation quantile (type 7), q in [0, 1].
inline double quantile(std::vector<double> samples, double q) {
    if (samples.empty()) throw std::invalid_argument("quantile: no samples");
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("quantile: q must lie in [0, 1]");
    std::sort(samples.begin(), samples.end());
    const double pos = q * static_cast<double>(samples.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, samples.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return samples[lo] + frac * (samples[hi] - samples[lo]);
}

} // namespace cfmimo
