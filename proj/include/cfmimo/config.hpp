// SPDX-License-Identifier: Apache-2.0
//
// Simulation parameters and the flat key = value configuration format.

#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace cfmimo {

/// Physical and network parameters of one simulated deployment. Defaults are
/// the reference system parameters at desk scale (M=60, K=10, tau=5).
struct SimConfig {
    int num_aps = 60;            // M
    int num_users = 10;          // K
    int tau = 5;                 // pilot length, symbols
    int tau_c = 200;             // coherence interval, symbols
    double area_side_m = 1000.0; // D
    double d1_m = 50.0;
    double d0_m = 10.0;
    double carrier_mhz = 1900.0;
    double ap_height_m = 15.0;
    double user_height_m = 1.65;
    double bandwidth_hz = 20e6;
    double noise_figure_db = 9.0;
    double noise_temp_k = 290.0;
    double shadow_std_db = 8.0;
    double pilot_power_w = 0.2;
    double data_power_w = 0.2;
    std::uint64_t master_seed = 42;

    /// Throws std::invalid_argument naming the first violated constraint.
    void validate() const {
        auto require = [](bool ok, const char* what) {
            if (!ok) throw std::invalid_argument(std::string("invalid config: ") + what);
        };
        require(num_aps >= 1, "M must be >= 1");
        require(num_users >= 1, "K must be >= 1");
        require(tau >= 1, "tau must be >= 1");
        require(tau <= tau_c, "tau must not exceed tau_c");
        require(d0_m > 0.0, "d0 must be positive");
        require(d0_m < d1_m, "d0 must be below d1");
        require(d1_m < area_side_m, "d1 must be below the area side");
        require(carrier_mhz > 0.0, "carrier frequency must be positive");
        require(ap_height_m > 0.0 && user_height_m > 0.0, "antenna heights must be positive");
        require(bandwidth_hz > 0.0, "bandwidth must be positive");
        require(noise_temp_k > 0.0, "noise temperature must be positive");
        require(shadow_std_db >= 0.0, "shadowing std must be non-negative");
        require(pilot_power_w > 0.0 && data_power_w > 0.0, "powers must be positive");
    }
};

/// Parsed `key = value` pairs. Keys are normalized to lower case with '_'
/// folded into '-', so `tau_c` and `tau-c` name the same entry. Section
/// headers (`[gp]`) only group lines; they do not namespace keys.
using ConfigMap = std::map<std::string, std::string>;

inline std::string normalize_key(std::string_view key) {
    std::string out;
    out.reserve(key.size());
    for (char c : key) {
        out.push_back(c == '_' ? '-' : static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

} // namespace detail

inline ConfigMap parse_config_text(std::string_view text) {
    ConfigMap out;
    std::istringstream in{std::string(text)};
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
        ++line_no;
        std::string_view line = raw;
        if (auto pos = line.find_first_of("#;"); pos != std::string_view::npos) line = line.substr(0, pos);
        line = detail::trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw std::invalid_argument("config line " + std::to_string(line_no) + ": unterminated section header");
            continue;
        }
        auto eq = line.find('=');
        if (eq == std::string_view::npos)
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected key = value");
        auto key = detail::trim(line.substr(0, eq));
        auto value = detail::trim(line.substr(eq + 1));
        if (key.empty())
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": empty key");
        out[normalize_key(key)] = std::string(value);
    }
    return out;
}

inline ConfigMap load_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

namespace detail {

template <class T>
T parse_value(const std::string& key, const std::string& text) {
    T value{};
    const char* first = text.data();
    const char* last = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(first, last, value);
    if (ec != std::errc{} || ptr != last)
        throw std::invalid_argument("config key '" + key + "': cannot parse '" + text + "'");
    return value;
}

} // namespace detail

/// Overwrites the SimConfig fields named in `map`; unknown keys are left for
/// other consumers. Returns the number of keys consumed.
inline int apply_config(const ConfigMap& map, SimConfig& cfg) {
    int used = 0;
    auto take = [&](const char* key, auto& field) {
        auto it = map.find(key);
        if (it == map.end()) return;
        field = detail::parse_value<std::remove_reference_t<decltype(field)>>(key, it->second);
        ++used;
    };
    take("m", cfg.num_aps);
    take("k", cfg.num_users);
    take("tau", cfg.tau);
    take("tau-c", cfg.tau_c);
    take("area-side", cfg.area_side_m);
    take("d1", cfg.d1_m);
    take("d0", cfg.d0_m);
    take("carrier-mhz", cfg.carrier_mhz);
    take("ap-height", cfg.ap_height_m);
    take("user-height", cfg.user_height_m);
    take("bandwidth-hz", cfg.bandwidth_hz);
    take("noise-figure-db", cfg.noise_figure_db);
    take("noise-temp-k", cfg.noise_temp_k);
    take("shadow-std-db", cfg.shadow_std_db);
    take("pilot-power-w", cfg.pilot_power_w);
    take("data-power-w", cfg.data_power_w);
    take("seed", cfg.master_seed);
    return used;
}

} // namespace cfmimo
