// SPDX-License-Identifier: Apache-2.0
//
// cfmimo-pf: experiment runner, summarizer and self-validation for uplink
// power control in cell-free massive MIMO.

#include <cfmimo/cfmimo.hpp>

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace fs = std::filesystem;
using namespace cfmimo;

namespace {

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) {
        auto b = item.find_first_not_of(" \t");
        auto e = item.find_last_not_of(" \t");
        if (b != std::string::npos) out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

std::vector<Scheme> parse_schemes(const std::vector<std::string>& names) {
    std::vector<Scheme> out;
    for (const auto& n : names)
        for (const auto& part : split_list(n)) out.push_back(parse_scheme(part));
    if (out.empty()) throw std::invalid_argument("no objective given");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    if (v == "1" || v == "true" || v == "yes" || v == "on") return true;
    if (v == "0" || v == "false" || v == "no" || v == "off") return false;
    throw std::invalid_argument("config key '" + key + "': expected a boolean, got '" + v + "'");
}

// Every flag of `run` that is not a SimConfig field.
struct RunOptions {
    std::optional<std::string> config;
    std::vector<int> m;
    std::optional<int> k, tau, tau_c, realizations, threads, max_iters, max_outer_iters;
    std::optional<std::uint64_t> seed;
    std::optional<double> area_side, d1, d0, carrier_mhz, ap_height, user_height, bandwidth_hz,
        noise_figure_db, noise_temp_k, shadow_std_db, pilot_power_w, data_power_w;
    std::optional<double> gp_step, armijo_sigma, armijo_backtrack, tol;
    std::vector<std::string> objective;
    std::optional<std::string> out;
    bool full = false;
    bool emit_trace = false;
    bool timing = false;
    bool dump_realizations = false;
};

struct ResolvedRun {
    ExperimentConfig exp;
    std::vector<int> m_values;
    std::string out;
};

// defaults < --full preset < config file < explicit flags
ResolvedRun resolve(const RunOptions& o, bool full_from_cli) {
    ResolvedRun r;
    r.exp.threads = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
    r.m_values = {r.exp.sim.num_aps};
    r.out = "out";

    ConfigMap file;
    if (o.config) file = load_config_file(*o.config);

    bool full = full_from_cli;
    if (auto it = file.find("full"); it != file.end() && !full_from_cli) full = parse_bool("full", it->second);
    if (full) {
        r.exp.sim.num_users = 20;
        r.exp.sim.tau = 10;
        r.exp.realizations = 200;
        r.m_values = {40, 80, 120, 160, 200};
    }

    if (!file.empty()) {
        static const std::set<std::string> tool_keys{"config", "realizations", "objective", "out", "full",
                                                     "emit-trace", "threads", "timing", "dump-realizations",
                                                     "gp-step", "armijo-sigma", "armijo-backtrack", "tol",
                                                     "max-iters", "max-outer-iters", "m"};
        static const std::set<std::string> sim_keys{
            "k", "tau", "tau-c", "area-side", "d1", "d0", "carrier-mhz", "ap-height", "user-height",
            "bandwidth-hz", "noise-figure-db", "noise-temp-k", "shadow-std-db", "pilot-power-w",
            "data-power-w", "seed"};
        for (const auto& [key, value] : file)
            if (!tool_keys.contains(key) && !sim_keys.contains(key))
                throw std::invalid_argument("unknown config key '" + key + "'");
        ConfigMap sim_only;
        for (const auto& [key, value] : file)
            if (sim_keys.contains(key)) sim_only[key] = value;
        apply_config(sim_only, r.exp.sim);
        auto get = [&](const char* key) -> const std::string* {
            auto it = file.find(key);
            return it == file.end() ? nullptr : &it->second;
        };
        if (auto v = get("m")) {
            r.m_values.clear();
            for (const auto& s : split_list(*v)) r.m_values.push_back(std::stoi(s));
        }
        if (auto v = get("realizations")) r.exp.realizations = std::stoi(*v);
        if (auto v = get("objective")) r.exp.schemes = parse_schemes({*v});
        if (auto v = get("out")) r.out = *v;
        if (auto v = get("threads")) r.exp.threads = std::stoi(*v);
        if (auto v = get("emit-trace")) r.exp.emit_trace = parse_bool("emit-trace", *v);
        if (auto v = get("timing")) r.exp.record_timing = parse_bool("timing", *v);
        if (auto v = get("dump-realizations")) r.exp.dump_realizations = parse_bool("dump-realizations", *v);
        if (auto v = get("gp-step")) r.exp.optimizer.gp.step_size = std::stod(*v);
        if (auto v = get("armijo-sigma")) r.exp.optimizer.gp.armijo_sigma = std::stod(*v);
        if (auto v = get("armijo-backtrack")) r.exp.optimizer.gp.armijo_backtrack = std::stod(*v);
        if (auto v = get("tol")) r.exp.optimizer.gp.tol = std::stod(*v);
        if (auto v = get("max-iters")) r.exp.optimizer.gp.max_iters = std::stoi(*v);
        if (auto v = get("max-outer-iters")) r.exp.optimizer.max_outer_iters = std::stoi(*v);
    }

    auto& sim = r.exp.sim;
    if (!o.m.empty()) r.m_values = o.m;
    if (o.k) sim.num_users = *o.k;
    if (o.tau) sim.tau = *o.tau;
    if (o.tau_c) sim.tau_c = *o.tau_c;
    if (o.seed) sim.master_seed = *o.seed;
    if (o.area_side) sim.area_side_m = *o.area_side;
    if (o.d1) sim.d1_m = *o.d1;
    if (o.d0) sim.d0_m = *o.d0;
    if (o.carrier_mhz) sim.carrier_mhz = *o.carrier_mhz;
    if (o.ap_height) sim.ap_height_m = *o.ap_height;
    if (o.user_height) sim.user_height_m = *o.user_height;
    if (o.bandwidth_hz) sim.bandwidth_hz = *o.bandwidth_hz;
    if (o.noise_figure_db) sim.noise_figure_db = *o.noise_figure_db;
    if (o.noise_temp_k) sim.noise_temp_k = *o.noise_temp_k;
    if (o.shadow_std_db) sim.shadow_std_db = *o.shadow_std_db;
    if (o.pilot_power_w) sim.pilot_power_w = *o.pilot_power_w;
    if (o.data_power_w) sim.data_power_w = *o.data_power_w;
    if (o.realizations) r.exp.realizations = *o.realizations;
    if (o.threads) r.exp.threads = *o.threads;
    if (!o.objective.empty()) r.exp.schemes = parse_schemes(o.objective);
    if (o.out) r.out = *o.out;
    if (o.emit_trace) r.exp.emit_trace = true;
    if (o.timing) r.exp.record_timing = true;
    if (o.dump_realizations) r.exp.dump_realizations = true;
    auto& gp = r.exp.optimizer.gp;
    if (o.gp_step) gp.step_size = *o.gp_step;
    if (o.armijo_sigma) gp.armijo_sigma = *o.armijo_sigma;
    if (o.armijo_backtrack) gp.armijo_backtrack = *o.armijo_backtrack;
    if (o.tol) gp.tol = *o.tol;
    if (o.max_iters) gp.max_iters = *o.max_iters;
    if (o.max_outer_iters) r.exp.optimizer.max_outer_iters = *o.max_outer_iters;

    gp.validate();
    if (r.m_values.empty()) throw std::invalid_argument("no AP count given");
    for (int m : r.m_values) {
        SimConfig probe = sim;
        probe.num_aps = m;
        probe.validate();
    }
    return r;
}

int do_run(const RunOptions& o, bool full_from_cli) {
    ResolvedRun r = resolve(o, full_from_cli);
    const bool multi = r.m_values.size() > 1;
    for (int m : r.m_values) {
        ExperimentConfig exp = r.exp;
        exp.sim.num_aps = m;
        const fs::path dir = multi ? fs::path(r.out) / ("m" + std::to_string(m)) : fs::path(r.out);
        std::cerr << "M=" << m << " K=" << exp.sim.num_users << " tau=" << exp.sim.tau << " tau_c="
                  << exp.sim.tau_c << " realizations=" << exp.realizations << " threads=" << exp.threads
                  << " -> " << dir.string() << '\n';
        const auto reports = run_experiment(exp, dir);
        int not_converged = 0;
        for (const auto& rep : reports) not_converged += rep.converged ? 0 : 1;
        if (not_converged > 0)
            std::cerr << "  " << not_converged << " of " << reports.size() << " solves hit the iteration cap\n";
    }
    return 0;
}

int do_summarize(const std::string& in_dir) {
    const fs::path dir(in_dir);
    std::ifstream reports(dir / "reports.csv");
    if (!reports) throw std::runtime_error("cannot open " + (dir / "reports.csv").string());
    std::ifstream users(dir / "user_rates.csv");
    const Summary s = summarize(reports, users ? &users : nullptr);

    std::cout << std::left << std::setw(8) << "scheme" << std::right << std::setw(6) << "n" << std::setw(18)
              << "sum rate" << std::setw(18) << "min rate" << std::setw(18) << "max rate" << std::setw(18)
              << "jain" << std::setw(10) << "median" << std::setw(10) << "iqr" << '\n';
    std::cout << std::fixed << std::setprecision(4);
    for (const auto& r : s.schemes) {
        auto pm = [](const MeanAndError& x) {
            std::ostringstream o;
            o << std::fixed << std::setprecision(4) << x.mean << " +- " << x.std_err;
            return o.str();
        };
        std::cout << std::left << std::setw(8) << r.objective << std::right << std::setw(6) << r.realizations
                  << std::setw(18) << pm(r.sum_rate) << std::setw(18) << pm(r.min_rate) << std::setw(18)
                  << pm(r.max_rate) << std::setw(18) << pm(r.jain) << std::setw(10) << r.median_user_rate
                  << std::setw(10) << r.iqr_user_rate << '\n';
    }
    std::ofstream sum_os(dir / "summary.csv");
    std::ofstream cdf_os(dir / "cdf.csv");
    if (!sum_os || !cdf_os) throw std::runtime_error("cannot write summary files in " + dir.string());
    sum_os << std::setprecision(12);
    cdf_os << std::setprecision(12);
    write_summary_csv(sum_os, s);
    write_cdf_csv(cdf_os, s);
    return 0;
}

int do_validate(long draws, int trials, std::uint64_t seed) {
    SimConfig mc_cfg;
    mc_cfg.num_aps = 20;
    mc_cfg.num_users = 4;
    mc_cfg.tau = 4;
    mc_cfg.master_seed = seed;
    SimConfig grad_cfg;
    grad_cfg.num_aps = 16;
    grad_cfg.num_users = 8;
    grad_cfg.tau = 4;
    grad_cfg.master_seed = seed;

    std::vector<CheckResult> checks;
    checks.push_back(check_gradient(grad_cfg, 10, 100, seed));
    checks.push_back(check_filter_eigensolver(100, 16, seed));
    checks.push_back(check_monte_carlo(mc_cfg, trials, draws, seed));
    bool ok = true;
    for (const auto& c : checks) {
        std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  worst=" << std::setprecision(4) << c.worst
                  << " threshold=" << c.threshold << '\n';
        ok = ok && c.passed;
    }
    return ok ? 0 : 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Uplink power control and receive filtering for cell-free massive MIMO"};
    app.name("cfmimo-pf");
    app.require_subcommand(1);

    RunOptions ro;
    auto* run = app.add_subcommand("run", "Run a seeded Monte Carlo experiment and write CSV reports");
    run->add_option("--config", ro.config, "key = value file; explicit flags override it")->check(CLI::ExistingFile);
    run->add_option("--m", ro.m, "Number of APs (comma list sweeps into DIR/m<M>/)")->delimiter(',');
    run->add_option("--k", ro.k, "Number of users");
    run->add_option("--tau", ro.tau, "Pilot length");
    run->add_option("--tau-c", ro.tau_c, "Coherence interval length");
    run->add_option("--realizations", ro.realizations, "Number of network realizations");
    run->add_option("--objective", ro.objective, "Comma list of pf, srm, maxmin")->delimiter(',');
    run->add_option("--seed", ro.seed, "Master seed");
    run->add_option("--out", ro.out, "Output directory");
    auto* full_flag = run->add_flag("--full", ro.full, "Full-scale preset: K=20, tau=10, M in 40..200, 200 realizations");
    run->add_flag("--emit-trace", ro.emit_trace, "Also write trace.csv");
    run->add_flag("--timing", ro.timing, "Record wall-clock time per solve (output no longer reproducible)");
    run->add_flag("--dump-realizations", ro.dump_realizations, "Write beta/xi tables per realization");
    run->add_option("--threads", ro.threads, "Worker threads")->check(CLI::PositiveNumber);
    run->add_option("--gp-step", ro.gp_step, "Gradient step size");
    run->add_option("--armijo-sigma", ro.armijo_sigma, "Armijo sufficient-increase constant");
    run->add_option("--armijo-backtrack", ro.armijo_backtrack, "Armijo backtracking factor");
    run->add_option("--tol", ro.tol, "Relative tolerance of inner and outer loops");
    run->add_option("--max-iters", ro.max_iters, "Gradient-projection iteration cap");
    run->add_option("--max-outer-iters", ro.max_outer_iters, "Alternation iteration cap");
    auto* phys = run->add_option_group("physical", "Physical parameters");
    phys->add_option("--area-side", ro.area_side, "Square side D in meters");
    phys->add_option("--d1", ro.d1, "Path-loss breakpoint d1 in meters");
    phys->add_option("--d0", ro.d0, "Path-loss breakpoint d0 in meters");
    phys->add_option("--carrier-mhz", ro.carrier_mhz, "Carrier frequency in MHz");
    phys->add_option("--ap-height", ro.ap_height, "AP antenna height in meters");
    phys->add_option("--user-height", ro.user_height, "User antenna height in meters");
    phys->add_option("--bandwidth-hz", ro.bandwidth_hz, "Bandwidth in Hz");
    phys->add_option("--noise-figure-db", ro.noise_figure_db, "Noise figure in dB");
    phys->add_option("--noise-temp-k", ro.noise_temp_k, "Noise temperature in K");
    phys->add_option("--shadow-std-db", ro.shadow_std_db, "Shadowing standard deviation in dB");
    phys->add_option("--pilot-power-w", ro.pilot_power_w, "Pilot transmit power in W");
    phys->add_option("--data-power-w", ro.data_power_w, "Data transmit power in W");

    std::string in_dir;
    auto* summ = app.add_subcommand("summarize", "Aggregate a run directory into summary.csv and cdf.csv");
    summ->add_option("--in", in_dir, "Run directory")->required()->check(CLI::ExistingDirectory);

    long draws = 100000;
    int trials = 5;
    std::uint64_t vseed = 7;
    auto* val = app.add_subcommand("validate", "Run the built-in numerical oracles");
    val->add_option("--draws", draws, "Monte Carlo draws per trial");
    val->add_option("--trials", trials, "Random (t, p) pairs for the Monte Carlo check");
    val->add_option("--seed", vseed, "Seed");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*run) return do_run(ro, full_flag->count() > 0);
        if (*summ) return do_summarize(in_dir);
        if (*val) return do_validate(draws, trials, vseed);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 0;
}
