// SPDX-License-Identifier: Apache-2.0
//
// Seeded Monte Carlo experiment runner and CSV reporting.
//
// Output files (12 significant digits):
//   reports.csv     realization_id,objective,sum_net_rate,min_net_rate,max_net_rate,jain,outer_iters,converged,wall_time_s
//   user_rates.csv  realization_id,objective,user_id,net_rate
//   trace.csv       realization_id,objective,outer_iter,objective_value   (only with emit_trace)
//
// Rows are ordered by realization id, then by the order of the requested
// schemes, so output bytes do not depend on the worker count.

#pragma once

#include <cfmimo/channel_model.hpp>
#include <cfmimo/config.hpp>
#include <cfmimo/metrics.hpp>
#include <cfmimo/optimizer.hpp>

#include <atomic>
#include <chrono>
#include <cstdint>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace cfmimo {

struct RateReport {
    std::uint64_t realization_id = 0;
    Scheme scheme = Scheme::pf;
    std::vector<double> net_rates;
    double sum_net_rate = 0.0;
    double min_net_rate = 0.0;
    double max_net_rate = 0.0;
    double jain = 0.0;
    int outer_iters = 0;
    bool converged = false;
    double wall_time_s = 0.0;
    std::vector<double> objective_trace;
};

inline RateReport make_report(std::uint64_t id, Scheme scheme, const SolveResult& res, double wall_time_s) {
    RateReport rep;
    rep.realization_id = id;
    rep.scheme = scheme;
    rep.net_rates.assign(res.net_rates.data(), res.net_rates.data() + res.net_rates.size());
    rep.sum_net_rate = res.net_rates.sum();
    rep.min_net_rate = res.net_rates.minCoeff();
    rep.max_net_rate = res.net_rates.maxCoeff();
    rep.jain = jain_index(rep.net_rates);
    rep.outer_iters = res.outer_iters;
    rep.converged = res.converged;
    rep.wall_time_s = wall_time_s;
    rep.objective_trace = res.objective_trace;
    return rep;
}

struct ExperimentConfig {
    SimConfig sim;
    std::vector<Scheme> schemes{Scheme::pf, Scheme::srm, Scheme::maxmin};
    int realizations = 50;
    OptimizerSettings optimizer;
    int threads = 1;
    bool emit_trace = false;
    bool record_timing = false;     // wall-clock column is 0 unless set
    bool dump_realizations = false; // realizations/realization_<id>.csv
};

/// Solves every (realization, scheme) pair on a pool of `cfg.threads`
/// workers. Each worker owns a realization end to end; results come back
/// ordered by realization id, then scheme.
inline std::vector<RateReport> run_realizations(const ExperimentConfig& cfg,
                                                const std::filesystem::path& dump_dir = {}) {
    cfg.sim.validate();
    if (cfg.realizations < 1) throw std::invalid_argument("run_realizations: need at least one realization");
    if (cfg.schemes.empty()) throw std::invalid_argument("run_realizations: no objective selected");
    const std::size_t n = static_cast<std::size_t>(cfg.realizations);
    const std::size_t per = cfg.schemes.size();
    std::vector<RateReport> out(n * per);
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;

    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                const NetworkRealization real = generate_realization(cfg.sim, i);
                if (cfg.dump_realizations && !dump_dir.empty()) {
                    std::ofstream os(dump_dir / ("realization_" + std::to_string(i) + ".csv"));
                    if (!os) throw std::runtime_error("cannot write realization dump in " + dump_dir.string());
                    write_realization_table(os, real);
                }
                for (std::size_t s = 0; s < per; ++s) {
                    const auto start = std::chrono::steady_clock::now();
                    const SolveResult res = solve(real, cfg.schemes[s], cfg.optimizer);
                    const double secs =
                        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                    out[i * per + s] = make_report(i, cfg.schemes[s], res, cfg.record_timing ? secs : 0.0);
                }
            } catch (...) {
                std::lock_guard lock(failure_mutex);
                if (!failure) failure = std::current_exception();
                next.store(n);
                return;
            }
        }
    };

    const int threads = std::max(1, std::min<int>(cfg.threads, cfg.realizations));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(static_cast<std::size_t>(threads));
        for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

namespace detail {

inline std::ofstream open_csv(const std::filesystem::path& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write " + path.string());
    os << std::setprecision(12);
    return os;
}

} // namespace detail

inline void write_reports_csv(std::ostream& os, const std::vector<RateReport>& reports) {
    os << "realization_id,objective,sum_net_rate,min_net_rate,max_net_rate,jain,outer_iters,converged,wall_time_s\n";
    for (const auto& r : reports)
        os << r.realization_id << ',' << to_string(r.scheme) << ',' << r.sum_net_rate << ',' << r.min_net_rate
           << ',' << r.max_net_rate << ',' << r.jain << ',' << r.outer_iters << ',' << (r.converged ? 1 : 0)
           << ',' << r.wall_time_s << '\n';
}

inline void write_user_rates_csv(std::ostream& os, const std::vector<RateReport>& reports) {
    os << "realization_id,objective,user_id,net_rate\n";
    for (const auto& r : reports)
        for (std::size_t k = 0; k < r.net_rates.size(); ++k)
            os << r.realization_id << ',' << to_string(r.scheme) << ',' << k << ',' << r.net_rates[k] << '\n';
}

inline void write_trace_csv(std::ostream& os, const std::vector<RateReport>& reports) {
    os << "realization_id,objective,outer_iter,objective_value\n";
    for (const auto& r : reports)
        for (std::size_t it = 0; it < r.objective_trace.size(); ++it)
            os << r.realization_id << ',' << to_string(r.scheme) << ',' << it << ',' << r.objective_trace[it]
               << '\n';
}

/// Runs the experiment and writes the CSV files into `out_dir`.
inline std::vector<RateReport> run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory " + out_dir.string() + ": " + ec.message());
    std::filesystem::path dump_dir;
    if (cfg.dump_realizations) {
        dump_dir = out_dir / "realizations";
        std::filesystem::create_directories(dump_dir, ec);
        if (ec) throw std::runtime_error("cannot create " + dump_dir.string() + ": " + ec.message());
    }
    // open every file before the long computation so a bad path fails fast
    auto reports_os = detail::open_csv(out_dir / "reports.csv");
    auto users_os = detail::open_csv(out_dir / "user_rates.csv");
    std::ofstream trace_os;
    if (cfg.emit_trace) trace_os = detail::open_csv(out_dir / "trace.csv");

    const std::vector<RateReport> reports = run_realizations(cfg, dump_dir);
    write_reports_csv(reports_os, reports);
    write_user_rates_csv(users_os, reports);
    if (cfg.emit_trace) write_trace_csv(trace_os, reports);
    if (!reports_os || !users_os || (cfg.emit_trace && !trace_os))
        throw std::runtime_error("write error in " + out_dir.string());
    return reports;
}

// ---------------------------------------------------------------------------
// summaries

struct SchemeSummary {
    std::string objective;
    std::size_t realizations = 0;
    MeanAndError sum_rate, min_rate, max_rate, jain;
    double median_user_rate = 0.0;
    double iqr_user_rate = 0.0;
    double converged_fraction = 0.0;
};

struct Summary {
    std::vector<SchemeSummary> schemes;
    // objective -> sorted (net_rate, F) rows
    std::map<std::string, std::vector<std::pair<double, double>>> cdf;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream in(line);
    while (std::getline(in, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.emplace_back();
    return cells;
}

inline std::vector<std::vector<std::string>> read_csv(std::istream& is, const std::string& expected_header,
                                                      const std::string& name) {
    std::string line;
    if (!std::getline(is, line)) throw std::runtime_error(name + ": empty input");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != expected_header) throw std::runtime_error(name + ": unexpected header '" + line + "'");
    const std::size_t width = split_csv_line(expected_header).size();
    std::vector<std::vector<std::string>> rows;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        auto cells = split_csv_line(line);
        if (cells.size() != width) throw std::runtime_error(name + ": malformed row '" + line + "'");
        rows.push_back(std::move(cells));
    }
    return rows;
}

inline double to_double(const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::runtime_error("bad number '" + s + "'");
    return v;
}

} // namespace detail

inline constexpr const char* kReportsHeader =
    "realization_id,objective,sum_net_rate,min_net_rate,max_net_rate,jain,outer_iters,converged,wall_time_s";
inline constexpr const char* kUserRatesHeader = "realization_id,objective,user_id,net_rate";

/// Per-objective means and standard errors plus per-objective user-rate
/// CDFs. `user_rates` may be null, in which case no CDF is built.
inline Summary summarize(std::istream& reports, std::istream* user_rates = nullptr) {
    const auto rows = detail::read_csv(reports, kReportsHeader, "reports.csv");
    if (rows.empty()) throw std::runtime_error("reports.csv: no data rows");

    std::vector<std::string> order;
    std::map<std::string, std::vector<const std::vector<std::string>*>> by_obj;
    for (const auto& row : rows) {
        if (!by_obj.contains(row[1])) order.push_back(row[1]);
        by_obj[row[1]].push_back(&row);
    }

    std::map<std::string, std::vector<double>> user_rates_by_obj;
    if (user_rates) {
        for (const auto& row : detail::read_csv(*user_rates, kUserRatesHeader, "user_rates.csv"))
            user_rates_by_obj[row[1]].push_back(detail::to_double(row[3]));
    }

    Summary out;
    for (const auto& obj : order) {
        const auto& group = by_obj[obj];
        std::vector<double> sum, mn, mx, jain;
        double conv = 0.0;
        for (const auto* row : group) {
            sum.push_back(detail::to_double((*row)[2]));
            mn.push_back(detail::to_double((*row)[3]));
            mx.push_back(detail::to_double((*row)[4]));
            jain.push_back(detail::to_double((*row)[5]));
            conv += (*row)[7] == "1" ? 1.0 : 0.0;
        }
        SchemeSummary s;
        s.objective = obj;
        s.realizations = group.size();
        s.sum_rate = mean_and_error(sum);
        s.min_rate = mean_and_error(mn);
        s.max_rate = mean_and_error(mx);
        s.jain = mean_and_error(jain);
        s.converged_fraction = conv / static_cast<double>(group.size());
        if (auto it = user_rates_by_obj.find(obj); it != user_rates_by_obj.end() && !it->second.empty()) {
            s.median_user_rate = quantile(it->second, 0.5);
            s.iqr_user_rate = quantile(it->second, 0.75) - quantile(it->second, 0.25);
            out.cdf[obj] = cdf_table(it->second);
        }
        out.schemes.push_back(std::move(s));
    }
    return out;
}

inline void write_summary_csv(std::ostream& os, const Summary& s) {
    os << "objective,realizations,sum_net_rate_mean,sum_net_rate_se,min_net_rate_mean,min_net_rate_se,"
          "max_net_rate_mean,max_net_rate_se,jain_mean,jain_se,median_user_rate,iqr_user_rate,converged_fraction\n";
    for (const auto& r : s.schemes)
        os << r.objective << ',' << r.realizations << ',' << r.sum_rate.mean << ',' << r.sum_rate.std_err << ','
           << r.min_rate.mean << ',' << r.min_rate.std_err << ',' << r.max_rate.mean << ',' << r.max_rate.std_err
           << ',' << r.jain.mean << ',' << r.jain.std_err << ',' << r.median_user_rate << ',' << r.iqr_user_rate
           << ',' << r.converged_fraction << '\n';
}

inline void write_cdf_csv(std::ostream& os, const Summary& s) {
    os << "objective,net_rate,cdf\n";
    for (const auto& [obj, rows] : s.cdf)
        for (const auto& [x, f] : rows) os << obj << ',' << x << ',' << f << '\n';
}

} // namespace cfmimo
