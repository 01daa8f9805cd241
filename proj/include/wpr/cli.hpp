// cli.hpp
// Subcommands of the wprealism tool. run_cli is the whole program minus main(),
// so tests can drive it with argument vectors and string streams.

#pragma once

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "wpr/experiment.hpp"
#include "wpr/feasibility.hpp"
#include "wpr/json_io.hpp"
#include "wpr/quantum.hpp"
#include "wpr/spacetime.hpp"

namespace wpr {

enum ExitCode : int {
    kExitFeasible = 0,
    kExitError = 1,
    kExitGeometryInfeasible = 2,
    kExitInfeasible = 3,
};

inline constexpr const char* kOutputDirEnv = "WPR_OUTPUT_DIR";

namespace cli {

// Relative output paths land in $WPR_OUTPUT_DIR when it is set.
inline std::filesystem::path resolve_output(const std::string& path) {
    std::filesystem::path p(path);
    if (p.is_relative()) {
        if (const char* dir = std::getenv(kOutputDirEnv); dir && *dir) p = std::filesystem::path(dir) / p;
    }
    return p;
}

inline void emit(const std::string& text, const std::string& output, std::ostream& out) {
    if (output.empty()) {
        out << text;
        return;
    }
    const auto path = resolve_output(output);
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + path.string());
    f << text;
}

inline std::vector<double> parse_list(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::size_t start = 0;
    while (start <= s.size()) {
        const std::size_t end = std::min(s.find(',', start), s.size());
        const std::string tok = s.substr(start, end - start);
        double v = 0.0;
        const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
        if (tok.empty() || res.ec != std::errc{} || res.ptr != tok.data() + tok.size()) {
            throw std::invalid_argument("cannot parse " + what + ": \"" + s + "\"");
        }
        out.push_back(v);
        start = end + 1;
    }
    return out;
}

struct Range {
    double start = 0.0;
    double stop = 0.0;
    std::size_t count = 0;

    std::vector<double> points() const {
        std::vector<double> p;
        for (std::size_t k = 0; k < count; ++k) {
            p.push_back(k + 1 == count ? stop
                                       : start + (stop - start) * static_cast<double>(k) /
                                                     static_cast<double>(count - 1));
        }
        return p;
    }
};

inline Range parse_range(const std::string& s, const std::string& what, double scale) {
    const auto v = parse_list(s, what);
    if (v.size() != 3) throw std::invalid_argument(what + " needs start,stop,count");
    if (!(v[2] >= 2.0) || v[2] != std::floor(v[2])) throw std::invalid_argument(what + " needs at least 2 points");
    return {v[0] * scale, v[1] * scale, static_cast<std::size_t>(v[2])};
}

inline void require_finite(double v, const std::string& what) {
    if (!std::isfinite(v)) throw std::invalid_argument(what + " must be finite");
}

inline std::string dump(const json& j) { return j.dump(2) + "\n"; }

}  // namespace cli

inline int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hidden-variable feasibility and simulation tools for the entanglement-assisted delayed-choice test"};
    app.require_subcommand(1);
    app.fallthrough();
    app.set_version_flag("--version", "wprealism 1.0");

    bool degrees = false;
    std::string output;
    std::string format = "json";
    app.add_flag("--degrees", degrees, "angles are given in degrees");
    app.add_option("-o,--output", output, "write to this file (relative to $WPR_OUTPUT_DIR when set)");

    // distribution
    auto* dist = app.add_subcommand("distribution", "joint outcome table q(a,b,c)");
    double d_phi = 0.0, d_alpha = 0.0;
    std::string d_variant = "entanglement";
    dist->add_option("--phi", d_phi, "phase shift")->required();
    dist->add_option("--alpha", d_alpha, "rotation angle of qubit C")->required();
    dist->add_option("--variant", d_variant, "entanglement, quantum or classical")->capture_default_str();
    dist->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

    // feasibility
    auto* feas = app.add_subcommand("feasibility", "decide whether a hidden-variable model exists");
    std::string f_assume = "realism";
    double f_alpha = 0.0, f_phi = 0.0;
    std::string f_delayed, f_cross = "arbitrary";
    std::size_t f_n = 4, f_grid = 1001;
    bool f_wall = false;
    feas->add_option("--assume", f_assume, "comma-separated assumptions")->capture_default_str();
    auto* f_alpha_opt = feas->add_option("--alpha", f_alpha, "rotation angle of qubit C");
    auto* f_delayed_opt = feas->add_option("--delayed-alpha", f_delayed, "two settings a1,a2 chosen late");
    f_alpha_opt->excludes(f_delayed_opt);
    feas->add_option("--phi", f_phi, "phase shift")->capture_default_str();
    feas->add_option("--N", f_n, "number of hidden-variable indices")->capture_default_str();
    feas->add_option("--grid", f_grid, "independence f grid points")->capture_default_str();
    feas->add_option("--cross", f_cross, "arbitrary or fitted")->check(CLI::IsMember({"arbitrary", "fitted"}));
    feas->add_flag("--wall-time", f_wall, "include the solver wall time in the report");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "feasibility over a grid of settings");
    std::string s_alpha, s_phi_range, s_assume = "realism", s_cross = "arbitrary", s_format = "csv";
    std::optional<double> s_phi;
    std::size_t s_n = 4, s_grid = 1001;
    sweep->add_option("--alpha-range", s_alpha, "start,stop,count")->required();
    auto* s_phi_opt = sweep->add_option("--phi", s_phi, "single phase shift");
    auto* s_phi_range_opt = sweep->add_option("--phi-range", s_phi_range, "start,stop,count");
    s_phi_opt->excludes(s_phi_range_opt);
    sweep->add_option("--assume", s_assume, "comma-separated assumptions")->capture_default_str();
    sweep->add_option("--N", s_n, "number of hidden-variable indices")->capture_default_str();
    sweep->add_option("--grid", s_grid, "independence f grid points")->capture_default_str();
    sweep->add_option("--cross", s_cross, "arbitrary or fitted")->check(CLI::IsMember({"arbitrary", "fitted"}));
    sweep->add_option("--format", s_format, "csv or json")->check(CLI::IsMember({"json", "csv"}));

    // simulate
    auto* sim = app.add_subcommand("simulate", "finite-statistics run with lossy detectors");
    double m_phi = 0.0, m_alpha = 0.0, m_dark = 0.0;
    std::uint64_t m_n = 1000000, m_seed = 0;
    std::string m_eta = "1,1,1", m_variant = "entanglement";
    sim->add_option("--phi", m_phi, "phase shift")->required();
    sim->add_option("--alpha", m_alpha, "rotation angle of qubit C")->required();
    sim->add_option("--n", m_n, "number of trials")->capture_default_str();
    sim->add_option("--seed", m_seed, "generator seed")->capture_default_str();
    sim->add_option("--eta", m_eta, "detector efficiencies eta_a,eta_b,eta_c")->capture_default_str();
    sim->add_option("--dark-rate", m_dark, "dark-count probability of a detector that lost its photon");
    sim->add_option("--variant", m_variant, "entanglement, quantum or classical")->capture_default_str();
    sim->add_option("--format", format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

    // timing
    auto* timing = app.add_subcommand("timing", "delay plan and space-like separation check");
    std::string t_file;
    timing->add_option("geometry", t_file, "geometry JSON file")->required();

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitFeasible;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitFeasible;
    } catch (const CLI::CallForVersion&) {
        out << app.version() << "\n";
        return kExitFeasible;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }

    const double scale = degrees ? kPi / 180.0 : 1.0;
    try {
        if (*dist) {
            cli::require_finite(d_phi, "phi");
            cli::require_finite(d_alpha, "alpha");
            const CircuitVariant v(parse_variant(d_variant), d_phi * scale, d_alpha * scale);
            const JointDistribution sim_q = simulate_distribution(v);
            const JointDistribution exact = analytic_distribution(v);
            const double dev = max_abs_deviation(sim_q, exact);
            if (format == "csv") {
                std::string s = "a,b,c,simulated,analytic\n";
                for (std::size_t k = 0; k < 8; ++k) {
                    s += std::to_string((k >> 2) & 1) + "," + std::to_string((k >> 1) & 1) + "," +
                         std::to_string(k & 1) + "," + format_number(sim_q[k]) + "," + format_number(exact[k]) + "\n";
                }
                cli::emit(s, output, out);
            } else {
                json j{{"variant", to_string(v.tag)}, {"phi", v.phi},           {"alpha", v.alpha},
                       {"simulated", to_json(sim_q)}, {"analytic", to_json(exact)}, {"max_deviation", dev}};
                cli::emit(cli::dump(j), output, out);
            }
            return kExitFeasible;
        }

        if (*feas) {
            AssumptionSet assumptions = AssumptionSet::parse(f_assume);
            EngineOptions opt;
            opt.cross = parse_cross_statistics(f_cross);
            opt.f_grid = f_grid;
            opt.record_wall_time = f_wall;
            CheckRequest req;
            req.phi = f_phi * scale;
            req.n = f_n;
            cli::require_finite(req.phi, "phi");
            if (!f_delayed.empty()) {
                const auto a = cli::parse_list(f_delayed, "--delayed-alpha");
                if (a.size() != 2) throw std::invalid_argument("--delayed-alpha needs exactly two angles");
                req.alphas = {a[0] * scale, a[1] * scale};
                assumptions.add(Assumption::DelayedAlphaChoice);
            } else {
                if (assumptions.has(Assumption::DelayedAlphaChoice)) {
                    throw std::invalid_argument("delayed-alpha needs --delayed-alpha a1,a2");
                }
                if (f_alpha_opt->count() == 0) throw std::invalid_argument("--alpha or --delayed-alpha is required");
                req.alphas = {f_alpha * scale};
            }
            if (assumptions.has(Assumption::Independence) && f_grid < 101) {
                throw std::invalid_argument("independence grid needs at least 101 points");
            }
            req.assumptions = assumptions;
            const FeasibilityReport rep = run_feasibility(req, opt);
            cli::emit(cli::dump(to_json(rep)), output, out);
            return rep.verdict == Verdict::Feasible ? kExitFeasible : kExitInfeasible;
        }

        if (*sweep) {
            const AssumptionSet assumptions = AssumptionSet::parse(s_assume);
            if (assumptions.has(Assumption::DelayedAlphaChoice)) {
                throw std::invalid_argument("sweep does not take delayed-alpha; use feasibility");
            }
            const auto alphas = cli::parse_range(s_alpha, "--alpha-range", scale).points();
            std::vector<double> phis;
            if (!s_phi_range.empty()) {
                phis = cli::parse_range(s_phi_range, "--phi-range", scale).points();
            } else {
                phis = {s_phi.value_or(0.0) * scale};
            }
            for (double a : alphas) cli::require_finite(a, "alpha");
            for (double p : phis) cli::require_finite(p, "phi");
            EngineOptions opt;
            opt.cross = parse_cross_statistics(s_cross);
            opt.f_grid = s_grid;
            if (assumptions.has(Assumption::Independence) && s_grid < 101) {
                throw std::invalid_argument("independence grid needs at least 101 points");
            }
            if (s_n == 0 || s_n > kMaxEnumeratedN) throw std::invalid_argument("N out of range");

            struct Point {
                double alpha, phi;
            };
            std::vector<Point> points;
            for (double a : alphas)
                for (double p : phis) points.push_back({a, p});
            std::vector<FeasibilityReport> reports(points.size());
            // Points are independent; workers fill fixed slots so the output order never changes.
            const std::size_t workers =
                std::max<std::size_t>(1, std::min<std::size_t>(std::thread::hardware_concurrency(), points.size()));
            std::vector<std::future<void>> jobs;
            for (std::size_t w = 0; w < workers; ++w) {
                jobs.push_back(std::async(std::launch::async, [&, w] {
                    for (std::size_t k = w; k < points.size(); k += workers) {
                        reports[k] = run_feasibility({{points[k].alpha}, points[k].phi, s_n, assumptions}, opt);
                    }
                }));
            }
            for (auto& j : jobs) j.get();

            if (s_format == "json") {
                json rows = json::array();
                for (std::size_t k = 0; k < points.size(); ++k) {
                    rows.push_back({{"alpha", points[k].alpha},
                                    {"phi", points[k].phi},
                                    {"verdict", to_string(reports[k].verdict)},
                                    {"margin", finite_or_null(reports[k].margin)}});
                }
                cli::emit(cli::dump(rows), output, out);
            } else {
                std::string s = "alpha,phi,verdict,margin\n";
                for (std::size_t k = 0; k < points.size(); ++k) {
                    s += format_number(points[k].alpha) + "," + format_number(points[k].phi) + "," +
                         to_string(reports[k].verdict) + "," + format_number(reports[k].margin) + "\n";
                }
                cli::emit(s, output, out);
            }
            return kExitFeasible;
        }

        if (*sim) {
            cli::require_finite(m_phi, "phi");
            cli::require_finite(m_alpha, "alpha");
            if (m_n < 100) throw std::invalid_argument("--n must be at least 100");
            const auto eta = cli::parse_list(m_eta, "--eta");
            if (eta.size() != 3) throw std::invalid_argument("--eta needs three efficiencies");
            const DetectorModel det{eta[0], eta[1], eta[2], m_dark};
            const CircuitVariant v(parse_variant(m_variant), m_phi * scale, m_alpha * scale);
            const JointDistribution q = analytic_distribution(v);
            const CountTable counts = apply_inefficiency(q, det, m_n, m_seed);
            const ChiSquareResult chi = chi_square_test(counts, q);
            if (format == "csv") {
                cli::emit(to_csv(counts), output, out);
            } else {
                json freq = json::object();
                const auto f = counts.frequencies();
                for (std::size_t k = 0; k < 8; ++k) freq[JointDistribution::key(k)] = f[k];
                json j{{"variant", to_string(v.tag)},
                       {"phi", v.phi},
                       {"alpha", v.alpha},
                       {"seed", m_seed},
                       {"detector", {{"eta", eta}, {"dark_rate", m_dark}}},
                       {"counts", to_json(counts)},
                       {"detected_fraction",
                        static_cast<double>(counts.n_detected) / static_cast<double>(counts.n_trials)},
                       {"frequencies", std::move(freq)},
                       {"expected", to_json(q)},
                       {"chi_square", to_json(chi)},
                       {"max_sigma_deviation", finite_or_null(max_sigma_deviation(counts, q))}};
                cli::emit(cli::dump(j), output, out);
            }
            return kExitFeasible;
        }

        if (*timing) {
            const TimingGeometry g = load_geometry(t_file);
            try {
                const TimingPlan plan = timing_plan(g);
                cli::emit(cli::dump(to_json(plan)), output, out);
            } catch (const GeometryInfeasible& e) {
                err << "infeasible geometry: " << e.what() << "\n";
                return kExitGeometryInfeasible;
            }
            return kExitFeasible;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
    return kExitError;
}

}  // namespace wpr
