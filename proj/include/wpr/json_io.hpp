// json_io.hpp
// JSON and CSV forms of the library's result types.

#pragma once

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>

#include <nlohmann/json.hpp>

#include "wpr/experiment.hpp"
#include "wpr/feasibility.hpp"
#include "wpr/hv_model.hpp"
#include "wpr/quantum.hpp"
#include "wpr/spacetime.hpp"

namespace wpr {

using json = nlohmann::ordered_json;

// Locale-independent shortest form with at most 15 significant digits.
inline std::string format_number(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 15);
    if (res.ec != std::errc{}) throw std::runtime_error("number formatting failed");
    return {buf, res.ptr};
}

// Non-finite values have no JSON literal and become null.
inline json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

inline json to_json(const JointDistribution& q) {
    json j = json::object();
    for (std::size_t k = 0; k < 8; ++k) j[JointDistribution::key(k)] = q[k];
    return j;
}

inline JointDistribution distribution_from_json(const json& j) {
    JointDistribution q;
    std::array<double, 8> p{};
    for (std::size_t k = 0; k < 8; ++k) p[k] = j.at(JointDistribution::key(k)).get<double>();
    q = JointDistribution(p);
    q.validate();
    return q;
}

inline json to_json(const HVModel& m) {
    return json{{"N", m.size()},       {"f_particle", m.f_particle}, {"f_wave", m.f_wave}, {"x", m.x},
                {"y", m.y},            {"z", m.z},                   {"v", m.v},           {"partition", m.partition}};
}

inline HVModel model_from_json(const json& j) {
    HVModel m;
    m.f_particle = j.at("f_particle").get<std::vector<double>>();
    m.f_wave = j.at("f_wave").get<std::vector<double>>();
    m.x = j.at("x").get<std::vector<double>>();
    m.y = j.at("y").get<std::vector<double>>();
    m.z = j.at("z").get<std::vector<double>>();
    m.v = j.at("v").get<std::vector<double>>();
    m.partition = j.at("partition").get<std::vector<int>>();
    if (j.contains("N") && j.at("N").get<std::size_t>() != m.size()) throw std::invalid_argument("N does not match");
    m.validate();
    return m;
}

inline json to_json(const AnalyticArgument& a) {
    return json{{"statement", a.statement}, {"required", a.required}, {"gap", a.gap}, {"consistent", a.consistent}};
}

inline json to_json(const Certificate& c) {
    json j{{"statement", c.statement}};
    j["analytic"] = c.analytic ? to_json(*c.analytic) : json(nullptr);
    json rows = json::array();
    for (const auto& b : c.branches) {
        json r{{"branch", b.branch}, {"violation", finite_or_null(b.violation)}};
        r["f"] = b.f ? json(*b.f) : json(nullptr);
        rows.push_back(std::move(r));
    }
    j["branches"] = std::move(rows);
    return j;
}

inline json to_json(const FeasibilityReport& r) {
    json settings{{"alphas", r.settings.alphas},
                  {"phis", r.settings.phis},
                  {"N", r.settings.n},
                  {"assumptions", r.settings.assumptions},
                  {"cross_statistics", to_string(r.settings.cross)}};
    settings["f_grid"] = r.settings.f_grid ? json(*r.settings.f_grid) : json(nullptr);
    json j{{"verdict", to_string(r.verdict)},
           {"degenerate", r.degenerate},
           {"margin", finite_or_null(r.margin)},
           {"settings", std::move(settings)},
           {"scanned_branches", r.scanned_branches},
           {"lp_solves", r.lp_solves}};
    if (r.witness) j["witness"] = to_json(*r.witness);
    if (r.witness_f) j["witness_f"] = *r.witness_f;
    if (r.certificate) j["certificate"] = to_json(*r.certificate);
    j["analytic"] = r.analytic ? to_json(*r.analytic) : json(nullptr);
    j["flags"] = r.flags;
    if (r.wall_time_s) j["wall_time_s"] = *r.wall_time_s;
    return j;
}

inline json to_json(const CountTable& t) {
    json counts = json::object();
    for (std::size_t k = 0; k < 8; ++k) counts[JointDistribution::key(k)] = t.counts[k];
    return json{{"n_trials", t.n_trials}, {"n_detected", t.n_detected}, {"counts", std::move(counts)}};
}

inline std::string to_csv(const CountTable& t) {
    std::string s = "a,b,c,count\n";
    for (std::size_t k = 0; k < 8; ++k) {
        s += std::to_string((k >> 2) & 1) + "," + std::to_string((k >> 1) & 1) + "," + std::to_string(k & 1) + "," +
             std::to_string(t.counts[k]) + "\n";
    }
    return s;
}

inline json to_json(const ChiSquareResult& r) {
    return json{{"statistic", finite_or_null(r.statistic)},
                {"p_value", r.p_value},
                {"dof", r.dof},
                {"impossible_event", r.impossible_event}};
}

inline json to_json(const TimingPlan& p) {
    const auto m = measurement_times(p);
    return json{{"arrival_s", p.arrival},
                {"tau_s", {{"A", p.tau[0]}, {"B", p.tau[1]}, {"C", p.tau[2]}}},
                {"measurement_time_s", p.measurement_time},
                {"measurement_times_s", m},
                {"choice_spacelike_to_switch", p.choice_spacelike_to_switch},
                {"spacelike_to_window_start", p.spacelike_to_window_start},
                {"spacelike_to_window_end", p.spacelike_to_window_end}};
}

// A geometry file that cannot be read; the message carries the line when known.
class GeometryFileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline double number_field(const json& obj, const std::string& key, const std::string& where) {
    if (!obj.contains(key)) throw GeometryFileError(where + ": missing \"" + key + "\"");
    const auto& v = obj.at(key);
    if (!v.is_number()) throw GeometryFileError(where + ": \"" + key + "\" must be a number");
    return v.get<double>();
}

}  // namespace detail

// {"labs": [{"label","t","x","y","z"}...], "fibers": {"A","B","C"}, "n_fiber", "switch_duration",
//  "pre_delays": {"A","B","C"}, "measurement_time"}; labs must include "alpha_choice" and "switch".
inline TimingGeometry geometry_from_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        // The parser message carries the line and column.
        throw GeometryFileError(std::string("malformed geometry JSON: ") + e.what());
    }
    if (!j.is_object()) throw GeometryFileError("geometry must be a JSON object");
    TimingGeometry g;
    if (!j.contains("labs") || !j["labs"].is_array()) throw GeometryFileError("geometry: missing \"labs\" array");
    bool have_choice = false, have_switch = false;
    for (std::size_t k = 0; k < j["labs"].size(); ++k) {
        const auto& lab = j["labs"][k];
        const std::string where = "labs[" + std::to_string(k) + "]";
        if (!lab.is_object() || !lab.contains("label") || !lab["label"].is_string()) {
            throw GeometryFileError(where + ": needs a string \"label\"");
        }
        SpacetimeEvent e{lab["label"].get<std::string>(), detail::number_field(lab, "t", where),
                         detail::number_field(lab, "x", where), detail::number_field(lab, "y", where),
                         detail::number_field(lab, "z", where)};
        if (e.label == "alpha_choice") {
            g.alpha_choice = e;
            have_choice = true;
        } else if (e.label == "switch") {
            g.quantum_switch = e;
            have_switch = true;
        }
    }
    if (!have_choice || !have_switch) {
        throw GeometryFileError("geometry: labs must include \"alpha_choice\" and \"switch\"");
    }
    if (!j.contains("fibers") || !j["fibers"].is_object()) throw GeometryFileError("geometry: missing \"fibers\"");
    static constexpr std::array<const char*, 3> arms{"A", "B", "C"};
    for (std::size_t k = 0; k < 3; ++k) g.fiber_lengths[k] = detail::number_field(j["fibers"], arms[k], "fibers");
    if (j.contains("pre_delays")) {
        if (!j["pre_delays"].is_object()) throw GeometryFileError("geometry: \"pre_delays\" must be an object");
        for (std::size_t k = 0; k < 3; ++k) {
            if (j["pre_delays"].contains(arms[k])) {
                g.pre_delays[k] = detail::number_field(j["pre_delays"], arms[k], "pre_delays");
            }
        }
    }
    if (j.contains("n_fiber")) g.n_fiber = detail::number_field(j, "n_fiber", "geometry");
    if (j.contains("switch_duration")) g.switch_duration = detail::number_field(j, "switch_duration", "geometry");
    if (j.contains("measurement_time")) g.measurement_time = detail::number_field(j, "measurement_time", "geometry");
    return g;
}

inline TimingGeometry load_geometry(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw GeometryFileError("cannot open geometry file " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return geometry_from_string(ss.str());
}

}  // namespace wpr
