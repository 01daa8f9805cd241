// spacetime.hpp
// Light-cone checks and the delay plan that makes the three photons reach their
// detectors simultaneously.

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

namespace wpr {

inline constexpr double kSpeedOfLight = 299792458.0;  // m/s, exact
inline constexpr double kDefaultFiberIndex = 1.468;

struct SpacetimeEvent {
    std::string label;
    double t = 0.0;  // s
    double x = 0.0;  // m
    double y = 0.0;
    double z = 0.0;

    void validate() const {
        if (!std::isfinite(t) || !std::isfinite(x) || !std::isfinite(y) || !std::isfinite(z)) {
            throw std::invalid_argument("event " + label + " has non-finite coordinates");
        }
    }
};

inline double spatial_distance(const SpacetimeEvent& a, const SpacetimeEvent& b) {
    return std::hypot(a.x - b.x, a.y - b.y, a.z - b.z);
}

// c²Δt² < |Δx|².
inline bool spacelike_separated(const SpacetimeEvent& e1, const SpacetimeEvent& e2) {
    e1.validate();
    e2.validate();
    const double ct = kSpeedOfLight * std::abs(e1.t - e2.t);
    return ct < spatial_distance(e1, e2);
}

// Raised when some arm would need a negative delay.
class GeometryInfeasible : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum Arm : std::size_t { kArmA = 0, kArmB = 1, kArmC = 2 };

struct TimingGeometry {
    std::array<double, 3> fiber_lengths{};  // m, arms A, B, C
    std::array<double, 3> pre_delays{};     // s, fixed delays already in each arm
    double n_fiber = kDefaultFiberIndex;
    SpacetimeEvent alpha_choice;            // random choice of the C rotation
    SpacetimeEvent quantum_switch;          // start of the controlled-Hadamard window
    double switch_duration = 0.0;           // s
    std::optional<double> measurement_time;  // s after emission; latest arrival when unset
};

struct TimingPlan {
    std::array<double, 3> arrival{};  // s after emission, before added delays
    std::array<double, 3> tau{};      // added delays
    double measurement_time = 0.0;
    bool choice_spacelike_to_switch = false;
    bool spacelike_to_window_start = false;
    bool spacelike_to_window_end = false;
};

inline std::array<double, 3> measurement_times(const TimingPlan& p) {
    return {p.arrival[0] + p.tau[0], p.arrival[1] + p.tau[1], p.arrival[2] + p.tau[2]};
}

inline TimingPlan timing_plan(const TimingGeometry& g) {
    if (!(g.n_fiber >= 1.0) || !std::isfinite(g.n_fiber)) throw std::invalid_argument("fiber index must be >= 1");
    if (!(g.switch_duration >= 0.0) || !std::isfinite(g.switch_duration)) {
        throw std::invalid_argument("switch duration must be finite and nonnegative");
    }
    TimingPlan p;
    for (std::size_t k = 0; k < 3; ++k) {
        if (!(g.fiber_lengths[k] > 0.0) || !std::isfinite(g.fiber_lengths[k])) {
            throw std::invalid_argument("fiber lengths must be positive");
        }
        if (!(g.pre_delays[k] >= 0.0) || !std::isfinite(g.pre_delays[k])) {
            throw std::invalid_argument("pre-delays must be finite and nonnegative");
        }
        p.arrival[k] = g.fiber_lengths[k] * g.n_fiber / kSpeedOfLight + g.pre_delays[k];
    }
    p.measurement_time = g.measurement_time.value_or(*std::max_element(p.arrival.begin(), p.arrival.end()));
    static constexpr std::array<const char*, 3> names{"A", "B", "C"};
    for (std::size_t k = 0; k < 3; ++k) {
        p.tau[k] = p.measurement_time - p.arrival[k];
        if (p.tau[k] < 0.0) {
            throw GeometryInfeasible(std::string("arm ") + names[k] + " arrives after the requested measurement time");
        }
    }
    SpacetimeEvent window_end = g.quantum_switch;
    window_end.t += g.switch_duration;
    p.spacelike_to_window_start = spacelike_separated(g.alpha_choice, g.quantum_switch);
    p.spacelike_to_window_end = spacelike_separated(g.alpha_choice, window_end);
    // The farthest-in-time point of the window is one of its ends.
    p.choice_spacelike_to_switch = p.spacelike_to_window_start && p.spacelike_to_window_end;
    return p;
}

}  // namespace wpr
