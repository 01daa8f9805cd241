#include <gtest/gtest.h>

#include <random>

#include "wpr/json_io.hpp"
#include "wpr/spacetime.hpp"

using namespace wpr;

namespace {

SpacetimeEvent ev(double t, double x, double y = 0.0, double z = 0.0) { return {"e", t, x, y, z}; }

TimingGeometry base_geometry() {
    TimingGeometry g;
    g.fiber_lengths = {1000.0, 1000.0, 1000.0};
    g.alpha_choice = {"alpha_choice", 5e-6, 1000.0, 0.0, 0.0};
    g.quantum_switch = {"switch", 5e-6, -1000.0, 0.0, 0.0};
    g.switch_duration = 1e-6;
    return g;
}

}  // namespace

TEST(Spacelike, Examples) {
    EXPECT_TRUE(spacelike_separated(ev(0, 0), ev(0, 1)));
    EXPECT_FALSE(spacelike_separated(ev(0, 0), ev(1, 1)));
    // c * 3 us = 899.4 m, short of 1 km.
    EXPECT_TRUE(spacelike_separated(ev(0, 0), ev(3.0e-6, 1000.0)));
    EXPECT_FALSE(spacelike_separated(ev(0, 0), ev(3.4e-6, 1000.0)));
    EXPECT_FALSE(spacelike_separated(ev(2e-6, 5, 5, 5), ev(2e-6, 5, 5, 5)));
}

TEST(Spacelike, LightlikeIsNotSpacelike) {
    EXPECT_FALSE(spacelike_separated(ev(0, 0), ev(1.0, kSpeedOfLight)));
}

TEST(Spacelike, Symmetric) {
    const auto a = ev(1e-6, 3, 4, 0);
    const auto b = ev(-2e-6, -800, 12, 90);
    EXPECT_EQ(spacelike_separated(a, b), spacelike_separated(b, a));
}

TEST(Spacelike, ScalingInvariance) {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> pos(-2000.0, 2000.0), tim(-1e-5, 1e-5), scale(0.01, 100.0);
    for (int k = 0; k < 2000; ++k) {
        SpacetimeEvent a = ev(tim(rng), pos(rng), pos(rng), pos(rng));
        SpacetimeEvent b = ev(tim(rng), pos(rng), pos(rng), pos(rng));
        const double ct = kSpeedOfLight * std::abs(a.t - b.t);
        const double d = spatial_distance(a, b);
        if (std::abs(ct - d) < 1e-6 * d) continue;  // too close to the light cone for rounding
        const double s = scale(rng);
        SpacetimeEvent as{a.label, a.t * s, a.x * s, a.y * s, a.z * s};
        SpacetimeEvent bs{b.label, b.t * s, b.x * s, b.y * s, b.z * s};
        EXPECT_EQ(spacelike_separated(a, b), spacelike_separated(as, bs));
    }
}

TEST(Spacelike, RejectsNonFinite) {
    EXPECT_THROW(spacelike_separated(ev(NAN, 0), ev(0, 1)), std::invalid_argument);
    EXPECT_THROW(spacelike_separated(ev(0, 0), ev(0, INFINITY)), std::invalid_argument);
}

TEST(TimingPlan, SymmetricArmsNeedNoDelay) {
    const auto p = timing_plan(base_geometry());
    for (double t : p.tau) EXPECT_EQ(t, 0.0);
    EXPECT_TRUE(p.choice_spacelike_to_switch);
}

TEST(TimingPlan, LongerArmC) {
    auto g = base_geometry();
    g.fiber_lengths[kArmC] += 100.0;
    const auto p = timing_plan(g);
    const double expected = 100.0 * 1.468 / 299792458.0;
    EXPECT_NEAR(p.tau[kArmA], expected, 1e-10);
    EXPECT_NEAR(p.tau[kArmB], expected, 1e-10);
    EXPECT_EQ(p.tau[kArmC], 0.0);
    EXPECT_NEAR(expected, 489.6e-9, 0.1e-9);
}

TEST(TimingPlan, FeedbackEqualizesMeasurementTimes) {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> len(1.0, 5000.0), pre(0.0, 1e-6);
    for (int k = 0; k < 500; ++k) {
        auto g = base_geometry();
        for (std::size_t a = 0; a < 3; ++a) {
            g.fiber_lengths[a] = len(rng);
            g.pre_delays[a] = pre(rng);
        }
        const auto p = timing_plan(g);
        const auto m = measurement_times(p);
        EXPECT_NEAR(m[0], m[1], 1e-12);
        EXPECT_NEAR(m[1], m[2], 1e-12);
        for (double t : p.tau) EXPECT_GE(t, 0.0);
    }
}

TEST(TimingPlan, ColocatedChoiceIsNeverSpacelike) {
    auto g = base_geometry();
    g.alpha_choice.x = g.quantum_switch.x;
    for (double dt : {0.0, 1e-9, 1e-3}) {
        g.alpha_choice.t = g.quantum_switch.t + dt;
        EXPECT_FALSE(timing_plan(g).choice_spacelike_to_switch);
    }
}

TEST(TimingPlan, WindowEndMatters) {
    // The choice is outside the light cone of the window start but inside that of its end.
    auto g = base_geometry();
    g.switch_duration = 1e-5;
    const auto p = timing_plan(g);
    EXPECT_TRUE(p.spacelike_to_window_start);
    EXPECT_FALSE(p.spacelike_to_window_end);
    EXPECT_FALSE(p.choice_spacelike_to_switch);
}

TEST(TimingPlan, NegativeDelayIsReported) {
    auto g = base_geometry();
    g.measurement_time = 1e-6;
    EXPECT_THROW(timing_plan(g), GeometryInfeasible);
    g.measurement_time = 1e-5;
    const auto p = timing_plan(g);
    EXPECT_NEAR(p.measurement_time, 1e-5, 0.0);
    EXPECT_GT(p.tau[kArmA], 0.0);
}

TEST(TimingPlan, InputValidation) {
    auto g = base_geometry();
    g.fiber_lengths[kArmB] = 0.0;
    EXPECT_THROW(timing_plan(g), std::invalid_argument);
    g = base_geometry();
    g.n_fiber = 0.5;
    EXPECT_THROW(timing_plan(g), std::invalid_argument);
    g = base_geometry();
    g.pre_delays[kArmA] = -1e-9;
    EXPECT_THROW(timing_plan(g), std::invalid_argument);
}

TEST(GeometryFile, DemoFiles) {
    const std::string dir = WPR_DEMO_DIR "/geometry/";
    EXPECT_EQ(timing_plan(load_geometry(dir + "symmetric.json")).tau, (std::array<double, 3>{0, 0, 0}));
    const auto p = timing_plan(load_geometry(dir + "arm_c_plus_100m.json"));
    EXPECT_NEAR(p.tau[kArmA], 100.0 * 1.468 / kSpeedOfLight, 1e-10);
    EXPECT_FALSE(timing_plan(load_geometry(dir + "colocated.json")).choice_spacelike_to_switch);
}

TEST(GeometryFile, Errors) {
    try {
        load_geometry(WPR_DATA_DIR "/malformed.json");
        FAIL() << "expected a parse error";
    } catch (const GeometryFileError& e) {
        EXPECT_NE(std::string(e.what()).find("line"), std::string::npos) << e.what();
    }
    EXPECT_THROW(load_geometry(WPR_DATA_DIR "/does_not_exist.json"), GeometryFileError);
    EXPECT_THROW(geometry_from_string(R"({"labs": [], "fibers": {"A": 1, "B": 1, "C": 1}})"), GeometryFileError);
    EXPECT_THROW(geometry_from_string(R"([1, 2])"), GeometryFileError);
    EXPECT_THROW(geometry_from_string(
                     R"({"labs": [{"label": "switch", "t": 0, "x": 0, "y": 0, "z": 0},
                                  {"label": "alpha_choice", "t": 0, "x": "far", "y": 0, "z": 0}],
                         "fibers": {"A": 1, "B": 1, "C": 1}})"),
                 GeometryFileError);
    EXPECT_THROW(timing_plan(load_geometry(WPR_DATA_DIR "/too_early.json")), GeometryInfeasible);
}

TEST(GeometryFile, JsonOutput) {
    auto g = base_geometry();
    g.fiber_lengths[kArmC] += 100.0;
    const auto j = to_json(timing_plan(g));
    EXPECT_TRUE(j["tau_s"].contains("A"));
    EXPECT_EQ(j["tau_s"]["C"], 0.0);
    EXPECT_EQ(j["choice_spacelike_to_switch"], true);
    EXPECT_EQ(j["measurement_times_s"].size(), 3u);
}
