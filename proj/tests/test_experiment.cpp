#include <gtest/gtest.h>

#include <cmath>

#include "wpr/experiment.hpp"
#include "wpr/json_io.hpp"

using namespace wpr;

namespace {

JointDistribution point_mass(std::size_t cell) {
    std::array<double, 8> p{};
    p[cell] = 1.0;
    return JointDistribution(p);
}

}  // namespace

TEST(SampleOutcomes, DegenerateDistribution) {
    const auto t = sample_outcomes(point_mass(JointDistribution::index(0, 1, 1)), 100, 7);
    EXPECT_EQ(t(0, 1, 1), 100u);
    EXPECT_EQ(t.n_detected, 100u);
    EXPECT_EQ(t.n_trials, 100u);
    EXPECT_NO_THROW(t.validate());
}

TEST(SampleOutcomes, HalfCellWithinFourSigma) {
    const auto q = analytic_distribution(0.0, kPi / 2);
    for (std::uint64_t seed : {0ull, 1ull, 123456789ull}) {
        const auto t = sample_outcomes(q, 1'000'000, seed);
        EXPECT_NEAR(static_cast<double>(t(0, 1, 0)) / 1e6, 0.5, 0.002);
    }
}

TEST(SampleOutcomes, SeedDeterminism) {
    const auto q = analytic_distribution(0.7, 0.6);
    const auto a = sample_outcomes(q, 50'000, 42);
    const auto b = sample_outcomes(q, 50'000, 42);
    const auto c = sample_outcomes(q, 50'000, 43);
    EXPECT_EQ(a.counts, b.counts);
    EXPECT_NE(a.counts, c.counts);
    EXPECT_THROW(sample_outcomes(q, 0, 1), std::invalid_argument);
}

TEST(SampleOutcomes, NeverHitsZeroCells) {
    // c = 1 with a = 1 or b = 1 never occurs at phi = 0, alpha = 0.
    const auto q = analytic_distribution(0.0, 0.0);
    const auto t = sample_outcomes(q, 200'000, 3);
    for (std::size_t k = 0; k < 8; ++k) {
        if (q[k] == 0.0) { EXPECT_EQ(t.counts[k], 0u) << k; }
    }
}

TEST(DetectorModel, Validation) {
    EXPECT_NO_THROW((DetectorModel{0.5, 0.5, 0.5, 0.0}.validate()));
    EXPECT_THROW((DetectorModel{0.0, 0.5, 0.5, 0.0}.validate()), std::invalid_argument);
    EXPECT_THROW((DetectorModel{1.1, 0.5, 0.5, 0.0}.validate()), std::invalid_argument);
    EXPECT_THROW((DetectorModel{0.5, 0.5, 0.5, 0.5}.validate()), std::invalid_argument);
    EXPECT_THROW((DetectorModel{0.5, 0.5, 0.5, -0.1}.validate()), std::invalid_argument);
    EXPECT_DOUBLE_EQ((DetectorModel{0.5, 0.5, 0.5, 0.0}.coincidence_probability()), 0.125);
}

TEST(ApplyInefficiency, LosslessMatchesSampling) {
    const auto q = analytic_distribution(0.3, 1.2);
    const auto t = apply_inefficiency(q, DetectorModel{}, 1'000'000, 5);
    EXPECT_EQ(t.n_detected, t.n_trials);
    EXPECT_LT(max_sigma_deviation(t, q), 5.0);
}

TEST(ApplyInefficiency, HalfEfficiencyPostSelectionInvariant) {
    for (auto [phi, alpha] : {std::pair{0.0, kPi / 3}, {0.7, 0.6}, {kPi, kPi / 8}}) {
        const auto q = analytic_distribution(phi, alpha);
        const auto t = apply_inefficiency(q, DetectorModel{0.5, 0.5, 0.5, 0.0}, 1'000'000, 11);
        EXPECT_NEAR(static_cast<double>(t.n_detected) / 1e6, 0.125, 0.002);
        EXPECT_LT(max_sigma_deviation(t, q), 5.0);
    }
}

TEST(ApplyInefficiency, SmallDarkRateKeepsFit) {
    const auto q = analytic_distribution(0.7, 0.6);
    const DetectorModel det{0.9, 0.9, 0.9, 0.001};
    const auto t = apply_inefficiency(q, det, 1'000'000, 2024);
    const double expected = det.coincidence_probability();
    EXPECT_NEAR(static_cast<double>(t.n_detected) / 1e6, expected, 5 * std::sqrt(expected * (1 - expected) / 1e6));
    EXPECT_GT(chi_square_test(t, q).p_value, 1e-3);
}

TEST(ApplyInefficiency, LargeDarkRateIsDetectable) {
    const auto q = analytic_distribution(0.0, 0.0);
    const auto t = apply_inefficiency(q, DetectorModel{0.6, 0.6, 0.6, 0.3}, 1'000'000, 9);
    const auto r = chi_square_test(t, q);
    EXPECT_TRUE(r.impossible_event);
    EXPECT_EQ(r.p_value, 0.0);
}

TEST(ChiSquare, NullDistributionIsCalibrated) {
    const auto q = analytic_distribution(0.7, 0.6);
    int small = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        if (chi_square_test(sample_outcomes(q, 1'000'000, seed), q).p_value < 0.1) ++small;
    }
    EXPECT_GE(small, 5);
    EXPECT_LE(small, 15);
}

TEST(ChiSquare, WrongAngleRejected) {
    const auto t = sample_outcomes(analytic_distribution(0.7, kPi / 3), 1'000'000, 1);
    const auto r = chi_square_test(t, analytic_distribution(0.7, kPi / 8));
    EXPECT_LT(r.p_value, 1e-6);
    EXPECT_EQ(r.dof, 7);
}

TEST(ChiSquare, ImpossibleEvent) {
    const auto q = analytic_distribution(0.0, 0.0);
    auto t = sample_outcomes(q, 1000, 1);
    t.counts[JointDistribution::index(1, 1, 1)] += 1;
    t.n_detected += 1;
    t.n_trials += 1;
    const auto r = chi_square_test(t, q);
    EXPECT_TRUE(r.impossible_event);
    EXPECT_TRUE(std::isinf(r.statistic));
    EXPECT_EQ(r.p_value, 0.0);
}

TEST(ChiSquare, ZeroCellsLeaveDof) {
    const auto q = analytic_distribution(0.0, 0.0);
    const auto r = chi_square_test(sample_outcomes(q, 10'000, 4), q);
    int nonzero = 0;
    for (std::size_t k = 0; k < 8; ++k) nonzero += q[k] >= kZeroProbability;
    EXPECT_EQ(r.dof, nonzero - 1);
    EXPECT_FALSE(r.impossible_event);
}

TEST(ChiSquare, Preconditions) {
    const auto q = analytic_distribution(0.7, 0.6);
    EXPECT_THROW(chi_square_test(sample_outcomes(q, 99, 1), q), std::invalid_argument);
    // Enough events overall, but some cell expects fewer than 5.
    EXPECT_THROW(chi_square_test(sample_outcomes(q, 120, 1), q), std::invalid_argument);
    CountTable broken;
    broken.counts[0] = 200;
    broken.n_trials = 200;
    broken.n_detected = 150;
    EXPECT_THROW(chi_square_test(broken, q), std::invalid_argument);
}

TEST(ChiSquare, KnownStatistic) {
    // Two equiprobable cells, 60/40 split of 100 events: statistic 4, one dof.
    std::array<double, 8> p{};
    p[0] = p[1] = 0.5;
    CountTable t;
    t.counts[0] = 60;
    t.counts[1] = 40;
    t.n_trials = t.n_detected = 100;
    const auto r = chi_square_test(t, JointDistribution(p));
    EXPECT_DOUBLE_EQ(r.statistic, 4.0);
    EXPECT_EQ(r.dof, 1);
    EXPECT_NEAR(r.p_value, std::erfc(std::sqrt(2.0)), 1e-14);
}

TEST(Serialization, CsvAndJson) {
    const auto t = sample_outcomes(point_mass(JointDistribution::index(1, 0, 1)), 10, 0);
    EXPECT_EQ(to_csv(t), "a,b,c,count\n0,0,0,0\n0,0,1,0\n0,1,0,0\n0,1,1,0\n1,0,0,0\n1,0,1,10\n1,1,0,0\n1,1,1,0\n");
    const auto j = to_json(t);
    EXPECT_EQ(j["counts"]["101"], 10);
    EXPECT_EQ(j["n_trials"], 10);
    EXPECT_EQ(j["n_detected"], 10);
}
