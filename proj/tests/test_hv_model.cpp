#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "wpr/hv_model.hpp"
#include "wpr/json_io.hpp"
#include "random_models.hpp"

using namespace wpr;
using wpr::test_support::random_reduced_model;

namespace {

HVModel single(double fp, double fw, double z, double v, int cell) {
    HVModel m;
    m.f_particle = {fp};
    m.f_wave = {fw};
    m.x = {0.5};
    m.y = {0.5};
    m.z = {z};
    m.v = {v};
    m.partition = {cell};
    return m;
}

}  // namespace

TEST(ModelDistribution, SingleParticleBranch) {
    const auto p = model_distribution(single(1.0, 0.0, 1.0, 0.0, 0), 0.3);
    EXPECT_DOUBLE_EQ(p(0, 0, 0), 0.5);
    EXPECT_DOUBLE_EQ(p(1, 0, 0), 0.5);
    EXPECT_DOUBLE_EQ(p.total(), 1.0);
}

TEST(ModelDistribution, SingleWaveBranchAtMaximum) {
    const auto p = model_distribution(single(0.0, 1.0, 1.0, 0.0, 1), 0.0);
    EXPECT_DOUBLE_EQ(p(0, 1, 1), 1.0);
    EXPECT_DOUBLE_EQ(p.total(), 1.0);
}

TEST(ModelDistribution, NonlocalWitnessReproducesQuantumTable) {
    const auto m = construct_nonlocal_model(kPi / 3, 0.9, 4);
    const auto r = check_adequacy(m, 0.9, analytic_distribution(0.9, kPi / 3), 1e-9);
    EXPECT_TRUE(r.passed) << r.max_residual;
}

TEST(ModelDistribution, RejectsBrokenInvariants) {
    auto m = single(0.5, 0.4, 1.0, 0.0, 0);
    EXPECT_THROW(model_distribution(m, 0.0), std::invalid_argument);
    m = single(1.0, 0.0, 1.5, 0.0, 0);
    EXPECT_THROW(model_distribution(m, 0.0), std::invalid_argument);
    m = single(1.0, 0.0, 1.0, 0.0, 2);
    EXPECT_THROW(model_distribution(m, 0.0), std::invalid_argument);
    m = single(1.0, 0.0, 0.5, 0.0, 0);
    EXPECT_THROW(m.validate(true), std::invalid_argument);
}

TEST(Adequacy, Reflexive) {
    const auto m = construct_nonlocal_model(0.4, 0.2, 3);
    const auto p = model_distribution(m, 0.2);
    EXPECT_EQ(check_adequacy(p, p, 1e-9).max_residual, 0.0);
}

TEST(Adequacy, SingleParticleModelFails) {
    const auto r = check_adequacy(single(1.0, 0.0, 1.0, 0.0, 0), 0.6, analytic_distribution(0.6, kPi / 3), 1e-9);
    EXPECT_FALSE(r.passed);
    EXPECT_GE(r.max_residual, 0.25);
}

TEST(Adequacy, NeedsPositiveTolerance) {
    const auto p = analytic_distribution(0.0, 0.0);
    EXPECT_THROW(check_adequacy(p, p, 0.0), std::invalid_argument);
}

TEST(NonlocalModel, QuarterPiSplitsParticlesEvenly) {
    const auto m = construct_nonlocal_model(kPi / 4, 0.0, 2);
    EXPECT_NEAR(m.f_particle[0], 0.25, 1e-15);
    EXPECT_NEAR(m.f_particle[1], 0.25, 1e-15);
    EXPECT_TRUE(check_adequacy(m, 0.0, analytic_distribution(0.0, kPi / 4), 1e-9).passed);
}

TEST(NonlocalModel, ZeroAngleEmptiesSecondCell) {
    const auto m = construct_nonlocal_model(0.0, 1.0, 4);
    double s1 = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i)
        if (m.partition[i] == 1) s1 += m.f_particle[i];
    EXPECT_EQ(s1, 0.0);
}

TEST(NonlocalModel, SectorSumsAtThirdPi) {
    const auto m = construct_nonlocal_model(kPi / 3, 0.5, 4);
    double s0 = 0.0, s1 = 0.0;
    for (std::size_t i = 0; i < m.size(); ++i) (m.partition[i] == 0 ? s0 : s1) += m.f_particle[i];
    EXPECT_NEAR(s0, 0.125, 1e-12);
    EXPECT_NEAR(s1, 0.375, 1e-12);
    for (std::size_t i = 0; i < m.size(); ++i) {
        EXPECT_EQ(m.z[i], 1.0);
        EXPECT_EQ(m.v[i] * m.f_wave[i], 0.0);
    }
    EXPECT_NEAR(m.cell_prior(0), 0.5, 1e-12);
    EXPECT_THROW(construct_nonlocal_model(0.3, 0.0, 1), std::invalid_argument);
}

TEST(NonlocalModel, PassesEverywhere) {
    for (int i = 0; i <= 20; ++i) {
        for (int j = 0; j <= 20; ++j) {
            const double alpha = kPi / 2 * i / 20.0, phi = kTwoPi * j / 20.0;
            for (std::size_t n : {2u, 4u, 8u}) {
                const auto m = construct_nonlocal_model(alpha, phi, n);
                ASSERT_TRUE(check_adequacy(m, phi, analytic_distribution(phi, alpha), 1e-9).passed);
            }
        }
    }
}

TEST(ReductionProperty, ReducedModelsAreAdequate) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> ang(0.0, kTwoPi);
    double worst = 0.0;
    for (int t = 0; t < 2000; ++t) {
        const double alpha = ang(rng), phi = ang(rng);
        const auto m = random_reduced_model(rng, alpha, 2 + t % 7);
        worst = std::max(worst, check_adequacy(m, phi, analytic_distribution(phi, alpha), 1e-9).max_residual);
        const auto fr = fringe_residuals(m, phi, 0.5);
        ASSERT_LT(std::max(fr[0], fr[1]), 1e-9);
    }
    EXPECT_LT(worst, 1e-9);
}

TEST(ReductionProperty, OpenWavesWithBiasedOutcomeBreakAdequacy) {
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> ang(0.0, kPi / 2), u(0.0, 1.0);
    for (int t = 0; t < 2000; ++t) {
        const double alpha = ang(rng);
        auto m = random_reduced_model(rng, alpha, 4);
        // Open the interferometer for one wave index with a biased a outcome.
        std::size_t k = 0;
        for (std::size_t i = 0; i < m.size(); ++i)
            if (m.f_wave[i] > m.f_wave[k]) k = i;
        ASSERT_GT(m.f_wave[k], 1e-6);
        m.v[k] = 1.0;
        m.x[k] = u(rng) < 0.5 ? 0.4 * u(rng) : 0.6 + 0.4 * u(rng);
        const auto r = check_adequacy(m, 1.0, analytic_distribution(1.0, alpha), 1e-9);
        ASSERT_GT(r.max_residual, 1e-4);
    }
}

TEST(ModelProperties, PartitionTotalityAndValidOutput) {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int t = 0; t < 500; ++t) {
        const std::size_t n = 1 + t % 6;
        HVModel m;
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            m.f_particle.push_back(u(rng));
            m.f_wave.push_back(u(rng));
            s += m.f_particle.back() + m.f_wave.back();
            m.x.push_back(u(rng));
            m.y.push_back(u(rng));
            m.z.push_back(u(rng));
            m.v.push_back(u(rng));
            m.partition.push_back(u(rng) < 0.5 ? 0 : 1);
        }
        for (std::size_t i = 0; i < n; ++i) {
            m.f_particle[i] /= s;
            m.f_wave[i] /= s;
        }
        if (std::abs(m.total_prior() - 1.0) > 1e-12) continue;
        EXPECT_NEAR(m.cell_prior(0) + m.cell_prior(1), m.total_prior(), 1e-15);
        const auto p = model_distribution(m, 6.0 * u(rng));
        EXPECT_NO_THROW(p.validate());
    }
}

TEST(Assumptions, AlwaysHoldAdequacyAndRealism) {
    const AssumptionSet s;
    EXPECT_TRUE(s.has(Assumption::Adequacy));
    EXPECT_TRUE(s.has(Assumption::Realism));
    EXPECT_FALSE(s.deterministic());
}

TEST(Assumptions, DeterminismFlagsExclusive) {
    EXPECT_THROW((AssumptionSet{Assumption::StrongDeterminism, Assumption::WeakDeterminism}), std::invalid_argument);
    EXPECT_THROW(AssumptionSet::parse("weak-det,strong-det"), std::invalid_argument);
    EXPECT_THROW(AssumptionSet::parse("realism,telepathy"), std::invalid_argument);
}

TEST(Assumptions, ParseAndContain) {
    const auto s = AssumptionSet::parse("realism,strong-det,independence");
    EXPECT_TRUE(s.has(Assumption::Independence));
    EXPECT_TRUE(s.contains(AssumptionSet{Assumption::StrongDeterminism}));
    EXPECT_FALSE(AssumptionSet{Assumption::StrongDeterminism}.contains(s));
    EXPECT_EQ(s.names(), (std::vector<std::string>{"adequacy", "realism", "strong-det", "independence"}));
}

TEST(TargetDistribution, GeneralControlMarginal) {
    const auto q = target_distribution(0.7, 0.3, 0.5);
    EXPECT_LT(max_abs_deviation(q, analytic_distribution(0.3, 0.7)), 1e-15);
    const auto skew = target_distribution(0.7, 0.3, 0.2);
    EXPECT_NEAR(skew.marginal_c(0), 0.2, 1e-15);
    EXPECT_NEAR(skew.total(), 1.0, 1e-15);
    EXPECT_THROW(target_distribution(0.1, 0.1, 1.5), std::invalid_argument);
}

TEST(Serialization, ModelRoundTrip) {
    const auto m = construct_nonlocal_model(0.37, 1.2, 4);
    const json j = to_json(m);
    EXPECT_EQ(j.at("N").get<int>(), 4);
    for (const char* key : {"f_particle", "f_wave", "x", "y", "z", "v", "partition"}) EXPECT_TRUE(j.contains(key));
    const HVModel back = model_from_json(json::parse(j.dump()));
    EXPECT_EQ(back.f_particle, m.f_particle);
    EXPECT_EQ(back.partition, m.partition);
}
