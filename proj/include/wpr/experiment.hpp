// experiment.hpp
// Finite-statistics emulation: seeded sampling from q(a,b,c), outcome-independent
// detector losses with optional dark counts, and a Pearson chi-square test.

#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>

#include <boost/math/special_functions/gamma.hpp>

#include "wpr/quantum.hpp"

namespace wpr {

struct CountTable {
    std::array<std::uint64_t, 8> counts{};
    std::uint64_t n_trials = 0;
    std::uint64_t n_detected = 0;

    std::uint64_t operator()(int a, int b, int c) const { return counts[JointDistribution::index(a, b, c)]; }

    void validate() const {
        std::uint64_t s = 0;
        for (auto k : counts) s += k;
        if (s != n_detected || n_detected > n_trials) throw std::invalid_argument("inconsistent count table");
    }

    // Post-selected frequencies.
    std::array<double, 8> frequencies() const {
        std::array<double, 8> f{};
        if (n_detected == 0) return f;
        for (std::size_t k = 0; k < 8; ++k) f[k] = static_cast<double>(counts[k]) / static_cast<double>(n_detected);
        return f;
    }
};

struct DetectorModel {
    double eta_a = 1.0;
    double eta_b = 1.0;
    double eta_c = 1.0;
    double dark_rate = 0.0;  // chance that a detector whose photon was lost fires anyway

    void validate() const {
        for (double e : {eta_a, eta_b, eta_c}) {
            if (!(e > 0.0 && e <= 1.0)) throw std::invalid_argument("detector efficiencies must lie in (0, 1]");
        }
        if (!(dark_rate >= 0.0 && dark_rate < 1.0)) throw std::invalid_argument("dark rate must lie in [0, 1)");
        if (dark_rate >= std::min({eta_a, eta_b, eta_c})) {
            throw std::invalid_argument("dark rate must stay below every efficiency");
        }
    }

    // Chance that all three detectors click on one trial.
    double coincidence_probability() const {
        auto click = [&](double eta) { return eta + (1.0 - eta) * dark_rate; };
        return click(eta_a) * click(eta_b) * click(eta_c);
    }
};

namespace detail {

// Uniform double in [0, 1) from the top 53 bits of one engine draw.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

class OutcomeSampler {
public:
    explicit OutcomeSampler(const JointDistribution& q) {
        q.validate();
        double acc = 0.0;
        for (std::size_t k = 0; k < 8; ++k) {
            acc += q[k];
            cumulative_[k] = acc;
            if (q[k] > 0.0) last_ = k;
        }
        for (auto& c : cumulative_) c /= acc;
    }

    std::size_t operator()(std::mt19937_64& rng) const {
        const double u = uniform01(rng);
        for (std::size_t k = 0; k < last_; ++k) {
            if (u < cumulative_[k]) return k;
        }
        return last_;
    }

private:
    std::array<double, 8> cumulative_{};
    std::size_t last_ = 0;
};

}  // namespace detail

inline CountTable sample_outcomes(const JointDistribution& q, std::uint64_t n, std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("need at least one trial");
    const detail::OutcomeSampler draw(q);
    std::mt19937_64 rng(seed);
    CountTable t;
    t.n_trials = n;
    for (std::uint64_t k = 0; k < n; ++k) ++t.counts[draw(rng)];
    t.n_detected = n;
    return t;
}

// Each detector independently registers its photon with its efficiency; a detector
// that missed its photon fires with probability dark_rate and reports a uniformly
// random bit. Only triple coincidences are recorded.
inline CountTable apply_inefficiency(const JointDistribution& q, const DetectorModel& det, std::uint64_t n,
                                     std::uint64_t seed) {
    if (n == 0) throw std::invalid_argument("need at least one trial");
    det.validate();
    const detail::OutcomeSampler draw(q);
    std::mt19937_64 rng(seed);
    const std::array<double, 3> eta{det.eta_a, det.eta_b, det.eta_c};
    const double survive = det.eta_a * det.eta_b * det.eta_c;
    CountTable t;
    t.n_trials = n;
    for (std::uint64_t k = 0; k < n; ++k) {
        std::size_t cell = draw(rng);
        if (det.dark_rate == 0.0) {
            if (detail::uniform01(rng) >= survive) continue;
        } else {
            bool all_clicked = true;
            for (std::size_t d = 0; d < 3; ++d) {
                if (detail::uniform01(rng) < eta[d]) continue;
                if (detail::uniform01(rng) >= det.dark_rate) {
                    all_clicked = false;
                    break;
                }
                const std::size_t bit = std::size_t{1} << (2 - d);
                cell = detail::uniform01(rng) < 0.5 ? (cell & ~bit) : (cell | bit);
            }
            if (!all_clicked) continue;
        }
        ++t.counts[cell];
        ++t.n_detected;
    }
    return t;
}

struct ChiSquareResult {
    double statistic = 0.0;
    double p_value = 1.0;
    int dof = 0;
    bool impossible_event = false;  // counts landed in a cell with q = 0
};

// Cells with q below this are treated as impossible events.
inline constexpr double kZeroProbability = 1e-12;

inline ChiSquareResult chi_square_test(const CountTable& counts, const JointDistribution& q) {
    counts.validate();
    q.validate();
    if (counts.n_detected < 100) throw std::invalid_argument("chi-square test needs at least 100 detected events");
    const double n = static_cast<double>(counts.n_detected);
    ChiSquareResult r;
    int included = 0;
    for (std::size_t k = 0; k < 8; ++k) {
        if (q[k] < kZeroProbability) {
            if (counts.counts[k] > 0) r.impossible_event = true;
            continue;
        }
        const double expected = n * q[k];
        if (expected < 5.0) {
            throw std::invalid_argument("expected count below 5 in cell " + JointDistribution::key(k));
        }
        const double d = static_cast<double>(counts.counts[k]) - expected;
        r.statistic += d * d / expected;
        ++included;
    }
    r.dof = included - 1;
    if (r.impossible_event) {
        r.statistic = std::numeric_limits<double>::infinity();
        r.p_value = 0.0;
        return r;
    }
    r.p_value = r.dof > 0 ? boost::math::gamma_q(0.5 * r.dof, 0.5 * r.statistic) : 1.0;
    return r;
}

// max_k |f_k - q_k| / σ_k with σ_k the binomial deviation of a post-selected cell.
inline double max_sigma_deviation(const CountTable& counts, const JointDistribution& q) {
    const double n = static_cast<double>(counts.n_detected);
    const auto f = counts.frequencies();
    double worst = 0.0;
    for (std::size_t k = 0; k < 8; ++k) {
        if (q[k] < kZeroProbability) {
            if (counts.counts[k] > 0) return std::numeric_limits<double>::infinity();
            continue;
        }
        const double sigma = std::sqrt(q[k] * (1.0 - q[k]) / n);
        worst = std::max(worst, std::abs(f[k] - q[k]) / sigma);
    }
    return worst;
}

}  // namespace wpr
