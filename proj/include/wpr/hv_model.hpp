// hv_model.hpp
// Finite hidden-variable theories with a dichotomic particle/wave label.
//
// Each index i of the hidden-variable list Λ carries two priors, f_p^i (photon is a
// particle) and f_w^i (photon is a wave). The D_c outcome is fixed by i through the
// partition I_0 / I_1. A particle in an open interferometer gives a = (½, ½); a wave
// in a closed one gives a = (cos²(φ/2), sin²(φ/2)). The two remaining behaviours are
// the free tables x_i (wave, open) and y_i (particle, closed).

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

#include "wpr/quantum.hpp"

namespace wpr {

// Absolute tolerance for equality constraints and adequacy checks.
inline constexpr double kEqualityTolerance = 1e-9;

struct HVModel {
    std::vector<double> f_particle;
    std::vector<double> f_wave;
    std::vector<double> x;  // p(a=0 | b=0, wave, i)
    std::vector<double> y;  // p(a=0 | b=1, particle, i)
    std::vector<double> z;  // p(b=0 | particle, i)
    std::vector<double> v;  // p(b=0 | wave, i)
    std::vector<int> partition;  // c outcome of index i

    std::size_t size() const { return partition.size(); }

    double total_prior() const {
        double s = 0.0;
        for (std::size_t i = 0; i < size(); ++i) s += f_particle[i] + f_wave[i];
        return s;
    }

    double cell_prior(int c) const {
        double s = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            if (partition[i] == c) s += f_particle[i] + f_wave[i];
        }
        return s;
    }

    // Throws std::invalid_argument on the first broken invariant.
    void validate(bool binary_b_outcomes = false) const {
        const std::size_t n = partition.size();
        if (n == 0) throw std::invalid_argument("HVModel needs at least one hidden-variable index");
        if (f_particle.size() != n || f_wave.size() != n || x.size() != n || y.size() != n || z.size() != n ||
            v.size() != n) {
            throw std::invalid_argument("HVModel field lengths disagree");
        }
        auto unit = [](double t) { return std::isfinite(t) && t >= 0.0 && t <= 1.0; };
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(f_particle[i]) || !std::isfinite(f_wave[i]) || f_particle[i] < 0.0 ||
                f_wave[i] < 0.0) {
                throw std::invalid_argument("HVModel priors must be finite and nonnegative");
            }
            if (!unit(x[i]) || !unit(y[i]) || !unit(z[i]) || !unit(v[i])) {
                throw std::invalid_argument("HVModel conditional tables must lie in [0, 1]");
            }
            if (binary_b_outcomes && ((z[i] != 0.0 && z[i] != 1.0) || (v[i] != 0.0 && v[i] != 1.0))) {
                throw std::invalid_argument("strong determinism needs binary z and v");
            }
            if (partition[i] != 0 && partition[i] != 1) {
                throw std::invalid_argument("partition entries must be 0 or 1");
            }
        }
        if (std::abs(total_prior() - 1.0) > 1e-12) {
            throw std::invalid_argument("HVModel priors must sum to 1");
        }
    }
};

// p(a,b,c) = Σ_{λ,i} p(a|b,λ,i) p(b|λ,i) p(c|i) f_λ^i.
inline JointDistribution model_distribution(const HVModel& m, double phi) {
    m.validate();
    const double fringe = std::cos(phi / 2.0) * std::cos(phi / 2.0);
    JointDistribution p;
    for (std::size_t i = 0; i < m.size(); ++i) {
        const int c = m.partition[i];
        const double fp = m.f_particle[i];
        const double fw = m.f_wave[i];
        // particle, open
        p(0, 0, c) += 0.5 * m.z[i] * fp;
        p(1, 0, c) += 0.5 * m.z[i] * fp;
        // particle, closed
        p(0, 1, c) += m.y[i] * (1.0 - m.z[i]) * fp;
        p(1, 1, c) += (1.0 - m.y[i]) * (1.0 - m.z[i]) * fp;
        // wave, open
        p(0, 0, c) += m.x[i] * m.v[i] * fw;
        p(1, 0, c) += (1.0 - m.x[i]) * m.v[i] * fw;
        // wave, closed
        p(0, 1, c) += fringe * (1.0 - m.v[i]) * fw;
        p(1, 1, c) += (1.0 - fringe) * (1.0 - m.v[i]) * fw;
    }
    return p;
}

struct AdequacyReport {
    std::array<double, 8> residuals{};
    double max_residual = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

inline AdequacyReport check_adequacy(const JointDistribution& predicted, const JointDistribution& q, double tol) {
    if (!(tol > 0.0)) throw std::invalid_argument("adequacy tolerance must be positive");
    AdequacyReport r;
    r.tolerance = tol;
    for (std::size_t k = 0; k < 8; ++k) {
        r.residuals[k] = std::abs(predicted[k] - q[k]);
        r.max_residual = std::max(r.max_residual, r.residuals[k]);
    }
    r.passed = r.max_residual < tol;
    return r;
}

inline AdequacyReport check_adequacy(const HVModel& m, double phi, const JointDistribution& q, double tol) {
    return check_adequacy(model_distribution(m, phi), q, tol);
}

// q(a,b,c) for a control pair whose c-marginal is q0 instead of ½. Equal to
// analytic_distribution(phi, alpha) at q0 = ½.
inline JointDistribution target_distribution(double alpha, double phi, double q0) {
    if (!(q0 >= 0.0 && q0 <= 1.0)) throw std::invalid_argument("q0 must lie in [0, 1]");
    const double c2 = std::cos(alpha) * std::cos(alpha);
    const double s2 = std::sin(alpha) * std::sin(alpha);
    const double k = std::cos(phi / 2.0) * std::cos(phi / 2.0);
    const double kc = std::sin(phi / 2.0) * std::sin(phi / 2.0);
    JointDistribution q;
    for (int a = 0; a < 2; ++a) {
        q(a, 0, 0) = 0.5 * q0 * c2;
        q(a, 0, 1) = 0.5 * (1.0 - q0) * s2;
    }
    q(0, 1, 0) = q0 * s2 * k;
    q(1, 1, 0) = q0 * s2 * kc;
    q(0, 1, 1) = (1.0 - q0) * c2 * k;
    q(1, 1, 1) = (1.0 - q0) * c2 * kc;
    return q;
}

// Residuals of the two a=0, b=1 equations of a model, in the form they take once
// the b-marginals hold. They should vanish for every model obeying the reduced
// system; the engine checks this instead of assuming it.
inline std::array<double, 2> fringe_residuals(const HVModel& m, double phi, double q0) {
    const double k = std::cos(phi / 2.0) * std::cos(phi / 2.0);
    std::array<double, 2> out{};
    const std::array<double, 2> qc{q0, 1.0 - q0};
    for (int c = 0; c < 2; ++c) {
        double waves = 0.0;
        double rhs = 0.0;
        for (std::size_t i = 0; i < m.size(); ++i) {
            if (m.partition[i] != c) continue;
            waves += m.f_wave[i];
            rhs += m.f_particle[i] * (m.z[i] * k + m.y[i] * (1.0 - m.z[i]));
        }
        out[c] = std::abs(k * (qc[c] - waves) - rhs);
    }
    return out;
}

enum class Assumption : std::uint8_t {
    Adequacy,
    Realism,
    StrongDeterminism,
    WeakDeterminism,
    Independence,
    DelayedAlphaChoice,
};

inline std::string to_string(Assumption a) {
    switch (a) {
        case Assumption::Adequacy: return "adequacy";
        case Assumption::Realism: return "realism";
        case Assumption::StrongDeterminism: return "strong-det";
        case Assumption::WeakDeterminism: return "weak-det";
        case Assumption::Independence: return "independence";
        case Assumption::DelayedAlphaChoice: return "delayed-alpha";
    }
    return "?";
}

inline Assumption parse_assumption(const std::string& s) {
    for (auto a : {Assumption::Adequacy, Assumption::Realism, Assumption::StrongDeterminism,
                   Assumption::WeakDeterminism, Assumption::Independence, Assumption::DelayedAlphaChoice}) {
        if (to_string(a) == s) return a;
    }
    throw std::invalid_argument("unknown assumption: " + s);
}

// Adequacy and realism are always present: they define the model class.
class AssumptionSet {
public:
    AssumptionSet() { bits_ = bit(Assumption::Adequacy) | bit(Assumption::Realism); }
    AssumptionSet(std::initializer_list<Assumption> flags) : AssumptionSet() {
        for (auto a : flags) add(a);
    }

    AssumptionSet& add(Assumption a) {
        if ((a == Assumption::StrongDeterminism && has(Assumption::WeakDeterminism)) ||
            (a == Assumption::WeakDeterminism && has(Assumption::StrongDeterminism))) {
            throw std::invalid_argument("strong and weak determinism are mutually exclusive");
        }
        bits_ |= bit(a);
        return *this;
    }
    bool has(Assumption a) const { return (bits_ & bit(a)) != 0; }
    bool deterministic() const { return has(Assumption::StrongDeterminism) || has(Assumption::WeakDeterminism); }
    bool contains(const AssumptionSet& other) const { return (bits_ & other.bits_) == other.bits_; }

    std::vector<std::string> names() const {
        std::vector<std::string> out;
        for (std::uint8_t k = 0; k < 6; ++k) {
            if (bits_ & (1u << k)) out.push_back(to_string(static_cast<Assumption>(k)));
        }
        return out;
    }

    // Comma-separated list, e.g. "realism,strong-det,independence".
    static AssumptionSet parse(const std::string& list) {
        AssumptionSet s;
        std::size_t start = 0;
        while (start <= list.size()) {
            const std::size_t end = std::min(list.find(',', start), list.size());
            const std::string tok = list.substr(start, end - start);
            if (!tok.empty()) s.add(parse_assumption(tok));
            start = end + 1;
        }
        return s;
    }

    friend bool operator==(const AssumptionSet&, const AssumptionSet&) = default;

private:
    static std::uint8_t bit(Assumption a) { return static_cast<std::uint8_t>(1u << static_cast<std::uint8_t>(a)); }
    std::uint8_t bits_ = 0;
};

// Explicit model obeying adequacy, realism and strong determinism when the priors
// may depend on α: particles always see an open interferometer, waves a closed one,
// and the D_c cell of each index carries ½cos²α (c=0) or ½sin²α (c=1) of particles.
// The priors do not depend on φ; the argument is kept for symmetry with the checks.
inline HVModel construct_nonlocal_model(double alpha, [[maybe_unused]] double phi, std::size_t n) {
    if (n < 2) throw std::invalid_argument("construct_nonlocal_model needs N >= 2");
    const double c2 = std::cos(alpha) * std::cos(alpha);
    const double s2 = std::sin(alpha) * std::sin(alpha);
    HVModel m;
    m.f_particle.assign(n, 0.0);
    m.f_wave.assign(n, 0.0);
    m.x.assign(n, 0.5);
    m.y.assign(n, 0.5);
    m.z.assign(n, 1.0);
    m.v.assign(n, 0.0);
    m.partition.assign(n, 0);
    m.partition[1] = 1;
    m.f_particle[0] = 0.5 * c2;
    m.f_wave[0] = 0.5 * s2;
    m.f_particle[1] = 0.5 * s2;
    m.f_wave[1] = 0.5 * c2;
    // Rounding may leave the total a few ulps off 1.
    const double total = m.total_prior();
    for (std::size_t i = 0; i < 2; ++i) {
        m.f_particle[i] /= total;
        m.f_wave[i] /= total;
    }
    return m;
}

}  // namespace wpr
