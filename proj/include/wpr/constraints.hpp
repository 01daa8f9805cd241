// constraints.hpp
// Linear constraint systems over hidden-variable priors, conditioned on a fixed
// discrete structure (b outcomes z, v and the c partition).
//
// Adequacy is eight cell equations per (α, φ) setting. They are emitted as the
// equivalent independent combinations: normalization, the c-marginal, and for each
// c the b=0 marginal, the a-split inside b=0 ("interference"), and the a=0 count
// inside b=1 ("fringe"). Products of a free table with a prior are linearized
// exactly, e.g. u_i = x_i v_i f_w^i with 0 <= u_i <= v_i f_w^i.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wpr/hv_model.hpp"
#include "wpr/quantum.hpp"

namespace wpr {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarKind {
    ParticlePrior,     // f_p^i
    WavePrior,         // f_w^i
    SharedPrior,       // F_i under the product form f_p^i = f F_i, f_w^i = (1-f) F_i
    ParticleOpenMass,  // z_i f_p^i when z is not fixed
    WaveOpenMass,      // v_i f_w^i when v is not fixed
    OpenWaveZero,      // x_i v_i f_w^i
    ClosedParticleZero,  // y_i (1 - z_i) f_p^i
    Generic,
};

struct Variable {
    VarKind kind = VarKind::Generic;
    int index = 0;
    double lower = 0.0;
    double upper = kInf;
    std::string label;  // Generic only

    std::string name() const {
        const std::string i = "[" + std::to_string(index) + "]";
        switch (kind) {
            case VarKind::ParticlePrior: return "f_p" + i;
            case VarKind::WavePrior: return "f_w" + i;
            case VarKind::SharedPrior: return "F" + i;
            case VarKind::ParticleOpenMass: return "zf_p" + i;
            case VarKind::WaveOpenMass: return "vf_w" + i;
            case VarKind::OpenWaveZero: return "u" + i;
            case VarKind::ClosedParticleZero: return "t" + i;
            case VarKind::Generic: return label;
        }
        return "?";
    }
};

struct Term {
    std::size_t var;
    double coeff;
};

// Sparse linear form; terms on the same variable are merged.
class LinearExpr {
public:
    LinearExpr() = default;
    LinearExpr(std::size_t var, double coeff) { add(var, coeff); }

    LinearExpr& add(std::size_t var, double coeff) {
        if (coeff == 0.0) return *this;
        for (auto& t : terms_) {
            if (t.var == var) {
                t.coeff += coeff;
                return *this;
            }
        }
        terms_.push_back({var, coeff});
        return *this;
    }
    LinearExpr& add(const LinearExpr& other, double scale = 1.0) {
        for (const auto& t : other.terms_) add(t.var, scale * t.coeff);
        return *this;
    }
    LinearExpr scaled(double s) const {
        LinearExpr out;
        out.add(*this, s);
        return out;
    }
    bool empty() const {
        return std::all_of(terms_.begin(), terms_.end(), [](const Term& t) { return t.coeff == 0.0; });
    }
    const std::vector<Term>& terms() const { return terms_; }
    // Overwrites the k-th stored coefficient, keeping the term even at zero.
    void set_coefficient(std::size_t k, double coeff) { terms_.at(k).coeff = coeff; }

private:
    std::vector<Term> terms_;
};

enum class Relation { Equal, GreaterEqual };

enum class RowKind {
    Normalization,
    CMarginal,      // Σ_{I_c} (f_p + f_w) = q(c)
    BMarginal,      // Σ_{I_c} (z f_p + v f_w) = q(b=0, c)
    Interference,   // Σ_{I_c} (x_i - ½) v_i f_w^i = q(0,0,c) - ½ q(b=0,c)
    Fringe,         // Σ_{I_c} [y_i (1-z_i) f_p^i + cos²(φ/2)(1-v_i) f_w^i] = q(0,1,c)
    Sector,         // Σ_{I_c} f_p = q0 cos²α  /  (1-q0) sin²α
    CrossCoefficient,  // coefficient of a free x_i or y_i, forced to zero
    Link,           // substitution variable stays below its prior mass
    Generic,
};

inline std::string to_string(RowKind k) {
    switch (k) {
        case RowKind::Normalization: return "normalization";
        case RowKind::CMarginal: return "c_marginal";
        case RowKind::BMarginal: return "b_marginal";
        case RowKind::Interference: return "interference";
        case RowKind::Fringe: return "fringe";
        case RowKind::Sector: return "sector";
        case RowKind::CrossCoefficient: return "cross_coefficient";
        case RowKind::Link: return "link";
        case RowKind::Generic: return "row";
    }
    return "?";
}

struct Constraint {
    RowKind kind = RowKind::Generic;
    int cell = -1;     // c, when the row belongs to one partition cell
    int setting = -1;  // index into metadata.settings, -1 when setting-independent
    LinearExpr lhs;
    Relation relation = Relation::Equal;
    double rhs = 0.0;

    std::string label() const {
        std::string s = to_string(kind);
        if (cell >= 0) s += "[c=" + std::to_string(cell) + "]";
        if (setting >= 0) s += "@" + std::to_string(setting);
        return s;
    }
};

// z and v left empty mean "not fixed": the b outcome masses become variables.
struct DiscreteAssignment {
    std::vector<double> z;
    std::vector<double> v;
    std::vector<int> partition;

    std::size_t size() const { return partition.size(); }
    bool fixed_b() const { return !z.empty(); }

    void validate() const {
        const std::size_t n = partition.size();
        if (n == 0) throw std::invalid_argument("discrete assignment is empty");
        if (z.size() != v.size() || (!z.empty() && z.size() != n)) {
            throw std::invalid_argument("inconsistent discrete assignment dimensions");
        }
        for (int c : partition) {
            if (c != 0 && c != 1) throw std::invalid_argument("partition entries must be 0 or 1");
        }
        for (std::size_t i = 0; i < z.size(); ++i) {
            if (!(z[i] >= 0.0 && z[i] <= 1.0 && v[i] >= 0.0 && v[i] <= 1.0)) {
                throw std::invalid_argument("z and v must lie in [0, 1]");
            }
        }
    }
    bool binary() const {
        for (std::size_t i = 0; i < z.size(); ++i) {
            if ((z[i] != 0.0 && z[i] != 1.0) || (v[i] != 0.0 && v[i] != 1.0)) return false;
        }
        return fixed_b();
    }
};

struct Setting {
    double alpha;
    double phi;
};

struct SystemMetadata {
    std::vector<Setting> settings;
    double q0 = 0.5;
    std::optional<double> independence_f;
};

struct ConstraintSystem {
    std::vector<Variable> variables;
    std::vector<Constraint> constraints;
    DiscreteAssignment discrete;
    SystemMetadata metadata;

    std::size_t add_variable(Variable v) {
        variables.push_back(std::move(v));
        return variables.size() - 1;
    }

    std::size_t add_variable(VarKind kind, int index) {
        Variable v;
        v.kind = kind;
        v.index = index;
        return add_variable(std::move(v));
    }

    void add(Constraint c) {
        if (c.lhs.empty()) {
            // Rows that reduce to 0 = 0 carry no information.
            if (std::abs(c.rhs) <= 1e-15 && c.relation == Relation::Equal) return;
            if (c.rhs <= 0.0 && c.relation == Relation::GreaterEqual) return;
        }
        constraints.push_back(std::move(c));
    }

    std::size_t count(RowKind k) const {
        return static_cast<std::size_t>(std::count_if(constraints.begin(), constraints.end(),
                                                      [k](const Constraint& c) { return c.kind == k; }));
    }

    void validate() const {
        for (const auto& v : variables) {
            if (std::isnan(v.lower) || std::isnan(v.upper) || v.lower > v.upper || !std::isfinite(v.lower)) {
                throw std::invalid_argument("variable " + v.name() + " has invalid bounds");
            }
        }
        for (const auto& c : constraints) {
            if (!std::isfinite(c.rhs)) throw std::invalid_argument("constraint " + c.label() + " has a non-finite constant");
            for (const auto& t : c.lhs.terms()) {
                if (t.var >= variables.size()) {
                    throw std::invalid_argument("constraint " + c.label() + " references an undeclared variable");
                }
                if (!std::isfinite(t.coeff)) {
                    throw std::invalid_argument("constraint " + c.label() + " has a non-finite coefficient");
                }
            }
        }
    }

    double evaluate(const LinearExpr& e, std::span<const double> point) const {
        double s = 0.0;
        for (const auto& t : e.terms()) s += t.coeff * point[t.var];
        return s;
    }

    // Violation of one row at a point; zero when satisfied.
    double violation(const Constraint& c, std::span<const double> point) const {
        const double lhs = evaluate(c.lhs, point);
        return c.relation == Relation::Equal ? std::abs(lhs - c.rhs) : std::max(0.0, c.rhs - lhs);
    }

    // Largest violation over rows and variable bounds.
    double max_violation(std::span<const double> point) const {
        double m = 0.0;
        for (const auto& c : constraints) m = std::max(m, violation(c, point));
        for (std::size_t j = 0; j < variables.size(); ++j) {
            m = std::max(m, variables[j].lower - point[j]);
            m = std::max(m, point[j] - variables[j].upper);
        }
        return m;
    }

    double total_violation(std::span<const double> point) const {
        double s = 0.0;
        for (const auto& c : constraints) s += violation(c, point);
        return s;
    }

    // Smallest slack over inequality rows and finite bounds, or 0 when there are none.
    double min_slack(std::span<const double> point) const {
        double m = kInf;
        for (const auto& c : constraints) {
            if (c.relation == Relation::GreaterEqual) m = std::min(m, evaluate(c.lhs, point) - c.rhs);
        }
        for (std::size_t j = 0; j < variables.size(); ++j) {
            m = std::min(m, point[j] - variables[j].lower);
            if (std::isfinite(variables[j].upper)) m = std::min(m, variables[j].upper - point[j]);
        }
        return std::isfinite(m) ? m : 0.0;
    }

    // One constraint per line: "LHS = RHS" or "LHS >= RHS", followed by the bounds.
    std::string to_text() const {
        std::ostringstream os;
        os.precision(17);
        auto write_expr = [&](const LinearExpr& e) {
            bool first = true;
            for (const auto& t : e.terms()) {
                if (t.coeff == 0.0) continue;
                if (!first) os << (t.coeff < 0 ? " - " : " + ");
                else if (t.coeff < 0) os << "-";
                os << std::abs(t.coeff) << "*" << variables[t.var].name();
                first = false;
            }
            if (first) os << "0";
        };
        for (const auto& c : constraints) {
            write_expr(c.lhs);
            os << (c.relation == Relation::Equal ? " = " : " >= ") << c.rhs << "  # " << c.label() << "\n";
        }
        for (const auto& v : variables) {
            os << v.name() << " >= " << v.lower << "  # bound\n";
            if (std::isfinite(v.upper)) os << "-1*" << v.name() << " >= " << -v.upper << "  # bound\n";
        }
        return os.str();
    }
};

// How the two unprescribed behaviours (wave in an open interferometer, particle in
// a closed one) enter the system.
enum class CrossStatistics {
    Arbitrary,  // adequacy must hold whatever x and y are: their coefficients vanish
    Fitted,     // the model may choose x and y
    Fixed,      // x and y given
};

inline std::string to_string(CrossStatistics c) {
    switch (c) {
        case CrossStatistics::Arbitrary: return "arbitrary";
        case CrossStatistics::Fitted: return "fitted";
        case CrossStatistics::Fixed: return "fixed";
    }
    return "?";
}

inline CrossStatistics parse_cross_statistics(const std::string& s) {
    if (s == "arbitrary") return CrossStatistics::Arbitrary;
    if (s == "fitted") return CrossStatistics::Fitted;
    if (s == "fixed") return CrossStatistics::Fixed;
    throw std::invalid_argument("unknown cross-statistics mode: " + s);
}

struct BuildOptions {
    CrossStatistics cross = CrossStatistics::Arbitrary;
    std::optional<double> independence_f;  // product-form priors at this f
    std::vector<double> fixed_x;           // CrossStatistics::Fixed only
    std::vector<double> fixed_y;
};

struct AdequacyTarget {
    Setting setting;
    JointDistribution q;
};

// Handles on the per-index quantities of a built system, for reading a solution back.
struct PriorLayout {
    std::vector<LinearExpr> particle;     // f_p^i
    std::vector<LinearExpr> wave;         // f_w^i
    std::vector<LinearExpr> particle_open;  // z_i f_p^i
    std::vector<LinearExpr> wave_open;      // v_i f_w^i
    std::vector<std::optional<std::size_t>> open_wave_zero;       // u_i
    std::vector<std::optional<std::size_t>> closed_particle_zero;  // t_i
};

namespace detail {

inline PriorLayout declare_priors(ConstraintSystem& sys, const DiscreteAssignment& d, const BuildOptions& opt) {
    const std::size_t n = d.size();
    PriorLayout L;
    L.particle.resize(n);
    L.wave.resize(n);
    L.particle_open.resize(n);
    L.wave_open.resize(n);
    L.open_wave_zero.resize(n);
    L.closed_particle_zero.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const int idx = static_cast<int>(i);
        if (opt.independence_f) {
            const double f = *opt.independence_f;
            const auto F = sys.add_variable(VarKind::SharedPrior, idx);
            L.particle[i] = LinearExpr(F, f);
            L.wave[i] = LinearExpr(F, 1.0 - f);
        } else {
            L.particle[i] = LinearExpr(sys.add_variable(VarKind::ParticlePrior, idx), 1.0);
            L.wave[i] = LinearExpr(sys.add_variable(VarKind::WavePrior, idx), 1.0);
        }
        if (d.fixed_b()) {
            L.particle_open[i] = L.particle[i].scaled(d.z[i]);
            L.wave_open[i] = L.wave[i].scaled(d.v[i]);
        } else {
            const auto zp = sys.add_variable(VarKind::ParticleOpenMass, idx);
            const auto vw = sys.add_variable(VarKind::WaveOpenMass, idx);
            L.particle_open[i] = LinearExpr(zp, 1.0);
            L.wave_open[i] = LinearExpr(vw, 1.0);
            sys.add({RowKind::Link, -1, -1, LinearExpr().add(L.particle[i]).add(zp, -1.0), Relation::GreaterEqual, 0.0});
            sys.add({RowKind::Link, -1, -1, LinearExpr().add(L.wave[i]).add(vw, -1.0), Relation::GreaterEqual, 0.0});
        }
    }
    return L;
}

// A nonnegative multiple of a single variable forced to zero is a bound, not a row.
inline void force_zero(ConstraintSystem& sys, const LinearExpr& e, int cell) {
    if (e.empty()) return;
    std::size_t nonzero = 0;
    std::size_t var = 0;
    for (const auto& t : e.terms()) {
        if (t.coeff != 0.0) {
            ++nonzero;
            var = t.var;
        }
    }
    if (nonzero == 1 && sys.variables[var].lower == 0.0) {
        sys.variables[var].upper = 0.0;
        return;
    }
    sys.add({RowKind::CrossCoefficient, cell, -1, e, Relation::Equal, 0.0});
}

}  // namespace detail

// Adequacy for every target at once, with shared priors and discrete structure.
inline ConstraintSystem build_adequacy_system(std::span<const AdequacyTarget> targets, const DiscreteAssignment& d,
                                              const BuildOptions& opt, PriorLayout* layout_out = nullptr) {
    d.validate();
    if (targets.empty()) throw std::invalid_argument("at least one adequacy target is required");
    if (opt.independence_f && !(*opt.independence_f >= 0.0 && *opt.independence_f <= 1.0)) {
        throw std::invalid_argument("independence f must lie in [0, 1]");
    }
    const std::size_t n = d.size();
    if (opt.cross == CrossStatistics::Fixed && (opt.fixed_x.size() != n || opt.fixed_y.size() != n)) {
        throw std::invalid_argument("fixed cross statistics need x and y for every index");
    }

    ConstraintSystem sys;
    sys.discrete = d;
    sys.metadata.q0 = targets.front().q.marginal_c(0);
    sys.metadata.independence_f = opt.independence_f;
    for (const auto& t : targets) sys.metadata.settings.push_back(t.setting);

    PriorLayout L = detail::declare_priors(sys, d, opt);

    // Mass that reaches each (b, c) block, and the a=0 share of the free behaviours.
    std::vector<LinearExpr> particle_closed(n), wave_closed(n), open_wave_a0(n), closed_particle_a0(n);
    for (std::size_t i = 0; i < n; ++i) {
        particle_closed[i] = LinearExpr().add(L.particle[i]).add(L.particle_open[i], -1.0);
        wave_closed[i] = LinearExpr().add(L.wave[i]).add(L.wave_open[i], -1.0);
        const int idx = static_cast<int>(i);
        switch (opt.cross) {
            case CrossStatistics::Fitted:
                if (!L.wave_open[i].empty()) {
                    const auto u = sys.add_variable(VarKind::OpenWaveZero, idx);
                    L.open_wave_zero[i] = u;
                    open_wave_a0[i] = LinearExpr(u, 1.0);
                    sys.add({RowKind::Link, d.partition[i], -1, LinearExpr().add(L.wave_open[i]).add(u, -1.0),
                             Relation::GreaterEqual, 0.0});
                }
                if (!particle_closed[i].empty()) {
                    const auto t = sys.add_variable(VarKind::ClosedParticleZero, idx);
                    L.closed_particle_zero[i] = t;
                    closed_particle_a0[i] = LinearExpr(t, 1.0);
                    sys.add({RowKind::Link, d.partition[i], -1, LinearExpr().add(particle_closed[i]).add(t, -1.0),
                             Relation::GreaterEqual, 0.0});
                }
                break;
            case CrossStatistics::Fixed:
                open_wave_a0[i] = L.wave_open[i].scaled(opt.fixed_x[i]);
                closed_particle_a0[i] = particle_closed[i].scaled(opt.fixed_y[i]);
                break;
            case CrossStatistics::Arbitrary:
                // Σ (x_i - ½) v_i f_w^i and Σ y_i (1-z_i) f_p^i must not depend on x, y.
                detail::force_zero(sys, L.wave_open[i], d.partition[i]);
                detail::force_zero(sys, particle_closed[i], d.partition[i]);
                break;
        }
    }

    LinearExpr all;
    for (std::size_t i = 0; i < n; ++i) all.add(L.particle[i]).add(L.wave[i]);
    sys.add({RowKind::Normalization, -1, -1, all, Relation::Equal, 1.0});

    std::optional<double> c0_mass;
    for (std::size_t s = 0; s < targets.size(); ++s) {
        const JointDistribution& q = targets[s].q;
        const double phi = targets[s].setting.phi;
        const double fringe = std::cos(phi / 2.0) * std::cos(phi / 2.0);
        const int si = static_cast<int>(s);

        if (!c0_mass || std::abs(*c0_mass - q.marginal_c(0)) > 0.0) {
            LinearExpr e;
            for (std::size_t i = 0; i < n; ++i) {
                if (d.partition[i] == 0) e.add(L.particle[i]).add(L.wave[i]);
            }
            sys.add({RowKind::CMarginal, 0, c0_mass ? si : -1, e, Relation::Equal, q.marginal_c(0)});
            c0_mass = q.marginal_c(0);
        }

        for (int c = 0; c < 2; ++c) {
            LinearExpr b0, interference, fringe_row;
            for (std::size_t i = 0; i < n; ++i) {
                if (d.partition[i] != c) continue;
                b0.add(L.particle_open[i]).add(L.wave_open[i]);
                interference.add(open_wave_a0[i]).add(L.wave_open[i], -0.5);
                fringe_row.add(closed_particle_a0[i]).add(wave_closed[i], fringe);
            }
            const double qb0 = q.marginal_bc(0, c);
            sys.add({RowKind::BMarginal, c, si, b0, Relation::Equal, qb0});
            sys.add({RowKind::Interference, c, si, interference, Relation::Equal, q(0, 0, c) - 0.5 * qb0});
            sys.add({RowKind::Fringe, c, si, fringe_row, Relation::Equal, q(0, 1, c)});
        }
    }
    if (layout_out) *layout_out = std::move(L);
    return sys;
}

enum class Reduction {
    None,               // full system, x and y fitted by substitution
    CrossUndetermined,  // v_i f_w^i = 0 and z_i = 1 imposed, sector equations only
};

// The adequacy system written with the control-pair marginal q0 as a parameter.
// With Reduction::CrossUndetermined the system keeps only the sector equations
// Σ_{I0} f_p = q0 cos²α, Σ_{I1} f_p = (1-q0) sin²α, the c-marginal and
// normalization; waves seeing an open interferometer and particles seeing a closed
// one are removed through their bounds.
inline ConstraintSystem reduce_constraints(double alpha, double phi, double q0, const DiscreteAssignment& d,
                                           const AssumptionSet& assumptions, Reduction reduction,
                                           std::optional<double> independence_f = std::nullopt) {
    d.validate();
    if (!d.binary()) throw std::invalid_argument("reduce_constraints needs a binary discrete assignment");
    if (!(q0 >= 0.0 && q0 <= 1.0)) throw std::invalid_argument("q0 must lie in [0, 1]");
    if (assumptions.has(Assumption::Independence) && !independence_f) {
        throw std::invalid_argument("independence needs a value of f");
    }
    BuildOptions opt;
    opt.independence_f = assumptions.has(Assumption::Independence) ? independence_f : std::nullopt;

    const AdequacyTarget target{{alpha, phi}, target_distribution(alpha, phi, q0)};
    if (reduction == Reduction::None) {
        opt.cross = CrossStatistics::Fitted;
        return build_adequacy_system(std::span(&target, 1), d, opt);
    }

    ConstraintSystem sys;
    sys.discrete = d;
    sys.metadata = {{target.setting}, q0, opt.independence_f};
    PriorLayout L = detail::declare_priors(sys, d, opt);
    const std::size_t n = d.size();
    for (std::size_t i = 0; i < n; ++i) {
        // v_i f_w^i = 0 and (1 - z_i) f_p^i = 0.
        if (d.v[i] == 1.0) detail::force_zero(sys, L.wave[i], d.partition[i]);
        if (d.z[i] == 0.0) detail::force_zero(sys, L.particle[i], d.partition[i]);
    }
    LinearExpr all, c0, sector0, sector1;
    for (std::size_t i = 0; i < n; ++i) {
        all.add(L.particle[i]).add(L.wave[i]);
        if (d.partition[i] == 0) {
            c0.add(L.particle[i]).add(L.wave[i]);
            sector0.add(L.particle[i]);
        } else {
            sector1.add(L.particle[i]);
        }
    }
    const double c2 = std::cos(alpha) * std::cos(alpha);
    const double s2 = std::sin(alpha) * std::sin(alpha);
    sys.add({RowKind::Sector, 0, 0, sector0, Relation::Equal, q0 * c2});
    sys.add({RowKind::Sector, 1, 0, sector1, Relation::Equal, (1.0 - q0) * s2});
    sys.add({RowKind::CMarginal, 0, -1, c0, Relation::Equal, q0});
    sys.add({RowKind::Normalization, -1, -1, all, Relation::Equal, 1.0});
    return sys;
}

}  // namespace wpr
