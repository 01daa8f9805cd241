// feasibility.hpp
// Decides whether a hidden-variable theory with given assumptions can reproduce
// the entanglement-assisted statistics, by enumerating discrete structures and
// solving one linear feasibility problem per structure.
//
// Branches. An index of Λ is characterised by its type: the b outcome of a
// particle, the b outcome of a wave and the c outcome. Every row of an adequacy
// system is a sum over indices with coefficients fixed by the type, so two
// indices of the same type can be merged, and an index can always be added with
// zero priors. Feasibility of an N-index structure therefore depends only on the
// set of types it uses, and it is enough to scan the sets of exactly min(N, T)
// distinct types, T being the number of types of the determinism encoding.

#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "wpr/constraints.hpp"
#include "wpr/hv_model.hpp"
#include "wpr/quantum.hpp"
#include "wpr/simplex.hpp"

namespace wpr {

inline constexpr std::size_t kMaxEnumeratedN = 8;

// One hidden-variable index type. With continuous b outcomes only the cell is set.
struct IndexType {
    std::optional<int> particle_b;  // b seen by a particle
    std::optional<int> wave_b;      // b seen by a wave
    int c = 0;

    std::string code() const {
        std::string s = "c" + std::to_string(c);
        if (particle_b) s += "p" + std::to_string(*particle_b);
        if (wave_b) s += "w" + std::to_string(*wave_b);
        return s;
    }
};

// Strong determinism: b and c fixed individually; eight types ordered by (c, b_p, b_w).
inline std::vector<IndexType> strong_determinism_types() {
    std::vector<IndexType> out;
    for (int c = 0; c < 2; ++c)
        for (int bp = 0; bp < 2; ++bp)
            for (int bw = 0; bw < 2; ++bw) out.push_back({bp, bw, c});
    return out;
}

// Weak determinism: each hidden-variable point (λ, Λ^i) is sent to one of the four
// joint (b, c) cells. The c cell of a particle and a wave sharing Λ^i must agree,
// following the convention that I_0 and I_1 are sets of Λ indices.
inline std::vector<IndexType> weak_determinism_types() {
    std::vector<IndexType> out;
    for (int particle_cell = 0; particle_cell < 4; ++particle_cell) {
        for (int wave_cell = 0; wave_cell < 4; ++wave_cell) {
            const int pc = particle_cell & 1, wc = wave_cell & 1;
            if (pc != wc) continue;
            out.push_back({particle_cell >> 1, wave_cell >> 1, pc});
        }
    }
    std::sort(out.begin(), out.end(), [](const IndexType& l, const IndexType& r) {
        return std::tie(l.c, *l.particle_b, *l.wave_b) < std::tie(r.c, *r.particle_b, *r.wave_b);
    });
    return out;
}

inline std::vector<IndexType> continuous_b_types() { return {{std::nullopt, std::nullopt, 0}, {std::nullopt, std::nullopt, 1}}; }

inline std::vector<IndexType> index_types(const AssumptionSet& a) {
    if (a.has(Assumption::WeakDeterminism)) return weak_determinism_types();
    if (a.has(Assumption::StrongDeterminism)) return strong_determinism_types();
    return continuous_b_types();
}

// z_i = p(b=0 | particle) and v_i = p(b=0 | wave) for a list of types.
inline DiscreteAssignment to_assignment(const std::vector<IndexType>& types) {
    DiscreteAssignment d;
    for (const auto& t : types) {
        d.partition.push_back(t.c);
        if (t.particle_b) {
            d.z.push_back(*t.particle_b == 0 ? 1.0 : 0.0);
            d.v.push_back(*t.wave_b == 0 ? 1.0 : 0.0);
        }
    }
    return d;
}

// All k-subsets of {0..n-1} in lexicographic order.
inline std::vector<std::vector<std::size_t>> combinations(std::size_t n, std::size_t k) {
    std::vector<std::vector<std::size_t>> out;
    if (k > n) return out;
    std::vector<std::size_t> cur(k);
    for (std::size_t i = 0; i < k; ++i) cur[i] = i;
    while (true) {
        out.push_back(cur);
        std::size_t i = k;
        while (i > 0 && cur[i - 1] == n - k + i - 1) --i;
        if (i == 0) break;
        ++cur[i - 1];
        for (std::size_t j = i; j < k; ++j) cur[j] = cur[j - 1] + 1;
    }
    return out;
}

inline std::vector<std::vector<IndexType>> enumerate_branches(const AssumptionSet& a, std::size_t n) {
    const auto types = index_types(a);
    const std::size_t k = std::min(n, types.size());
    std::vector<std::vector<IndexType>> out;
    for (const auto& combo : combinations(types.size(), k)) {
        std::vector<IndexType> b;
        for (auto i : combo) b.push_back(types[i]);
        out.push_back(std::move(b));
    }
    return out;
}

inline std::string branch_code(const std::vector<IndexType>& b) {
    std::string s;
    for (const auto& t : b) {
        if (!s.empty()) s += ",";
        s += t.code();
    }
    return s;
}

struct EngineOptions {
    CrossStatistics cross = CrossStatistics::Arbitrary;
    std::size_t f_grid = 1001;          // independence scan resolution
    std::vector<double> extra_phis;     // also demand adequacy at these φ with the same priors
    bool record_wall_time = false;
};

struct AnalyticArgument {
    std::string statement;
    std::vector<double> required;  // values a single quantity would have to take at once
    double gap = 0.0;              // spread of the required values
    bool consistent = false;
};

struct BranchViolation {
    std::string branch;
    double violation;
    std::optional<double> f;  // grid point achieving it, under independence
};

struct Certificate {
    std::string statement;
    std::optional<AnalyticArgument> analytic;
    std::vector<BranchViolation> branches;
};

struct ReportSettings {
    std::vector<double> alphas;
    std::vector<double> phis;
    std::size_t n = 0;
    std::vector<std::string> assumptions;
    CrossStatistics cross = CrossStatistics::Arbitrary;
    std::optional<std::size_t> f_grid;
};

struct FeasibilityReport {
    Verdict verdict = Verdict::Infeasible;
    bool degenerate = false;
    std::optional<HVModel> witness;
    std::optional<double> witness_f;
    std::optional<Certificate> certificate;
    std::optional<AnalyticArgument> analytic;
    double margin = 0.0;
    std::size_t scanned_branches = 0;
    std::size_t lp_solves = 0;
    ReportSettings settings;
    std::vector<std::string> flags;
    std::optional<double> wall_time_s;
};

namespace detail {

inline std::vector<double> f_candidates(std::size_t grid, const std::vector<double>& analytic) {
    if (grid < 2) throw std::invalid_argument("f grid needs at least 2 points");
    std::vector<double> f;
    for (std::size_t k = 0; k < grid; ++k) f.push_back(static_cast<double>(k) / static_cast<double>(grid - 1));
    for (double a : analytic) {
        if (a >= 0.0 && a <= 1.0) f.push_back(a);
    }
    std::sort(f.begin(), f.end());
    f.erase(std::unique(f.begin(), f.end()), f.end());
    return f;
}

inline HVModel witness_from(const ConstraintSystem& sys, const PriorLayout& L, const LpReport& lp,
                            const std::vector<IndexType>& branch, std::size_t n) {
    const std::size_t k = branch.size();
    HVModel m;
    m.f_particle.assign(n, 0.0);
    m.f_wave.assign(n, 0.0);
    m.x.assign(n, 0.5);
    m.y.assign(n, 0.5);
    m.z.assign(n, 1.0);
    m.v.assign(n, 0.0);
    m.partition.assign(n, 0);
    auto clean = [](double t) { return t < 0.0 ? 0.0 : t; };
    for (std::size_t i = 0; i < k; ++i) {
        m.f_particle[i] = clean(sys.evaluate(L.particle[i], lp.point));
        m.f_wave[i] = clean(sys.evaluate(L.wave[i], lp.point));
        m.partition[i] = branch[i].c;
        const double p_open = clean(sys.evaluate(L.particle_open[i], lp.point));
        const double w_open = clean(sys.evaluate(L.wave_open[i], lp.point));
        if (branch[i].particle_b) {
            m.z[i] = *branch[i].particle_b == 0 ? 1.0 : 0.0;
            m.v[i] = *branch[i].wave_b == 0 ? 1.0 : 0.0;
        } else {
            m.z[i] = m.f_particle[i] > 0.0 ? std::clamp(p_open / m.f_particle[i], 0.0, 1.0) : 1.0;
            m.v[i] = m.f_wave[i] > 0.0 ? std::clamp(w_open / m.f_wave[i], 0.0, 1.0) : 0.0;
        }
        const double p_closed = m.f_particle[i] * (1.0 - m.z[i]);
        const double w_opened = m.f_wave[i] * m.v[i];
        if (L.open_wave_zero[i] && w_opened > 0.0) {
            m.x[i] = std::clamp(lp.point[*L.open_wave_zero[i]] / w_opened, 0.0, 1.0);
        }
        if (L.closed_particle_zero[i] && p_closed > 0.0) {
            m.y[i] = std::clamp(lp.point[*L.closed_particle_zero[i]] / p_closed, 0.0, 1.0);
        }
    }
    const double total = m.total_prior();
    for (std::size_t i = 0; i < n; ++i) {
        m.f_particle[i] /= total;
        m.f_wave[i] /= total;
    }
    // Padding indices beyond the branch carry no weight; their c cell alternates.
    for (std::size_t i = k; i < n; ++i) m.partition[i] = static_cast<int>(i % 2);
    return m;
}

// Re-simulates a witness against every target. Under arbitrary cross statistics the
// check runs at the extreme tables x = y = 0 and x = y = 1 as well.
inline bool witness_sound(const HVModel& m, const std::vector<AdequacyTarget>& targets, CrossStatistics cross) {
    std::vector<std::pair<double, double>> tables{{-1.0, -1.0}};
    if (cross == CrossStatistics::Arbitrary) tables = {{-1.0, -1.0}, {0.0, 0.0}, {1.0, 1.0}};
    for (auto [xv, yv] : tables) {
        HVModel probe = m;
        if (xv >= 0.0) {
            probe.x.assign(m.size(), xv);
            probe.y.assign(m.size(), yv);
        }
        for (const auto& t : targets) {
            if (!check_adequacy(probe, t.setting.phi, t.q, kEqualityTolerance).passed) return false;
        }
    }
    return true;
}

// Systems of one branch at every interior f share their sparsity pattern and every
// coefficient is affine in f, so interior systems are interpolated in place.
class AffineInF {
public:
    AffineInF(std::span<const AdequacyTarget> targets, const DiscreteAssignment& d, CrossStatistics cross)
        : targets_(targets), d_(d) {
        opt_.cross = cross;
        opt_.independence_f = 0.25;
        sys_ = build_adequacy_system(targets, d, opt_, &layout_);
        BuildOptions hi = opt_;
        hi.independence_f = 0.75;
        const ConstraintSystem upper = build_adequacy_system(targets, d, hi);
        affine_ = same_pattern(sys_, upper);
        if (!affine_) return;
        for (std::size_t r = 0; r < sys_.constraints.size(); ++r) {
            const auto& a = sys_.constraints[r].lhs.terms();
            const auto& b = upper.constraints[r].lhs.terms();
            for (std::size_t k = 0; k < a.size(); ++k) {
                const double slope = 2.0 * (b[k].coeff - a[k].coeff);
                slope_.push_back(slope);
                intercept_.push_back(a[k].coeff - 0.25 * slope);
            }
        }
    }

    // The system at f; the reference stays valid until the next call.
    const ConstraintSystem& at(double f) {
        if (!affine_ || f <= 0.0 || f >= 1.0) {
            BuildOptions o = opt_;
            o.independence_f = f;
            edge_ = build_adequacy_system(targets_, d_, o, &edge_layout_);
            last_edge_ = true;
            return edge_;
        }
        std::size_t k = 0;
        for (auto& c : sys_.constraints) {
            for (std::size_t j = 0; j < c.lhs.terms().size(); ++j, ++k) {
                c.lhs.set_coefficient(j, intercept_[k] + slope_[k] * f);
            }
        }
        for (std::size_t i = 0; i < layout_.particle.size(); ++i) {
            set_single(layout_.particle[i], f);
            set_single(layout_.wave[i], 1.0 - f);
        }
        sys_.metadata.independence_f = f;
        last_edge_ = false;
        return sys_;
    }

    const PriorLayout& layout() const { return last_edge_ ? edge_layout_ : layout_; }

private:
    static bool same_pattern(const ConstraintSystem& a, const ConstraintSystem& b) {
        if (a.variables.size() != b.variables.size() || a.constraints.size() != b.constraints.size()) return false;
        for (std::size_t j = 0; j < a.variables.size(); ++j) {
            if (a.variables[j].lower != b.variables[j].lower || a.variables[j].upper != b.variables[j].upper) {
                return false;
            }
        }
        for (std::size_t r = 0; r < a.constraints.size(); ++r) {
            const auto& x = a.constraints[r];
            const auto& y = b.constraints[r];
            if (x.kind != y.kind || x.rhs != y.rhs || x.relation != y.relation) return false;
            if (x.lhs.terms().size() != y.lhs.terms().size()) return false;
            for (std::size_t k = 0; k < x.lhs.terms().size(); ++k) {
                if (x.lhs.terms()[k].var != y.lhs.terms()[k].var) return false;
            }
        }
        return true;
    }
    static void set_single(LinearExpr& e, double coeff) {
        const std::size_t var = e.terms().front().var;
        e = LinearExpr(var, coeff);
    }

    std::span<const AdequacyTarget> targets_;
    const DiscreteAssignment& d_;
    BuildOptions opt_;
    ConstraintSystem sys_, edge_;
    PriorLayout layout_, edge_layout_;
    std::vector<double> slope_, intercept_;
    bool affine_ = false;
    bool last_edge_ = false;
};

}  // namespace detail

struct CheckRequest {
    std::vector<double> alphas;  // one entry, or two for a delayed choice of α
    double phi = 0.0;
    std::size_t n = 4;
    AssumptionSet assumptions;
};

// Shared engine behind check_assumptions, check_independence and check_delayed_choice.
inline FeasibilityReport run_feasibility(const CheckRequest& req, const EngineOptions& opt = {}) {
    const auto start = std::chrono::steady_clock::now();
    if (req.n == 0 || req.n > kMaxEnumeratedN) {
        throw std::invalid_argument("N must lie in [1, " + std::to_string(kMaxEnumeratedN) + "] for enumeration");
    }
    if (req.alphas.empty()) throw std::invalid_argument("at least one α is required");
    const bool delayed = req.assumptions.has(Assumption::DelayedAlphaChoice);
    if (delayed && req.alphas.size() != 2) throw std::invalid_argument("a delayed choice of α needs two settings");
    if (!delayed && req.alphas.size() != 1) throw std::invalid_argument("several α values need delayed-alpha");
    for (double a : req.alphas) {
        if (!std::isfinite(a)) throw std::invalid_argument("α must be finite");
    }
    if (!std::isfinite(req.phi)) throw std::invalid_argument("φ must be finite");
    for (double p : opt.extra_phis) {
        if (!std::isfinite(p)) throw std::invalid_argument("φ must be finite");
    }

    std::vector<double> phis{req.phi};
    phis.insert(phis.end(), opt.extra_phis.begin(), opt.extra_phis.end());
    std::vector<AdequacyTarget> targets;
    for (double a : req.alphas)
        for (double p : phis) targets.push_back({{a, p}, analytic_distribution(p, a)});

    FeasibilityReport rep;
    rep.settings = {req.alphas, phis, req.n, req.assumptions.names(), opt.cross, std::nullopt};

    const bool independence = req.assumptions.has(Assumption::Independence);
    auto cos2 = [](double a) { return std::cos(a) * std::cos(a); };
    auto sin2 = [](double a) { return std::sin(a) * std::sin(a); };

    std::vector<double> f_values{-1.0};  // sentinel: priors unrestricted
    if (independence) {
        std::vector<double> analytic;
        for (double a : req.alphas) {
            analytic.push_back(cos2(a));
            analytic.push_back(sin2(a));
        }
        f_values = detail::f_candidates(opt.f_grid, analytic);
        rep.settings.f_grid = opt.f_grid;
    }
    // The closed-form arguments rely on the cross statistics being left arbitrary.
    const bool analytic_applies = opt.cross == CrossStatistics::Arbitrary;
    if (independence && analytic_applies) {
        const double c2 = cos2(req.alphas.front()), s2 = sin2(req.alphas.front());
        rep.analytic = AnalyticArgument{
            "with F(I0) = 1/2, the sector equations give f = cos^2(alpha) from I0 and f = sin^2(alpha) from I1",
            {c2, s2}, std::abs(c2 - s2), std::abs(c2 - s2) < kEqualityTolerance};
    }
    if (delayed && analytic_applies) {
        const double r1 = 0.5 * cos2(req.alphas[0]), r2 = 0.5 * cos2(req.alphas[1]);
        rep.degenerate = std::abs(r1 - r2) < kEqualityTolerance;
        AnalyticArgument delayed_arg{
            "one prior assignment must give sum over I0 of f_p = cos^2(alpha)/2 for both settings", {r1, r2},
            std::abs(r1 - r2), rep.degenerate};
        if (rep.analytic) {
            // Both arguments apply; the delayed-choice gap is reported alongside.
            rep.analytic->statement += "; " + delayed_arg.statement;
            rep.analytic->required.insert(rep.analytic->required.end(), {r1, r2});
            rep.analytic->gap = std::max(rep.analytic->gap, delayed_arg.gap);
            rep.analytic->consistent = rep.analytic->consistent && delayed_arg.consistent;
        } else {
            rep.analytic = delayed_arg;
        }
    }

    const auto branches = enumerate_branches(req.assumptions, req.n);
    rep.scanned_branches = branches.size();
    double best_violation = kInf;
    std::vector<BranchViolation> per_branch;
    for (const auto& branch : branches) {
        const DiscreteAssignment d = to_assignment(branch);
        BranchViolation bv{branch_code(branch), kInf, std::nullopt};
        std::optional<detail::AffineInF> family;
        if (independence) family.emplace(targets, d, opt.cross);
        ConstraintSystem free_sys;
        PriorLayout free_layout;
        if (!independence) {
            BuildOptions bo;
            bo.cross = opt.cross;
            free_sys = build_adequacy_system(targets, d, bo, &free_layout);
        }
        for (double f : f_values) {
            const ConstraintSystem& sys = family ? family->at(f) : free_sys;
            const PriorLayout& layout = family ? family->layout() : free_layout;
            const LpReport lp = lp_feasible(sys);
            ++rep.lp_solves;
            if (lp.verdict == Verdict::Feasible) {
                HVModel w = detail::witness_from(sys, layout, lp, branch, req.n);
                if (!detail::witness_sound(w, targets, opt.cross)) {
                    rep.flags.push_back("witness_failed_resimulation:" + bv.branch);
                    continue;
                }
                for (const auto& t : targets) {
                    const auto fr = fringe_residuals(w, t.setting.phi, 0.5);
                    if (std::max(fr[0], fr[1]) > kEqualityTolerance) {
                        rep.flags.push_back("fringe_identity_violated");
                        break;
                    }
                }
                rep.verdict = Verdict::Feasible;
                rep.witness = std::move(w);
                if (f >= 0.0) rep.witness_f = f;
                rep.margin = lp.margin;
                if (opt.record_wall_time) {
                    rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
                }
                return rep;
            }
            if (lp.max_violation < bv.violation) {
                bv.violation = lp.max_violation;
                if (f >= 0.0) bv.f = f;
            }
        }
        best_violation = std::min(best_violation, bv.violation);
        per_branch.push_back(std::move(bv));
    }

    rep.verdict = Verdict::Infeasible;
    rep.margin = best_violation;
    Certificate cert;
    cert.statement = "phase-1 minimum violation stays positive on every scanned branch";
    if (rep.analytic && !rep.analytic->consistent) {
        cert.analytic = rep.analytic;
        cert.statement = rep.analytic->statement + ", which disagree";
    }
    cert.branches = std::move(per_branch);
    rep.certificate = std::move(cert);
    if (opt.record_wall_time) {
        rep.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    return rep;
}

inline FeasibilityReport check_assumptions(double alpha, double phi, std::size_t n, const AssumptionSet& assumptions,
                                           const EngineOptions& opt = {}) {
    if (assumptions.has(Assumption::DelayedAlphaChoice)) {
        throw std::invalid_argument("a delayed choice of α needs two settings; use check_delayed_choice");
    }
    return run_feasibility({{alpha}, phi, n, assumptions}, opt);
}

// Product-form priors f_p^i = f F_i, f_w^i = (1 - f) F_i, scanned over f.
inline FeasibilityReport check_independence(double alpha, std::size_t n, std::size_t grid, double phi = 0.0,
                                            EngineOptions opt = {}) {
    if (grid < 101) throw std::invalid_argument("independence grid needs at least 101 points");
    opt.f_grid = grid;
    return run_feasibility(
        {{alpha}, phi, n, AssumptionSet{Assumption::StrongDeterminism, Assumption::Independence}}, opt);
}

// One prior assignment and one discrete structure must serve both settings.
inline FeasibilityReport check_delayed_choice(double alpha1, double alpha2, std::size_t n, double phi = 0.0,
                                              const EngineOptions& opt = {},
                                              AssumptionSet assumptions = {Assumption::StrongDeterminism}) {
    assumptions.add(Assumption::DelayedAlphaChoice);
    return run_feasibility({{alpha1, alpha2}, phi, n, assumptions}, opt);
}

}  // namespace wpr
