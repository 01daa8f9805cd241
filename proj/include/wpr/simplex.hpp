// simplex.hpp
// Dense phase-1 simplex for feasibility of small linear systems.
//
// Variables with equal bounds are substituted out, finite upper bounds become
// rows, and every equality or >= row gets an artificial column. Minimizing the
// sum of artificials with Bland's rule either reaches zero (a feasible point) or
// stops at the smallest total violation reachable under the bounds.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "wpr/constraints.hpp"

namespace wpr {

enum class Verdict { Feasible, Infeasible };

inline std::string to_string(Verdict v) { return v == Verdict::Feasible ? "Feasible" : "Infeasible"; }

struct LpReport {
    Verdict verdict = Verdict::Infeasible;
    std::vector<double> point;     // one value per system variable
    double total_violation = 0.0;  // Σ of row violations at point
    double max_violation = 0.0;    // largest row or bound violation at point
    double margin = 0.0;           // min slack if feasible, max violation otherwise
    std::size_t pivots = 0;
};

namespace detail {

class Phase1Tableau {
public:
    static constexpr double kPivotEps = 1e-12;
    static constexpr std::size_t kMaxPivots = 50000;

    // rows: coefficients over the first n_struct columns, sense (+1 means >=, 0 means =, -1 means <=)
    Phase1Tableau(std::size_t n_struct, const std::vector<std::vector<double>>& a, std::vector<int> sense,
                  std::vector<double> b)
        : m_(a.size()), n_struct_(n_struct) {
        // Normalize to b >= 0.
        for (std::size_t i = 0; i < m_; ++i) {
            if (b[i] < 0.0) sense[i] = -sense[i];
        }
        std::size_t n_slack = 0, n_art = 0;
        for (std::size_t i = 0; i < m_; ++i) {
            if (sense[i] != 0) ++n_slack;
            if (sense[i] >= 0) ++n_art;
        }
        cols_ = n_struct_ + n_slack + n_art;
        width_ = cols_ + 1;
        t_.assign((m_ + 1) * width_, 0.0);
        basis_.assign(m_, 0);
        is_art_.assign(cols_, false);

        std::size_t slack = n_struct_, art = n_struct_ + n_slack;
        for (std::size_t i = 0; i < m_; ++i) {
            const double sign = b[i] < 0.0 ? -1.0 : 1.0;
            for (std::size_t j = 0; j < n_struct_; ++j) at(i, j) = sign * a[i][j];
            at(i, cols_) = sign * b[i];
            if (sense[i] == -1) {
                at(i, slack) = 1.0;
                basis_[i] = slack++;
            } else {
                if (sense[i] == 1) at(i, slack++) = -1.0;
                at(i, art) = 1.0;
                is_art_[art] = true;
                basis_[i] = art++;
            }
        }
        // Objective row holds reduced costs of min Σ artificials.
        for (std::size_t i = 0; i < m_; ++i) {
            if (!is_art_[basis_[i]]) continue;
            for (std::size_t j = 0; j <= cols_; ++j) at(m_, j) -= at(i, j);
        }
        for (std::size_t j = 0; j < cols_; ++j) {
            if (is_art_[j]) at(m_, j) += 1.0;
        }
    }

    std::size_t solve() {
        std::size_t pivots = 0;
        while (true) {
            std::size_t enter = cols_;
            for (std::size_t j = 0; j < cols_; ++j) {
                if (at(m_, j) < -kPivotEps) {
                    enter = j;
                    break;
                }
            }
            if (enter == cols_) return pivots;
            std::size_t leave = m_;
            double best = 0.0;
            for (std::size_t i = 0; i < m_; ++i) {
                const double aij = at(i, enter);
                if (aij <= kPivotEps) continue;
                const double ratio = at(i, cols_) / aij;
                if (leave == m_ || ratio < best - 1e-15 || (ratio <= best + 1e-15 && basis_[i] < basis_[leave])) {
                    leave = i;
                    best = ratio;
                }
            }
            if (leave == m_) throw std::logic_error("phase-1 objective unbounded: malformed system");
            pivot(leave, enter);
            if (++pivots > kMaxPivots) throw std::runtime_error("simplex pivot limit exceeded");
        }
    }

    std::vector<double> structural_values() const {
        std::vector<double> x(n_struct_, 0.0);
        for (std::size_t i = 0; i < m_; ++i) {
            if (basis_[i] < n_struct_) x[basis_[i]] = std::max(0.0, at(i, cols_));
        }
        return x;
    }

private:
    double& at(std::size_t i, std::size_t j) { return t_[i * width_ + j]; }
    double at(std::size_t i, std::size_t j) const { return t_[i * width_ + j]; }

    void pivot(std::size_t r, std::size_t c) {
        const double inv = 1.0 / at(r, c);
        for (std::size_t j = 0; j <= cols_; ++j) at(r, j) *= inv;
        at(r, c) = 1.0;
        for (std::size_t i = 0; i <= m_; ++i) {
            if (i == r) continue;
            const double f = at(i, c);
            if (f == 0.0) continue;
            for (std::size_t j = 0; j <= cols_; ++j) at(i, j) -= f * at(r, j);
            at(i, c) = 0.0;
        }
        basis_[r] = c;
    }

    std::size_t m_, n_struct_, cols_ = 0, width_ = 0;
    std::vector<double> t_;
    std::vector<std::size_t> basis_;
    std::vector<bool> is_art_;
};

}  // namespace detail

// Feasibility of a constraint system. Deterministic for a given system.
inline LpReport lp_feasible(const ConstraintSystem& sys, double tolerance = kEqualityTolerance) {
    sys.validate();
    const std::size_t nv = sys.variables.size();

    // Fixed variables are substituted; the rest are shifted to x' = x - lower >= 0.
    std::vector<std::ptrdiff_t> column(nv, -1);
    std::size_t n_free = 0;
    for (std::size_t j = 0; j < nv; ++j) {
        if (sys.variables[j].upper > sys.variables[j].lower) column[j] = static_cast<std::ptrdiff_t>(n_free++);
    }

    std::vector<std::vector<double>> a;
    std::vector<int> sense;
    std::vector<double> b;
    for (const auto& c : sys.constraints) {
        std::vector<double> row(n_free, 0.0);
        double rhs = c.rhs;
        bool any = false;
        for (const auto& t : c.lhs.terms()) {
            rhs -= t.coeff * sys.variables[t.var].lower;
            if (column[t.var] >= 0 && t.coeff != 0.0) {
                row[static_cast<std::size_t>(column[t.var])] += t.coeff;
                any = true;
            }
        }
        // Rows without free variables are checked on the final point.
        if (!any) continue;
        a.push_back(std::move(row));
        sense.push_back(c.relation == Relation::Equal ? 0 : 1);
        b.push_back(rhs);
    }
    for (std::size_t j = 0; j < nv; ++j) {
        const auto& v = sys.variables[j];
        if (column[j] < 0 || !std::isfinite(v.upper)) continue;
        std::vector<double> row(n_free, 0.0);
        row[static_cast<std::size_t>(column[j])] = 1.0;
        a.push_back(std::move(row));
        sense.push_back(-1);
        b.push_back(v.upper - v.lower);
    }

    LpReport r;
    std::vector<double> x(n_free, 0.0);
    if (!a.empty()) {
        detail::Phase1Tableau tab(n_free, a, std::move(sense), std::move(b));
        r.pivots = tab.solve();
        x = tab.structural_values();
    }
    r.point.resize(nv);
    for (std::size_t j = 0; j < nv; ++j) {
        const auto& v = sys.variables[j];
        r.point[j] = column[j] >= 0 ? std::min(v.upper, v.lower + x[static_cast<std::size_t>(column[j])]) : v.lower;
    }
    r.total_violation = sys.total_violation(r.point);
    r.max_violation = sys.max_violation(r.point);
    if (r.max_violation <= tolerance) {
        r.verdict = Verdict::Feasible;
        r.margin = std::max(0.0, sys.min_slack(r.point));
    } else {
        r.verdict = Verdict::Infeasible;
        r.margin = r.max_violation;
    }
    return r;
}

}  // namespace wpr
