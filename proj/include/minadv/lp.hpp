#pragma once

#include <utility>

#include "minadv/common.hpp"

namespace minadv {

// feasibility tolerance on returned points
constexpr double kLpEps = 1e-6;

// Sparse linear expression: sum of coeff*var plus a constant.
struct LinExpr {
    std::vector<std::pair<int, double>> terms;
    double constant = 0.0;

    static LinExpr var(int id, double coeff = 1.0) {
        LinExpr e;
        e.terms.emplace_back(id, coeff);
        return e;
    }
    static LinExpr of(double c) {
        LinExpr e;
        e.constant = c;
        return e;
    }

    LinExpr& operator+=(const LinExpr& o) {
        terms.insert(terms.end(), o.terms.begin(), o.terms.end());
        constant += o.constant;
        return *this;
    }
    LinExpr& operator-=(const LinExpr& o) {
        for (auto [v, c] : o.terms) terms.emplace_back(v, -c);
        constant -= o.constant;
        return *this;
    }
    LinExpr& operator*=(double s) {
        for (auto& [v, c] : terms) c *= s;
        constant *= s;
        return *this;
    }
    friend LinExpr operator+(LinExpr a, const LinExpr& b) { return a += b; }
    friend LinExpr operator-(LinExpr a, const LinExpr& b) { return a -= b; }
    friend LinExpr operator*(LinExpr a, double s) { return a *= s; }

    double eval(const Vec& point) const {
        double s = constant;
        for (auto [v, c] : terms) s += c * point[v];
        return s;
    }

    // merge duplicate variables, drop zero coefficients
    void compact();
};

struct LpRow {
    std::vector<std::pair<int, double>> coeffs;
    double lo = -kInf, hi = kInf;
};

struct LpProblem {
    Vec lower, upper;
    std::vector<LpRow> rows;

    int num_vars() const { return static_cast<int>(lower.size()); }

    int add_var(double lo, double hi) {
        lower.push_back(lo);
        upper.push_back(hi);
        return num_vars() - 1;
    }
    void set_bounds(int v, double lo, double hi) {
        lower[v] = lo;
        upper[v] = hi;
    }
    // lo <= expr <= hi with the expression's constant folded into the range
    void add_row(LinExpr e, double lo, double hi);
    void add_eq(LinExpr e, double rhs) { add_row(std::move(e), rhs, rhs); }
    void add_le(LinExpr e, double rhs) { add_row(std::move(e), -kInf, rhs); }
    void add_ge(LinExpr e, double rhs) { add_row(std::move(e), rhs, kInf); }
};

enum class LpStatus { Optimal, Infeasible, Unbounded, IterLimit };

struct LpResult {
    LpStatus status = LpStatus::Infeasible;
    Vec point;
    double objective = 0.0;
};

// Dense two-phase simplex over bounded variables. Minimizes the objective
// (empty objective = pure feasibility). Dantzig pricing with a permanent
// switch to Bland's rule after a run of degenerate pivots.
LpResult lp_solve(const LpProblem& p, const Vec& objective = {}, long iter_limit = 0);

// true if the point satisfies all rows and variable bounds within eps
bool lp_point_feasible(const LpProblem& p, const Vec& point, double eps = kLpEps);

}  // namespace minadv
