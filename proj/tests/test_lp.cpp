#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "minadv/lp.hpp"
#include "test_util.hpp"

using namespace minadv;
using namespace testutil;

TEST_CASE("contradictory rows are infeasible") {
    LpProblem p;
    int u = p.add_var(-kInf, kInf);
    p.add_ge(LinExpr::var(u), 1.0);
    p.add_le(LinExpr::var(u), 0.0);
    CHECK(lp_solve(p).status == LpStatus::Infeasible);
}

TEST_CASE("a pinned variable is feasible at its value") {
    LpProblem p;
    int u = p.add_var(-kInf, kInf);
    p.add_eq(LinExpr::var(u), 0.5);
    LpResult r = lp_solve(p);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.point[u] == doctest::Approx(0.5));
}

TEST_CASE("simple minimization with bounds") {
    LpProblem p;
    int x = p.add_var(0.0, 4.0);
    int y = p.add_var(0.0, 4.0);
    p.add_ge(LinExpr::var(x) + LinExpr::var(y), 3.0);
    Vec obj{2.0, 1.0};
    LpResult r = lp_solve(p, obj);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == doctest::Approx(3.0));  // x=0, y=3
    CHECK(r.point[x] == doctest::Approx(0.0));
    CHECK(r.point[y] == doctest::Approx(3.0));
}

TEST_CASE("unbounded objective is reported") {
    LpProblem p;
    int x = p.add_var(0.0, kInf);
    (void)x;
    Vec obj{-1.0};
    CHECK(lp_solve(p, obj).status == LpStatus::Unbounded);
}

TEST_CASE("equality chain with free variables") {
    LpProblem p;
    int x = p.add_var(-kInf, kInf);
    int y = p.add_var(-kInf, kInf);
    p.add_eq(LinExpr::var(x) + LinExpr::var(y), 2.0);
    p.add_eq(LinExpr::var(x) - LinExpr::var(y), 0.0);
    LpResult r = lp_solve(p);
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.point[x] == doctest::Approx(1.0));
    CHECK(r.point[y] == doctest::Approx(1.0));
}

TEST_CASE("feasible points satisfy every constraint within tolerance") {
    Rng rng(101);
    for (int rep = 0; rep < 100; ++rep) {
        int n = 2 + static_cast<int>(rng.below(3));
        LpProblem p;
        for (int j = 0; j < n; ++j) {
            double lo = rng.uniform(-2.0, 0.0), hi = rng.uniform(0.0, 2.0);
            p.add_var(lo, hi);
        }
        int m = 1 + static_cast<int>(rng.below(4));
        for (int i = 0; i < m; ++i) {
            LinExpr e;
            for (int j = 0; j < n; ++j) e += LinExpr::var(j) * rng.uniform(-2.0, 2.0);
            p.add_le(e, rng.uniform(-0.5, 2.0));
        }
        LpResult r = lp_solve(p);
        if (r.status == LpStatus::Optimal) {
            CHECK(lp_point_feasible(p, r.point));
        }
    }
}

TEST_CASE("verdicts match a Fourier-Motzkin oracle on small random systems") {
    Rng rng(202);
    int feasible = 0, infeasible = 0;
    for (int rep = 0; rep < 200; ++rep) {
        int n = 1 + static_cast<int>(rng.below(3));
        LpProblem p;
        for (int j = 0; j < n; ++j) {
            double lo = static_cast<double>(static_cast<int>(rng.below(5))) * 0.5 - 1.0;
            p.add_var(lo, lo + static_cast<double>(static_cast<int>(rng.below(5))) * 0.5);
        }
        int m = static_cast<int>(rng.below(5));
        for (int i = 0; i < m; ++i) {
            LinExpr e;
            for (int j = 0; j < n; ++j) {
                e += LinExpr::var(j) * static_cast<double>(static_cast<int>(rng.below(7)) - 3);
            }
            double b = static_cast<double>(static_cast<int>(rng.below(9)) - 4) * 0.5;
            if (rng.below(4) == 0) {
                p.add_eq(e, b);
            } else if (rng.below(2) == 0) {
                p.add_le(e, b);
            } else {
                p.add_ge(e, b);
            }
        }
        bool lp_ok = lp_solve(p).status == LpStatus::Optimal;
        bool fm_ok = fm_feasible(fm_rows_of(p), n);
        CHECK(lp_ok == fm_ok);
        (lp_ok ? feasible : infeasible)++;
    }
    // both verdicts must actually occur for the comparison to mean anything
    CHECK(feasible > 20);
    CHECK(infeasible > 20);
}

TEST_CASE("optimum matches direct vertex enumeration on a 2-variable LP") {
    // min -x - 2y st x+y<=3, x<=2, y<=2, x,y>=0: optimum at (1,2), value -5
    LpProblem p;
    int x = p.add_var(0.0, 2.0);
    int y = p.add_var(0.0, 2.0);
    p.add_le(LinExpr::var(x) + LinExpr::var(y), 3.0);
    LpResult r = lp_solve(p, {-1.0, -2.0});
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == doctest::Approx(-5.0));
    CHECK(r.point[x] == doctest::Approx(1.0));
    CHECK(r.point[y] == doctest::Approx(2.0));
}

TEST_CASE("degenerate systems terminate") {
    // many redundant rows through one point
    LpProblem p;
    int x = p.add_var(0.0, 1.0);
    int y = p.add_var(0.0, 1.0);
    for (int i = 0; i < 20; ++i) {
        p.add_ge(LinExpr::var(x) * (1.0 + i * 0.1) + LinExpr::var(y), 0.0);
    }
    p.add_eq(LinExpr::var(x), 0.0);
    p.add_eq(LinExpr::var(y), 0.0);
    LpResult r = lp_solve(p, {1.0, 1.0});
    REQUIRE(r.status == LpStatus::Optimal);
    CHECK(r.objective == doctest::Approx(0.0));
}

TEST_CASE("LinExpr compaction merges duplicates") {
    LinExpr e = LinExpr::var(1) + LinExpr::var(0) * 2.0 + LinExpr::var(1) * 3.0;
    e.compact();
    REQUIRE(e.terms.size() == 2);
    CHECK(e.terms[0].first == 0);
    CHECK(e.terms[0].second == doctest::Approx(2.0));
    CHECK(e.terms[1].first == 1);
    CHECK(e.terms[1].second == doctest::Approx(4.0));
}
