#include "minadv/lp.hpp"

#include <algorithm>

namespace minadv {

void LinExpr::compact() {
    std::sort(terms.begin(), terms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    size_t out = 0;
    for (size_t i = 0; i < terms.size();) {
        int v = terms[i].first;
        double c = 0.0;
        while (i < terms.size() && terms[i].first == v) c += terms[i++].second;
        if (c != 0.0) terms[out++] = {v, c};
    }
    terms.resize(out);
}

void LpProblem::add_row(LinExpr e, double lo, double hi) {
    e.compact();
    LpRow r;
    r.coeffs = std::move(e.terms);
    r.lo = (lo == -kInf) ? -kInf : lo - e.constant;
    r.hi = (hi == kInf) ? kInf : hi - e.constant;
    rows.push_back(std::move(r));
}

bool lp_point_feasible(const LpProblem& p, const Vec& point, double eps) {
    for (int j = 0; j < p.num_vars(); ++j) {
        if (point[j] < p.lower[j] - eps || point[j] > p.upper[j] + eps) return false;
    }
    for (const LpRow& r : p.rows) {
        double v = 0.0;
        for (auto [var, c] : r.coeffs) v += c * point[var];
        if (v < r.lo - eps || v > r.hi + eps) return false;
    }
    return true;
}

namespace {

constexpr double kTol = 1e-9;       // reduced-cost tolerance
constexpr double kPivTol = 1e-9;    // minimum pivot magnitude
constexpr double kPhase1Tol = 1e-7; // residual infeasibility cutoff

enum : signed char { kBasic = 0, kAtLo = 1, kAtUp = 2, kFree = 3 };

class Simplex {
public:
    explicit Simplex(const LpProblem& p)
        : m(static_cast<int>(p.rows.size())), ns(p.num_vars()), N(ns + 2 * m) {
        T.assign(static_cast<size_t>(m) * N, 0.0);
        lo.resize(N);
        up.resize(N);
        xval.assign(N, 0.0);
        state.assign(N, kAtLo);
        basis.resize(m);

        for (int j = 0; j < ns; ++j) {
            lo[j] = p.lower[j];
            up[j] = p.upper[j];
        }

        // row scaling to unit max coefficient
        for (int i = 0; i < m; ++i) {
            const LpRow& r = p.rows[i];
            double mx = 0.0;
            for (auto [v, c] : r.coeffs) mx = std::max(mx, std::fabs(c));
            double s = (mx > 0.0) ? 1.0 / mx : 1.0;
            double* row = rowp(i);
            for (auto [v, c] : r.coeffs) row[v] = c * s;
            int sv = ns + i;
            row[sv] = -1.0;
            lo[sv] = (r.lo == -kInf) ? -kInf : r.lo * s;
            up[sv] = (r.hi == kInf) ? kInf : r.hi * s;
        }

        // nonbasic start: every structural variable at a finite bound
        for (int j = 0; j < ns; ++j) {
            if (lo[j] == -kInf && up[j] == kInf) {
                state[j] = kFree;
                xval[j] = 0.0;
            } else if (lo[j] == -kInf) {
                state[j] = kAtUp;
                xval[j] = up[j];
            } else if (up[j] == kInf || std::fabs(lo[j]) <= std::fabs(up[j])) {
                state[j] = kAtLo;
                xval[j] = lo[j];
            } else {
                state[j] = kAtUp;
                xval[j] = up[j];
            }
        }

        // crash basis: slack basic when the row is satisfied at the start,
        // otherwise slack at the violated bound and an artificial closing
        // the residual
        for (int i = 0; i < m; ++i) {
            double* row = rowp(i);
            double sum = 0.0;
            for (int j = 0; j < ns; ++j) {
                if (row[j] != 0.0) sum += row[j] * xval[j];
            }
            int sv = ns + i;
            int av = ns + m + i;
            lo[av] = 0.0;
            up[av] = 0.0;
            state[av] = kAtLo;
            if (sum >= lo[sv] && sum <= up[sv]) {
                xval[sv] = sum;
                state[sv] = kBasic;
                basis[i] = sv;
                row[av] = 1.0;
                // flip so the basic slack column is +1
                for (int j = 0; j < N; ++j) row[j] = -row[j];
            } else {
                if (sum > up[sv]) {
                    xval[sv] = up[sv];
                    state[sv] = kAtUp;
                } else {
                    xval[sv] = lo[sv];
                    state[sv] = kAtLo;
                }
                double diff = xval[sv] - sum;  // sum - s + d*r = 0  =>  r = (s - sum)/d
                double d = (diff >= 0.0) ? 1.0 : -1.0;
                row[av] = d;
                up[av] = kInf;
                xval[av] = std::fabs(diff);
                basis[i] = av;
                state[av] = kBasic;
                if (d < 0.0) {
                    for (int j = 0; j < N; ++j) row[j] = -row[j];
                }
            }
        }
    }

    LpResult run(const Vec& objective, long iter_limit) {
        LpResult res;
        for (int j = 0; j < N; ++j) {
            if (lo[j] > up[j] + kTol) {
                res.status = LpStatus::Infeasible;
                return res;
            }
        }
        cap = iter_limit > 0 ? iter_limit : std::max<long>(5000, 80L * (m + ns));

        // phase 1: minimize the artificial total
        cost.assign(N, 0.0);
        for (int i = 0; i < m; ++i) cost[ns + m + i] = 1.0;
        LpStatus st = iterate(true);
        if (st == LpStatus::IterLimit) {
            res.status = st;
            return res;
        }
        double infeas = 0.0;
        for (int i = 0; i < m; ++i) infeas += xval[ns + m + i];
        if (infeas > kPhase1Tol) {
            res.status = LpStatus::Infeasible;
            return res;
        }
        for (int i = 0; i < m; ++i) {
            int av = ns + m + i;
            lo[av] = up[av] = 0.0;
            if (state[av] != kBasic) xval[av] = 0.0;
        }

        if (!objective.empty()) {
            cost.assign(N, 0.0);
            for (int j = 0; j < ns && j < static_cast<int>(objective.size()); ++j) {
                cost[j] = objective[j];
            }
            st = iterate(false);
            if (st != LpStatus::Optimal) {
                res.status = st;
                return res;
            }
        }

        compute_beta();
        res.status = LpStatus::Optimal;
        res.point.assign(xval.begin(), xval.begin() + ns);
        res.objective = 0.0;
        for (int j = 0; j < ns && j < static_cast<int>(objective.size()); ++j) {
            res.objective += objective[j] * res.point[j];
        }
        return res;
    }

private:
    int m, ns, N;
    std::vector<double> T;
    Vec lo, up, xval, cost, zrow;
    std::vector<int> basis;
    std::vector<signed char> state;
    bool bland = false;
    int degen_run = 0;
    long iters = 0, cap = 0;

    double* rowp(int i) { return T.data() + static_cast<size_t>(i) * N; }

    void compute_zrow() {
        zrow = cost;
        for (int i = 0; i < m; ++i) {
            double cb = cost[basis[i]];
            if (cb == 0.0) continue;
            const double* row = rowp(i);
            for (int j = 0; j < N; ++j) zrow[j] -= cb * row[j];
        }
        for (int i = 0; i < m; ++i) zrow[basis[i]] = 0.0;
    }

    void compute_beta() {
        for (int i = 0; i < m; ++i) {
            const double* row = rowp(i);
            double s = 0.0;
            for (int j = 0; j < N; ++j) {
                if (state[j] != kBasic && xval[j] != 0.0) s += row[j] * xval[j];
            }
            xval[basis[i]] = -s;
        }
    }

    LpStatus iterate(bool phase1) {
        compute_zrow();
        long since_refresh = 0;
        for (;;) {
            if (++iters > cap) return LpStatus::IterLimit;
            if (++since_refresh >= 256) {
                compute_beta();
                compute_zrow();
                since_refresh = 0;
            }

            // entering variable
            int q = -1, dir = 0;
            double best = kTol;
            for (int j = 0; j < N; ++j) {
                if (state[j] == kBasic || lo[j] == up[j]) continue;
                double d = zrow[j];
                int cand_dir = 0;
                if (state[j] == kAtLo && d < -kTol) cand_dir = 1;
                else if (state[j] == kAtUp && d > kTol) cand_dir = -1;
                else if (state[j] == kFree && std::fabs(d) > kTol) cand_dir = d < 0 ? 1 : -1;
                if (!cand_dir) continue;
                if (bland) {
                    q = j;
                    dir = cand_dir;
                    break;
                }
                if (std::fabs(d) > best) {
                    best = std::fabs(d);
                    q = j;
                    dir = cand_dir;
                }
            }
            if (q < 0) return LpStatus::Optimal;

            // ratio test
            double limit = (lo[q] == -kInf || up[q] == kInf) ? kInf : up[q] - lo[q];
            double delta = limit;
            int leave_row = -1;
            double leave_alpha = 0.0;
            for (int i = 0; i < m; ++i) {
                double alpha = rowp(i)[q];
                if (std::fabs(alpha) < kPivTol) continue;
                int k = basis[i];
                double rate = -dir * alpha;  // movement of basic k per unit of q
                double cand;
                if (rate < 0.0) {
                    if (lo[k] == -kInf) continue;
                    cand = (xval[k] - lo[k]) / -rate;
                } else {
                    if (up[k] == kInf) continue;
                    cand = (up[k] - xval[k]) / rate;
                }
                if (cand < 0.0) cand = 0.0;
                bool take;
                if (cand < delta - 1e-12) {
                    take = true;
                } else if (cand <= delta + 1e-12 && leave_row >= 0) {
                    take = bland ? basis[i] < basis[leave_row]
                                 : std::fabs(alpha) > std::fabs(leave_alpha);
                } else {
                    take = false;
                }
                if (take) {
                    delta = std::min(delta, cand);
                    leave_row = i;
                    leave_alpha = alpha;
                }
            }
            if (delta == kInf) return LpStatus::Unbounded;

            if (delta <= 1e-12) {
                if (++degen_run > 60) bland = true;
            } else {
                degen_run = 0;
            }

            if (delta != 0.0) {
                for (int i = 0; i < m; ++i) {
                    double alpha = rowp(i)[q];
                    if (alpha != 0.0) xval[basis[i]] -= dir * delta * alpha;
                }
            }

            if (leave_row < 0) {
                // bound flip
                xval[q] = dir > 0 ? up[q] : lo[q];
                state[q] = dir > 0 ? kAtUp : kAtLo;
                continue;
            }

            int k = basis[leave_row];
            double rate = -dir * leave_alpha;
            xval[k] = rate < 0.0 ? lo[k] : up[k];
            state[k] = rate < 0.0 ? kAtLo : kAtUp;
            xval[q] += dir * delta;
            state[q] = kBasic;

            // artificials never come back once they leave the basis
            if (phase1 && k >= ns + m) {
                lo[k] = up[k] = 0.0;
                xval[k] = 0.0;
            }

            pivot(leave_row, q);
        }
    }

    void pivot(int r, int q) {
        double* prow = rowp(r);
        double inv = 1.0 / prow[q];
        for (int j = 0; j < N; ++j) prow[j] *= inv;
        prow[q] = 1.0;
        for (int i = 0; i < m; ++i) {
            if (i == r) continue;
            double* row = rowp(i);
            double f = row[q];
            if (f == 0.0) continue;
            for (int j = 0; j < N; ++j) row[j] -= f * prow[j];
            row[q] = 0.0;
        }
        double f = zrow[q];
        if (f != 0.0) {
            for (int j = 0; j < N; ++j) zrow[j] -= f * prow[j];
            zrow[q] = 0.0;
        }
        basis[r] = q;
    }
};

}  // namespace

LpResult lp_solve(const LpProblem& p, const Vec& objective, long iter_limit) {
    for (const LpRow& r : p.rows) {
        if (r.lo > r.hi) return LpResult{LpStatus::Infeasible, {}, 0.0};
    }
    Simplex s(p);
    return s.run(objective, iter_limit);
}

}  // namespace minadv
