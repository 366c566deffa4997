#include "minadv/verifier.hpp"

#include <algorithm>
#include <ostream>

namespace minadv {

LinExpr encode_max(ConstraintSystem& cs, const LinExpr& a, const LinExpr& b) {
    int r = cs.add_var("max_aux" + std::to_string(cs.relus.size()), 0.0, kInf);
    cs.relus.push_back({a - b, r});
    return LinExpr::var(r) + b;
}

LinExpr encode_abs(ConstraintSystem& cs, const LinExpr& a) {
    int r = cs.add_var("abs_aux" + std::to_string(cs.relus.size()), 0.0, kInf);
    cs.relus.push_back({a * 2.0, r});
    return LinExpr::var(r) - a;
}

double eval_with_relus(const ConstraintSystem& cs, Vec point, const LinExpr& e) {
    point.resize(cs.lp.num_vars(), 0.0);
    for (const ReluConstraint& rc : cs.relus) {
        point[rc.out_var] = std::max(0.0, rc.in.eval(point));
    }
    return e.eval(point);
}

static void check_query(const VerifyQuery& q) {
    if (!q.net) throw std::invalid_argument("verify: missing network");
    q.net->validate();
    if (static_cast<int>(q.center.size()) != q.net->input_dim()) {
        throw std::invalid_argument("verify: center dim mismatch");
    }
    for (double v : q.center) {
        if (v < -1e-9 || v > 1.0 + 1e-9) {
            throw std::invalid_argument("verify: center outside [0,1]");
        }
    }
    if (q.target < 0 || q.target >= q.net->num_classes()) {
        throw std::invalid_argument("verify: target label out of range");
    }
    if (q.radius < 0.0) throw std::invalid_argument("verify: negative radius");
}

QuerySystem build_query(const VerifyQuery& q, double margin) {
    check_query(q);
    const Network& net = *q.net;
    int n = net.input_dim();

    QuerySystem qs;
    ConstraintSystem& cs = qs.sys;

    qs.input_vars.reserve(n);
    for (int i = 0; i < n; ++i) {
        double lo = 0.0, hi = 1.0;
        if (q.norm == Norm::LINF) {
            lo = std::max(0.0, q.center[i] - q.radius);
            hi = std::min(1.0, q.center[i] + q.radius);
        }
        qs.input_vars.push_back(cs.add_var("x" + std::to_string(i), lo, hi));
    }

    std::vector<LinExpr> prev;
    prev.reserve(n);
    for (int i = 0; i < n; ++i) prev.push_back(LinExpr::var(qs.input_vars[i]));

    int layers = net.num_affine_layers();
    for (int l = 0; l < layers; ++l) {
        const Mat& w = net.weights[l];
        bool hidden = l + 1 < layers;
        std::vector<LinExpr> next;
        std::vector<int> zvars, avars;
        for (int i = 0; i < w.rows; ++i) {
            LinExpr e = LinExpr::of(net.biases[l][i]);
            for (int j = 0; j < w.cols; ++j) {
                if (w(i, j) != 0.0) e += prev[j] * w(i, j);
            }
            std::string tag = std::to_string(l) + "_" + std::to_string(i);
            if (hidden) {
                int z = cs.add_var("z" + tag, -kInf, kInf);
                cs.lp.add_eq(e - LinExpr::var(z), 0.0);
                int a = cs.add_var("a" + tag, 0.0, kInf);
                cs.relus.push_back({LinExpr::var(z), a});
                zvars.push_back(z);
                avars.push_back(a);
                next.push_back(LinExpr::var(a));
            } else {
                int y = cs.add_var("y" + std::to_string(i), -kInf, kInf);
                cs.lp.add_eq(e - LinExpr::var(y), 0.0);
                qs.logit_vars.push_back(y);
            }
        }
        if (hidden) {
            qs.pre_vars.push_back(std::move(zvars));
            qs.post_vars.push_back(std::move(avars));
            prev = std::move(next);
        }
    }
    qs.network_relus = static_cast<int>(cs.relus.size());

    for (int j = 0; j < net.num_classes(); ++j) {
        if (j == q.target) continue;
        cs.lp.add_ge(LinExpr::var(qs.logit_vars[q.target]) - LinExpr::var(qs.logit_vars[j]),
                     margin);
    }

    if (q.norm == Norm::L1) {
        LinExpr total;
        for (int i = 0; i < n; ++i) {
            total += encode_abs(cs, LinExpr::var(qs.input_vars[i]) - LinExpr::of(q.center[i]));
        }
        cs.lp.add_le(total, q.radius);
    }
    return qs;
}

static void print_terms(std::ostream& out, const std::vector<std::pair<int, double>>& terms,
                        const std::vector<std::string>& names) {
    bool first = true;
    for (auto [v, c] : terms) {
        if (!first) out << " + ";
        out << c << '*' << names[v];
        first = false;
    }
    if (first) out << '0';
}

void dump_system(const ConstraintSystem& cs, std::ostream& out) {
    for (int j = 0; j < cs.lp.num_vars(); ++j) {
        out << "var " << cs.names[j] << " in [" << cs.lp.lower[j] << ", " << cs.lp.upper[j]
            << "]\n";
    }
    for (const LpRow& r : cs.lp.rows) {
        out << "lin ";
        print_terms(out, r.coeffs, cs.names);
        out << " in [" << r.lo << ", " << r.hi << "]\n";
    }
    for (const ReluConstraint& rc : cs.relus) {
        LinExpr in = rc.in;
        in.compact();
        out << "relu " << cs.names[rc.out_var] << " = ReLU(";
        print_terms(out, in.terms, cs.names);
        if (in.constant != 0.0) out << " + " << in.constant;
        out << ")\n";
    }
}

std::optional<Vec> lp_feasible(const ConstraintSystem& cs, const std::vector<ReluPhase>& phases) {
    if (phases.size() != cs.relus.size()) {
        throw std::invalid_argument("lp_feasible: one phase per ReLU constraint required");
    }
    LpProblem p = cs.lp;
    for (size_t i = 0; i < phases.size(); ++i) {
        const ReluConstraint& rc = cs.relus[i];
        if (phases[i] == ReluPhase::Active) {
            p.add_ge(rc.in, 0.0);
            p.add_eq(LinExpr::var(rc.out_var) - rc.in, 0.0);
        } else if (phases[i] == ReluPhase::Inactive) {
            p.add_le(rc.in, 0.0);
            p.set_bounds(rc.out_var, 0.0, 0.0);
        } else {
            throw std::invalid_argument("lp_feasible: unassigned ReLU phase");
        }
    }
    LpResult r = lp_solve(p);
    if (r.status == LpStatus::IterLimit) throw SolverError("lp_feasible: iteration cap hit");
    if (r.status != LpStatus::Optimal) return std::nullopt;
    return r.point;
}

BoundsMap propagate_bounds(const Network& net, const Vec& in_lo, const Vec& in_hi) {
    net.validate();
    if (static_cast<int>(in_lo.size()) != net.input_dim() || in_lo.size() != in_hi.size()) {
        throw std::invalid_argument("propagate_bounds: box dim mismatch");
    }
    BoundsMap bm;
    Vec lo = in_lo, hi = in_hi;
    for (int l = 0; l + 1 < net.num_affine_layers(); ++l) {
        const Mat& w = net.weights[l];
        std::vector<NeuronBounds> layer(w.rows);
        Vec nlo(w.rows), nhi(w.rows);
        for (int i = 0; i < w.rows; ++i) {
            double zl = net.biases[l][i], zh = zl;
            const double* row = w.row(i);
            for (int j = 0; j < w.cols; ++j) {
                double c = row[j];
                if (c >= 0.0) {
                    zl += c * lo[j];
                    zh += c * hi[j];
                } else {
                    zl += c * hi[j];
                    zh += c * lo[j];
                }
            }
            layer[i].lo = zl;
            layer[i].hi = zh;
            layer[i].phase = zl >= 0.0  ? ReluPhase::Active
                             : zh <= 0.0 ? ReluPhase::Inactive
                                         : ReluPhase::Unstable;
            nlo[i] = std::max(0.0, zl);
            nhi[i] = std::max(0.0, zh);
        }
        bm.layers.push_back(std::move(layer));
        lo = std::move(nlo);
        hi = std::move(nhi);
    }
    return bm;
}

namespace {

using Clock = std::chrono::steady_clock;

struct Region {
    Vec lo, hi;
};

Region query_box(const VerifyQuery& q) {
    int n = q.net->input_dim();
    Region r;
    r.lo.resize(n);
    r.hi.resize(n);
    for (int i = 0; i < n; ++i) {
        r.lo[i] = std::max(0.0, q.center[i] - q.radius);
        r.hi[i] = std::min(1.0, q.center[i] + q.radius);
    }
    return r;
}

// -1 inactive, 0 free, +1 active
using FixVec = std::vector<int8_t>;

struct Interval {
    double lo, hi;
};

struct IState {
    std::vector<Vec> pre_lo, pre_hi;    // hidden layers
    std::vector<Vec> post_lo, post_hi;  // hidden layers
    bool contradiction = false;
};

struct HiddenIndex {
    std::vector<int> offset;
    int total = 0;

    explicit HiddenIndex(const Network& net) {
        offset.resize(net.num_hidden_layers());
        for (int l = 0; l < net.num_hidden_layers(); ++l) {
            offset[l] = total;
            total += net.layer_dims[l + 1];
        }
    }
    int flat(int layer, int j) const { return offset[layer] + j; }
};

IState propagate_fixed(const Network& net, const Region& box, const FixVec& fix,
                       const std::vector<Interval>* tighten, const HiddenIndex& hx) {
    IState st;
    const Vec* lo = &box.lo;
    const Vec* hi = &box.hi;
    Vec cur_lo, cur_hi;
    int hidden_layers = net.num_hidden_layers();
    st.pre_lo.resize(hidden_layers);
    st.pre_hi.resize(hidden_layers);
    st.post_lo.resize(hidden_layers);
    st.post_hi.resize(hidden_layers);
    for (int l = 0; l < hidden_layers; ++l) {
        const Mat& w = net.weights[l];
        st.pre_lo[l].resize(w.rows);
        st.pre_hi[l].resize(w.rows);
        st.post_lo[l].resize(w.rows);
        st.post_hi[l].resize(w.rows);
        for (int i = 0; i < w.rows; ++i) {
            double zl = net.biases[l][i], zh = zl;
            const double* row = w.row(i);
            for (int j = 0; j < w.cols; ++j) {
                double c = row[j];
                if (c >= 0.0) {
                    zl += c * (*lo)[j];
                    zh += c * (*hi)[j];
                } else {
                    zl += c * (*hi)[j];
                    zh += c * (*lo)[j];
                }
            }
            int f = hx.flat(l, i);
            if (tighten) {
                zl = std::max(zl, (*tighten)[f].lo);
                zh = std::min(zh, (*tighten)[f].hi);
            }
            if (zl > zh + 1e-9) {
                st.contradiction = true;
                return st;
            }
            double pl, ph;
            if (fix[f] > 0) {
                if (zh < -1e-12) {
                    st.contradiction = true;
                    return st;
                }
                zl = std::max(zl, 0.0);
                pl = zl;
                ph = std::max(zh, 0.0);
            } else if (fix[f] < 0) {
                if (zl > 1e-12) {
                    st.contradiction = true;
                    return st;
                }
                zh = std::min(zh, 0.0);
                pl = ph = 0.0;
            } else {
                pl = std::max(0.0, zl);
                ph = std::max(0.0, zh);
            }
            st.pre_lo[l][i] = zl;
            st.pre_hi[l][i] = zh;
            st.post_lo[l][i] = pl;
            st.post_hi[l][i] = ph;
        }
        lo = &st.post_lo[l];
        hi = &st.post_hi[l];
    }
    return st;
}

// phase a node's neuron is constrained to: by branch fix or by its bounds
ReluPhase node_phase(const IState& st, const FixVec& fix, const HiddenIndex& hx, int l, int i) {
    int f = hx.flat(l, i);
    if (fix[f] > 0) return ReluPhase::Active;
    if (fix[f] < 0) return ReluPhase::Inactive;
    if (st.pre_lo[l][i] >= 0.0) return ReluPhase::Active;
    if (st.pre_hi[l][i] <= 0.0) return ReluPhase::Inactive;
    return ReluPhase::Unstable;
}

// true if some non-target logit provably dominates the target over the node
bool interval_refutes(const Network& net, const IState& st, int target) {
    int hl = net.num_hidden_layers();
    const Mat& w = net.weights.back();
    const Vec& plo = st.post_lo[hl - 1];
    const Vec& phi = st.post_hi[hl - 1];
    const Vec& b = net.biases.back();
    const double* wt = w.row(target);
    for (int j = 0; j < w.rows; ++j) {
        if (j == target) continue;
        const double* wj = w.row(j);
        double ub = b[target] - b[j];
        for (int k = 0; k < w.cols; ++k) {
            double d = wt[k] - wj[k];
            ub += d >= 0.0 ? d * phi[k] : d * plo[k];
        }
        if (ub < 0.0) return true;
    }
    return false;
}

LinExpr expr_from(const Vec& coef, double cst) {
    LinExpr e;
    e.constant = cst;
    for (int i = 0; i < static_cast<int>(coef.size()); ++i) {
        if (coef[i] != 0.0) e.terms.emplace_back(i, coef[i]);
    }
    return e;
}

struct NodeLp {
    LpProblem lp;
    int num_inputs = 0;
    std::vector<int> unstable;      // flat neuron ids; var id = num_inputs + position
    std::vector<Vec> pre_coef;      // per hidden neuron (flat), kept on request
    Vec pre_cst;
    int margin_var = -1;
};

// Affine substitution through fixed phases: every pre-activation becomes an
// affine function of the inputs and the unstable posts. Unstable neurons get
// the triangle relaxation.
NodeLp build_node_lp(const Network& net, const VerifyQuery& q, const Region& box,
                     const IState& st, const FixVec& fix, const HiddenIndex& hx, double margin,
                     bool with_margin_var, bool keep_pre) {
    NodeLp node;
    int n = net.input_dim();
    node.num_inputs = n;
    for (int l = 0; l < net.num_hidden_layers(); ++l) {
        for (int i = 0; i < net.layer_dims[l + 1]; ++i) {
            if (node_phase(st, fix, hx, l, i) == ReluPhase::Unstable) {
                node.unstable.push_back(hx.flat(l, i));
            }
        }
    }
    int k = static_cast<int>(node.unstable.size());
    int nv = n + k;

    for (int i = 0; i < n; ++i) node.lp.add_var(box.lo[i], box.hi[i]);
    for (int u = 0; u < k; ++u) {
        int f = node.unstable[u];
        int l = 0;
        while (l + 1 < static_cast<int>(hx.offset.size()) && hx.offset[l + 1] <= f) ++l;
        int i = f - hx.offset[l];
        node.lp.add_var(0.0, std::max(0.0, st.pre_hi[l][i]));
    }
    if (keep_pre) {
        node.pre_coef.resize(hx.total);
        node.pre_cst.resize(hx.total);
    }

    // post-activation of the previous layer as affine rows over the nv vars;
    // layer 0 reads the weight rows directly instead of multiplying through
    // an input identity
    std::vector<Vec> prev_coef;
    Vec prev_cst;

    std::vector<int> unstable_pos(hx.total, -1);
    for (int u = 0; u < k; ++u) unstable_pos[node.unstable[u]] = u;

    int hidden_layers = net.num_hidden_layers();
    for (int l = 0; l < hidden_layers; ++l) {
        const Mat& w = net.weights[l];
        std::vector<Vec> next_coef(w.rows);
        Vec next_cst(w.rows, 0.0);
        for (int i = 0; i < w.rows; ++i) {
            Vec coef(nv, 0.0);
            double cst = net.biases[l][i];
            const double* row = w.row(i);
            if (l == 0) {
                std::copy(row, row + w.cols, coef.begin());
            } else {
                for (int j = 0; j < w.cols; ++j) {
                    double c = row[j];
                    if (c == 0.0) continue;
                    cst += c * prev_cst[j];
                    const Vec& pc = prev_coef[j];
                    for (int v = 0; v < nv; ++v) coef[v] += c * pc[v];
                }
            }
            int f = hx.flat(l, i);
            if (keep_pre) {
                node.pre_coef[f] = coef;
                node.pre_cst[f] = cst;
            }
            ReluPhase ph = node_phase(st, fix, hx, l, i);
            if (ph == ReluPhase::Active) {
                node.lp.add_ge(expr_from(coef, cst), 0.0);
                next_coef[i] = std::move(coef);
                next_cst[i] = cst;
            } else if (ph == ReluPhase::Inactive) {
                node.lp.add_le(expr_from(coef, cst), 0.0);
                next_coef[i] = Vec(nv, 0.0);
                next_cst[i] = 0.0;
            } else {
                int tvar = n + unstable_pos[f];
                double lo = st.pre_lo[l][i], hi = st.pre_hi[l][i];
                double slope = hi / (hi - lo);
                LinExpr pre = expr_from(coef, cst);
                node.lp.add_le(pre - LinExpr::var(tvar), 0.0);                // t >= pre
                node.lp.add_le(LinExpr::var(tvar) - pre * slope, -slope * lo);  // t <= slope*(pre-lo)
                next_coef[i] = Vec(nv, 0.0);
                next_coef[i][tvar] = 1.0;
                next_cst[i] = 0.0;
            }
        }
        prev_coef = std::move(next_coef);
        prev_cst = std::move(next_cst);
    }

    // logits
    const Mat& w = net.weights.back();
    std::vector<Vec> logit_coef(w.rows);
    Vec logit_cst(w.rows, 0.0);
    for (int i = 0; i < w.rows; ++i) {
        Vec coef(nv, 0.0);
        double cst = net.biases.back()[i];
        const double* row = w.row(i);
        for (int j = 0; j < w.cols; ++j) {
            double c = row[j];
            if (c == 0.0) continue;
            cst += c * prev_cst[j];
            const Vec& pc = prev_coef[j];
            for (int v = 0; v < nv; ++v) coef[v] += c * pc[v];
        }
        logit_coef[i] = std::move(coef);
        logit_cst[i] = cst;
    }

    if (with_margin_var) node.margin_var = node.lp.add_var(-1e6, 1e6);
    for (int j = 0; j < w.rows; ++j) {
        if (j == q.target) continue;
        Vec dc(nv, 0.0);
        for (int v = 0; v < nv; ++v) dc[v] = logit_coef[q.target][v] - logit_coef[j][v];
        LinExpr e = expr_from(dc, logit_cst[q.target] - logit_cst[j]);
        if (with_margin_var) e -= LinExpr::var(node.margin_var);
        node.lp.add_ge(e, with_margin_var ? 0.0 : margin);
    }

    if (q.norm == Norm::L1) {
        LinExpr total;
        for (int i = 0; i < n; ++i) {
            double width = std::max(box.hi[i] - q.center[i], q.center[i] - box.lo[i]);
            int av = node.lp.add_var(0.0, std::max(0.0, width));
            node.lp.add_le(LinExpr::var(i) - LinExpr::var(av), q.center[i]);
            node.lp.add_le(LinExpr::var(i) * -1.0 - LinExpr::var(av), -q.center[i]);
            total += LinExpr::var(av);
        }
        node.lp.add_le(total, q.radius);
    }
    return node;
}

// clamp into the box; for L1 also shrink toward the center until within budget
Vec finalize_witness(const VerifyQuery& q, const Region& box, const Vec& point) {
    int n = q.net->input_dim();
    Vec x(point.begin(), point.begin() + n);
    for (int i = 0; i < n; ++i) x[i] = std::clamp(x[i], box.lo[i], box.hi[i]);
    if (q.norm == Norm::L1) {
        double d = distance(Norm::L1, x, q.center);
        if (d > q.radius && d > 0.0) {
            double scale = q.radius / d;
            for (int i = 0; i < n; ++i) {
                x[i] = q.center[i] + (x[i] - q.center[i]) * scale;
            }
        }
    }
    return x;
}

bool witness_valid(const VerifyQuery& q, const Vec& x) {
    for (double v : x) {
        if (v < 0.0 || v > 1.0) return false;
    }
    if (distance(q.norm, x, q.center) > q.radius * (1.0 + 1e-9) + 1e-9) return false;
    return forward(*q.net, x).label == q.target;
}

struct Searcher {
    const VerifyQuery& q;
    const Network& net;
    Region box;
    HiddenIndex hx;
    Clock::time_point deadline;
    std::vector<Interval> tighten;
    bool use_tighten = false;
    VerifyOutcome out;

    explicit Searcher(const VerifyQuery& vq)
        : q(vq), net(*vq.net), box(query_box(vq)), hx(net) {
        deadline = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                                      std::chrono::duration<double>(q.timeout_s));
    }

    bool timed_out() const { return Clock::now() >= deadline; }

    // LP-based pre-activation bound tightening at the root, restricted to the
    // relaxation that already carries the targeted condition
    bool tighten_root() {
        FixVec fix(hx.total, 0);
        for (int pass = 0; pass < 2; ++pass) {
            IState st = propagate_fixed(net, box, fix, use_tighten ? &tighten : nullptr, hx);
            if (st.contradiction || interval_refutes(net, st, q.target)) return false;
            NodeLp node =
                build_node_lp(net, q, box, st, fix, hx, 0.0, false, /*keep_pre=*/true);
            if (node.unstable.empty()) return true;
            if (!use_tighten) {
                tighten.assign(hx.total, Interval{-kInf, kInf});
                use_tighten = true;
            }
            int nv = node.lp.num_vars();
            for (int f : node.unstable) {
                if (timed_out()) return true;
                Vec obj(nv, 0.0);
                const Vec& c = node.pre_coef[f];
                for (size_t v = 0; v < c.size(); ++v) obj[v] = c[v];
                LpResult mn = lp_solve(node.lp, obj);
                out.lp_calls++;
                if (mn.status == LpStatus::Infeasible) return false;
                for (size_t v = 0; v < c.size(); ++v) obj[v] = -c[v];
                LpResult mx = lp_solve(node.lp, obj);
                out.lp_calls++;
                if (mx.status == LpStatus::Infeasible) return false;
                if (mn.status == LpStatus::Optimal) {
                    tighten[f].lo = std::max(tighten[f].lo, mn.objective + node.pre_cst[f] - 1e-9);
                }
                if (mx.status == LpStatus::Optimal) {
                    tighten[f].hi = std::min(tighten[f].hi, -mx.objective + node.pre_cst[f] + 1e-9);
                }
            }
        }
        return true;
    }

    // returns true when search is done (out filled)
    bool run(long node_budget) {
        std::vector<FixVec> stack;
        stack.emplace_back(hx.total, 0);
        long explored = 0;
        while (!stack.empty()) {
            if (timed_out()) {
                out.status = VerifyStatus::Timeout;
                return true;
            }
            if (node_budget > 0 && explored >= node_budget) return false;
            FixVec fix = std::move(stack.back());
            stack.pop_back();
            ++explored;
            ++out.nodes;

            IState st = propagate_fixed(net, box, fix, use_tighten ? &tighten : nullptr, hx);
            if (st.contradiction) continue;
            if (interval_refutes(net, st, q.target)) continue;

            NodeLp node = build_node_lp(net, q, box, st, fix, hx, 0.0, false, false);
            LpResult res = lp_solve(node.lp);
            ++out.lp_calls;
            if (res.status == LpStatus::IterLimit || res.status == LpStatus::Unbounded) {
                out.status = VerifyStatus::Timeout;
                return true;
            }
            if (res.status == LpStatus::Infeasible) continue;

            Vec cand = finalize_witness(q, box, res.point);
            if (witness_valid(q, cand)) {
                out.status = VerifyStatus::Counterexample;
                out.witness = std::move(cand);
                return true;
            }

            if (node.unstable.empty()) {
                // exact leaf whose point failed validation: re-solve for the
                // widest margin and accept only a clear win
                NodeLp ml = build_node_lp(net, q, box, st, fix, hx, 0.0, true, false);
                Vec obj(ml.lp.num_vars(), 0.0);
                obj[ml.margin_var] = -1.0;
                LpResult mres = lp_solve(ml.lp, obj);
                ++out.lp_calls;
                if (mres.status == LpStatus::Optimal && mres.point[ml.margin_var] >= 1e-6) {
                    Vec c2 = finalize_witness(q, box, mres.point);
                    if (witness_valid(q, c2)) {
                        out.status = VerifyStatus::Counterexample;
                        out.witness = std::move(c2);
                        return true;
                    }
                }
                continue;
            }

            // branch on the widest unstable interval, active side first
            int best = -1;
            double best_width = -1.0;
            for (int l = 0, f = 0; l < net.num_hidden_layers(); ++l) {
                for (int i = 0; i < net.layer_dims[l + 1]; ++i, ++f) {
                    if (node_phase(st, fix, hx, l, i) != ReluPhase::Unstable) continue;
                    double width = st.pre_hi[l][i] - st.pre_lo[l][i];
                    if (width > best_width) {
                        best_width = width;
                        best = f;
                    }
                }
            }
            FixVec inactive = fix;
            inactive[best] = -1;
            stack.push_back(std::move(inactive));
            fix[best] = 1;
            stack.push_back(std::move(fix));
        }
        out.status = VerifyStatus::Robust;
        return true;
    }
};

}  // namespace

VerifyOutcome verify_targeted(const VerifyQuery& q) {
    check_query(q);
    Searcher s(q);

    // first try a bounded plain search; escalate to LP-tightened root bounds
    // when the tree does not collapse quickly
    long first_budget = s.hx.total > 20 ? 256 : 0;
    if (s.run(first_budget)) return s.out;

    if (!s.tighten_root()) {
        s.out.status = VerifyStatus::Robust;
        return s.out;
    }
    if (s.timed_out()) {
        s.out.status = VerifyStatus::Timeout;
        return s.out;
    }
    s.run(0);
    return s.out;
}

double oracle_min_distortion(const Network& net, const Vec& x, int target, Norm norm) {
    net.validate();
    int r_count = net.hidden_count();
    if (r_count > 16) {
        throw std::invalid_argument("oracle_min_distortion: refusing more than 16 hidden ReLUs");
    }
    if (static_cast<int>(x.size()) != net.input_dim()) {
        throw std::invalid_argument("oracle_min_distortion: input dim mismatch");
    }
    int n = net.input_dim();
    int hidden_layers = net.num_hidden_layers();

    double best = kInf;
    for (uint32_t mask = 0; mask < (1u << r_count); ++mask) {
        LpProblem p;
        for (int i = 0; i < n; ++i) p.add_var(0.0, 1.0);

        std::vector<int> prev(n);
        for (int i = 0; i < n; ++i) prev[i] = i;
        int bit = 0;
        for (int l = 0; l < hidden_layers; ++l) {
            const Mat& w = net.weights[l];
            std::vector<int> post(w.rows);
            for (int i = 0; i < w.rows; ++i) {
                LinExpr e = LinExpr::of(net.biases[l][i]);
                for (int j = 0; j < w.cols; ++j) {
                    if (w(i, j) != 0.0) e += LinExpr::var(prev[j]) * w(i, j);
                }
                int z = p.add_var(-kInf, kInf);
                p.add_eq(e - LinExpr::var(z), 0.0);
                bool active = (mask >> bit) & 1;
                ++bit;
                if (active) {
                    int a = p.add_var(0.0, kInf);
                    p.add_ge(LinExpr::var(z), 0.0);
                    p.add_eq(LinExpr::var(a) - LinExpr::var(z), 0.0);
                    post[i] = a;
                } else {
                    int a = p.add_var(0.0, 0.0);
                    p.add_le(LinExpr::var(z), 0.0);
                    post[i] = a;
                }
            }
            prev = std::move(post);
        }
        const Mat& w = net.weights.back();
        std::vector<int> logits(w.rows);
        for (int i = 0; i < w.rows; ++i) {
            LinExpr e = LinExpr::of(net.biases.back()[i]);
            for (int j = 0; j < w.cols; ++j) {
                if (w(i, j) != 0.0) e += LinExpr::var(prev[j]) * w(i, j);
            }
            int y = p.add_var(-kInf, kInf);
            p.add_eq(e - LinExpr::var(y), 0.0);
            logits[i] = y;
        }
        for (int j = 0; j < w.rows; ++j) {
            if (j == target) continue;
            p.add_ge(LinExpr::var(logits[target]) - LinExpr::var(logits[j]), 0.0);
        }

        Vec obj(p.num_vars(), 0.0);
        if (norm == Norm::LINF) {
            int mvar = p.add_var(0.0, kInf);
            for (int i = 0; i < n; ++i) {
                p.add_le(LinExpr::var(i) - LinExpr::var(mvar), x[i]);
                p.add_le(LinExpr::var(i) * -1.0 - LinExpr::var(mvar), -x[i]);
            }
            obj.resize(p.num_vars(), 0.0);
            obj[mvar] = 1.0;
        } else {
            obj.resize(p.num_vars() + n, 0.0);
            for (int i = 0; i < n; ++i) {
                int dv = p.add_var(0.0, kInf);
                p.add_le(LinExpr::var(i) - LinExpr::var(dv), x[i]);
                p.add_le(LinExpr::var(i) * -1.0 - LinExpr::var(dv), -x[i]);
                obj[dv] = 1.0;
            }
        }

        LpResult res = lp_solve(p, obj);
        if (res.status == LpStatus::IterLimit) {
            throw SolverError("oracle_min_distortion: iteration cap hit");
        }
        if (res.status == LpStatus::Optimal) best = std::min(best, res.objective);
    }
    return best;
}

}  // namespace minadv
