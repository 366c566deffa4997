#include "minadv/attacks.hpp"

#include <algorithm>

namespace minadv {

static double sign0(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

Vec fgm(const Network& net, const Vec& x, int y, double epsilon) {
    Vec g = grad_input(net, x, y);
    Vec out(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
        out[i] = std::clamp(x[i] + epsilon * sign0(g[i]), 0.0, 1.0);
    }
    return out;
}

Vec bim(const Network& net, const Vec& x, int y, double epsilon, double alpha, int iters) {
    if (alpha < 0.0) throw std::invalid_argument("bim: negative ball radius");
    Vec cur = x;
    for (int it = 0; it < iters; ++it) {
        cur = fgm(net, cur, y, epsilon);
        for (size_t i = 0; i < x.size(); ++i) {
            cur[i] = std::clamp(cur[i], x[i] - alpha, x[i] + alpha);
        }
    }
    return cur;
}

namespace {

// logit-margin surrogate: max(max_{i!=t} z_i - z_t, 0) and its input gradient
double surrogate(const Network& net, const Vec& x, int target, Vec* grad) {
    ForwardResult f = forward(net, x);
    int k = -1;
    for (int i = 0; i < static_cast<int>(f.logits.size()); ++i) {
        if (i == target) continue;
        if (k < 0 || f.logits[i] > f.logits[k]) k = i;
    }
    double g = f.logits[k] - f.logits[target];
    if (grad) {
        if (g > 0.0) {
            Vec v(f.logits.size(), 0.0);
            v[k] = 1.0;
            v[target] = -1.0;
            *grad = grad_logits_dot(net, x, v);
        } else {
            grad->assign(x.size(), 0.0);
        }
    }
    return std::max(g, 0.0);
}

// records the candidate when it actually classifies as the target
bool consider(const Network& net, const Vec& x, int target, Norm norm, const Vec& cand,
              AttackResult& best) {
    if (forward(net, cand).label != target) return false;
    double d = distance(norm, cand, x);
    if (d < best.distance) {
        best.distance = d;
        best.adversarial = cand;
        best.succeeded = true;
    }
    return true;
}

// tanh-space descent with the per-coordinate L-inf penalty, tau decayed on success
bool cw_linf_round(const Network& net, const Vec& x, int target, double c,
                   const AttackConfig& cfg, AttackResult& best) {
    size_t n = x.size();
    Vec w(n), xp(n), dxdw(n);
    for (size_t i = 0; i < n; ++i) {
        double t = std::clamp(2.0 * x[i] - 1.0, -1.0 + 1e-12, 1.0 - 1e-12);
        w[i] = std::atanh(t);
    }
    double tau = 1.0;
    bool found = false;
    Vec ggrad;
    for (int it = 0; it < cfg.cw_iters; ++it) {
        for (size_t i = 0; i < n; ++i) {
            double th = std::tanh(w[i]);
            xp[i] = 0.5 * (th + 1.0);
            dxdw[i] = 0.5 * (1.0 - th * th);
        }
        if (consider(net, x, target, Norm::LINF, xp, best)) {
            found = true;
            tau = std::min(tau, distance(Norm::LINF, xp, x)) * 0.9;
        }
        surrogate(net, xp, target, &ggrad);
        for (size_t i = 0; i < n; ++i) {
            double d = xp[i] - x[i];
            double pen = std::fabs(d) > tau ? sign0(d) : 0.0;
            double gx = pen + c * ggrad[i];
            w[i] -= cfg.cw_lr * gx * dxdw[i];
        }
    }
    return found;
}

// proximal descent: gradient step on c*g then soft-threshold of the offset
bool cw_l1_round(const Network& net, const Vec& x, int target, double c,
                 const AttackConfig& cfg, AttackResult& best) {
    size_t n = x.size();
    Vec xp = x;
    bool found = false;
    Vec ggrad;
    for (int it = 0; it < cfg.cw_iters; ++it) {
        surrogate(net, xp, target, &ggrad);
        for (size_t i = 0; i < n; ++i) {
            double v = xp[i] - cfg.cw_lr * c * ggrad[i];
            double d = v - x[i];
            double mag = std::fabs(d) - cfg.cw_lr;
            d = mag > 0.0 ? sign0(d) * mag : 0.0;
            xp[i] = std::clamp(x[i] + d, 0.0, 1.0);
        }
        if (consider(net, x, target, Norm::L1, xp, best)) found = true;
    }
    return found;
}

}  // namespace

AttackResult cw(const Network& net, const Vec& x, int target, Norm norm,
                const AttackConfig& cfg) {
    if (forward(net, x).label == target) {
        throw std::invalid_argument("cw: target equals the current label");
    }
    AttackResult best;
    best.target = target;

    double c = cfg.cw_c_init;
    double c_lo = 0.0, c_hi = kInf;
    for (int step = 0; step < cfg.cw_c_search_steps; ++step) {
        bool ok = norm == Norm::LINF ? cw_linf_round(net, x, target, c, cfg, best)
                                     : cw_l1_round(net, x, target, c, cfg, best);
        if (ok) {
            c_hi = c;
        } else {
            c_lo = c;
        }
        c = (c_hi == kInf) ? c * 10.0 : 0.5 * (c_lo + c_hi);
    }
    return best;
}

}  // namespace minadv
