#pragma once

#include <zlib.h>

#include <fstream>
#include <string>
#include <vector>

#include "minadv/lp.hpp"
#include "minadv/nn.hpp"

namespace testutil {

using minadv::Mat;
using minadv::Network;
using minadv::Rng;
using minadv::Vec;

inline Network random_network(const std::vector<int>& dims, Rng& rng, double scale = 0.0) {
    Network net;
    net.layer_dims = dims;
    for (size_t k = 0; k + 1 < dims.size(); ++k) {
        double bound = scale > 0.0 ? scale : 1.5 / std::sqrt(static_cast<double>(dims[k]));
        Mat w(dims[k + 1], dims[k]);
        for (double& v : w.a) v = rng.uniform(-bound, bound);
        Vec b(dims[k + 1]);
        for (double& v : b) v = rng.uniform(-bound, bound);
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    return net;
}

inline Vec random_point(int n, Rng& rng) {
    Vec x(n);
    for (double& v : x) v = rng.unit();
    return x;
}

// independent straight-line reimplementation of the layer recurrence
inline Vec straightline_logits(const Network& net, const Vec& x) {
    Vec cur = x;
    for (size_t k = 0; k < net.weights.size(); ++k) {
        Vec next(net.weights[k].rows);
        for (int i = 0; i < net.weights[k].rows; ++i) {
            double s = net.biases[k][i];
            for (int j = 0; j < net.weights[k].cols; ++j) s += net.weights[k](i, j) * cur[j];
            next[i] = s;
        }
        if (k + 1 < net.weights.size()) {
            for (double& v : next) {
                if (v < 0.0) v = 0.0;
            }
        }
        cur = std::move(next);
    }
    return cur;
}

// central finite differences of the loss w.r.t. the input
inline Vec fd_grad_input(const Network& net, const Vec& x, int y, double h = 1e-5) {
    Vec g(x.size());
    Vec p = x;
    for (size_t i = 0; i < x.size(); ++i) {
        p[i] = x[i] + h;
        double up = minadv::loss(net, p, y);
        p[i] = x[i] - h;
        double dn = minadv::loss(net, p, y);
        p[i] = x[i];
        g[i] = (up - dn) / (2.0 * h);
    }
    return g;
}

// true when some hidden pre-activation changes sign between x +- h*e_i,
// which makes the central difference invalid at that probe
inline bool fd_straddles_kink(const Network& net, const Vec& x, size_t i, double h = 1e-5) {
    Vec p = x;
    p[i] = x[i] + h;
    minadv::Trace up = minadv::eval_trace(net, p);
    p[i] = x[i] - h;
    minadv::Trace dn = minadv::eval_trace(net, p);
    for (size_t l = 0; l + 1 < up.pre.size(); ++l) {
        for (size_t j = 0; j < up.pre[l].size(); ++j) {
            if ((up.pre[l][j] > 0.0) != (dn.pre[l][j] > 0.0)) return true;
        }
    }
    return false;
}

// 1-D toy with scores (x, 1-x): hidden ReLU pinned in its active region
inline Network toy_boundary_net() {
    Network net;
    net.layer_dims = {1, 1, 2};
    Mat w1(1, 1);
    w1(0, 0) = 1.0;
    net.weights.push_back(w1);
    net.biases.push_back({1.0});
    Mat w2(2, 1);
    w2(0, 0) = 1.0;
    w2(1, 0) = -1.0;
    net.weights.push_back(w2);
    net.biases.push_back({-1.0, 2.0});
    return net;
}

// logits exactly W*x for W = ((1,-1),(-1,1)) through an always-active hidden layer
inline Network toy_antisym_net() {
    Network net;
    net.layer_dims = {2, 2, 2};
    Mat w1(2, 2);
    w1(0, 0) = 1.0;
    w1(1, 1) = 1.0;
    net.weights.push_back(w1);
    net.biases.push_back({1.0, 1.0});
    Mat w2(2, 2);
    w2(0, 0) = 1.0;
    w2(0, 1) = -1.0;
    w2(1, 0) = -1.0;
    w2(1, 1) = 1.0;
    net.weights.push_back(w2);
    net.biases.push_back({0.0, 0.0});
    return net;
}

// single hidden unit crossing zero at x = 0.5
inline Network toy_crossing_net() {
    Network net;
    net.layer_dims = {1, 1, 2};
    Mat w1(1, 1);
    w1(0, 0) = 1.0;
    net.weights.push_back(w1);
    net.biases.push_back({-0.5});
    Mat w2(2, 1);
    w2(0, 0) = 1.0;
    net.weights.push_back(w2);
    net.biases.push_back({0.0, 0.0});
    return net;
}

inline void write_idx_images(const std::string& path,
                             const std::vector<std::vector<unsigned char>>& images, int rows,
                             int cols, bool gz = false, uint32_t magic = 2051,
                             int count_override = -1) {
    std::vector<unsigned char> buf;
    auto be = [&](uint32_t v) {
        buf.push_back(v >> 24);
        buf.push_back(v >> 16);
        buf.push_back(v >> 8);
        buf.push_back(v);
    };
    be(magic);
    be(count_override >= 0 ? count_override : static_cast<uint32_t>(images.size()));
    be(rows);
    be(cols);
    for (const auto& img : images) buf.insert(buf.end(), img.begin(), img.end());
    if (gz) {
        gzFile f = gzopen(path.c_str(), "wb");
        gzwrite(f, buf.data(), static_cast<unsigned>(buf.size()));
        gzclose(f);
    } else {
        std::ofstream f(path, std::ios::binary);
        f.write(reinterpret_cast<const char*>(buf.data()), buf.size());
    }
}

inline void write_idx_labels(const std::string& path, const std::vector<unsigned char>& labels,
                             bool gz = false, uint32_t magic = 2049, int count_override = -1) {
    std::vector<unsigned char> buf;
    auto be = [&](uint32_t v) {
        buf.push_back(v >> 24);
        buf.push_back(v >> 16);
        buf.push_back(v >> 8);
        buf.push_back(v);
    };
    be(magic);
    be(count_override >= 0 ? count_override : static_cast<uint32_t>(labels.size()));
    buf.insert(buf.end(), labels.begin(), labels.end());
    if (gz) {
        gzFile f = gzopen(path.c_str(), "wb");
        gzwrite(f, buf.data(), static_cast<unsigned>(buf.size()));
        gzclose(f);
    } else {
        std::ofstream f(path, std::ios::binary);
        f.write(reinterpret_cast<const char*>(buf.data()), buf.size());
    }
}

// Fourier-Motzkin feasibility over a handful of variables; rows as a*x <= b
struct FmRow {
    Vec a;
    double b;
};

inline bool fm_feasible(std::vector<FmRow> rows, int nvars, double tol = 1e-7) {
    for (int k = 0; k < nvars; ++k) {
        std::vector<FmRow> pos, neg, zero;
        for (FmRow& r : rows) {
            if (r.a[k] > 1e-12) {
                pos.push_back(r);
            } else if (r.a[k] < -1e-12) {
                neg.push_back(r);
            } else {
                zero.push_back(r);
            }
        }
        std::vector<FmRow> next = zero;
        for (const FmRow& p : pos) {
            for (const FmRow& n : neg) {
                FmRow c;
                c.a.assign(nvars, 0.0);
                double wp = -n.a[k], wn = p.a[k];
                for (int j = 0; j < nvars; ++j) c.a[j] = wp * p.a[j] + wn * n.a[j];
                c.b = wp * p.b + wn * n.b;
                next.push_back(std::move(c));
            }
        }
        rows = std::move(next);
    }
    for (const FmRow& r : rows) {
        if (r.b < -tol) return false;
    }
    return true;
}

// expand an LpProblem (bounds + ranged rows) into a*x <= b form
inline std::vector<FmRow> fm_rows_of(const minadv::LpProblem& p) {
    std::vector<FmRow> rows;
    int n = p.num_vars();
    auto add = [&](const Vec& a, double b) { rows.push_back({a, b}); };
    for (int j = 0; j < n; ++j) {
        Vec a(n, 0.0);
        if (p.upper[j] != minadv::kInf) {
            a[j] = 1.0;
            add(a, p.upper[j]);
            a[j] = 0.0;
        }
        if (p.lower[j] != -minadv::kInf) {
            a[j] = -1.0;
            add(a, -p.lower[j]);
            a[j] = 0.0;
        }
    }
    for (const minadv::LpRow& r : p.rows) {
        Vec a(n, 0.0);
        for (auto [v, c] : r.coeffs) a[v] = c;
        if (r.hi != minadv::kInf) add(a, r.hi);
        if (r.lo != -minadv::kInf) {
            Vec na(n, 0.0);
            for (auto [v, c] : r.coeffs) na[v] = -c;
            add(na, -r.lo);
        }
    }
    return rows;
}

}  // namespace testutil
