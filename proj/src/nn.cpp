#include "minadv/nn.hpp"

#include <algorithm>

namespace minadv {

int Network::hidden_count() const {
    int n = 0;
    for (size_t k = 1; k + 1 < layer_dims.size(); ++k) n += layer_dims[k];
    return n;
}

void Network::validate() const {
    if (layer_dims.size() < 3) {
        throw FormatError("network needs at least one hidden layer");
    }
    if (weights.size() + 1 != layer_dims.size() || biases.size() != weights.size()) {
        throw FormatError("network layer count mismatch");
    }
    for (size_t k = 0; k < weights.size(); ++k) {
        if (layer_dims[k] <= 0) throw FormatError("non-positive layer dim");
        if (weights[k].rows != layer_dims[k + 1] || weights[k].cols != layer_dims[k]) {
            throw FormatError("weight shape breaks the layer chain at layer " + std::to_string(k));
        }
        if (static_cast<int>(biases[k].size()) != layer_dims[k + 1]) {
            throw FormatError("bias length mismatch at layer " + std::to_string(k));
        }
        for (double w : weights[k].a) {
            if (!std::isfinite(w)) throw FormatError("non-finite weight at layer " + std::to_string(k));
        }
        for (double b : biases[k]) {
            if (!std::isfinite(b)) throw FormatError("non-finite bias at layer " + std::to_string(k));
        }
    }
    if (layer_dims.back() <= 0) throw FormatError("non-positive class count");
}

int argmax_lowest(const Vec& v) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(v.size()); ++i) {
        if (v[i] > v[best]) best = i;
    }
    return best;
}

Vec softmax(const Vec& logits) {
    double m = *std::max_element(logits.begin(), logits.end());
    Vec p(logits.size());
    double sum = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        p[i] = std::exp(logits[i] - m);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

static void affine(const Mat& w, const Vec& b, const Vec& in, Vec& out) {
    out.resize(w.rows);
    for (int i = 0; i < w.rows; ++i) {
        const double* row = w.row(i);
        double s = b[i];
        for (int j = 0; j < w.cols; ++j) s += row[j] * in[j];
        out[i] = s;
    }
}

Trace eval_trace(const Network& net, const Vec& x) {
    if (static_cast<int>(x.size()) != net.input_dim()) {
        throw std::invalid_argument("input dim " + std::to_string(x.size()) +
                                    " does not match network input dim " +
                                    std::to_string(net.input_dim()));
    }
    Trace t;
    int layers = net.num_affine_layers();
    t.pre.resize(layers);
    t.post.resize(layers - 1);
    const Vec* cur = &x;
    for (int k = 0; k < layers; ++k) {
        affine(net.weights[k], net.biases[k], *cur, t.pre[k]);
        if (k + 1 < layers) {
            t.post[k] = t.pre[k];
            for (double& v : t.post[k]) v = std::max(0.0, v);
            cur = &t.post[k];
        }
    }
    return t;
}

ForwardResult forward(const Network& net, const Vec& x) {
    Trace t = eval_trace(net, x);
    ForwardResult r;
    r.logits = std::move(t.pre.back());
    r.probs = softmax(r.logits);
    r.label = argmax_lowest(r.logits);
    return r;
}

static double log_sum_exp(const Vec& v) {
    double m = *std::max_element(v.begin(), v.end());
    double s = 0.0;
    for (double x : v) s += std::exp(x - m);
    return m + std::log(s);
}

double loss(const Network& net, const Vec& x, int y) {
    Trace t = eval_trace(net, x);
    const Vec& z = t.pre.back();
    if (y < 0 || y >= static_cast<int>(z.size())) {
        throw std::invalid_argument("label out of range");
    }
    return log_sum_exp(z) - z[y];
}

// backward pass from a cotangent at the logits
static Vec backprop_input(const Network& net, const Trace& t, Vec g) {
    int layers = net.num_affine_layers();
    for (int k = layers - 1; k >= 0; --k) {
        const Mat& w = net.weights[k];
        Vec gx(w.cols, 0.0);
        for (int i = 0; i < w.rows; ++i) {
            const double* row = w.row(i);
            double gi = g[i];
            if (gi == 0.0) continue;
            for (int j = 0; j < w.cols; ++j) gx[j] += gi * row[j];
        }
        if (k > 0) {
            const Vec& pre = t.pre[k - 1];
            for (size_t j = 0; j < gx.size(); ++j) {
                if (pre[j] <= 0.0) gx[j] = 0.0;
            }
        }
        g = std::move(gx);
    }
    return g;
}

Vec grad_input(const Network& net, const Vec& x, int y) {
    Trace t = eval_trace(net, x);
    Vec g = softmax(t.pre.back());
    if (y < 0 || y >= static_cast<int>(g.size())) {
        throw std::invalid_argument("label out of range");
    }
    g[y] -= 1.0;
    return backprop_input(net, t, std::move(g));
}

Vec grad_logits_dot(const Network& net, const Vec& x, const Vec& v) {
    Trace t = eval_trace(net, x);
    if (v.size() != t.pre.back().size()) {
        throw std::invalid_argument("cotangent dim mismatch");
    }
    return backprop_input(net, t, v);
}

ParamGrads grad_params(const Network& net, const std::vector<Sample>& batch) {
    if (batch.empty()) throw std::invalid_argument("grad_params: empty batch");
    int layers = net.num_affine_layers();
    ParamGrads pg;
    pg.dw.reserve(layers);
    pg.db.reserve(layers);
    for (int k = 0; k < layers; ++k) {
        pg.dw.emplace_back(net.weights[k].rows, net.weights[k].cols);
        pg.db.emplace_back(net.biases[k].size(), 0.0);
    }
    for (const Sample& s : batch) {
        Trace t = eval_trace(net, s.pixels);
        const Vec& z = t.pre.back();
        pg.mean_loss += log_sum_exp(z) - z[s.label];
        Vec g = softmax(z);
        g[s.label] -= 1.0;
        for (int k = layers - 1; k >= 0; --k) {
            const Mat& w = net.weights[k];
            const Vec& in = (k == 0) ? s.pixels : t.post[k - 1];
            Mat& dw = pg.dw[k];
            for (int i = 0; i < w.rows; ++i) {
                double gi = g[i];
                pg.db[k][i] += gi;
                if (gi == 0.0) continue;
                double* drow = dw.row(i);
                for (int j = 0; j < w.cols; ++j) drow[j] += gi * in[j];
            }
            if (k > 0) {
                Vec gx(w.cols, 0.0);
                for (int i = 0; i < w.rows; ++i) {
                    const double* row = w.row(i);
                    double gi = g[i];
                    if (gi == 0.0) continue;
                    for (int j = 0; j < w.cols; ++j) gx[j] += gi * row[j];
                }
                const Vec& pre = t.pre[k - 1];
                for (size_t j = 0; j < gx.size(); ++j) {
                    if (pre[j] <= 0.0) gx[j] = 0.0;
                }
                g = std::move(gx);
            }
        }
    }
    double inv = 1.0 / static_cast<double>(batch.size());
    for (int k = 0; k < layers; ++k) {
        for (double& v : pg.dw[k].a) v *= inv;
        for (double& v : pg.db[k]) v *= inv;
    }
    pg.mean_loss *= inv;
    return pg;
}

}  // namespace minadv
