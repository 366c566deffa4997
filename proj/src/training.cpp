#include "minadv/training.hpp"

#include <algorithm>
#include <ostream>

namespace minadv {

Network init_network(const std::vector<int>& layer_dims, Rng& rng) {
    Network net;
    net.layer_dims = layer_dims;
    for (size_t k = 0; k + 1 < layer_dims.size(); ++k) {
        int in = layer_dims[k], out = layer_dims[k + 1];
        double bound = 1.0 / std::sqrt(static_cast<double>(in));
        Mat w(out, in);
        for (double& v : w.a) v = rng.uniform(-bound, bound);
        Vec b(out);
        for (double& v : b) v = rng.uniform(-bound, bound);
        net.weights.push_back(std::move(w));
        net.biases.push_back(std::move(b));
    }
    net.validate();
    return net;
}

namespace {

// PGD with a random start inside the epsilon ball, clipped to the ball and [0,1]
Vec pgd_perturb(const Network& net, const Sample& s, double eps, double step, int iters,
                Rng& rng) {
    Vec cur(s.pixels.size());
    for (size_t i = 0; i < cur.size(); ++i) {
        cur[i] = std::clamp(s.pixels[i] + rng.uniform(-eps, eps), 0.0, 1.0);
    }
    for (int it = 0; it < iters; ++it) {
        Vec g = grad_input(net, cur, s.label);
        for (size_t i = 0; i < cur.size(); ++i) {
            double d = g[i] > 0.0 ? 1.0 : (g[i] < 0.0 ? -1.0 : 0.0);
            double v = std::clamp(cur[i] + step * d, 0.0, 1.0);
            cur[i] = std::clamp(v, s.pixels[i] - eps, s.pixels[i] + eps);
        }
    }
    return cur;
}

Network run_training(const Dataset& train_set, const TrainConfig& cfg, bool adversarial,
                     std::ostream* log) {
    if (train_set.samples.empty()) throw std::invalid_argument("train: empty dataset");
    if (cfg.epochs < 0 || cfg.batch_size <= 0 || cfg.learning_rate <= 0.0) {
        throw std::invalid_argument("train: bad hyperparameters");
    }
    Rng rng(cfg.seed);
    // separate stream for attack noise so pgd_eps=0 matches plain training
    Rng attack_rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    Network net = init_network(cfg.layer_dims, rng);

    std::vector<Mat> vel_w;
    std::vector<Vec> vel_b;
    for (size_t k = 0; k < net.weights.size(); ++k) {
        vel_w.emplace_back(net.weights[k].rows, net.weights[k].cols);
        vel_b.emplace_back(net.biases[k].size(), 0.0);
    }

    std::vector<int> order(train_set.samples.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);

    std::vector<Sample> batch;
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        rng.shuffle(order);
        double epoch_loss = 0.0;
        long batches = 0;
        for (size_t start = 0; start < order.size(); start += cfg.batch_size) {
            size_t stop = std::min(order.size(), start + cfg.batch_size);
            batch.clear();
            for (size_t i = start; i < stop; ++i) {
                const Sample& s = train_set.samples[order[i]];
                if (adversarial) {
                    batch.push_back({pgd_perturb(net, s, cfg.pgd_eps, cfg.pgd_step,
                                                 cfg.pgd_iters, attack_rng),
                                     s.label});
                } else {
                    batch.push_back(s);
                }
            }
            ParamGrads pg = grad_params(net, batch);
            if (!std::isfinite(pg.mean_loss)) {
                throw TrainingError("training diverged (loss not finite) at epoch " +
                                        std::to_string(epoch),
                                    epoch);
            }
            epoch_loss += pg.mean_loss;
            ++batches;
            for (size_t k = 0; k < net.weights.size(); ++k) {
                double* w = net.weights[k].a.data();
                double* vw = vel_w[k].a.data();
                const double* gw = pg.dw[k].a.data();
                for (size_t i = 0; i < net.weights[k].a.size(); ++i) {
                    vw[i] = cfg.momentum * vw[i] + gw[i];
                    w[i] -= cfg.learning_rate * vw[i];
                }
                for (size_t i = 0; i < net.biases[k].size(); ++i) {
                    vel_b[k][i] = cfg.momentum * vel_b[k][i] + pg.db[k][i];
                    net.biases[k][i] -= cfg.learning_rate * vel_b[k][i];
                }
            }
        }
        if (log) {
            *log << "epoch " << epoch << " mean loss " << (epoch_loss / std::max(1L, batches))
                 << "\n";
        }
    }
    return net;
}

}  // namespace

Network train(const Dataset& train_set, const TrainConfig& cfg, std::ostream* log) {
    return run_training(train_set, cfg, false, log);
}

Network adv_train(const Dataset& train_set, const TrainConfig& cfg, std::ostream* log) {
    if (!cfg.adversarial) throw std::invalid_argument("adv_train: adversarial flag not set");
    return run_training(train_set, cfg, true, log);
}

double accuracy(const Network& net, const Dataset& ds) {
    if (ds.samples.empty()) throw std::invalid_argument("accuracy: empty dataset");
    long correct = 0;
    for (const Sample& s : ds.samples) {
        if (forward(net, s.pixels).label == s.label) ++correct;
    }
    return static_cast<double>(correct) / static_cast<double>(ds.samples.size());
}

}  // namespace minadv
