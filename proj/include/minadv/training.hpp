#pragma once

#include <iosfwd>

#include "minadv/data_io.hpp"

namespace minadv {

struct TrainConfig {
    std::vector<int> layer_dims{784, 24, 24, 24, 10};
    int epochs = 20;
    int batch_size = 64;
    double learning_rate = 0.1;
    double momentum = 0.9;
    uint64_t seed = 1;
    bool adversarial = false;
    double pgd_eps = 0.3;   // radius of the inner maximization
    double pgd_step = 0.05;
    int pgd_iters = 10;
};

// uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)) weights and biases from the seeded stream
Network init_network(const std::vector<int>& layer_dims, Rng& rng);

// SGD with momentum; deterministic under the config seed. Optional log stream
// gets one line per epoch.
Network train(const Dataset& train_set, const TrainConfig& cfg, std::ostream* log = nullptr);

// each batch replaced by PGD perturbations at radius pgd_eps before the step
Network adv_train(const Dataset& train_set, const TrainConfig& cfg, std::ostream* log = nullptr);

double accuracy(const Network& net, const Dataset& ds);

}  // namespace minadv
