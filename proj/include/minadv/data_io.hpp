#pragma once

#include <string>

#include "minadv/nn.hpp"

namespace minadv {

struct Dataset {
    std::vector<Sample> samples;
    std::string split;  // "train" or "test"

    int pixel_dim() const { return samples.empty() ? 0 : static_cast<int>(samples[0].pixels.size()); }
};

// IDX files; gzip-compressed inputs are detected by a .gz extension.
Dataset load_mnist_idx(const std::string& images_path, const std::string& labels_path);

// Text format: "minadv-net" header, layer dims, then per-layer weight rows
// and biases with 17 significant digits. Round trips are byte identical.
void save_network(const Network& net, const std::string& path);
Network load_network(const std::string& path);

}  // namespace minadv
