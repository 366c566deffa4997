#pragma once

#include "minadv/common.hpp"

namespace minadv {

// Dense feed-forward ReLU classifier. weights[k] maps the activations of
// layer k (dim layer_dims[k]) to the pre-activations of layer k+1. ReLU on
// every hidden layer, identity on the output layer; softmax is applied
// separately by forward().
struct Network {
    std::vector<int> layer_dims;
    std::vector<Mat> weights;
    std::vector<Vec> biases;

    int input_dim() const { return layer_dims.front(); }
    int num_classes() const { return layer_dims.back(); }
    int num_affine_layers() const { return static_cast<int>(weights.size()); }
    int num_hidden_layers() const { return num_affine_layers() - 1; }
    int hidden_count() const;

    // shape chain, finiteness, at least one hidden layer
    void validate() const;
};

struct Sample {
    Vec pixels;  // in [0,1]
    int label = 0;
};

struct ForwardResult {
    Vec logits;
    Vec probs;
    int label = 0;  // argmax of logits, lowest index wins ties
};

// Per-layer pre/post activations of one evaluation. pre has one entry per
// affine layer (the last one holds the logits); post covers hidden layers.
struct Trace {
    std::vector<Vec> pre;
    std::vector<Vec> post;
};

int argmax_lowest(const Vec& v);
Vec softmax(const Vec& logits);

Trace eval_trace(const Network& net, const Vec& x);
ForwardResult forward(const Network& net, const Vec& x);
double loss(const Network& net, const Vec& x, int y);

// gradient of the cross-entropy loss w.r.t. the input; ReLU subgradient at 0 is 0
Vec grad_input(const Network& net, const Vec& x, int y);

// gradient of v . Z(x) w.r.t. x, for logit-space objectives
Vec grad_logits_dot(const Network& net, const Vec& x, const Vec& v);

struct ParamGrads {
    std::vector<Mat> dw;
    std::vector<Vec> db;
    double mean_loss = 0.0;
};

// mean cross-entropy gradient over the batch
ParamGrads grad_params(const Network& net, const std::vector<Sample>& batch);

}  // namespace minadv
