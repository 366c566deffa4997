#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "minadv/nn.hpp"
#include "test_util.hpp"

using namespace minadv;
using namespace testutil;

TEST_CASE("zero network gives uniform softmax and label 0") {
    Network net;
    net.layer_dims = {2, 4, 3};
    net.weights = {Mat(4, 2), Mat(3, 4)};
    net.biases = {Vec(4, 0.0), Vec(3, 0.0)};
    ForwardResult f = forward(net, {0.3, 0.9});
    for (double p : f.probs) CHECK(p == doctest::Approx(1.0 / 3.0));
    CHECK(f.label == 0);
}

TEST_CASE("identity layers pass logits through") {
    Network net;
    net.layer_dims = {2, 2, 2};
    Mat eye(2, 2);
    eye(0, 0) = eye(1, 1) = 1.0;
    net.weights = {eye, eye};
    net.biases = {Vec(2, 0.0), Vec(2, 0.0)};
    ForwardResult f = forward(net, {2.0, 1.0});
    CHECK(f.logits[0] == doctest::Approx(2.0));
    CHECK(f.logits[1] == doctest::Approx(1.0));
    CHECK(f.label == 0);
}

TEST_CASE("forward matches a straight-line reimplementation") {
    Rng rng(7);
    Network net = random_network({3, 4, 3}, rng);
    for (int rep = 0; rep < 20; ++rep) {
        Vec x = random_point(3, rng);
        ForwardResult f = forward(net, x);
        Vec z = straightline_logits(net, x);
        for (int i = 0; i < 3; ++i) CHECK(f.logits[i] == doctest::Approx(z[i]).epsilon(1e-12));
    }
}

TEST_CASE("softmax probabilities sum to one") {
    Rng rng(11);
    for (int rep = 0; rep < 50; ++rep) {
        Network net = random_network({4, 5, 4}, rng);
        Vec x = random_point(4, rng);
        ForwardResult f = forward(net, x);
        double sum = 0.0;
        for (double p : f.probs) {
            CHECK(p > 0.0);
            CHECK(p < 1.0);
            sum += p;
        }
        CHECK(std::fabs(sum - 1.0) < 1e-9);
    }
}

TEST_CASE("argmax label is invariant to constant logit shifts") {
    Rng rng(13);
    Network net = random_network({3, 6, 5}, rng);
    for (int rep = 0; rep < 20; ++rep) {
        Vec x = random_point(3, rng);
        ForwardResult f = forward(net, x);
        Vec shifted = f.logits;
        double c = rng.uniform(-5.0, 5.0);
        for (double& v : shifted) v += c;
        CHECK(argmax_lowest(shifted) == f.label);
    }
}

TEST_CASE("argmax ties break toward the lowest index") {
    CHECK(argmax_lowest({1.0, 1.0, 0.5}) == 0);
    CHECK(argmax_lowest({0.5, 1.0, 1.0}) == 1);
}

TEST_CASE("forward rejects dimension mismatches") {
    Rng rng(3);
    Network net = random_network({3, 4, 2}, rng);
    CHECK_THROWS_AS(forward(net, {0.1, 0.2}), std::invalid_argument);
}

TEST_CASE("uniform-output loss is log of the class count") {
    Network net;
    net.layer_dims = {4, 8, 10};
    net.weights = {Mat(8, 4), Mat(10, 8)};
    net.biases = {Vec(8, 0.0), Vec(10, 0.0)};
    CHECK(loss(net, {0.1, 0.2, 0.3, 0.4}, 3) == doctest::Approx(std::log(10.0)));
}

TEST_CASE("saturated logits give near-zero loss for the dominant class") {
    Network net;
    net.layer_dims = {1, 1, 2};
    Mat w1(1, 1);
    w1(0, 0) = 1.0;
    Mat w2(2, 1);
    w2(0, 0) = 100.0;
    net.weights = {w1, w2};
    net.biases = {Vec{5.0}, Vec{0.0, 0.0}};
    CHECK(loss(net, {1.0}, 0) < 1e-9);
}

TEST_CASE("loss equals composed forward and negative log") {
    Rng rng(17);
    for (int rep = 0; rep < 20; ++rep) {
        Network net = random_network({3, 5, 5, 4}, rng);
        Vec x = random_point(3, rng);
        int y = static_cast<int>(rng.below(4));
        ForwardResult f = forward(net, x);
        CHECK(loss(net, x, y) == doctest::Approx(-std::log(f.probs[y])).epsilon(1e-12));
    }
}

TEST_CASE("zero-weight network has zero input gradient") {
    Network net;
    net.layer_dims = {3, 4, 2};
    net.weights = {Mat(4, 3), Mat(2, 4)};
    net.biases = {Vec(4, 0.0), Vec(2, 0.0)};
    Vec g = grad_input(net, {0.5, 0.5, 0.5}, 1);
    for (double v : g) CHECK(v == 0.0);
}

TEST_CASE("input gradient matches central finite differences") {
    Rng rng(19);
    int checked = 0;
    while (checked < 20) {
        Network net = random_network({4, 6, 5, 3}, rng);
        Vec x = random_point(4, rng);
        int y = static_cast<int>(rng.below(3));
        bool bad = false;
        for (size_t i = 0; i < x.size(); ++i) {
            if (fd_straddles_kink(net, x, i)) bad = true;
        }
        if (bad) continue;
        Vec g = grad_input(net, x, y);
        Vec fd = fd_grad_input(net, x, y);
        for (size_t i = 0; i < x.size(); ++i) {
            double rel = std::fabs(g[i] - fd[i]) /
                         std::max({std::fabs(g[i]), std::fabs(fd[i]), 1e-3});
            CHECK(rel < 1e-4);
        }
        ++checked;
    }
}

TEST_CASE("analytic softmax cross-entropy gradient on an antisymmetric net") {
    Network net = toy_antisym_net();
    Vec x{0.5, 0.5};
    ForwardResult f = forward(net, x);
    // gradient = (p0-1)*w_row0 + p1*w_row1 for logits W*x
    Vec expect{(f.probs[0] - 1.0) * 1.0 + f.probs[1] * -1.0,
               (f.probs[0] - 1.0) * -1.0 + f.probs[1] * 1.0};
    Vec g = grad_input(net, x, 0);
    CHECK(g[0] == doctest::Approx(expect[0]).epsilon(1e-12));
    CHECK(g[1] == doctest::Approx(expect[1]).epsilon(1e-12));
}

TEST_CASE("duplicated sample does not change the mean parameter gradient") {
    Rng rng(23);
    Network net = random_network({3, 4, 3}, rng);
    Sample s{random_point(3, rng), 2};
    ParamGrads once = grad_params(net, {s});
    ParamGrads twice = grad_params(net, {s, s});
    for (size_t k = 0; k < once.dw.size(); ++k) {
        for (size_t i = 0; i < once.dw[k].a.size(); ++i) {
            CHECK(once.dw[k].a[i] == doctest::Approx(twice.dw[k].a[i]).epsilon(1e-15));
        }
    }
}

TEST_CASE("zero input with zero bias kills first-layer weight gradients") {
    Rng rng(29);
    Network net = random_network({3, 4, 2}, rng);
    for (double& b : net.biases[0]) b = 0.0;
    ParamGrads pg = grad_params(net, {{Vec(3, 0.0), 1}});
    for (double v : pg.dw[0].a) CHECK(v == 0.0);
}

TEST_CASE("parameter gradients match finite differences") {
    Rng rng(31);
    Network net = random_network({3, 5, 4, 3}, rng);
    std::vector<Sample> batch;
    for (int i = 0; i < 4; ++i) batch.push_back({random_point(3, rng), static_cast<int>(rng.below(3))});
    ParamGrads pg = grad_params(net, batch);

    auto batch_loss = [&]() {
        double s = 0.0;
        for (const Sample& smp : batch) s += loss(net, smp.pixels, smp.label);
        return s / batch.size();
    };
    double h = 1e-5;
    for (int rep = 0; rep < 5; ++rep) {
        size_t k = rng.below(net.weights.size());
        size_t i = rng.below(net.weights[k].a.size());
        double keep = net.weights[k].a[i];
        net.weights[k].a[i] = keep + h;
        double up = batch_loss();
        net.weights[k].a[i] = keep - h;
        double dn = batch_loss();
        net.weights[k].a[i] = keep;
        double fd = (up - dn) / (2.0 * h);
        double rel = std::fabs(pg.dw[k].a[i] - fd) /
                     std::max({std::fabs(fd), std::fabs(pg.dw[k].a[i]), 1e-3});
        CHECK(rel < 1e-4);
    }
}

TEST_CASE("empty batch is rejected") {
    Rng rng(37);
    Network net = random_network({3, 4, 2}, rng);
    CHECK_THROWS_AS(grad_params(net, {}), std::invalid_argument);
}

TEST_CASE("forward is deterministic") {
    Rng rng(41);
    Network net = random_network({5, 6, 4}, rng);
    Vec x = random_point(5, rng);
    ForwardResult a = forward(net, x);
    ForwardResult b = forward(net, x);
    CHECK(a.logits == b.logits);
    CHECK(a.probs == b.probs);
    CHECK(a.label == b.label);
}

TEST_CASE("network validation catches shape and finiteness issues") {
    Network net;
    net.layer_dims = {2, 3, 2};
    net.weights = {Mat(3, 2), Mat(2, 3)};
    net.biases = {Vec(3, 0.0), Vec(2, 0.0)};
    CHECK_NOTHROW(net.validate());

    Network bad = net;
    bad.weights[1] = Mat(2, 4);
    CHECK_THROWS_AS(bad.validate(), FormatError);

    Network nan_net = net;
    nan_net.weights[0](0, 0) = std::numeric_limits<double>::quiet_NaN();
    CHECK_THROWS_AS(nan_net.validate(), FormatError);

    Network shallow;
    shallow.layer_dims = {2, 2};
    shallow.weights = {Mat(2, 2)};
    shallow.biases = {Vec(2, 0.0)};
    CHECK_THROWS_AS(shallow.validate(), FormatError);
}
