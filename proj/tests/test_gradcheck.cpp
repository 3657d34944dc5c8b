#include <cmath>
#include <functional>
#include <random>

#include "doctest.h"
#include "sleepkit/nn/builders.hpp"
#include "sleepkit/training.hpp"

using namespace sleepkit;
using nn::Mode;
using nn::Rng;
using nn::Tensor;

namespace {

constexpr double kEps = 1e-5;

double rel_err(double a, double b) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-6});
}

void fill_random(Tensor<double>& t, std::mt19937_64& gen, double scale = 0.5) {
    std::uniform_real_distribution<double> d(-scale, scale);
    for (auto& v : t.data) v = d(gen);
}

// Scalar test loss: fixed random linear functional of the layer output.
struct LinearLoss {
    std::vector<double> c;
    explicit LinearLoss(std::size_t n, std::mt19937_64& gen) {
        std::uniform_real_distribution<double> d(-1.0, 1.0);
        c.resize(n);
        for (auto& v : c) v = d(gen);
    }
    double value(const Tensor<double>& y) const {
        double s = 0;
        for (std::size_t i = 0; i < y.numel(); ++i) s += c[i] * y.data[i];
        return s;
    }
    Tensor<double> grad(const std::vector<std::size_t>& shape) const {
        Tensor<double> g(shape);
        g.data.assign(c.begin(), c.end());
        return g;
    }
};

// Checks dL/dx and every dL/dw of a single layer against central differences.
void check_layer(nn::Layer<double>& layer, Tensor<double> x, std::uint64_t seed,
                 double tol = 1e-7) {
    std::mt19937_64 gen(seed);
    std::vector<nn::ParamRef<double>> params;
    layer.collect_params(params);
    for (auto& p : params) fill_random(*p.value, gen);
    fill_random(x, gen);

    Rng rng(0);
    auto y0 = layer.forward(x, Mode::Train, rng);
    LinearLoss loss(y0.numel(), gen);
    layer.zero_grads();
    auto dx = layer.backward(loss.grad(y0.shape));

    auto eval = [&](const Tensor<double>& xi) {
        Rng r2(0);
        return loss.value(layer.forward(xi, Mode::Infer, r2));
    };
    for (std::size_t i = 0; i < x.numel(); ++i) {
        Tensor<double> xp = x, xm = x;
        xp.data[i] += kEps;
        xm.data[i] -= kEps;
        const double fd = (eval(xp) - eval(xm)) / (2 * kEps);
        CHECK(rel_err(dx.data[i], fd) < tol);
    }
    for (auto& p : params) {
        for (std::size_t i = 0; i < p.value->numel(); ++i) {
            const double orig = p.value->data[i];
            p.value->data[i] = orig + kEps;
            const double fp = eval(x);
            p.value->data[i] = orig - kEps;
            const double fm = eval(x);
            p.value->data[i] = orig;
            const double fd = (fp - fm) / (2 * kEps);
            CHECK(rel_err(p.grad->data[i], fd) < tol);
        }
        // restore caches for any subsequent use
        Rng r3(0);
        layer.forward(x, Mode::Train, r3);
    }
}

}  // namespace

TEST_CASE("dense layer gradients match finite differences") {
    nn::Dense<double> dense("d", 5, 3);
    check_layer(dense, Tensor<double>({4, 5}), 1);
}

TEST_CASE("conv1d gradients match finite differences (incl. dilation)") {
    nn::Conv1d<double> conv("c", 2, 3, 3);
    check_layer(conv, Tensor<double>({7, 2}), 2);
    nn::Conv1d<double> dil("cd", 2, 2, 3, 2);
    check_layer(dil, Tensor<double>({9, 2}), 3);
}

TEST_CASE("activation / pool / softmax / reshape gradients match finite differences") {
    nn::LeakyRelu<double> act(0.01);
    check_layer(act, Tensor<double>({6, 3}), 4);
    nn::MaxPool2<double> pool;
    check_layer(pool, Tensor<double>({8, 3}), 5);
    nn::Softmax<double> sm;
    check_layer(sm, Tensor<double>({4, 4}), 6, 1e-6);
    nn::WindowReshape<double> wr(4);
    check_layer(wr, Tensor<double>({8, 3}), 7);
}

TEST_CASE("composite block gradients match finite differences") {
    nn::ResConvBlock<double> res("r", 2, 3, 3, 0.01);
    check_layer(res, Tensor<double>({8, 2}), 8, 1e-6);

    nn::TcnBlock<double> tcn("t", 3, 4, 3, {1, 2}, 0.01, 0.0);
    check_layer(tcn, Tensor<double>({6, 3}), 9, 1e-6);

    auto td = nn::TimeDistributed<double>(8, 1);
    td.add(std::make_unique<nn::ResConvBlock<double>>("i", 1, 2, 3, 0.01));
    check_layer(td, Tensor<double>({3, 8}), 10, 1e-6);
}

TEST_CASE("toy network end-to-end gradient check at 64-bit") {
    // Input 2048, 2 ResConv blocks, 1 TCN block, 4-way head.
    nn::SleepPpgConfig cfg;
    cfg.input_len = 2048;
    cfg.windows = 4;
    cfg.resconv_filters = {3, 4};
    cfg.conv_kernel = 3;
    cfg.embed_dim = 6;
    cfg.demographics = 2;
    cfg.tcn_blocks = 1;
    cfg.tcn_kernel = 3;
    cfg.tcn_dilations = {1, 2};
    cfg.tcn_filters = 6;
    cfg.dropout = 0.0;

    auto model = nn::build_sleepppg_net<double>(cfg);
    initialize_model(model, 77);
    model.set_demographics({0.4, 1.0});

    std::mt19937_64 gen(123);
    Tensor<double> x({2048, 1});
    fill_random(x, gen, 1.0);

    Hypnogram labels;
    labels.stages = {SleepStage::Wake, SleepStage::Light, SleepStage::Deep, SleepStage::REM};
    const std::vector<double> w = {1.0, 0.5, 2.0, 1.0};

    auto eval_loss = [&] {
        auto probs = model.forward(x, Mode::Infer);
        return weighted_cross_entropy(probs, labels, w).first;
    };

    auto probs = model.forward(x, Mode::Train);
    model.zero_grads();
    model.backward(weighted_cross_entropy(probs, labels, w).second);

    double max_rel = 0.0;
    std::size_t checked = 0;
    for (const auto& p : model.params()) {
        for (std::size_t i = 0; i < p.value->numel(); ++i) {
            const double orig = p.value->data[i];
            p.value->data[i] = orig + kEps;
            const double fp = eval_loss();
            p.value->data[i] = orig - kEps;
            const double fm = eval_loss();
            p.value->data[i] = orig;
            const double fd = (fp - fm) / (2 * kEps);
            const double an = p.grad->data[i];
            if (std::abs(fd) < 1e-10 && std::abs(an) < 1e-10) continue;
            max_rel = std::max(max_rel, rel_err(an, fd));
            ++checked;
        }
    }
    CHECK(checked > 1000);
    CHECK(max_rel < 1e-4);
}

TEST_CASE("zero upstream gradient leaves a zero gradient table") {
    nn::SleepPpgConfig cfg;
    cfg.input_len = 1024;
    cfg.windows = 2;
    cfg.resconv_filters = {2, 2};
    cfg.embed_dim = 4;
    cfg.tcn_blocks = 1;
    cfg.tcn_kernel = 3;
    cfg.tcn_dilations = {1};
    cfg.tcn_filters = 4;
    cfg.dropout = 0.0;
    auto model = nn::build_sleepppg_net<double>(cfg);
    initialize_model(model, 5);

    Tensor<double> x({1024, 1});
    std::mt19937_64 gen(2);
    fill_random(x, gen);
    model.forward(x, Mode::Train);
    model.zero_grads();
    model.backward(Tensor<double>({2, 4}));
    for (const auto& [name, g] : model.gradients())
        for (double v : g.data) CHECK(v == 0.0);
}

TEST_CASE("zero-weight windows contribute nothing to the gradient") {
    Tensor<double> probs({4, 4});
    probs.fill(0.25);
    Hypnogram labels;
    labels.stages = {SleepStage::Wake, SleepStage::Light, SleepStage::Deep, SleepStage::Pad};
    auto [loss, dP] = weighted_cross_entropy(probs, labels, {1.0, 0.0, 1.0, 0.0});
    CHECK(loss == doctest::Approx(std::log(4.0)));
    for (std::size_t c = 0; c < 4; ++c) {
        CHECK(dP.at(1, c) == 0.0);
        CHECK(dP.at(3, c) == 0.0);
    }
    CHECK(dP.at(0, 0) != 0.0);
}
