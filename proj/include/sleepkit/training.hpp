#pragma once

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sleepkit/nn/builders.hpp"
#include "sleepkit/nn/model.hpp"
#include "sleepkit/records.hpp"

namespace sleepkit {

enum class TrainScheme { Scratch, FromPretrained, TransferLearn };

struct TrainConfig {
    double learning_rate = 2.5e-4;
    int epochs = 30;
    int batch_size = 8;
    TrainScheme scheme = TrainScheme::Scratch;
    std::uint64_t seed = 0;
    double dropout = 0.2;
    double val_fraction = 0.1;

    static TrainConfig scratch() { return {}; }
    static TrainConfig finetune(TrainScheme s = TrainScheme::FromPretrained) {
        TrainConfig c;
        c.learning_rate = 1.0e-4;
        c.epochs = 5;
        c.scheme = s;
        return c;
    }
};

// w_c = N_total / (4 * N_c) for present classes, capped at 10 (absent
// classes get the cap); scaled so the mean weight over unpadded windows is 1.
std::array<double, 4> class_weights(const std::vector<Hypnogram>& hypnograms);

// Per-window weights: class weight at each scored window, 0 at Pad.
std::vector<double> sample_weights(const Hypnogram& h, const std::array<double, 4>& cw);

// loss = -sum_l w_l log P[l, y_l] / sum_l w_l; also returns dLoss/dP.
template <typename Real>
std::pair<double, nn::Tensor<Real>> weighted_cross_entropy(const nn::Tensor<Real>& probs,
                                                           const Hypnogram& labels,
                                                           const std::vector<double>& w) {
    const std::size_t L = probs.shape[0], C = probs.shape[1];
    if (labels.size() != L || w.size() != L)
        throw InternalError("weighted_cross_entropy: label/weight length mismatch");
    double wsum = 0.0;
    for (double wi : w) wsum += wi;
    if (wsum <= 0.0) throw DataError("weighted_cross_entropy: zero total sample weight");
    nn::Tensor<Real> dP(probs.shape);
    double loss = 0.0;
    constexpr double eps = 1e-12;
    for (std::size_t l = 0; l < L; ++l) {
        if (w[l] == 0.0) continue;
        const auto y = static_cast<std::size_t>(labels.stages[l]);
        if (y >= C) throw InternalError("weighted_cross_entropy: weighted Pad window");
        const double p = std::max(static_cast<double>(probs.at(l, y)), eps);
        loss -= w[l] * std::log(p);
        dP.at(l, y) = static_cast<Real>(-w[l] / (p * wsum));
    }
    return {loss / wsum, dP};
}

// Uniform on +/- sqrt(6 / (fan_in + fan_out)); seeded and reproducible.
template <typename Real>
nn::Tensor<Real> xavier_init(const std::vector<std::size_t>& shape, std::uint64_t seed) {
    // fan_in/fan_out: Dense [In x Out]; Conv [k x Cin x Cout] uses k*Cin / k*Cout.
    std::size_t fan_in, fan_out;
    if (shape.size() == 3) {
        fan_in = shape[0] * shape[1];
        fan_out = shape[0] * shape[2];
    } else if (shape.size() == 2) {
        fan_in = shape[0];
        fan_out = shape[1];
    } else {
        fan_in = fan_out = shape.empty() ? 1 : shape[0];
    }
    const double bound = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    nn::Rng rng(seed);
    std::uniform_real_distribution<double> dist(-bound, bound);
    nn::Tensor<Real> t(shape);
    for (auto& v : t.data) v = static_cast<Real>(dist(rng));
    return t;
}

// Xavier-uniform weights, zero biases; sub-seed per parameter derived from
// the parameter name so the init is order-independent.
template <typename Real>
void initialize_model(const nn::Model<Real>& model, std::uint64_t seed) {
    for (const auto& p : model.params()) {
        const bool is_bias = p.name.size() >= 2 && p.name.compare(p.name.size() - 2, 2, "/b") == 0;
        if (is_bias) {
            p.value->fill(Real(0));
            continue;
        }
        std::uint64_t h = seed ^ 0x9e3779b97f4a7c15ull;
        for (char c : p.name) h = (h ^ static_cast<unsigned char>(c)) * 0x100000001b3ull;
        *p.value = xavier_init<Real>(p.value->shape, h);
    }
}

struct AdamConfig {
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-7;
};

template <typename Real>
struct AdamState {
    std::map<std::string, std::pair<std::vector<double>, std::vector<double>>> moments;
    long step = 0;
};

// Standard bias-corrected Adam update over every param that has a gradient.
template <typename Real>
void adam_step(const std::vector<nn::ParamRef<Real>>& params, AdamState<Real>& state, double lr,
               const AdamConfig& cfg = {}) {
    ++state.step;
    const double bc1 = 1.0 - std::pow(cfg.beta1, state.step);
    const double bc2 = 1.0 - std::pow(cfg.beta2, state.step);
    for (const auto& p : params) {
        if (!p.grad) continue;
        auto& [m, v] = state.moments[p.name];
        if (m.empty()) {
            m.assign(p.value->numel(), 0.0);
            v.assign(p.value->numel(), 0.0);
        }
        for (std::size_t i = 0; i < p.value->numel(); ++i) {
            const double g = static_cast<double>(p.grad->data[i]);
            if (!std::isfinite(g))
                throw InternalError("adam_step: non-finite gradient in '" + p.name + "' at step " +
                                    std::to_string(state.step));
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g;
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g * g;
            const double mh = m[i] / bc1, vh = v[i] / bc2;
            p.value->data[i] -= static_cast<Real>(lr * mh / (std::sqrt(vh) + cfg.eps));
        }
    }
}

struct TrainSample {
    std::string id;
    nn::Tensor<float> input;
    Hypnogram hypnogram;
    std::vector<float> demographics;
};

struct EpochStats {
    int epoch = 0;
    double train_loss = 0.0;
    double train_accuracy = 0.0;
    std::optional<double> val_kappa;
    std::optional<double> val_accuracy;
};

struct TrainHistory {
    std::vector<EpochStats> epochs;
    int best_epoch = -1;
};

// Mini-batch training with seeded shuffling and per-epoch validation on the
// last val_fraction of the (seed-shuffled) dataset. When checkpoint_dir is
// non-empty, writes epoch checkpoints plus a JSON-lines history and keeps
// the best-by-validation-kappa weights in best.spgw.
TrainHistory run_training(const nn::Model<float>& model, const std::vector<TrainSample>& dataset,
                          const TrainConfig& config, const std::string& checkpoint_dir = "");

struct FoldManifest {
    struct Fold {
        std::vector<std::string> train_ids, test_ids;
    };
    std::vector<Fold> folds;
};

FoldManifest load_fold_manifest(const std::string& path);
// Every id appears in exactly one test partition; train/test disjoint per fold.
void validate_fold_manifest(const FoldManifest& m, const std::vector<std::string>& all_ids);

Hypnogram predict_hypnogram(const nn::Tensor<float>& probs, std::size_t unpadded_windows);

}  // namespace sleepkit
