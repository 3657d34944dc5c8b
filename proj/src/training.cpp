#include "sleepkit/training.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "json.hpp"
#include "sleepkit/eval.hpp"
#include "sleepkit/nn/spgw.hpp"

namespace sleepkit {

using nn::Mode;
using nn::Tensor;

std::array<double, 4> class_weights(const std::vector<Hypnogram>& hypnograms) {
    long counts[4] = {0, 0, 0, 0};
    long total = 0;
    for (const auto& h : hypnograms)
        for (auto s : h.stages) {
            if (s == SleepStage::Pad) continue;
            ++counts[static_cast<int>(s)];
            ++total;
        }
    if (total == 0) throw DataError("class_weights: no scored windows in training set");

    constexpr double cap = 10.0;
    std::array<double, 4> w;
    for (int c = 0; c < 4; ++c) {
        w[c] = counts[c] > 0
                   ? std::min(cap, static_cast<double>(total) / (4.0 * static_cast<double>(counts[c])))
                   : cap;
    }
    // Mean weight over scored windows -> 1.
    double mean = 0.0;
    for (int c = 0; c < 4; ++c) mean += w[c] * static_cast<double>(counts[c]);
    mean /= static_cast<double>(total);
    for (auto& v : w) v /= mean;
    return w;
}

std::vector<double> sample_weights(const Hypnogram& h, const std::array<double, 4>& cw) {
    std::vector<double> w(h.size(), 0.0);
    for (std::size_t i = 0; i < h.size(); ++i)
        if (h.stages[i] != SleepStage::Pad) w[i] = cw[static_cast<int>(h.stages[i])];
    return w;
}

Hypnogram predict_hypnogram(const Tensor<float>& probs, std::size_t unpadded_windows) {
    Hypnogram out;
    out.stages.resize(probs.shape[0], SleepStage::Pad);
    for (std::size_t l = 0; l < std::min(unpadded_windows, probs.shape[0]); ++l) {
        std::size_t best = 0;
        for (std::size_t c = 1; c < probs.shape[1]; ++c)
            if (probs.at(l, c) > probs.at(l, best)) best = c;
        out.stages[l] = static_cast<SleepStage>(best);
    }
    return out;
}

namespace {

double scored_accuracy(const Hypnogram& truth, const Tensor<float>& probs) {
    long correct = 0, total = 0;
    for (std::size_t l = 0; l < truth.size(); ++l) {
        if (truth.stages[l] == SleepStage::Pad) continue;
        std::size_t best = 0;
        for (std::size_t c = 1; c < probs.shape[1]; ++c)
            if (probs.at(l, c) > probs.at(l, best)) best = c;
        if (best == static_cast<std::size_t>(truth.stages[l])) ++correct;
        ++total;
    }
    return total ? static_cast<double>(correct) / static_cast<double>(total) : 0.0;
}

}  // namespace

TrainHistory run_training(const nn::Model<float>& model, const std::vector<TrainSample>& dataset,
                          const TrainConfig& config, const std::string& checkpoint_dir) {
    if (dataset.empty()) throw DataError("run_training: empty dataset");

    // Seeded split: shuffle once, hold out the tail as validation.
    std::vector<std::size_t> order(dataset.size());
    std::iota(order.begin(), order.end(), 0);
    nn::Rng split_rng(config.seed ^ 0x5eedf01dull);
    std::shuffle(order.begin(), order.end(), split_rng);
    const auto n_val = static_cast<std::size_t>(config.val_fraction * static_cast<double>(dataset.size()));
    std::vector<std::size_t> val_idx(order.end() - static_cast<long>(n_val), order.end());
    std::vector<std::size_t> train_idx(order.begin(), order.end() - static_cast<long>(n_val));

    std::vector<Hypnogram> train_hyps;
    for (auto i : train_idx) train_hyps.push_back(dataset[i].hypnogram);
    const auto cw = class_weights(train_hyps);

    AdamState<float> adam;
    TrainHistory hist;
    double best_score = -1e300;

    std::ofstream hist_out;
    if (!checkpoint_dir.empty()) {
        std::filesystem::create_directories(checkpoint_dir);
        hist_out.open(checkpoint_dir + "/history.jsonl");
    }

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        nn::Rng epoch_rng(config.seed + static_cast<std::uint64_t>(epoch) * 0x9e3779b9ull);
        std::vector<std::size_t> sched = train_idx;
        std::shuffle(sched.begin(), sched.end(), epoch_rng);

        double loss_sum = 0.0, acc_sum = 0.0;
        for (std::size_t b = 0; b < sched.size(); b += static_cast<std::size_t>(config.batch_size)) {
            const std::size_t be = std::min(sched.size(), b + static_cast<std::size_t>(config.batch_size));
            const double inv_n = 1.0 / static_cast<double>(be - b);
            model.zero_grads();
            for (std::size_t s = b; s < be; ++s) {
                const auto& sample = dataset[sched[s]];
                model.set_demographics(sample.demographics);
                const std::uint64_t fwd_seed =
                    config.seed ^ (static_cast<std::uint64_t>(epoch) << 32) ^ sched[s];
                Tensor<float> probs = model.forward(sample.input, Mode::Train, fwd_seed);
                auto w = sample_weights(sample.hypnogram, cw);
                auto [loss, dP] = weighted_cross_entropy(probs, sample.hypnogram, w);
                for (auto& g : dP.data) g *= static_cast<float>(inv_n);
                model.backward(dP);
                loss_sum += loss;
                acc_sum += scored_accuracy(sample.hypnogram, probs);
            }
            adam_step(model.params(), adam, config.learning_rate);
        }

        EpochStats stats;
        stats.epoch = epoch;
        stats.train_loss = loss_sum / static_cast<double>(sched.size());
        stats.train_accuracy = acc_sum / static_cast<double>(sched.size());

        if (!val_idx.empty()) {
            std::vector<double> kappas, accs;
            for (auto i : val_idx) {
                const auto& sample = dataset[i];
                model.set_demographics(sample.demographics);
                Tensor<float> probs = model.forward(sample.input, Mode::Infer);
                auto pred = predict_hypnogram(probs, sample.hypnogram.unpadded_size());
                kappas.push_back(cohens_kappa(sample.hypnogram, pred));
                accs.push_back(accuracy(sample.hypnogram, pred));
            }
            std::sort(kappas.begin(), kappas.end());
            std::sort(accs.begin(), accs.end());
            stats.val_kappa = kappas[kappas.size() / 2];
            stats.val_accuracy = accs[accs.size() / 2];
        }
        hist.epochs.push_back(stats);

        const double score = stats.val_kappa ? *stats.val_kappa : -stats.train_loss;
        if (score > best_score) {
            best_score = score;
            hist.best_epoch = epoch;
            if (!checkpoint_dir.empty()) nn::save_weights(model, checkpoint_dir + "/best.spgw");
        }
        if (!checkpoint_dir.empty()) {
            nn::save_weights(model, checkpoint_dir + "/epoch" + std::to_string(epoch) + ".spgw");
            nlohmann::json j = {{"epoch", stats.epoch},
                                {"train_loss", stats.train_loss},
                                {"train_accuracy", stats.train_accuracy}};
            if (stats.val_kappa) j["val_kappa"] = *stats.val_kappa;
            if (stats.val_accuracy) j["val_accuracy"] = *stats.val_accuracy;
            hist_out << j.dump() << "\n";
            hist_out.flush();
        }
    }
    return hist;
}

FoldManifest load_fold_manifest(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("load_fold_manifest: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("load_fold_manifest: malformed JSON in " + path + ": " + e.what());
    }
    FoldManifest m;
    for (const auto& f : j.at("folds")) {
        FoldManifest::Fold fold;
        fold.train_ids = f.at("train").get<std::vector<std::string>>();
        fold.test_ids = f.at("test").get<std::vector<std::string>>();
        m.folds.push_back(std::move(fold));
    }
    return m;
}

void validate_fold_manifest(const FoldManifest& m, const std::vector<std::string>& all_ids) {
    std::set<std::string> seen;
    for (const auto& fold : m.folds) {
        std::set<std::string> train(fold.train_ids.begin(), fold.train_ids.end());
        for (const auto& id : fold.test_ids) {
            if (train.count(id))
                throw DataError("fold manifest: id '" + id + "' in both train and test of a fold");
            if (!seen.insert(id).second)
                throw DataError("fold manifest: id '" + id + "' appears in multiple test partitions");
        }
    }
    for (const auto& id : all_ids)
        if (!seen.count(id))
            throw DataError("fold manifest: id '" + id + "' missing from all test partitions");
}

}  // namespace sleepkit
