#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "sleepkit/nn/builders.hpp"
#include "sleepkit/training.hpp"

using namespace sleepkit;
using nn::Mode;
using nn::Tensor;

namespace {

Hypnogram stages_of(std::initializer_list<SleepStage> s) {
    Hypnogram h;
    h.stages = s;
    return h;
}

nn::SleepPpgConfig tiny_cfg(std::size_t windows) {
    nn::SleepPpgConfig cfg;
    cfg.windows = windows;
    cfg.input_len = windows * 1024;
    cfg.resconv_filters = {4, 4, 6, 6, 8, 8, 8, 8};
    cfg.embed_dim = 12;
    cfg.tcn_blocks = 1;
    cfg.tcn_kernel = 5;
    cfg.tcn_dilations = {1, 2, 4};
    cfg.tcn_filters = 12;
    cfg.dropout = 0.0;
    return cfg;
}

std::vector<TrainSample> toy_dataset(int n, std::size_t windows, std::uint64_t seed) {
    SynthProfile p;
    p.windows = static_cast<int>(windows);
    std::vector<TrainSample> out;
    for (int i = 0; i < n; ++i) {
        Record r = synthesize_record(seed + static_cast<std::uint64_t>(i), p);
        auto wav = preprocess_wav(r);
        TrainSample s;
        s.id = r.id;
        s.input = Tensor<float>({wav.samples.size(), 1});
        s.input.data = wav.samples;
        s.hypnogram = r.hypnogram;
        s.demographics = {static_cast<float>(r.demographics.values[0] / 100.0),
                          static_cast<float>(r.demographics.values[1])};
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace

TEST_CASE("cross-entropy closed forms") {
    Tensor<float> uniform({6, 4});
    uniform.fill(0.25f);
    Hypnogram labels = stages_of({SleepStage::Wake, SleepStage::Light, SleepStage::Deep,
                                  SleepStage::REM, SleepStage::Wake, SleepStage::Light});
    std::vector<double> w(6, 1.0);
    auto [loss, dP] = weighted_cross_entropy(uniform, labels, w);
    CHECK(loss == doctest::Approx(std::log(4.0)).epsilon(1e-6));

    // Perfect one-hot predictions -> zero loss.
    Tensor<float> onehot({4, 4});
    Hypnogram l2 = stages_of({SleepStage::Wake, SleepStage::Light, SleepStage::Deep, SleepStage::REM});
    for (int i = 0; i < 4; ++i) onehot.at(i, i) = 1.0f;
    auto [loss2, d2] = weighted_cross_entropy(onehot, l2, {1, 1, 1, 1});
    CHECK(loss2 == doctest::Approx(0.0).epsilon(1e-9));
    (void)dP;
    (void)d2;
}

TEST_CASE("masking identity: zero weights equal dropping those windows") {
    Tensor<float> probs({4, 4});
    std::mt19937_64 gen(1);
    for (std::size_t r = 0; r < 4; ++r) {
        double s = 0;
        for (std::size_t c = 0; c < 4; ++c) {
            probs.at(r, c) = static_cast<float>(0.05 + 0.9 * ((gen() % 100) / 99.0));
            s += probs.at(r, c);
        }
        for (std::size_t c = 0; c < 4; ++c) probs.at(r, c) /= static_cast<float>(s);
    }
    Hypnogram full = stages_of({SleepStage::Wake, SleepStage::Light, SleepStage::Deep, SleepStage::REM});
    auto [masked, dm] = weighted_cross_entropy(probs, full, {1.0, 0.0, 1.0, 0.0});

    Tensor<float> half({2, 4});
    for (std::size_t c = 0; c < 4; ++c) {
        half.at(0, c) = probs.at(0, c);
        half.at(1, c) = probs.at(2, c);
    }
    Hypnogram hl = stages_of({SleepStage::Wake, SleepStage::Deep});
    auto [plain, dp] = weighted_cross_entropy(half, hl, {1.0, 1.0});
    CHECK(masked == doctest::Approx(plain).epsilon(1e-9));
    (void)dm;
    (void)dp;
}

TEST_CASE("zero total weight is a data error") {
    Tensor<float> probs({2, 4});
    probs.fill(0.25f);
    Hypnogram l = stages_of({SleepStage::Pad, SleepStage::Pad});
    CHECK_THROWS_AS(weighted_cross_entropy(probs, l, {0.0, 0.0}), DataError);
}

TEST_CASE("class weights: balance, rare-class boost, cap, and mean-1 scaling") {
    SUBCASE("balanced classes give unit weights") {
        Hypnogram h;
        for (int i = 0; i < 40; ++i) h.stages.push_back(static_cast<SleepStage>(i % 4));
        auto w = class_weights({h});
        for (double v : w) CHECK(v == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("MESA-like scarcity: Deep weight about 5x Light's") {
        Hypnogram h;
        for (int i = 0; i < 25; ++i) h.stages.push_back(SleepStage::Wake);
        for (int i = 0; i < 50; ++i) h.stages.push_back(SleepStage::Light);
        for (int i = 0; i < 5; ++i) h.stages.push_back(SleepStage::Deep);
        for (int i = 0; i < 20; ++i) h.stages.push_back(SleepStage::REM);
        auto w = class_weights({h});
        CHECK(w[static_cast<int>(SleepStage::Deep)] /
                  w[static_cast<int>(SleepStage::Light)] ==
              doctest::Approx(10.0).epsilon(1e-9));  // 50/5 inverse-frequency ratio
        // Mean weight over windows is 1.
        const double mean =
            (25 * w[0] + 50 * w[1] + 5 * w[2] + 20 * w[3]) / 100.0;
        CHECK(mean == doctest::Approx(1.0).epsilon(1e-9));
    }
    SUBCASE("absent class takes the cap") {
        Hypnogram h;
        for (int i = 0; i < 30; ++i)
            h.stages.push_back(i % 3 == 0 ? SleepStage::Wake
                                          : i % 3 == 1 ? SleepStage::Light : SleepStage::REM);
        auto w_raw = class_weights({h});
        // Deep is absent; its pre-normalization weight was the cap (10), the
        // largest in the table after scaling too.
        CHECK(w_raw[static_cast<int>(SleepStage::Deep)] >=
              w_raw[static_cast<int>(SleepStage::Wake)]);
    }
    SUBCASE("sample weights are zero at Pad") {
        Hypnogram h = stages_of({SleepStage::Wake, SleepStage::Pad, SleepStage::Light});
        auto sw = sample_weights(h, {1.0, 2.0, 3.0, 4.0});
        CHECK(sw[0] == 1.0);
        CHECK(sw[1] == 0.0);
        CHECK(sw[2] == 2.0);
    }
}

TEST_CASE("xavier init: seeded, bounded, with the right variance") {
    auto a = xavier_init<float>({64, 32}, 9);
    auto b = xavier_init<float>({64, 32}, 9);
    CHECK(a.data == b.data);
    auto c = xavier_init<float>({64, 32}, 10);
    CHECK(a.data != c.data);

    const double bound = std::sqrt(6.0 / (64 + 32));
    for (float v : a.data) CHECK(std::abs(v) <= bound);

    auto big = xavier_init<double>({1000, 1000}, 3);
    double var = 0;
    for (double v : big.data) var += v * v;
    var /= static_cast<double>(big.numel());
    CHECK(var == doctest::Approx(2.0 / 2000.0).epsilon(0.05));
}

TEST_CASE("initialize_model zeroes biases and fills weights") {
    auto model = nn::build_sleepppg_net<float>(tiny_cfg(2));
    initialize_model(model, 4);
    for (const auto& p : model.params()) {
        const bool is_bias = p.name.ends_with("/b");
        bool all_zero = true;
        for (float v : p.value->data)
            if (v != 0.0f) all_zero = false;
        if (is_bias)
            CHECK(all_zero);
        else
            CHECK_FALSE(all_zero);
    }
}

TEST_CASE("adam: zero grad is a no-op; first step has closed-form magnitude") {
    nn::Dense<double> dense("d", 2, 2);
    std::vector<nn::ParamRef<double>> params;
    dense.collect_params(params);
    for (auto& p : params) p.value->fill(0.5);

    AdamState<double> st;
    adam_step(params, st, 0.1);
    for (auto& p : params)
        for (double v : p.value->data) CHECK(v == 0.5);

    // Constant gradient g: bias-corrected first step is lr * g/(|g| + eps') ~ lr.
    for (auto& p : params) p.grad->fill(3.0);
    AdamState<double> st2;
    adam_step(params, st2, 0.1);
    for (auto& p : params)
        for (double v : p.value->data) CHECK(v == doctest::Approx(0.4).epsilon(1e-4));
}

TEST_CASE("adam minimizes a quadratic bowl monotonically") {
    nn::Dense<double> dense("d", 1, 1);
    std::vector<nn::ParamRef<double>> params;
    dense.collect_params(params);
    params[0].value->data[0] = 5.0;
    params[1].value->data[0] = -3.0;
    AdamState<double> st;
    double prev = 1e300;
    for (int i = 0; i < 100; ++i) {
        double loss = 0;
        for (auto& p : params) {
            const double v = p.value->data[0];
            loss += v * v;
            p.grad->data[0] = 2.0 * v;
        }
        CHECK(loss <= prev + 1e-12);
        prev = loss;
        adam_step(params, st, 0.05);
    }
    CHECK(prev < 1.0);
}

TEST_CASE("adam refuses non-finite gradients") {
    nn::Dense<double> dense("d", 1, 1);
    std::vector<nn::ParamRef<double>> params;
    dense.collect_params(params);
    params[0].grad->data[0] = std::nan("");
    AdamState<double> st;
    CHECK_THROWS_AS(adam_step(params, st, 0.1), InternalError);
}

TEST_CASE("training is deterministic given config and seed") {
    auto data = toy_dataset(3, 4, 100);
    TrainConfig tc;
    tc.epochs = 2;
    tc.seed = 9;
    tc.val_fraction = 0.34;

    auto m1 = nn::build_sleepppg_net<float>(tiny_cfg(4));
    initialize_model(m1, tc.seed);
    auto h1 = run_training(m1, data, tc);

    auto m2 = nn::build_sleepppg_net<float>(tiny_cfg(4));
    initialize_model(m2, tc.seed);
    auto h2 = run_training(m2, data, tc);

    REQUIRE(h1.epochs.size() == h2.epochs.size());
    for (std::size_t e = 0; e < h1.epochs.size(); ++e) {
        CHECK(h1.epochs[e].train_loss == h2.epochs[e].train_loss);
        CHECK(h1.epochs[e].train_accuracy == h2.epochs[e].train_accuracy);
    }
    auto p1 = m1.params();
    auto p2 = m2.params();
    for (std::size_t i = 0; i < p1.size(); ++i) CHECK(p1[i].value->data == p2[i].value->data);
}

TEST_CASE("training writes checkpoints and a history log") {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / "sleepkit_test" / "train_ckpt";
    fs::remove_all(dir);

    auto data = toy_dataset(3, 4, 200);
    TrainConfig tc;
    tc.epochs = 2;
    tc.seed = 3;
    tc.val_fraction = 0.34;
    auto model = nn::build_sleepppg_net<float>(tiny_cfg(4));
    initialize_model(model, tc.seed);
    auto hist = run_training(model, data, tc, dir.string());

    CHECK(fs::exists(dir / "epoch1.spgw"));
    CHECK(fs::exists(dir / "epoch2.spgw"));
    CHECK(fs::exists(dir / "best.spgw"));
    CHECK(hist.best_epoch >= 1);

    std::ifstream log(dir / "history.jsonl");
    int lines = 0;
    std::string line;
    while (std::getline(log, line))
        if (!line.empty()) ++lines;
    CHECK(lines == 2);
}

TEST_CASE("fold manifest validation") {
    namespace fs = std::filesystem;
    auto dir = fs::temp_directory_path() / "sleepkit_test";
    fs::create_directories(dir);
    const auto path = (dir / "folds.json").string();
    {
        std::ofstream out(path);
        out << R"({"folds":[
            {"train":["a","b","c"],"test":["d"]},
            {"train":["a","b","d"],"test":["c"]},
            {"train":["a","c","d"],"test":["b"]},
            {"train":["b","c","d"],"test":["a"]}]})";
    }
    auto m = load_fold_manifest(path);
    REQUIRE(m.folds.size() == 4);
    CHECK_NOTHROW(validate_fold_manifest(m, {"a", "b", "c", "d"}));
    CHECK_THROWS_AS(validate_fold_manifest(m, {"a", "b", "c", "d", "e"}), DataError);

    m.folds[0].test_ids.push_back("c");  // now also in fold 1's test set
    CHECK_THROWS_AS(validate_fold_manifest(m, {"a", "b", "c", "d"}), DataError);

    m = load_fold_manifest(path);
    m.folds[0].train_ids.push_back("d");  // overlaps its own test set
    CHECK_THROWS_AS(validate_fold_manifest(m, {"a", "b", "c", "d"}), DataError);
}

TEST_CASE("predict_hypnogram takes the argmax and pads the tail") {
    Tensor<float> probs({3, 4});
    probs.at(0, 2) = 0.9f;
    probs.at(1, 0) = 0.8f;
    probs.at(2, 3) = 0.7f;
    auto h = predict_hypnogram(probs, 2);
    CHECK(h.stages[0] == SleepStage::Deep);
    CHECK(h.stages[1] == SleepStage::Wake);
    CHECK(h.stages[2] == SleepStage::Pad);
}
