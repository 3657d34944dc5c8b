#pragma once

#include "sleepkit/nn/model.hpp"

namespace sleepkit::nn {

// Raw-waveform sequence classifier: stacked ResConv feature extractor,
// window reshape, per-window embedding, dilated-conv sequence encoder,
// 1x1-conv classifier. Defaults are the full-size network; smaller configs
// build toy instances with the same topology.
struct SleepPpgConfig {
    std::size_t input_len = 1228800;
    std::size_t windows = 1200;
    std::vector<std::size_t> resconv_filters{16, 16, 32, 32, 64, 64, 128, 256};
    int conv_kernel = 3;
    std::size_t embed_dim = 128;
    std::size_t demographics = 2;
    int tcn_blocks = 2;
    int tcn_kernel = 7;
    std::vector<int> tcn_dilations{1, 2, 4, 8, 16, 32};
    std::size_t tcn_filters = 128;
    std::size_t classes = 4;
    double dropout = 0.2;
    double leaky = 0.01;
};

// Pulse-rate time-series classifier: per-window (time-distributed) ResConv
// stack over [windows x window_samples], flatten, embedding, then the same
// sequence encoder and classifier head.
struct BmDtsConfig {
    std::size_t windows = 1200;
    std::size_t window_samples = 256;
    std::vector<std::size_t> resconv_filters{16, 32, 64};
    int conv_kernel = 3;
    std::size_t embed_dim = 128;
    int tcn_blocks = 2;
    int tcn_kernel = 7;
    std::vector<int> tcn_dilations{1, 2, 4, 8, 16, 32};
    std::size_t tcn_filters = 128;
    std::size_t classes = 4;
    double dropout = 0.2;
    double leaky = 0.01;
};

// Feature-matrix classifier: per-window dense stack, two stacked BiLSTMs,
// dense head. Inference only (the BiLSTM has no backward pass).
struct BmFeConfig {
    std::size_t windows = 1200;
    std::size_t features = 126;
    std::vector<std::size_t> dense_stack{512, 256, 128, 16, 16};
    std::size_t lstm_hidden = 128;
    int lstm_layers = 2;
    std::vector<std::size_t> head_stack{256, 128, 64};
    std::size_t classes = 4;
    double dropout = 0.2;
    double leaky = 0.01;
};

template <typename Real>
Model<Real> build_sleepppg_net(const SleepPpgConfig& cfg) {
    if (cfg.resconv_filters.empty() || cfg.windows == 0 || cfg.classes == 0)
        throw ConfigError("build_sleepppg_net: empty filter list or zero dims");
    const std::size_t pool_div = std::size_t(1) << cfg.resconv_filters.size();
    if (cfg.input_len % pool_div != 0 || (cfg.input_len / pool_div) % cfg.windows != 0)
        throw ConfigError("build_sleepppg_net: input length " + std::to_string(cfg.input_len) +
                          " incompatible with " + std::to_string(cfg.resconv_filters.size()) +
                          " pooling stages and " + std::to_string(cfg.windows) + " windows");

    Model<Real> m;
    m.arch_id = "sleepppg";
    m.input_shape = {cfg.input_len, 1};
    std::size_t ch = 1;
    for (std::size_t i = 0; i < cfg.resconv_filters.size(); ++i) {
        m.add(std::make_unique<ResConvBlock<Real>>("fe/res" + std::to_string(i + 1), ch,
                                                   cfg.resconv_filters[i], cfg.conv_kernel,
                                                   cfg.leaky));
        ch = cfg.resconv_filters[i];
    }
    m.add(std::make_unique<WindowReshape<Real>>(cfg.windows));
    const std::size_t per_window = cfg.input_len / pool_div / cfg.windows * ch;
    m.add(std::make_unique<Dense<Real>>("embed", per_window, cfg.embed_dim));
    m.add(std::make_unique<LeakyRelu<Real>>(cfg.leaky));
    m.add(std::make_unique<ConcatVec<Real>>(cfg.demographics));
    std::size_t tcn_in = cfg.embed_dim + cfg.demographics;
    for (int b = 0; b < cfg.tcn_blocks; ++b) {
        m.add(std::make_unique<TcnBlock<Real>>("tcn" + std::to_string(b + 1), tcn_in,
                                               cfg.tcn_filters, cfg.tcn_kernel, cfg.tcn_dilations,
                                               cfg.leaky, cfg.dropout));
        tcn_in = cfg.tcn_filters;
    }
    m.add(std::make_unique<Conv1d<Real>>("head", tcn_in, cfg.classes, 1));
    m.add(std::make_unique<Softmax<Real>>());
    return m;
}

template <typename Real>
Model<Real> build_bm_dts(const BmDtsConfig& cfg) {
    const std::size_t pool_div = std::size_t(1) << cfg.resconv_filters.size();
    if (cfg.window_samples % pool_div != 0)
        throw ConfigError("build_bm_dts: window length incompatible with pooling stages");

    Model<Real> m;
    m.arch_id = "bm-dts";
    m.input_shape = {cfg.windows, cfg.window_samples};
    auto td = std::make_unique<TimeDistributed<Real>>(cfg.window_samples, 1);
    std::size_t ch = 1;
    for (std::size_t i = 0; i < cfg.resconv_filters.size(); ++i) {
        td->add(std::make_unique<ResConvBlock<Real>>("fe/res" + std::to_string(i + 1), ch,
                                                     cfg.resconv_filters[i], cfg.conv_kernel,
                                                     cfg.leaky));
        ch = cfg.resconv_filters[i];
    }
    m.add(std::move(td));
    const std::size_t flat = cfg.window_samples / pool_div * ch;
    m.add(std::make_unique<Dense<Real>>("embed", flat, cfg.embed_dim));
    m.add(std::make_unique<LeakyRelu<Real>>(cfg.leaky));
    std::size_t tcn_in = cfg.embed_dim;
    for (int b = 0; b < cfg.tcn_blocks; ++b) {
        m.add(std::make_unique<TcnBlock<Real>>("tcn" + std::to_string(b + 1), tcn_in,
                                               cfg.tcn_filters, cfg.tcn_kernel, cfg.tcn_dilations,
                                               cfg.leaky, cfg.dropout));
        tcn_in = cfg.tcn_filters;
    }
    m.add(std::make_unique<Conv1d<Real>>("head", tcn_in, cfg.classes, 1));
    m.add(std::make_unique<Softmax<Real>>());
    return m;
}

template <typename Real>
Model<Real> build_bm_fe(const BmFeConfig& cfg) {
    Model<Real> m;
    m.arch_id = "bm-fe";
    m.input_shape = {cfg.windows, cfg.features};
    std::size_t in = cfg.features;
    for (std::size_t i = 0; i < cfg.dense_stack.size(); ++i) {
        m.add(std::make_unique<Dense<Real>>("mlp" + std::to_string(i + 1), in, cfg.dense_stack[i]));
        m.add(std::make_unique<LeakyRelu<Real>>(cfg.leaky));
        in = cfg.dense_stack[i];
    }
    for (int i = 0; i < cfg.lstm_layers; ++i) {
        m.add(std::make_unique<BiLstm<Real>>("lstm" + std::to_string(i + 1), in, cfg.lstm_hidden));
        in = 2 * cfg.lstm_hidden;
    }
    for (std::size_t i = 0; i < cfg.head_stack.size(); ++i) {
        m.add(std::make_unique<Dense<Real>>("head" + std::to_string(i + 1), in, cfg.head_stack[i]));
        m.add(std::make_unique<LeakyRelu<Real>>(cfg.leaky));
        if (i + 1 < cfg.head_stack.size()) m.add(std::make_unique<Dropout<Real>>(cfg.dropout));
        in = cfg.head_stack[i];
    }
    m.add(std::make_unique<Dense<Real>>("out", in, cfg.classes));
    m.add(std::make_unique<Softmax<Real>>());
    return m;
}

}  // namespace sleepkit::nn
