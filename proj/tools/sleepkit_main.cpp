// sleepkit: sleep staging from raw PPG — pipeline CLI.
//
// Subcommands: synth, preprocess, detect-beats, features, train, infer,
// evaluate, report. Exit codes: 0 ok, 1 data error, 2 config error,
// 3 internal error. Every command writes its resolved configuration as
// JSON beside its outputs. SLEEPKIT_CACHE points at an optional cache
// directory for beat-detection intermediates.

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"
#include "sleepkit/beats.hpp"
#include "sleepkit/dsp.hpp"
#include "sleepkit/eval.hpp"
#include "sleepkit/features.hpp"
#include "sleepkit/nn/builders.hpp"
#include "sleepkit/nn/spgw.hpp"
#include "sleepkit/records.hpp"
#include "sleepkit/report.hpp"
#include "sleepkit/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace sleepkit;

namespace {

struct RecordFile {
    std::string path;
    WaveFormat format;
};

std::vector<RecordFile> list_records(const std::string& dir) {
    if (!fs::is_directory(dir)) throw DataError("not a directory: " + dir);
    std::vector<RecordFile> out;
    for (const auto& e : fs::directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const auto p = e.path();
        const auto ext = p.extension().string();
        if (ext != ".f32" && ext != ".csv") continue;
        if (ext == ".csv" && p.string().size() >= 9 &&
            (p.string().ends_with(".pred.csv") || p.string().ends_with(".prob.csv") ||
             p.string().ends_with(".beats.csv") || p.string().ends_with(".features.csv")))
            continue;
        fs::path sidecar = p;
        sidecar.replace_extension(".meta.json");
        if (!fs::exists(sidecar)) continue;
        out.push_back({p.string(), ext == ".f32" ? WaveFormat::RAWF32 : WaveFormat::CSV});
    }
    std::sort(out.begin(), out.end(),
              [](const RecordFile& a, const RecordFile& b) { return a.path < b.path; });
    if (out.empty()) throw DataError("no records (wave file + .meta.json sidecar) found in " + dir);
    return out;
}

void write_config(const std::string& out_dir, const std::string& command, const json& resolved) {
    fs::create_directories(out_dir);
    json j = resolved;
    j["command"] = command;
    std::ofstream out(out_dir + "/" + command + ".config.json");
    out << j.dump(2) << "\n";
}

// Parallel map over records; any per-record failure is collected and rethrown
// after the loop so the error listing covers every bad record.
template <typename Fn>
void for_each_record(const std::vector<RecordFile>& files, int jobs, Fn fn) {
    jobs = std::max(1, jobs);
    std::atomic<std::size_t> next{0};
    std::mutex err_mu;
    std::vector<std::string> errors;
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= files.size()) return;
            try {
                fn(files[i]);
            } catch (const std::exception& e) {
                std::lock_guard lock(err_mu);
                errors.push_back(files[i].path + ": " + e.what());
            }
        }
    };
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < jobs; ++t) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    if (!errors.empty()) {
        std::string msg = std::to_string(errors.size()) + " record(s) failed:";
        for (const auto& e : errors) msg += "\n  " + e;
        throw DataError(msg);
    }
}

std::uint64_t signal_hash(const std::vector<float>& signal) {
    std::uint64_t h = 0xcbf29ce484222325ull;
    const auto* bytes = reinterpret_cast<const unsigned char*>(signal.data());
    for (std::size_t i = 0; i < signal.size() * sizeof(float); ++i)
        h = (h ^ bytes[i]) * 0x100000001b3ull;
    return h;
}

void write_beats_csv(const BeatSeries& beats, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("cannot open " + path);
    out << "time_s,ibi_ms,valid\n";
    char buf[96];
    for (std::size_t i = 0; i < beats.beat_times.size(); ++i) {
        if (i < beats.ibis.size())
            std::snprintf(buf, sizeof buf, "%.6f,%.6f,%d\n", beats.beat_times[i], beats.ibis[i],
                          beats.valid[i] ? 1 : 0);
        else
            std::snprintf(buf, sizeof buf, "%.6f,,\n", beats.beat_times[i]);
        out << buf;
    }
}

BeatSeries read_beats_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    BeatSeries b;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::string t, ibi, valid;
        std::getline(row, t, ',');
        std::getline(row, ibi, ',');
        std::getline(row, valid, ',');
        b.beat_times.push_back(std::stod(t));
        if (!ibi.empty()) {
            b.ibis.push_back(std::stod(ibi));
            b.valid.push_back(valid == "1");
        }
    }
    return b;
}

// Beat detection with optional SLEEPKIT_CACHE reuse keyed by record id and
// signal content hash.
BeatSeries beats_for_record(const Record& record) {
    const char* cache = std::getenv("SLEEPKIT_CACHE");
    std::string cache_path;
    if (cache && *cache) {
        char key[32];
        std::snprintf(key, sizeof key, "%016llx",
                      static_cast<unsigned long long>(signal_hash(record.signal)));
        cache_path = std::string(cache) + "/beats_" + record.id + "_" + key + ".csv";
        if (fs::exists(cache_path)) return read_beats_csv(cache_path);
    }
    auto beats = ibi_quality(detect_beats(bandpass_for_beats(record)));
    if (!cache_path.empty()) {
        fs::create_directories(cache);
        write_beats_csv(beats, cache_path);
    }
    return beats;
}

// ---- architecture configuration ---------------------------------------

struct ArchSpec {
    std::string arch = "sleepppg";  // sleepppg | bm-dts | bm-fe
    int windows = kDefaultWindows;
    std::string config_path;  // optional JSON with size overrides
};

template <typename T>
void maybe(const json& j, const char* key, T& field) {
    if (j.contains(key)) field = j.at(key).get<T>();
}

json load_arch_json(const std::string& path) {
    if (path.empty()) return json::object();
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open architecture config " + path);
    try {
        json j;
        in >> j;
        return j;
    } catch (const json::exception& e) {
        throw ConfigError("malformed architecture config " + path + ": " + e.what());
    }
}

nn::Model<float> build_model(const ArchSpec& spec) {
    const json j = load_arch_json(spec.config_path);
    if (spec.arch == "sleepppg") {
        nn::SleepPpgConfig cfg;
        cfg.windows = static_cast<std::size_t>(spec.windows);
        cfg.input_len = cfg.windows * 1024;
        maybe(j, "resconv_filters", cfg.resconv_filters);
        maybe(j, "embed_dim", cfg.embed_dim);
        maybe(j, "tcn_blocks", cfg.tcn_blocks);
        maybe(j, "tcn_kernel", cfg.tcn_kernel);
        maybe(j, "tcn_dilations", cfg.tcn_dilations);
        maybe(j, "tcn_filters", cfg.tcn_filters);
        maybe(j, "dropout", cfg.dropout);
        return nn::build_sleepppg_net<float>(cfg);
    }
    if (spec.arch == "bm-dts") {
        nn::BmDtsConfig cfg;
        cfg.windows = static_cast<std::size_t>(spec.windows);
        maybe(j, "resconv_filters", cfg.resconv_filters);
        maybe(j, "embed_dim", cfg.embed_dim);
        maybe(j, "tcn_blocks", cfg.tcn_blocks);
        maybe(j, "tcn_kernel", cfg.tcn_kernel);
        maybe(j, "tcn_dilations", cfg.tcn_dilations);
        maybe(j, "tcn_filters", cfg.tcn_filters);
        maybe(j, "dropout", cfg.dropout);
        return nn::build_bm_dts<float>(cfg);
    }
    if (spec.arch == "bm-fe") {
        nn::BmFeConfig cfg;
        cfg.windows = static_cast<std::size_t>(spec.windows);
        maybe(j, "dense_stack", cfg.dense_stack);
        maybe(j, "lstm_hidden", cfg.lstm_hidden);
        maybe(j, "lstm_layers", cfg.lstm_layers);
        maybe(j, "head_stack", cfg.head_stack);
        maybe(j, "dropout", cfg.dropout);
        return nn::build_bm_fe<float>(cfg);
    }
    throw ConfigError("unknown architecture '" + spec.arch + "'");
}

// Builds the network input for one record according to the architecture.
nn::Tensor<float> build_input(const Record& record, const ArchSpec& spec) {
    const auto windows = static_cast<std::size_t>(spec.windows);
    if (spec.arch == "sleepppg") {
        WavSeries wav;
        if (std::abs(record.fs - kWavRate) < 1e-6) {
            wav.samples = record.signal;
            wav.fs = record.fs;
        } else {
            wav = preprocess_wav(record);
        }
        const std::size_t need = windows * 1024;
        if (wav.samples.size() != need)
            throw DataError("record " + record.id + ": expected " + std::to_string(need) +
                            " preprocessed samples, got " + std::to_string(wav.samples.size()));
        nn::Tensor<float> x({need, 1});
        x.data = wav.samples;
        return x;
    }
    if (spec.arch == "bm-dts") {
        const double duration = static_cast<double>(record.signal.size()) / record.fs;
        auto rate = derive_rate_series(beats_for_record(record), kRateSeriesRate, duration);
        // 256-sample input per window: the 64 in-window samples plus 96 of
        // symmetric context on each side, zero-padded at the record edges.
        nn::Tensor<float> x({windows, 256});
        for (std::size_t l = 0; l < windows; ++l) {
            const long start = static_cast<long>(l) * 64 - 96;
            for (long k = 0; k < 256; ++k) {
                const long s = start + k;
                x.at(l, static_cast<std::size_t>(k)) =
                    (s >= 0 && s < static_cast<long>(rate.samples.size()))
                        ? rate.samples[static_cast<std::size_t>(s)]
                        : 0.0f;
            }
        }
        return x;
    }
    if (spec.arch == "bm-fe") {
        auto fm = standardize_per_patient(
            windowed_features(record, bandpass_for_beats(record), beats_for_record(record)));
        if (fm.rows != windows)
            throw DataError("record " + record.id + ": feature matrix has " +
                            std::to_string(fm.rows) + " rows, expected " + std::to_string(windows));
        nn::Tensor<float> x({fm.rows, fm.cols});
        for (std::size_t i = 0; i < fm.values.size(); ++i)
            x.data[i] = static_cast<float>(fm.values[i]);
        return x;
    }
    throw ConfigError("unknown architecture '" + spec.arch + "'");
}

std::vector<float> demographics_input(const Record& record) {
    const auto& v = record.demographics.values;
    return {v.size() > 0 ? static_cast<float>(v[0] / 100.0) : 0.0f,
            v.size() > 1 ? static_cast<float>(v[1]) : 0.0f};
}

// ---- prediction file I/O ----------------------------------------------

void write_predictions(const std::string& out_dir, const std::string& id,
                       const nn::Tensor<float>& probs, const Hypnogram& pred) {
    std::ofstream pc(out_dir + "/" + id + ".pred.csv");
    pc << "window,stage\n";
    for (std::size_t l = 0; l < pred.size(); ++l)
        pc << l << "," << stage_name(pred.stages[l]) << "\n";

    std::ofstream pb(out_dir + "/" + id + ".prob.csv");
    pb << "window,Wake,Light,Deep,REM\n";
    char buf[160];
    for (std::size_t l = 0; l < probs.shape[0]; ++l) {
        std::snprintf(buf, sizeof buf, "%zu,%.8e,%.8e,%.8e,%.8e\n", l,
                      static_cast<double>(probs.at(l, 0)), static_cast<double>(probs.at(l, 1)),
                      static_cast<double>(probs.at(l, 2)), static_cast<double>(probs.at(l, 3)));
        pb << buf;
    }
}

Hypnogram read_pred_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open prediction file " + path);
    Hypnogram h;
    std::string line;
    std::getline(in, line);  // header
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto comma = line.find(',');
        if (comma == std::string::npos) throw DataError("malformed row in " + path + ": " + line);
        const std::string name = line.substr(comma + 1);
        if (name == "Wake")
            h.stages.push_back(SleepStage::Wake);
        else if (name == "Light")
            h.stages.push_back(SleepStage::Light);
        else if (name == "Deep")
            h.stages.push_back(SleepStage::Deep);
        else if (name == "REM")
            h.stages.push_back(SleepStage::REM);
        else if (name == "Pad")
            h.stages.push_back(SleepStage::Pad);
        else
            throw DataError("unknown stage '" + name + "' in " + path);
    }
    if (h.size() == 0) throw DataError("empty prediction file " + path);
    return h;
}

// ---- subcommands -------------------------------------------------------

int cmd_synth(const std::string& out_dir, int count, int windows, std::uint64_t seed,
              double noise_sd) {
    fs::create_directories(out_dir);
    SynthProfile profile;
    profile.windows = windows;
    profile.noise_sd = noise_sd;
    for (int i = 0; i < count; ++i) {
        Record r = synthesize_record(seed + static_cast<std::uint64_t>(i), profile);
        char name[64];
        std::snprintf(name, sizeof name, "%s/rec%04d.f32", out_dir.c_str(), i);
        save_record(r, name, WaveFormat::RAWF32);
    }
    write_config(out_dir, "synth",
                 {{"count", count}, {"windows", windows}, {"seed", seed}, {"noise_sd", noise_sd}});
    std::cout << "wrote " << count << " synthetic record(s) to " << out_dir << "\n";
    return 0;
}

int cmd_preprocess(const std::string& in_dir, const std::string& out_dir, int windows, int jobs) {
    const auto files = list_records(in_dir);
    fs::create_directories(out_dir);
    for_each_record(files, jobs, [&](const RecordFile& f) {
        Record r = normalize_duration(load_record(f.path, f.format), windows);
        WavSeries wav = preprocess_wav(r);
        Record out = r;
        out.signal = wav.samples;
        out.fs = kWavRate;  // 1024 samples per 30 s window
        const auto stem = fs::path(f.path).stem().string();
        save_record(out, out_dir + "/" + stem + ".f32", WaveFormat::RAWF32);
    });
    write_config(out_dir, "preprocess",
                 {{"in", in_dir}, {"windows", windows}, {"jobs", jobs}, {"fs_out", kWavRate}});
    std::cout << "preprocessed " << files.size() << " record(s) to " << out_dir << "\n";
    return 0;
}

int cmd_detect_beats(const std::string& in_dir, const std::string& out_dir, int jobs) {
    const auto files = list_records(in_dir);
    fs::create_directories(out_dir);
    for_each_record(files, jobs, [&](const RecordFile& f) {
        Record r = load_record(f.path, f.format);
        write_beats_csv(beats_for_record(r), out_dir + "/" + r.id + ".beats.csv");
    });
    write_config(out_dir, "detect-beats", {{"in", in_dir}, {"jobs", jobs}});
    std::cout << "detected beats for " << files.size() << " record(s)\n";
    return 0;
}

int cmd_features(const std::string& in_dir, const std::string& out_dir, int windows, int jobs) {
    const auto files = list_records(in_dir);
    fs::create_directories(out_dir);
    for_each_record(files, jobs, [&](const RecordFile& f) {
        Record r = normalize_duration(load_record(f.path, f.format), windows);
        auto fm = standardize_per_patient(
            windowed_features(r, bandpass_for_beats(r), beats_for_record(r)));
        write_feature_csv(fm, out_dir + "/" + r.id + ".features.csv");
    });
    write_config(out_dir, "features", {{"in", in_dir}, {"windows", windows}, {"jobs", jobs}});
    std::cout << "wrote features for " << files.size() << " record(s)\n";
    return 0;
}

int cmd_train(const std::string& in_dir, const std::string& out_dir, const ArchSpec& arch,
              const std::string& scheme_name, const std::string& init_weights, TrainConfig tc,
              bool lr_set, bool epochs_set) {
    if (arch.arch == "bm-fe") throw ConfigError("bm-fe is inference-only and cannot be trained");
    if (scheme_name == "scratch") {
        tc.scheme = TrainScheme::Scratch;
    } else {
        TrainConfig preset = TrainConfig::finetune(scheme_name == "transfer"
                                                       ? TrainScheme::TransferLearn
                                                       : TrainScheme::FromPretrained);
        tc.scheme = preset.scheme;
        if (!lr_set) tc.learning_rate = preset.learning_rate;
        if (!epochs_set) tc.epochs = preset.epochs;
        if (init_weights.empty())
            throw ConfigError("--init weights are required for scheme '" + scheme_name + "'");
    }

    auto model = build_model(arch);
    initialize_model(model, tc.seed);
    if (!init_weights.empty()) {
        const std::vector<std::string> skip =
            tc.scheme == TrainScheme::TransferLearn ? std::vector<std::string>{"head"}
                                                    : std::vector<std::string>{};
        nn::load_weights(model, init_weights, skip);
    }

    const auto files = list_records(in_dir);
    std::vector<TrainSample> dataset;
    for (const auto& f : files) {
        Record r = normalize_duration(load_record(f.path, f.format), arch.windows);
        TrainSample s;
        s.id = r.id;
        s.input = build_input(r, arch);
        s.hypnogram = r.hypnogram;
        s.demographics = demographics_input(r);
        dataset.push_back(std::move(s));
    }

    auto hist = run_training(model, dataset, tc, out_dir);
    nn::save_weights(model, out_dir + "/model.spgw");
    write_config(out_dir, "train",
                 {{"in", in_dir},
                  {"arch", arch.arch},
                  {"windows", arch.windows},
                  {"arch_config", arch.config_path},
                  {"scheme", scheme_name},
                  {"init", init_weights},
                  {"learning_rate", tc.learning_rate},
                  {"epochs", tc.epochs},
                  {"batch_size", tc.batch_size},
                  {"val_fraction", tc.val_fraction},
                  {"seed", tc.seed},
                  {"best_epoch", hist.best_epoch}});
    const auto& last = hist.epochs.back();
    std::cout << "trained " << tc.epochs << " epoch(s); final train loss " << last.train_loss
              << ", best epoch " << hist.best_epoch << "\n";
    return 0;
}

int cmd_infer(const std::string& in_dir, const std::string& out_dir, const ArchSpec& arch,
              const std::string& weights, int jobs) {
    if (weights.empty()) throw ConfigError("--weights is required for infer");
    auto model = build_model(arch);
    nn::load_weights(model, weights);
    const auto files = list_records(in_dir);
    fs::create_directories(out_dir);
    for_each_record(files, jobs, [&](const RecordFile& f) {
        Record r = normalize_duration(load_record(f.path, f.format), arch.windows);
        model.set_demographics(demographics_input(r));
        auto probs = model.forward(build_input(r, arch), nn::Mode::Infer);
        write_predictions(out_dir, r.id, probs, predict_hypnogram(probs, r.hypnogram.unpadded_size()));
    });
    write_config(out_dir, "infer",
                 {{"in", in_dir},
                  {"arch", arch.arch},
                  {"windows", arch.windows},
                  {"arch_config", arch.config_path},
                  {"weights", weights},
                  {"jobs", jobs}});
    std::cout << "wrote predictions for " << files.size() << " record(s) to " << out_dir << "\n";
    return 0;
}

ReportInputs gather_truth_pred(const std::string& truth_dir, const std::string& pred_dir,
                               int windows) {
    ReportInputs in;
    for (const auto& f : list_records(truth_dir)) {
        Record r = normalize_duration(load_record(f.path, f.format), windows);
        const std::string pred_path = pred_dir + "/" + r.id + ".pred.csv";
        in.ids.push_back(r.id);
        in.truth.push_back(r.hypnogram);
        in.pred.push_back(read_pred_csv(pred_path));
    }
    return in;
}

int cmd_evaluate(const std::string& truth_dir, const std::string& pred_dir,
                 const std::string& out_dir, int windows) {
    const auto in = gather_truth_pred(truth_dir, pred_dir, windows);
    fs::create_directories(out_dir);

    const auto summary = per_patient_summary(in.ids, in.truth, in.pred);

    ConfusionMatrix total;
    for (std::size_t i = 0; i < in.ids.size(); ++i) {
        const auto cm = confusion_matrix(in.truth[i], in.pred[i]);
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) total.counts[r][c] += cm.counts[r][c];
    }

    json metrics;
    metrics["records"] = in.ids.size();
    metrics["median_kappa"] = summary.median_kappa;
    metrics["kappa_iqr"] = {summary.kappa_q1, summary.kappa_q3};
    metrics["kappa_formatted"] = summary.format_kappa();
    metrics["median_accuracy"] = summary.median_acc;
    metrics["accuracy_iqr"] = {summary.acc_q1, summary.acc_q3};
    metrics["pooled_kappa"] = kappa_from_confusion(total);

    struct MetricCol {
        const char* name;
        double SleepMetrics::*field;
    };
    const MetricCol cols[] = {
        {"total_sleep_time_hours", &SleepMetrics::tst_hours},
        {"sleep_efficiency_percent", &SleepMetrics::se_percent},
        {"fraction_light_percent", &SleepMetrics::fr_light},
        {"fraction_deep_percent", &SleepMetrics::fr_deep},
        {"fraction_rem_percent", &SleepMetrics::fr_rem},
        {"transitions_per_hour", &SleepMetrics::transitions_per_hour},
    };
    for (const auto& col : cols) {
        std::vector<double> t, p;
        for (std::size_t i = 0; i < in.ids.size(); ++i) {
            t.push_back(sleep_metrics(in.truth[i]).*col.field);
            p.push_back(sleep_metrics(in.pred[i]).*col.field);
        }
        const auto agree = metric_agreement(t, p);
        metrics["sleep_metrics"][col.name] = {{"mse", agree.mse}, {"r2", agree.r2}};
    }
    write_text_file(out_dir + "/metrics.json", metrics.dump(2) + "\n");

    {
        std::ofstream cm(out_dir + "/confusion.csv");
        cm << "truth\\pred,Wake,Light,Deep,REM\n";
        const char* names[4] = {"Wake", "Light", "Deep", "REM"};
        for (int r = 0; r < 4; ++r) {
            cm << names[r];
            for (int c = 0; c < 4; ++c) cm << "," << total.counts[r][c];
            cm << "\n";
        }
    }
    {
        std::ofstream pp(out_dir + "/per_patient.csv");
        pp << "id,kappa,accuracy\n";
        char buf[160];
        for (const auto& r : summary.per_record) {
            std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f\n", r.id.c_str(), r.kappa, r.acc);
            pp << buf;
        }
    }
    write_report(out_dir, in);
    write_config(out_dir, "evaluate",
                 {{"truth", truth_dir}, {"pred", pred_dir}, {"windows", windows}});
    std::cout << "kappa " << summary.format_kappa() << " over " << in.ids.size()
              << " record(s); report in " << out_dir << "\n";
    return 0;
}

int cmd_report(const std::string& truth_dir, const std::string& pred_dir,
               const std::string& out_dir, int windows) {
    const auto in = gather_truth_pred(truth_dir, pred_dir, windows);
    write_report(out_dir, in);
    write_config(out_dir, "report",
                 {{"truth", truth_dir}, {"pred", pred_dir}, {"windows", windows}});
    std::cout << "report written to " << out_dir << "/index.html\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"sleepkit: 4-class sleep staging pipeline over raw PPG"};
    app.require_subcommand(1);

    int windows = kDefaultWindows;
    int jobs = 1;
    std::uint64_t seed = 0;
    app.add_option("--windows", windows, "30 s windows per normalized record")
        ->capture_default_str();
    app.add_option("--jobs", jobs, "parallel workers across records")->capture_default_str();
    app.add_option("--seed", seed, "base RNG seed")->capture_default_str();

    // synth
    auto* synth = app.add_subcommand("synth", "generate synthetic PPG records");
    std::string synth_out;
    int synth_count = 4;
    double synth_noise = 0.05;
    synth->add_option("--out", synth_out, "output directory")->required();
    synth->add_option("--count", synth_count, "number of records")->capture_default_str();
    synth->add_option("--noise", synth_noise, "additive noise SD")->capture_default_str();

    // preprocess
    auto* pre = app.add_subcommand("preprocess", "low-pass, resample, clip, standardize");
    std::string pre_in, pre_out;
    pre->add_option("--in", pre_in, "input record directory")->required();
    pre->add_option("--out", pre_out, "output directory")->required();

    // detect-beats
    auto* det = app.add_subcommand("detect-beats", "pulse-peak detection to CSV");
    std::string det_in, det_out;
    det->add_option("--in", det_in, "input record directory")->required();
    det->add_option("--out", det_out, "output directory")->required();

    // features
    auto* feat = app.add_subcommand("features", "windowed PRV+morphology feature matrices");
    std::string feat_in, feat_out;
    feat->add_option("--in", feat_in, "input record directory")->required();
    feat->add_option("--out", feat_out, "output directory")->required();

    ArchSpec arch;
    auto add_arch_opts = [&](CLI::App* cmd) {
        cmd->add_option("--arch", arch.arch, "sleepppg | bm-dts | bm-fe")->capture_default_str();
        cmd->add_option("--arch-config", arch.config_path,
                        "JSON with architecture size overrides");
    };

    // train
    auto* train = app.add_subcommand("train", "train a staging network");
    std::string train_in, train_out, train_scheme = "scratch", train_init;
    TrainConfig tc;
    train->add_option("--in", train_in, "training record directory")->required();
    train->add_option("--out", train_out, "checkpoint/output directory")->required();
    add_arch_opts(train);
    train->add_option("--scheme", train_scheme, "scratch | pretrained | transfer")
        ->capture_default_str();
    train->add_option("--init", train_init, "initial weights (.spgw)");
    auto* lr_opt = train->add_option("--lr", tc.learning_rate, "learning rate");
    auto* ep_opt = train->add_option("--epochs", tc.epochs, "training epochs");
    train->add_option("--batch", tc.batch_size, "batch size")->capture_default_str();
    train->add_option("--val-fraction", tc.val_fraction, "validation holdout fraction")
        ->capture_default_str();

    // infer
    auto* infer = app.add_subcommand("infer", "write per-record stage predictions");
    std::string infer_in, infer_out, infer_weights;
    infer->add_option("--in", infer_in, "input record directory")->required();
    infer->add_option("--out", infer_out, "output directory")->required();
    infer->add_option("--weights", infer_weights, "trained weights (.spgw)")->required();
    add_arch_opts(infer);

    // evaluate / report
    auto* ev = app.add_subcommand("evaluate", "score predictions against ground truth");
    std::string ev_truth, ev_pred, ev_out;
    ev->add_option("--truth", ev_truth, "ground-truth record directory")->required();
    ev->add_option("--pred", ev_pred, "prediction directory")->required();
    ev->add_option("--out", ev_out, "output directory")->required();

    auto* rep = app.add_subcommand("report", "SVG scatter plots and hypnogram strips");
    std::string rep_truth, rep_pred, rep_out;
    rep->add_option("--truth", rep_truth, "ground-truth record directory")->required();
    rep->add_option("--pred", rep_pred, "prediction directory")->required();
    rep->add_option("--out", rep_out, "output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    arch.windows = windows;
    tc.seed = seed;

    try {
        if (*synth) return cmd_synth(synth_out, synth_count, windows, seed, synth_noise);
        if (*pre) return cmd_preprocess(pre_in, pre_out, windows, jobs);
        if (*det) return cmd_detect_beats(det_in, det_out, jobs);
        if (*feat) return cmd_features(feat_in, feat_out, windows, jobs);
        if (*train)
            return cmd_train(train_in, train_out, arch, train_scheme, train_init, tc,
                             lr_opt->count() > 0, ep_opt->count() > 0);
        if (*infer) return cmd_infer(infer_in, infer_out, arch, infer_weights, jobs);
        if (*ev) return cmd_evaluate(ev_truth, ev_pred, ev_out, windows);
        if (*rep) return cmd_report(rep_truth, rep_pred, rep_out, windows);
    } catch (const DataError& e) {
        std::cerr << "data error: " << e.what() << "\n";
        return 1;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 3;
    }
    return 2;
}
