#include "sleepkit/records.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace sleepkit {

using nlohmann::json;

const char* stage_name(SleepStage s) {
    switch (s) {
        case SleepStage::Wake: return "Wake";
        case SleepStage::Light: return "Light";
        case SleepStage::Deep: return "Deep";
        case SleepStage::REM: return "REM";
        case SleepStage::Pad: return "Pad";
    }
    return "?";
}

std::size_t Hypnogram::unpadded_size() const {
    std::size_t n = stages.size();
    while (n > 0 && stages[n - 1] == SleepStage::Pad) --n;
    return n;
}

Hypnogram map_labels(const std::vector<int>& raw_labels, LabelScheme scheme) {
    Hypnogram h;
    h.stages.reserve(raw_labels.size());
    for (std::size_t i = 0; i < raw_labels.size(); ++i) {
        const int c = raw_labels[i];
        SleepStage s;
        if (c == 9 || c == 255) {
            s = SleepStage::Pad;
        } else if (scheme == LabelScheme::AASM) {
            switch (c) {
                case 0: s = SleepStage::Wake; break;
                case 1:
                case 2: s = SleepStage::Light; break;
                case 3: s = SleepStage::Deep; break;
                case 5: s = SleepStage::REM; break;
                default:
                    throw DataError("map_labels: unknown AASM code " + std::to_string(c) +
                                    " at window " + std::to_string(i));
            }
        } else {
            switch (c) {
                case 0: s = SleepStage::Wake; break;
                case 1:
                case 2: s = SleepStage::Light; break;
                case 3:
                case 4: s = SleepStage::Deep; break;
                case 5: s = SleepStage::REM; break;
                default:
                    throw DataError("map_labels: unknown R&K code " + std::to_string(c) +
                                    " at window " + std::to_string(i));
            }
        }
        h.stages.push_back(s);
    }
    return h;
}

Record normalize_duration(Record record, int target_windows) {
    if (record.fs <= 0) throw DataError("normalize_duration: record '" + record.id + "' has fs <= 0");
    const std::size_t target_samples =
        static_cast<std::size_t>(std::llround(target_windows * kWindowSeconds * record.fs));
    record.signal.resize(target_samples, 0.0f);
    auto& st = record.hypnogram.stages;
    if (st.size() > static_cast<std::size_t>(target_windows))
        st.resize(target_windows);
    else
        st.resize(target_windows, SleepStage::Pad);
    return record;
}

namespace {

std::string sidecar_path(const std::string& path) {
    auto dot = path.rfind('.');
    auto slash = path.rfind('/');
    std::string stem = (dot == std::string::npos || (slash != std::string::npos && dot < slash))
                           ? path
                           : path.substr(0, dot);
    return stem + ".meta.json";
}

int stage_to_aasm(SleepStage s) {
    switch (s) {
        case SleepStage::Wake: return 0;
        case SleepStage::Light: return 2;
        case SleepStage::Deep: return 3;
        case SleepStage::REM: return 5;
        case SleepStage::Pad: return 9;
    }
    return 9;
}

}  // namespace

Record load_record(const std::string& path, WaveFormat format) {
    std::ifstream meta(sidecar_path(path));
    if (!meta) throw DataError("load_record: missing sidecar " + sidecar_path(path));
    json j;
    try {
        meta >> j;
    } catch (const json::exception& e) {
        throw DataError("load_record: malformed sidecar " + sidecar_path(path) + ": " + e.what());
    }

    Record r;
    try {
        r.id = j.at("id").get<std::string>();
        r.fs = j.at("fs").get<double>();
        const std::string kind = j.at("kind").get<std::string>();
        if (kind == "PPG")
            r.kind = SignalKind::PPG;
        else if (kind == "ECG")
            r.kind = SignalKind::ECG;
        else
            throw DataError("load_record: unknown kind '" + kind + "' in " + sidecar_path(path));
        const std::string scheme = j.at("label_scheme").get<std::string>();
        LabelScheme ls;
        if (scheme == "AASM")
            ls = LabelScheme::AASM;
        else if (scheme == "RK")
            ls = LabelScheme::RK;
        else
            throw DataError("load_record: unknown label_scheme '" + scheme + "'");
        r.hypnogram = map_labels(j.at("labels").get<std::vector<int>>(), ls);
        if (j.contains("demographics")) {
            r.demographics.values = {j["demographics"].value("age", 0.0),
                                     j["demographics"].value("sex", 0.0)};
        }
        if (j.contains("groups"))
            for (auto& [k, v] : j["groups"].items())
                r.groups[k] = v.is_string() ? v.get<std::string>() : v.dump();
    } catch (const json::exception& e) {
        throw DataError("load_record: malformed sidecar " + sidecar_path(path) + ": " + e.what());
    }
    if (r.fs <= 0) throw DataError("load_record: fs must be positive in " + sidecar_path(path));

    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("load_record: cannot open " + path);
    if (format == WaveFormat::RAWF32) {
        in.seekg(0, std::ios::end);
        const auto bytes = static_cast<std::size_t>(in.tellg());
        in.seekg(0);
        if (bytes % 4 != 0) throw DataError("load_record: " + path + " size not a multiple of 4");
        r.signal.resize(bytes / 4);
        in.read(reinterpret_cast<char*>(r.signal.data()), static_cast<std::streamsize>(bytes));
    } else {
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            try {
                r.signal.push_back(std::stof(line));
            } catch (const std::exception&) {
                throw DataError("load_record: bad sample '" + line + "' in " + path);
            }
        }
    }
    if (j.contains("samples")) {
        const auto declared = j["samples"].get<std::size_t>();
        if (declared != r.signal.size())
            throw DataError("load_record: " + path + " declares " + std::to_string(declared) +
                            " samples, file holds " + std::to_string(r.signal.size()));
    }
    return r;
}

void save_record(const Record& record, const std::string& path, WaveFormat format) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("save_record: cannot open " + path);
    if (format == WaveFormat::RAWF32) {
        out.write(reinterpret_cast<const char*>(record.signal.data()),
                  static_cast<std::streamsize>(record.signal.size() * 4));
    } else {
        for (float v : record.signal) {
            char buf[32];
            std::snprintf(buf, sizeof buf, "%.9g\n", static_cast<double>(v));
            out << buf;
        }
    }

    json j;
    j["id"] = record.id;
    j["fs"] = record.fs;
    j["kind"] = record.kind == SignalKind::PPG ? "PPG" : "ECG";
    j["label_scheme"] = "AASM";
    std::vector<int> labels;
    labels.reserve(record.hypnogram.size());
    for (auto s : record.hypnogram.stages) labels.push_back(stage_to_aasm(s));
    j["labels"] = labels;
    j["demographics"] = {{"age", record.demographics.values.size() > 0 ? record.demographics.values[0] : 0.0},
                         {"sex", record.demographics.values.size() > 1 ? record.demographics.values[1] : 0.0}};
    j["groups"] = record.groups;
    j["samples"] = record.signal.size();
    std::ofstream meta(sidecar_path(path));
    meta << j.dump(2) << "\n";
}

Record synthesize_record(std::uint64_t seed, const SynthProfile& profile) {
    if (profile.fs <= 0 || profile.windows <= 0)
        throw ConfigError("synthesize_record: fs and windows must be positive");
    for (int s = 0; s < 4; ++s)
        if (profile.stages[s].rate_bpm <= 0)
            throw ConfigError("synthesize_record: non-positive pulse rate in profile");

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> unit_normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Record r;
    r.id = "synth-" + std::to_string(seed);
    r.fs = profile.fs;
    r.kind = SignalKind::PPG;
    r.demographics.values = {50.0 + static_cast<double>(seed % 40), static_cast<double>(seed % 2)};

    // Stage sequence: Markov chain over the 4 stages.
    auto draw = [&](const double* p) {
        double u = unif(rng), acc = 0.0;
        for (int i = 0; i < 4; ++i) {
            acc += p[i];
            if (u <= acc) return i;
        }
        return 3;
    };
    std::vector<int> stages(profile.windows);
    stages[0] = draw(profile.initial);
    for (int w = 1; w < profile.windows; ++w) stages[w] = draw(profile.transition[stages[w - 1]]);
    r.hypnogram.stages.resize(profile.windows);
    for (int w = 0; w < profile.windows; ++w)
        r.hypnogram.stages[w] = static_cast<SleepStage>(stages[w]);

    const double duration = profile.windows * kWindowSeconds;
    const std::size_t n = static_cast<std::size_t>(std::llround(duration * profile.fs));
    r.signal.assign(n, 0.0f);

    // Beat times: per-beat rate drawn from the current window's stage profile.
    double t = 0.3;
    while (t < duration) {
        r.true_beats.push_back(t);
        int w = std::min(profile.windows - 1, static_cast<int>(t / kWindowSeconds));
        const StageProfile& sp = profile.stages[stages[w]];
        double rate = sp.rate_bpm + sp.rate_sd_bpm * unit_normal(rng);
        rate = std::clamp(rate, 25.0, 210.0);
        t += 60.0 / rate;
    }

    // Waveform: asymmetric Gaussian pulse at each beat, peak exactly at the
    // beat time, amplitude modulated by respiration.
    const double rise_sd = 0.08, fall_sd = 0.13;
    for (double tb : r.true_beats) {
        int w = std::min(profile.windows - 1, static_cast<int>(tb / kWindowSeconds));
        const StageProfile& sp = profile.stages[stages[w]];
        const double amp =
            profile.pulse_amplitude *
            (1.0 + sp.resp_depth * std::sin(2.0 * M_PI * profile.resp_rate_hz * tb));
        const long lo = std::max(0L, std::lround((tb - 4 * rise_sd) * profile.fs));
        const long hi = std::min(static_cast<long>(n) - 1, std::lround((tb + 4 * fall_sd) * profile.fs));
        for (long i = lo; i <= hi; ++i) {
            const double dt = i / profile.fs - tb;
            const double sd = dt < 0 ? rise_sd : fall_sd;
            r.signal[static_cast<std::size_t>(i)] +=
                static_cast<float>(amp * std::exp(-0.5 * dt * dt / (sd * sd)));
        }
    }
    if (profile.noise_sd > 0) {
        for (auto& v : r.signal) v += static_cast<float>(profile.noise_sd * unit_normal(rng));
    }
    return r;
}

}  // namespace sleepkit
