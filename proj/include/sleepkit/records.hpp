#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "sleepkit/common.hpp"

namespace sleepkit {

enum class SleepStage : std::uint8_t {
    Wake = 0,
    Light = 1,
    Deep = 2,
    REM = 3,
    Pad = 255,
};

const char* stage_name(SleepStage s);

enum class LabelScheme { AASM, RK };
enum class SignalKind { PPG, ECG };
enum class WaveFormat { CSV, RAWF32 };

struct Hypnogram {
    std::vector<SleepStage> stages;
    static constexpr double window_seconds = kWindowSeconds;

    std::size_t size() const { return stages.size(); }
    // Count of leading windows before the contiguous Pad suffix.
    std::size_t unpadded_size() const;
};

struct DemographicVector {
    // Default layout: {age in years, sex coded 0/1}.
    std::vector<double> values{0.0, 0.0};
};

struct Record {
    std::string id;
    std::vector<float> signal;
    double fs = 0.0;
    SignalKind kind = SignalKind::PPG;
    Hypnogram hypnogram;
    DemographicVector demographics;
    std::map<std::string, std::string> groups;
    // Ground-truth beat times (seconds), populated by the synthesizer only.
    std::vector<double> true_beats;
};

// Source-coded label values: AASM {0:W,1:N1,2:N2,3:N3,5:REM,9:unscored},
// R&K {0:W,1:S1,2:S2,3:S3,4:S4,5:REM,9:unscored}.
Hypnogram map_labels(const std::vector<int>& raw_labels, LabelScheme scheme);

// Pad or truncate to exactly `target_windows` 30 s windows (default: 10 h).
// Signal is zero-padded / truncated to the matching sample count at record fs;
// truncation keeps the start of the recording.
Record normalize_duration(Record record, int target_windows = kDefaultWindows);

// Waveform file + `<stem>.meta.json` sidecar.
Record load_record(const std::string& path, WaveFormat format);
void save_record(const Record& record, const std::string& path, WaveFormat format);

struct StageProfile {
    double rate_bpm = 60.0;      // mean pulse rate
    double rate_sd_bpm = 1.0;    // beat-to-beat rate variability
    double resp_depth = 0.1;     // respiratory amplitude modulation depth
};

struct SynthProfile {
    double fs = 128.0;
    int windows = kDefaultWindows;     // record length before normalization
    double noise_sd = 0.0;             // additive Gaussian noise, signal units
    double pulse_amplitude = 1.0;
    double resp_rate_hz = 0.25;
    // Indexed by SleepStage code 0..3.
    StageProfile stages[4] = {
        {78.0, 3.0, 0.08},   // Wake
        {62.0, 1.5, 0.15},   // Light
        {52.0, 0.8, 0.22},   // Deep
        {92.0, 4.0, 0.05},   // REM
    };
    // Markov chain over stages; rows sum to 1. Row/col order W,L,D,R.
    double transition[4][4] = {
        {0.80, 0.18, 0.01, 0.01},
        {0.05, 0.80, 0.10, 0.05},
        {0.01, 0.15, 0.80, 0.04},
        {0.05, 0.10, 0.02, 0.83},
    };
    double initial[4] = {0.7, 0.2, 0.05, 0.05};
};

// Deterministic in (seed, profile). The returned record keeps ground-truth
// beat times for detector validation.
Record synthesize_record(std::uint64_t seed, const SynthProfile& profile);

}  // namespace sleepkit
