#pragma once

#include <vector>

#include "sleepkit/common.hpp"
#include "sleepkit/dsp.hpp"

namespace sleepkit {

struct BeatSeries {
    std::vector<double> beat_times;  // seconds from record start, strictly increasing
    std::vector<double> ibis;        // ms, ibis[i] = 1000 * (beat_times[i+1] - beat_times[i])
    std::vector<bool> valid;         // per-IBI quality flag
};

struct RateSeries {
    std::vector<float> samples;  // bpm (z-scored after derivation)
    double fs = kRateSeriesRate;
};

struct BeatDetectorConfig {
    double block_seconds = 10.0;
    double percentile = 60.0;      // of recent accepted peak amplitudes
    int history_beats = 50;
    double threshold_frac = 0.5;   // acceptance threshold = frac * percentile
    double refractory_s = 0.33;
};

// Block-adaptive percentile-threshold peak detector over the band-passed PPG.
BeatSeries detect_beats(const WavSeries& x, const BeatDetectorConfig& cfg = {});

// Flags IBIs outside [300, 2000] ms or jumping > 40% from the previous valid IBI.
BeatSeries ibi_quality(BeatSeries beats);

// Instantaneous pulse rate on a uniform grid: 60000/IBI at each interval's
// end-beat, linearly interpolated; gaps > 5 s median-filled; clamped to
// [20, 220] bpm; z-scored per record.
RateSeries derive_rate_series(const BeatSeries& beats, double fs_out, double duration_s);

// Same, but without the final z-scoring (raw bpm values).
RateSeries derive_rate_series_bpm(const BeatSeries& beats, double fs_out, double duration_s);

}  // namespace sleepkit
