#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sleepkit/beats.hpp"
#include "sleepkit/dsp.hpp"
#include "sleepkit/records.hpp"

namespace sleepkit {

// Pulse-rate variability measures, computed from a window's valid IBIs:
//   AVNN SDNN RMSSD SDSD pNN20 pNN50 CV medianNN IQRNN minNN maxNN
//   SD1 SD2 SD1SD2 SampEn VLF LF HF TotPower LFHF LFnorm
// (spectral bands via Lomb periodogram: 0.003-0.04 / 0.04-0.15 / 0.15-0.4 Hz)
inline constexpr int kPrvCount = 21;

// Morphological measures. Sixteen per-beat descriptors aggregated as
// (mean, SD) across the window's beats:
//   amplitude crest_time downslope_time width25 width50 width75
//   rise_slope_max fall_slope_max a_wave_amp b_wave_amp b_over_a
//   area duration crest_ratio slope_ratio amp_over_duration
// plus nine window-level descriptors:
//   bp_0.04-0.15 bp_0.15-0.4 bp_0.4-2 bp_2-8 spectral_centroid
//   spectral_entropy skewness kurtosis zero_cross_rate
inline constexpr int kMorCount = 41;

const std::vector<std::string>& prv_feature_names();
const std::vector<std::string>& mor_feature_names();

struct FeatureMatrix {
    std::size_t rows = 0, cols = 0;
    std::vector<double> values;  // row-major rows x cols
    std::vector<std::string> names;
    std::vector<bool> mask;  // per-window validity

    double& at(std::size_t r, std::size_t c) { return values[r * cols + c]; }
    double at(std::size_t r, std::size_t c) const { return values[r * cols + c]; }
};

// All-NaN when fewer than 4 valid IBIs.
std::vector<double> prv_features(const std::vector<double>& ibis_ms);

// Beats given as sample indices of pulse peaks within x. All-NaN when empty.
std::vector<double> mor_features(const std::vector<float>& x, double fs,
                                 const std::vector<std::size_t>& beat_indices);

// Per window l: set A over window l, set B over windows l-2..l+2 (clipped at
// the edges), columns [A_prv, A_mor, B_prv, B_mor, demographics].
FeatureMatrix windowed_features(const Record& record, const WavSeries& bandpassed,
                                const BeatSeries& beats);
FeatureMatrix windowed_features(const Record& record, const BeatSeries& beats);

// Column-wise median imputation of NaNs then z-scoring; zero-variance
// columns become 0; demographic columns pass through (age/100, sex).
FeatureMatrix standardize_per_patient(FeatureMatrix fm);

// Stable hash of the feature name schema.
std::uint64_t feature_schema_hash(const FeatureMatrix& fm);

void write_feature_csv(const FeatureMatrix& fm, const std::string& path);
FeatureMatrix read_feature_csv(const std::string& path);

}  // namespace sleepkit
