#pragma once

#include <cstddef>
#include <vector>

#include "sleepkit/common.hpp"
#include "sleepkit/records.hpp"

namespace sleepkit {

struct WavSeries {
    std::vector<float> samples;
    double fs = 0.0;
    // Count of samples belonging to the unpadded part of the record;
    // everything past this index is alignment padding.
    std::size_t valid_samples = 0;

    std::size_t valid() const { return valid_samples ? valid_samples : samples.size(); }
};

struct Biquad {
    double b0, b1, b2, a1, a2;
};

enum class FilterKind { Lowpass, Bandpass };

struct IIRFilter {
    std::vector<Biquad> sections;
    FilterKind kind = FilterKind::Lowpass;
    int order = 0;                   // prototype order
    std::vector<double> edges_hz;    // stopband edges
    double stop_atten_db = 0.0;
    double fs = 0.0;
};

// Chebyshev Type II design returned as stable second-order sections. The
// given edges are the stopband edges at which attenuation first reaches
// stop_atten_db.
IIRFilter design_cheby2(int order, FilterKind kind, const std::vector<double>& edges_hz,
                        double stop_atten_db, double fs);

// Magnitude response |H(f)| of the cascade at frequency f_hz.
double filter_magnitude(const IIRFilter& filter, double f_hz);

// Single forward pass with steady-state initial conditions scaled to x[0].
std::vector<float> sosfilt(const IIRFilter& filter, const std::vector<float>& x);

// Forward-backward zero-phase filtering with odd reflection padding.
WavSeries filtfilt(const IIRFilter& filter, const WavSeries& x);

// Linear-interpolation resampling; output count = round(n * fs_out / fs_in).
WavSeries resample_linear(const WavSeries& x, double fs_out);

// Clip to mean +/- 3 sigma of the unpadded region, then z-score by the
// post-clip statistics of that region. Padded suffix is set to 0.
WavSeries clip_standardize(const WavSeries& x);

// Full WAV preprocessing path: lowpass(8 Hz, 40 dB, order 8) -> filtfilt ->
// resample to 1024/30 Hz -> clip_standardize.
WavSeries preprocess_wav(const Record& record);

// Band-pass (0.4-8 Hz) path feeding the beat detector, at native rate.
WavSeries bandpass_for_beats(const Record& record);

}  // namespace sleepkit
