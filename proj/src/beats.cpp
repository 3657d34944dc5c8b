#include "sleepkit/beats.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

namespace sleepkit {

namespace {

double percentile(std::vector<double> v, double p) {
    if (v.empty()) return 0.0;
    std::sort(v.begin(), v.end());
    const double pos = p / 100.0 * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= v.size()) return v.back();
    const double frac = pos - static_cast<double>(lo);
    return (1.0 - frac) * v[lo] + frac * v[lo + 1];
}

}  // namespace

BeatSeries detect_beats(const WavSeries& x, const BeatDetectorConfig& cfg) {
    const std::size_t n = x.samples.size();
    if (x.fs <= 0 || n < static_cast<std::size_t>(x.fs))
        throw DataError("detect_beats: input shorter than one second");

    // Local maxima from the first-derivative sign change (+ to -).
    std::vector<std::size_t> maxima;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double dprev = x.samples[i] - x.samples[i - 1];
        const double dnext = x.samples[i + 1] - x.samples[i];
        if (dprev > 0 && dnext <= 0) maxima.push_back(i);
    }

    BeatSeries out;
    std::deque<double> history;  // recent accepted peak amplitudes
    const std::size_t block = static_cast<std::size_t>(cfg.block_seconds * x.fs);
    double last_beat = -1e9;
    std::size_t mi = 0;
    for (std::size_t start = 0; start < n; start += block) {
        const std::size_t stop = std::min(n, start + block);
        // Bootstrap threshold from the block itself when no history exists.
        double ref;
        if (history.empty()) {
            std::vector<double> amps;
            for (std::size_t j = mi; j < maxima.size() && maxima[j] < stop; ++j)
                if (x.samples[maxima[j]] > 0) amps.push_back(x.samples[maxima[j]]);
            if (amps.empty()) continue;
            ref = percentile(amps, cfg.percentile);
        } else {
            ref = percentile({history.begin(), history.end()}, cfg.percentile);
        }
        for (; mi < maxima.size() && maxima[mi] < stop; ++mi) {
            const std::size_t idx = maxima[mi];
            const double amp = x.samples[idx];
            const double thresh = cfg.threshold_frac *
                                  (history.empty() ? ref
                                                   : percentile({history.begin(), history.end()},
                                                                cfg.percentile));
            if (amp <= thresh || amp <= 0) continue;
            const double t = static_cast<double>(idx) / x.fs;
            if (t - last_beat < cfg.refractory_s) continue;
            out.beat_times.push_back(t);
            last_beat = t;
            history.push_back(amp);
            if (static_cast<int>(history.size()) > cfg.history_beats) history.pop_front();
        }
    }

    for (std::size_t i = 0; i + 1 < out.beat_times.size(); ++i)
        out.ibis.push_back(1000.0 * (out.beat_times[i + 1] - out.beat_times[i]));
    out.valid.assign(out.ibis.size(), true);
    return out;
}

BeatSeries ibi_quality(BeatSeries beats) {
    double prev_valid = -1.0;
    for (std::size_t i = 0; i < beats.ibis.size(); ++i) {
        const double ibi = beats.ibis[i];
        bool ok = ibi >= 300.0 && ibi <= 2000.0;
        if (ok && prev_valid > 0 && std::abs(ibi - prev_valid) / prev_valid > 0.40) ok = false;
        beats.valid[i] = ok;
        if (ok) prev_valid = ibi;
    }
    return beats;
}

RateSeries derive_rate_series_bpm(const BeatSeries& beats, double fs_out, double duration_s) {
    const std::size_t n_out = static_cast<std::size_t>(std::llround(duration_s * fs_out));
    RateSeries out;
    out.fs = fs_out;
    out.samples.assign(n_out, 0.0f);

    // Rate assigned at each interval's end-beat time.
    std::vector<double> ts, rs;
    for (std::size_t i = 0; i < beats.ibis.size(); ++i) {
        if (i < beats.valid.size() && !beats.valid[i]) continue;
        ts.push_back(beats.beat_times[i + 1]);
        rs.push_back(60000.0 / beats.ibis[i]);
    }
    if (ts.empty()) return out;

    std::vector<double> sorted = rs;
    std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2, sorted.end());
    double median = sorted[sorted.size() / 2];
    if (sorted.size() % 2 == 0) {
        const double hi = median;
        std::nth_element(sorted.begin(), sorted.begin() + sorted.size() / 2 - 1, sorted.end());
        median = 0.5 * (hi + sorted[sorted.size() / 2 - 1]);
    }

    constexpr double kGapSeconds = 5.0;
    std::size_t j = 0;
    for (std::size_t i = 0; i < n_out; ++i) {
        const double t = static_cast<double>(i) / fs_out;
        while (j + 1 < ts.size() && ts[j + 1] <= t) ++j;
        double v;
        if (t <= ts.front() || t >= ts.back()) {
            v = median;
        } else {
            const double dt = ts[j + 1] - ts[j];
            v = dt > kGapSeconds
                    ? median
                    : rs[j] + (rs[j + 1] - rs[j]) * (t - ts[j]) / dt;
        }
        out.samples[i] = static_cast<float>(std::clamp(v, 20.0, 220.0));
    }
    return out;
}

RateSeries derive_rate_series(const BeatSeries& beats, double fs_out, double duration_s) {
    RateSeries out = derive_rate_series_bpm(beats, fs_out, duration_s);
    double mean = 0.0;
    for (float v : out.samples) mean += v;
    if (!out.samples.empty()) mean /= static_cast<double>(out.samples.size());
    double var = 0.0;
    for (float v : out.samples) var += (v - mean) * (v - mean);
    if (!out.samples.empty()) var /= static_cast<double>(out.samples.size());
    const double sd = std::sqrt(var);
    for (auto& v : out.samples)
        v = sd > 0 ? static_cast<float>((v - mean) / sd) : 0.0f;
    return out;
}

}  // namespace sleepkit
