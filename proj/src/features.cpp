#include "sleepkit/features.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>
#include <sstream>

namespace sleepkit {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double mean_of(const std::vector<double>& v) {
    return v.empty() ? kNaN : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double sd_of(const std::vector<double>& v) {
    if (v.empty()) return kNaN;
    const double m = mean_of(v);
    double acc = 0.0;
    for (double x : v) acc += (x - m) * (x - m);
    return std::sqrt(acc / static_cast<double>(v.size()));
}

double quantile_sorted(const std::vector<double>& v, double q) {
    const double pos = q * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(pos);
    if (lo + 1 >= v.size()) return v.back();
    const double f = pos - static_cast<double>(lo);
    return (1.0 - f) * v[lo] + f * v[lo + 1];
}

// Classic Lomb periodogram power at frequency f (Hz), times in seconds.
double lomb_power(const std::vector<double>& t, const std::vector<double>& x, double xbar,
                  double f) {
    const double w = 2.0 * M_PI * f;
    double s2 = 0.0, c2 = 0.0;
    for (double ti : t) {
        s2 += std::sin(2.0 * w * ti);
        c2 += std::cos(2.0 * w * ti);
    }
    const double tau = std::atan2(s2, c2) / (2.0 * w);
    double cs = 0.0, cc = 0.0, ss = 0.0, sn = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        const double arg = w * (t[i] - tau);
        const double c = std::cos(arg), s = std::sin(arg);
        const double d = x[i] - xbar;
        cs += d * c;
        cc += c * c;
        sn += d * s;
        ss += s * s;
    }
    if (cc <= 0 || ss <= 0) return 0.0;
    return 0.5 * (cs * cs / cc + sn * sn / ss);
}

double sample_entropy(const std::vector<double>& x, int m, double r) {
    const auto n = static_cast<long>(x.size());
    if (n <= m + 1 || r <= 0) return 0.0;
    long a = 0, b = 0;  // template matches of length m+1 and m
    for (long i = 0; i < n - m; ++i) {
        for (long j = i + 1; j < n - m; ++j) {
            bool match_m = true;
            for (int k = 0; k < m; ++k) {
                if (std::abs(x[i + k] - x[j + k]) > r) {
                    match_m = false;
                    break;
                }
            }
            if (!match_m) continue;
            ++b;
            if (std::abs(x[i + m] - x[j + m]) <= r) ++a;
        }
    }
    if (a == 0 || b == 0) return 0.0;
    return -std::log(static_cast<double>(a) / static_cast<double>(b));
}

}  // namespace

const std::vector<std::string>& prv_feature_names() {
    static const std::vector<std::string> names = {
        "AVNN", "SDNN", "RMSSD", "SDSD", "pNN20", "pNN50", "CV", "medianNN", "IQRNN",
        "minNN", "maxNN", "SD1", "SD2", "SD1SD2", "SampEn", "VLF", "LF", "HF",
        "TotPower", "LFHF", "LFnorm"};
    return names;
}

const std::vector<std::string>& mor_feature_names() {
    static const std::vector<std::string> names = [] {
        const char* beat[] = {"amplitude", "crest_time", "downslope_time", "width25",
                              "width50", "width75", "rise_slope_max", "fall_slope_max",
                              "a_wave_amp", "b_wave_amp", "b_over_a", "area", "duration",
                              "crest_ratio", "slope_ratio", "amp_over_duration"};
        std::vector<std::string> n;
        for (const char* f : beat) n.push_back(std::string(f) + "_mean");
        for (const char* f : beat) n.push_back(std::string(f) + "_sd");
        for (const char* f : {"bp_0.04-0.15", "bp_0.15-0.4", "bp_0.4-2", "bp_2-8",
                              "spectral_centroid", "spectral_entropy", "skewness",
                              "kurtosis", "zero_cross_rate"})
            n.push_back(f);
        return n;
    }();
    return names;
}

std::vector<double> prv_features(const std::vector<double>& ibis_ms) {
    std::vector<double> out(kPrvCount, kNaN);
    if (ibis_ms.size() < 4) return out;
    const auto n = ibis_ms.size();

    const double avnn = mean_of(ibis_ms);
    const double sdnn = sd_of(ibis_ms);
    std::vector<double> diffs;
    diffs.reserve(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) diffs.push_back(ibis_ms[i + 1] - ibis_ms[i]);
    double rmssd = 0.0;
    int nn20 = 0, nn50 = 0;
    for (double d : diffs) {
        rmssd += d * d;
        if (std::abs(d) > 20.0) ++nn20;
        if (std::abs(d) > 50.0) ++nn50;
    }
    rmssd = std::sqrt(rmssd / static_cast<double>(diffs.size()));
    std::vector<double> sorted = ibis_ms;
    std::sort(sorted.begin(), sorted.end());
    const double sd1 = rmssd / std::sqrt(2.0);
    const double sd2sq = 2.0 * sdnn * sdnn - sd1 * sd1;
    const double sd2 = sd2sq > 0 ? std::sqrt(sd2sq) : 0.0;

    // Lomb spectrum of the tachogram; times from cumulative IBIs.
    std::vector<double> t(n);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        acc += ibis_ms[i] / 1000.0;
        t[i] = acc;
    }
    auto band_power = [&](double f0, double f1) {
        const double df = 0.001;
        double p = 0.0;
        for (double f = f0 + df / 2; f < f1; f += df) p += lomb_power(t, ibis_ms, avnn, f) * df;
        return p;
    };
    const double vlf = band_power(0.003, 0.04);
    const double lf = band_power(0.04, 0.15);
    const double hf = band_power(0.15, 0.4);

    out[0] = avnn;
    out[1] = sdnn;
    out[2] = rmssd;
    out[3] = sd_of(diffs);
    out[4] = static_cast<double>(nn20) / static_cast<double>(diffs.size());
    out[5] = static_cast<double>(nn50) / static_cast<double>(diffs.size());
    out[6] = avnn > 0 ? sdnn / avnn : 0.0;
    out[7] = quantile_sorted(sorted, 0.5);
    out[8] = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
    out[9] = sorted.front();
    out[10] = sorted.back();
    out[11] = sd1;
    out[12] = sd2;
    out[13] = sd2 > 0 ? sd1 / sd2 : 0.0;
    out[14] = sample_entropy(ibis_ms, 2, 0.2 * sdnn);
    out[15] = vlf;
    out[16] = lf;
    out[17] = hf;
    out[18] = vlf + lf + hf;
    out[19] = hf > 0 ? lf / hf : 0.0;
    out[20] = lf + hf > 0 ? lf / (lf + hf) : 0.0;
    return out;
}

namespace {

struct BeatShape {
    double feats[16];
};

bool beat_shape(const std::vector<float>& x, double fs, std::size_t peak, BeatShape& out) {
    const std::size_t n = x.size();
    if (peak == 0 || peak + 1 >= n) return false;
    // Pulse foot / end at the surrounding local minima.
    std::size_t foot = peak, end = peak;
    while (foot > 0 && x[foot - 1] <= x[foot]) --foot;
    while (end + 1 < n && x[end + 1] <= x[end]) ++end;
    if (foot == peak || end == peak) return false;
    const double base = x[foot];
    const double amp = x[peak] - base;
    if (amp <= 0) return false;

    auto width_at = [&](double level) {
        // crossing times either side of the peak, linearly interpolated
        const double y = base + level * amp;
        double tl = static_cast<double>(foot), tr = static_cast<double>(end);
        for (std::size_t i = peak; i > foot; --i) {
            if (x[i - 1] <= y && x[i] >= y) {
                const double d = x[i] - x[i - 1];
                tl = static_cast<double>(i - 1) + (d != 0 ? (y - x[i - 1]) / d : 0.0);
                break;
            }
        }
        for (std::size_t i = peak; i < end; ++i) {
            if (x[i] >= y && x[i + 1] <= y) {
                const double d = x[i + 1] - x[i];
                tr = static_cast<double>(i) + (d != 0 ? (y - x[i]) / d : 0.0);
                break;
            }
        }
        return (tr - tl) / fs;
    };

    double rise = 0.0, fall = 0.0, a_amp = 0.0, b_amp = 0.0, area = 0.0;
    for (std::size_t i = foot; i < peak; ++i)
        rise = std::max(rise, static_cast<double>(x[i + 1] - x[i]) * fs);
    for (std::size_t i = peak; i < end; ++i)
        fall = std::max(fall, static_cast<double>(x[i] - x[i + 1]) * fs);
    for (std::size_t i = std::max<std::size_t>(foot, 1); i + 1 <= end && i + 1 < n; ++i) {
        const double d2 = (x[i + 1] - 2.0 * x[i] + x[i - 1]) * fs * fs;
        if (i <= peak) a_amp = std::max(a_amp, d2);
        b_amp = std::min(b_amp, d2);
    }
    for (std::size_t i = foot; i <= end; ++i) area += (x[i] - base) / fs;

    const double crest = static_cast<double>(peak - foot) / fs;
    const double down = static_cast<double>(end - peak) / fs;
    const double dur = static_cast<double>(end - foot) / fs;
    double* f = out.feats;
    f[0] = amp;
    f[1] = crest;
    f[2] = down;
    f[3] = width_at(0.25);
    f[4] = width_at(0.50);
    f[5] = width_at(0.75);
    f[6] = rise;
    f[7] = fall;
    f[8] = a_amp;
    f[9] = b_amp;
    f[10] = a_amp != 0 ? b_amp / a_amp : 0.0;
    f[11] = area;
    f[12] = dur;
    f[13] = dur > 0 ? crest / dur : 0.0;
    f[14] = fall > 0 ? rise / fall : 0.0;
    f[15] = dur > 0 ? amp / dur : 0.0;
    return true;
}

}  // namespace

std::vector<double> mor_features(const std::vector<float>& x, double fs,
                                 const std::vector<std::size_t>& beat_indices) {
    std::vector<double> out(kMorCount, kNaN);
    std::vector<std::vector<double>> per_beat(16);
    for (std::size_t p : beat_indices) {
        BeatShape bs;
        if (p < x.size() && beat_shape(x, fs, p, bs))
            for (int k = 0; k < 16; ++k) per_beat[k].push_back(bs.feats[k]);
    }
    if (per_beat[0].empty()) return out;
    for (int k = 0; k < 16; ++k) {
        out[k] = mean_of(per_beat[k]);
        out[16 + k] = sd_of(per_beat[k]);
    }

    // Window-level spectrum: DFT power at the window's harmonic bins.
    const std::size_t n = x.size();
    const double t_obs = static_cast<double>(n) / fs;
    double mean = 0.0;
    for (float v : x) mean += v;
    mean /= static_cast<double>(n);
    const double df = 1.0 / t_obs;
    const int kmax = static_cast<int>(8.0 / df);
    std::vector<double> power(kmax + 1, 0.0), freq(kmax + 1, 0.0);
    for (int k = 1; k <= kmax; ++k) {
        const double w = 2.0 * M_PI * k * df / fs;
        double re = 0.0, im = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = x[i] - mean;
            re += d * std::cos(w * static_cast<double>(i));
            im += d * std::sin(w * static_cast<double>(i));
        }
        power[k] = (re * re + im * im) / static_cast<double>(n);
        freq[k] = k * df;
    }
    auto band = [&](double f0, double f1) {
        double p = 0.0;
        for (int k = 1; k <= kmax; ++k)
            if (freq[k] >= f0 && freq[k] < f1) p += power[k];
        return p;
    };
    double total = 0.0, centroid = 0.0;
    for (int k = 1; k <= kmax; ++k) {
        total += power[k];
        centroid += freq[k] * power[k];
    }
    double entropy = 0.0;
    if (total > 0) {
        for (int k = 1; k <= kmax; ++k) {
            const double p = power[k] / total;
            if (p > 0) entropy -= p * std::log(p);
        }
        entropy /= std::log(static_cast<double>(kmax));
    }
    double m2 = 0.0, m3 = 0.0, m4 = 0.0;
    for (float v : x) {
        const double d = v - mean;
        m2 += d * d;
        m3 += d * d * d;
        m4 += d * d * d * d;
    }
    m2 /= static_cast<double>(n);
    m3 /= static_cast<double>(n);
    m4 /= static_cast<double>(n);
    int zc = 0;
    for (std::size_t i = 0; i + 1 < n; ++i)
        if ((x[i] - mean) * (x[i + 1] - mean) < 0) ++zc;

    out[32] = band(0.04, 0.15);
    out[33] = band(0.15, 0.4);
    out[34] = band(0.4, 2.0);
    out[35] = band(2.0, 8.0);
    out[36] = total > 0 ? centroid / total : 0.0;
    out[37] = entropy;
    out[38] = m2 > 0 ? m3 / std::pow(m2, 1.5) : 0.0;
    out[39] = m2 > 0 ? m4 / (m2 * m2) : 0.0;
    out[40] = static_cast<double>(zc) / t_obs;
    return out;
}

FeatureMatrix windowed_features(const Record& record, const WavSeries& bandpassed,
                                const BeatSeries& beats) {
    const auto windows = record.hypnogram.size();
    const auto demo = record.demographics.values.size();
    FeatureMatrix fm;
    fm.rows = windows;
    fm.cols = 2 * (kPrvCount + kMorCount) + demo;
    fm.values.assign(fm.rows * fm.cols, 0.0);
    fm.mask.assign(fm.rows, false);
    for (const char sec : {'A', 'B'}) {
        for (const auto& n : prv_feature_names()) fm.names.push_back(std::string(1, sec) + "_prv_" + n);
        for (const auto& n : mor_feature_names()) fm.names.push_back(std::string(1, sec) + "_mor_" + n);
    }
    for (std::size_t d = 0; d < demo; ++d)
        fm.names.push_back(d == 0 ? "demo_age" : d == 1 ? "demo_sex" : "demo_" + std::to_string(d));

    const double fs = bandpassed.fs;
    auto extract = [&](double t0, double t1) {
        std::vector<double> ibis;
        std::vector<std::size_t> peaks;
        for (std::size_t i = 0; i < beats.ibis.size(); ++i) {
            const double te = beats.beat_times[i + 1];
            if (te >= t0 && te < t1 && (i >= beats.valid.size() || beats.valid[i]))
                ibis.push_back(beats.ibis[i]);
        }
        const auto s0 = static_cast<std::size_t>(std::max(0.0, t0 * fs));
        const auto s1 = std::min(bandpassed.samples.size(),
                                 static_cast<std::size_t>(std::max(0.0, t1 * fs)));
        std::vector<float> slice(bandpassed.samples.begin() + static_cast<long>(s0),
                                 bandpassed.samples.begin() + static_cast<long>(s1));
        for (double tb : beats.beat_times)
            if (tb >= t0 && tb < t1) peaks.push_back(static_cast<std::size_t>((tb - t0) * fs));
        auto prv = prv_features(ibis);
        auto mor = mor_features(slice, fs, peaks);
        prv.insert(prv.end(), mor.begin(), mor.end());
        return prv;
    };

    for (std::size_t l = 0; l < windows; ++l) {
        const double t0 = static_cast<double>(l) * kWindowSeconds;
        auto a = extract(t0, t0 + kWindowSeconds);
        const auto lb = l >= 2 ? l - 2 : 0;
        const auto ub = std::min(windows, l + 3);
        auto b = extract(static_cast<double>(lb) * kWindowSeconds,
                         static_cast<double>(ub) * kWindowSeconds);
        for (std::size_t c = 0; c < a.size(); ++c) fm.at(l, c) = a[c];
        for (std::size_t c = 0; c < b.size(); ++c) fm.at(l, a.size() + c) = b[c];
        for (std::size_t d = 0; d < demo; ++d) {
            const double v = record.demographics.values[d];
            fm.at(l, 2 * a.size() + d) = d == 0 ? v / 100.0 : v;
        }
        fm.mask[l] = std::isfinite(a[0]) && std::isfinite(a[kPrvCount]);
    }
    return fm;
}

FeatureMatrix windowed_features(const Record& record, const BeatSeries& beats) {
    return windowed_features(record, bandpass_for_beats(record), beats);
}

FeatureMatrix standardize_per_patient(FeatureMatrix fm) {
    const std::size_t demo = fm.cols - 2 * (kPrvCount + kMorCount);
    const std::size_t zcols = fm.cols - demo;
    for (std::size_t c = 0; c < zcols; ++c) {
        std::vector<double> finite;
        for (std::size_t r = 0; r < fm.rows; ++r)
            if (std::isfinite(fm.at(r, c))) finite.push_back(fm.at(r, c));
        double med = 0.0;
        if (!finite.empty()) {
            std::sort(finite.begin(), finite.end());
            med = quantile_sorted(finite, 0.5);
        }
        double mean = 0.0;
        for (std::size_t r = 0; r < fm.rows; ++r) {
            if (!std::isfinite(fm.at(r, c))) fm.at(r, c) = med;
            mean += fm.at(r, c);
        }
        mean /= static_cast<double>(fm.rows);
        double var = 0.0;
        for (std::size_t r = 0; r < fm.rows; ++r) {
            const double d = fm.at(r, c) - mean;
            var += d * d;
        }
        var /= static_cast<double>(fm.rows);
        const double sd = std::sqrt(var);
        for (std::size_t r = 0; r < fm.rows; ++r)
            fm.at(r, c) = sd > 0 ? (fm.at(r, c) - mean) / sd : 0.0;
    }
    return fm;
}

std::uint64_t feature_schema_hash(const FeatureMatrix& fm) {
    std::uint64_t h = 1469598103934665603ull;  // FNV-1a
    for (const auto& n : fm.names) {
        for (char ch : n) {
            h ^= static_cast<unsigned char>(ch);
            h *= 1099511628211ull;
        }
        h ^= '\n';
        h *= 1099511628211ull;
    }
    return h;
}

void write_feature_csv(const FeatureMatrix& fm, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw DataError("write_feature_csv: cannot open " + path);
    for (std::size_t c = 0; c < fm.cols; ++c) out << (c ? "," : "") << fm.names[c];
    out << "\n";
    out.precision(9);
    for (std::size_t r = 0; r < fm.rows; ++r) {
        for (std::size_t c = 0; c < fm.cols; ++c) out << (c ? "," : "") << fm.at(r, c);
        out << "\n";
    }
}

FeatureMatrix read_feature_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("read_feature_csv: cannot open " + path);
    FeatureMatrix fm;
    std::string line;
    if (!std::getline(in, line)) throw DataError("read_feature_csv: empty file " + path);
    std::stringstream hs(line);
    std::string cell;
    while (std::getline(hs, cell, ',')) fm.names.push_back(cell);
    fm.cols = fm.names.size();
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::stringstream ls(line);
        std::size_t c = 0;
        while (std::getline(ls, cell, ',')) {
            fm.values.push_back(std::stod(cell));
            ++c;
        }
        if (c != fm.cols) throw DataError("read_feature_csv: ragged row in " + path);
        ++fm.rows;
    }
    fm.mask.assign(fm.rows, true);
    return fm;
}

}  // namespace sleepkit
