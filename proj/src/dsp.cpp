#include "sleepkit/dsp.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>

namespace sleepkit {

namespace {

using cplx = std::complex<double>;

struct Zpk {
    std::vector<cplx> z, p;
    double k = 1.0;
};

// Analog Chebyshev Type II prototype, stopband edge at omega = 1.
Zpk cheb2_prototype(int n, double rs) {
    Zpk out;
    const double de = 1.0 / std::sqrt(std::pow(10.0, 0.1 * rs) - 1.0);
    const double mu = std::asinh(1.0 / de) / n;
    std::vector<int> m;
    if (n % 2) {
        for (int v = -n + 1; v < 0; v += 2) m.push_back(v);
        for (int v = 2; v < n; v += 2) m.push_back(v);
    } else {
        for (int v = -n + 1; v < n; v += 2) m.push_back(v);
    }
    for (int v : m) {
        const double s = std::sin(v * M_PI / (2.0 * n));
        out.z.push_back(-std::conj(cplx(0.0, 1.0) / s));
    }
    for (int v = -n + 1; v < n; v += 2) {
        cplx p = -std::exp(cplx(0.0, M_PI * v / (2.0 * n)));
        p = cplx(std::sinh(mu) * p.real(), std::cosh(mu) * p.imag());
        out.p.push_back(1.0 / p);
    }
    cplx num = 1.0, den = 1.0;
    for (auto& p : out.p) num *= -p;
    for (auto& z : out.z) den *= -z;
    out.k = (num / den).real();
    return out;
}

Zpk lp2lp(Zpk zpk, double wo) {
    for (auto& z : zpk.z) z *= wo;
    for (auto& p : zpk.p) p *= wo;
    zpk.k *= std::pow(wo, static_cast<double>(zpk.p.size() - zpk.z.size()));
    return zpk;
}

Zpk lp2bp(const Zpk& in, double wo, double bw) {
    const auto degree = in.p.size() - in.z.size();
    Zpk out;
    auto expand = [&](const std::vector<cplx>& roots, std::vector<cplx>& dst) {
        for (auto r : roots) {
            const cplx s = r * (bw / 2.0);
            const cplx d = std::sqrt(s * s - wo * wo);
            dst.push_back(s + d);
            dst.push_back(s - d);
        }
    };
    expand(in.z, out.z);
    expand(in.p, out.p);
    for (std::size_t i = 0; i < degree; ++i) out.z.push_back(0.0);
    out.k = in.k * std::pow(bw, static_cast<double>(degree));
    return out;
}

Zpk bilinear(const Zpk& in, double fs2) {
    Zpk out;
    cplx num = 1.0, den = 1.0;
    for (auto z : in.z) {
        out.z.push_back((fs2 + z) / (fs2 - z));
        num *= fs2 - z;
    }
    for (auto p : in.p) {
        out.p.push_back((fs2 + p) / (fs2 - p));
        den *= fs2 - p;
    }
    const auto degree = in.p.size() - in.z.size();
    for (std::size_t i = 0; i < degree; ++i) out.z.push_back(-1.0);
    out.k = in.k * (num / den).real();
    return out;
}

// Pair conjugate roots; returns one representative per pair. Real roots are
// paired among themselves.
std::vector<std::pair<cplx, cplx>> pair_roots(std::vector<cplx> roots) {
    constexpr double tol = 1e-10;
    std::vector<std::pair<cplx, cplx>> pairs;
    std::vector<cplx> reals;
    for (auto& r : roots) {
        if (std::abs(r.imag()) < tol)
            reals.push_back(r);
        else if (r.imag() > 0)
            pairs.emplace_back(r, std::conj(r));
    }
    std::sort(reals.begin(), reals.end(), [](cplx a, cplx b) { return a.real() < b.real(); });
    for (std::size_t i = 0; i + 1 < reals.size(); i += 2) pairs.emplace_back(reals[i], reals[i + 1]);
    return pairs;
}

std::vector<Biquad> zpk_to_sos(const Zpk& zpk) {
    auto zp = pair_roots(zpk.z);
    auto pp = pair_roots(zpk.p);
    if (zp.size() != pp.size())
        throw InternalError("zpk_to_sos: unbalanced pole/zero pair counts");

    // Poles closest to the unit circle are matched with the nearest zero pair
    // and placed last in the cascade.
    std::sort(pp.begin(), pp.end(), [](const auto& a, const auto& b) {
        return std::abs(std::abs(a.first) - 1.0) > std::abs(std::abs(b.first) - 1.0);
    });
    std::vector<Biquad> sos;
    std::vector<bool> used(zp.size(), false);
    for (const auto& [p1, p2] : pp) {
        std::size_t best = 0;
        double best_d = 1e300;
        for (std::size_t i = 0; i < zp.size(); ++i) {
            if (used[i]) continue;
            const double d = std::abs(zp[i].first - p1);
            if (d < best_d) {
                best_d = d;
                best = i;
            }
        }
        used[best] = true;
        const auto& [z1, z2] = zp[best];
        Biquad s;
        s.b0 = 1.0;
        s.b1 = -(z1 + z2).real();
        s.b2 = (z1 * z2).real();
        s.a1 = -(p1 + p2).real();
        s.a2 = (p1 * p2).real();
        sos.push_back(s);
    }
    // Overall gain into the first (best-conditioned) section.
    if (!sos.empty()) {
        sos.front().b0 *= zpk.k;
        sos.front().b1 *= zpk.k;
        sos.front().b2 *= zpk.k;
    }
    return sos;
}

}  // namespace

IIRFilter design_cheby2(int order, FilterKind kind, const std::vector<double>& edges_hz,
                        double stop_atten_db, double fs) {
    if (stop_atten_db <= 0) throw ConfigError("design_cheby2: attenuation must be positive");
    if (fs <= 0) throw ConfigError("design_cheby2: fs must be positive");
    const std::size_t want = kind == FilterKind::Lowpass ? 1 : 2;
    if (edges_hz.size() != want) throw ConfigError("design_cheby2: wrong edge count for kind");
    for (double e : edges_hz)
        if (e <= 0 || e >= fs / 2)
            throw ConfigError("design_cheby2: edge " + std::to_string(e) + " Hz outside (0, fs/2)");

    // Normalized design at fs = 2 with bilinear prewarping, matching the
    // conventional zpk pipeline.
    const double fs2 = 4.0;
    std::vector<double> warped;
    for (double e : edges_hz) warped.push_back(4.0 * std::tan(M_PI * (e / (fs / 2.0)) / 2.0));

    Zpk proto = cheb2_prototype(order, stop_atten_db);
    Zpk analog = kind == FilterKind::Lowpass
                     ? lp2lp(proto, warped[0])
                     : lp2bp(proto, std::sqrt(warped[0] * warped[1]), warped[1] - warped[0]);
    Zpk digital = bilinear(analog, fs2);
    for (auto& p : digital.p)
        if (std::abs(p) >= 1.0)
            throw InternalError("design_cheby2: unstable pole |p| = " + std::to_string(std::abs(p)));

    IIRFilter f;
    f.sections = zpk_to_sos(digital);
    f.kind = kind;
    f.order = order;
    f.edges_hz = edges_hz;
    f.stop_atten_db = stop_atten_db;
    f.fs = fs;
    return f;
}

double filter_magnitude(const IIRFilter& filter, double f_hz) {
    const double w = 2.0 * M_PI * f_hz / filter.fs;
    const cplx e1 = std::exp(cplx(0.0, -w));
    const cplx e2 = e1 * e1;
    cplx h = 1.0;
    for (const auto& s : filter.sections)
        h *= (s.b0 + s.b1 * e1 + s.b2 * e2) / (1.0 + s.a1 * e1 + s.a2 * e2);
    return std::abs(h);
}

namespace {

// Steady-state initial state per section, unit input (sosfilt_zi convention).
std::vector<std::array<double, 2>> sos_zi(const IIRFilter& filter) {
    std::vector<std::array<double, 2>> zi;
    double scale = 1.0;
    for (const auto& s : filter.sections) {
        const double B0 = s.b1 - s.a1 * s.b0;
        const double B1 = s.b2 - s.a2 * s.b0;
        const double det = 1.0 + s.a1 + s.a2;
        zi.push_back({scale * (B0 + B1) / det,
                      scale * ((1.0 + s.a1) * B1 - s.a2 * B0) / det});
        scale *= (s.b0 + s.b1 + s.b2) / det;
    }
    return zi;
}

// In-place cascade with initial conditions at steady state for the input's
// leading value. zi carries the cumulative DC gain, so every section scales
// by the original head.
void sosfilt_steady(const IIRFilter& filter, std::vector<double>& buf) {
    if (buf.empty()) return;
    const double head = buf.front();
    auto zi = sos_zi(filter);
    for (std::size_t si = 0; si < filter.sections.size(); ++si) {
        const auto& s = filter.sections[si];
        double s0 = zi[si][0] * head;
        double s1 = zi[si][1] * head;
        for (auto& v : buf) {
            const double in = v;
            const double y = s.b0 * in + s0;
            s0 = s.b1 * in - s.a1 * y + s1;
            s1 = s.b2 * in - s.a2 * y;
            v = y;
        }
    }
}

}  // namespace

std::vector<float> sosfilt(const IIRFilter& filter, const std::vector<float>& x) {
    std::vector<double> buf(x.begin(), x.end());
    sosfilt_steady(filter, buf);
    return {buf.begin(), buf.end()};
}

WavSeries filtfilt(const IIRFilter& filter, const WavSeries& x) {
    const std::size_t n = x.samples.size();
    const std::size_t padlen = 3 * (2 * static_cast<std::size_t>(filter.order) + 1);
    if (n <= padlen)
        throw DataError("filtfilt: input length " + std::to_string(n) +
                        " too short for edge padding (" + std::to_string(padlen) + ")");

    // Odd reflection extension on both ends.
    std::vector<double> ext;
    ext.reserve(n + 2 * padlen);
    for (std::size_t i = padlen; i >= 1; --i) ext.push_back(2.0 * x.samples[0] - x.samples[i]);
    ext.insert(ext.end(), x.samples.begin(), x.samples.end());
    for (std::size_t i = 2; i <= padlen + 1; ++i)
        ext.push_back(2.0 * x.samples[n - 1] - x.samples[n - i]);

    sosfilt_steady(filter, ext);
    std::reverse(ext.begin(), ext.end());
    sosfilt_steady(filter, ext);
    std::reverse(ext.begin(), ext.end());

    WavSeries out;
    out.fs = x.fs;
    out.valid_samples = x.valid_samples;
    out.samples.assign(ext.begin() + static_cast<long>(padlen),
                       ext.begin() + static_cast<long>(padlen + n));
    return out;
}

WavSeries resample_linear(const WavSeries& x, double fs_out) {
    if (fs_out <= 0) throw ConfigError("resample_linear: fs_out must be positive");
    const std::size_t n_in = x.samples.size();
    const std::size_t n_out =
        static_cast<std::size_t>(std::llround(static_cast<double>(n_in) * fs_out / x.fs));
    WavSeries out;
    out.fs = fs_out;
    if (x.valid_samples)
        out.valid_samples = static_cast<std::size_t>(
            std::llround(static_cast<double>(x.valid_samples) * fs_out / x.fs));
    out.samples.resize(n_out);
    for (std::size_t i = 0; i < n_out; ++i) {
        const double pos = static_cast<double>(i) / fs_out * x.fs;
        if (pos >= static_cast<double>(n_in - 1)) {
            out.samples[i] = x.samples[n_in - 1];
            continue;
        }
        const auto lo = static_cast<std::size_t>(pos);
        const double frac = pos - static_cast<double>(lo);
        out.samples[i] = static_cast<float>((1.0 - frac) * x.samples[lo] + frac * x.samples[lo + 1]);
    }
    return out;
}

WavSeries clip_standardize(const WavSeries& x) {
    const std::size_t nv = x.valid();
    if (nv == 0) throw DataError("clip_standardize: empty input");
    auto stats = [&](const std::vector<float>& v) {
        double mean = 0.0;
        for (std::size_t i = 0; i < nv; ++i) mean += v[i];
        mean /= static_cast<double>(nv);
        double var = 0.0;
        for (std::size_t i = 0; i < nv; ++i) var += (v[i] - mean) * (v[i] - mean);
        var /= static_cast<double>(nv);
        return std::pair{mean, std::sqrt(var)};
    };
    auto [mean, sd] = stats(x.samples);
    if (sd == 0.0) throw DataError("clip_standardize: constant signal (sigma = 0)");

    WavSeries out = x;
    const double lo = mean - 3.0 * sd, hi = mean + 3.0 * sd;
    for (std::size_t i = 0; i < nv; ++i)
        out.samples[i] = static_cast<float>(std::clamp(static_cast<double>(out.samples[i]), lo, hi));
    auto [m2, sd2] = stats(out.samples);
    if (sd2 == 0.0) throw DataError("clip_standardize: constant signal after clipping");
    for (std::size_t i = 0; i < nv; ++i)
        out.samples[i] = static_cast<float>((out.samples[i] - m2) / sd2);
    for (std::size_t i = nv; i < out.samples.size(); ++i) out.samples[i] = 0.0f;
    return out;
}

WavSeries preprocess_wav(const Record& record) {
    if (record.fs < 80.0)
        throw DataError("preprocess_wav: record '" + record.id + "' fs " +
                        std::to_string(record.fs) + " Hz below 80 Hz minimum");
    WavSeries x;
    x.samples = record.signal;
    x.fs = record.fs;
    const std::size_t unpadded = record.hypnogram.unpadded_size();
    if (unpadded > 0)
        x.valid_samples = std::min(
            x.samples.size(), static_cast<std::size_t>(
                                  std::llround(unpadded * kWindowSeconds * record.fs)));
    IIRFilter lp = design_cheby2(8, FilterKind::Lowpass, {8.0}, 40.0, record.fs);
    return clip_standardize(resample_linear(filtfilt(lp, x), kWavRate));
}

WavSeries bandpass_for_beats(const Record& record) {
    WavSeries x;
    x.samples = record.signal;
    x.fs = record.fs;
    IIRFilter bp = design_cheby2(8, FilterKind::Bandpass, {0.4, 8.0}, 40.0, record.fs);
    return filtfilt(bp, x);
}

}  // namespace sleepkit
