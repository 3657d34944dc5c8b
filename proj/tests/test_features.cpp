#include <algorithm>
#include <cmath>
#include <filesystem>

#include "doctest.h"
#include "sleepkit/features.hpp"

using namespace sleepkit;

namespace {
std::size_t name_index(const std::vector<std::string>& names, const std::string& suffix) {
    for (std::size_t i = 0; i < names.size(); ++i)
        if (names[i].size() >= suffix.size() &&
            names[i].compare(names[i].size() - suffix.size(), suffix.size(), suffix) == 0)
            return i;
    throw std::runtime_error("name not found: " + suffix);
}
}  // namespace

TEST_CASE("feature name lists match the published counts") {
    CHECK(prv_feature_names().size() == kPrvCount);
    CHECK(mor_feature_names().size() == kMorCount);
    CHECK(kPrvCount == 21);
    CHECK(kMorCount == 41);
}

TEST_CASE("constant IBIs give the closed-form PRV row") {
    std::vector<double> ibis(20, 1000.0);
    auto f = prv_features(ibis);
    REQUIRE(f.size() == static_cast<std::size_t>(kPrvCount));
    const auto& names = prv_feature_names();
    auto at = [&](const char* n) { return f[name_index(names, n)]; };
    CHECK(at("AVNN") == doctest::Approx(1000.0));
    CHECK(at("SDNN") == doctest::Approx(0.0));
    CHECK(at("RMSSD") == doctest::Approx(0.0));
    CHECK(at("pNN50") == doctest::Approx(0.0));
    CHECK(at("medianNN") == doctest::Approx(1000.0));
    CHECK(at("minNN") == doctest::Approx(1000.0));
    CHECK(at("maxNN") == doctest::Approx(1000.0));
}

TEST_CASE("alternating IBIs hit the RMSSD/pNN50 oracle") {
    std::vector<double> ibis;
    for (int i = 0; i < 30; ++i) ibis.push_back(i % 2 == 0 ? 1000.0 : 1060.0);
    auto f = prv_features(ibis);
    const auto& names = prv_feature_names();
    CHECK(f[name_index(names, "RMSSD")] == doctest::Approx(60.0).epsilon(1e-9));
    CHECK(f[name_index(names, "pNN50")] == doctest::Approx(1.0));
    CHECK(f[name_index(names, "pNN20")] == doctest::Approx(1.0));
    CHECK(f[name_index(names, "SDSD")] <= 60.0 + 1e-9);
}

TEST_CASE("fewer than 4 IBIs yields an all-NaN row") {
    auto f = prv_features({1000.0, 990.0, 1010.0});
    for (double v : f) CHECK(std::isnan(v));
}

TEST_CASE("spectral band powers are non-negative and sum below total power") {
    std::vector<double> ibis;
    for (int i = 0; i < 60; ++i) ibis.push_back(1000.0 + 50.0 * std::sin(0.4 * i));
    auto f = prv_features(ibis);
    const auto& names = prv_feature_names();
    const double vlf = f[name_index(names, "VLF")];
    const double lf = f[name_index(names, "LF")];
    const double hf = f[name_index(names, "HF")];
    const double tot = f[name_index(names, "TotPower")];
    CHECK(vlf >= 0.0);
    CHECK(lf >= 0.0);
    CHECK(hf >= 0.0);
    CHECK(tot == doctest::Approx(vlf + lf + hf));
    CHECK(f[name_index(names, "LFnorm")] == doctest::Approx(lf / (lf + hf)));
}

TEST_CASE("morphology on a symmetric triangular pulse") {
    // Triangle of base 1 s, peak amplitude 1, centered at 2 s.
    const double fs = 128.0;
    std::vector<float> x(static_cast<std::size_t>(6 * fs), 0.0f);
    const long c = static_cast<long>(2.0 * fs);
    const long half = static_cast<long>(0.5 * fs);
    for (long i = -half; i <= half; ++i)
        x[static_cast<std::size_t>(c + i)] =
            static_cast<float>(1.0 - std::abs(static_cast<double>(i)) / half);
    // Second identical pulse so aggregation has data.
    const long c2 = static_cast<long>(4.0 * fs);
    for (long i = -half; i <= half; ++i)
        x[static_cast<std::size_t>(c2 + i)] =
            static_cast<float>(1.0 - std::abs(static_cast<double>(i)) / half);

    auto f = mor_features(x, fs, {static_cast<std::size_t>(c), static_cast<std::size_t>(c2)});
    REQUIRE(f.size() == static_cast<std::size_t>(kMorCount));
    const auto& names = mor_feature_names();
    const double w50 = f[name_index(names, "width50_mean")];
    const double w25 = f[name_index(names, "width25_mean")];
    CHECK(w50 == doctest::Approx(0.5).epsilon(0.05));   // half the 1 s base
    CHECK(w25 == doctest::Approx(0.75).epsilon(0.05));  // 75% of the base
    CHECK(f[name_index(names, "amplitude_mean")] == doctest::Approx(1.0).epsilon(0.05));
    CHECK(f[name_index(names, "amplitude_sd")] == doctest::Approx(0.0).epsilon(1e-3));
}

TEST_CASE("spectral centroid of a pure 1 Hz window sits near 1 Hz") {
    const double fs = 64.0;
    std::vector<float> x(static_cast<std::size_t>(30 * fs));
    std::vector<std::size_t> peaks;
    for (std::size_t i = 0; i < x.size(); ++i)
        x[i] = static_cast<float>(std::sin(2.0 * M_PI * 1.0 * i / fs));
    for (int k = 0; k < 30; ++k)
        peaks.push_back(static_cast<std::size_t>((0.25 + k) * fs));
    auto f = mor_features(x, fs, peaks);
    const double centroid = f[name_index(mor_feature_names(), "spectral_centroid")];
    CHECK(centroid == doctest::Approx(1.0).epsilon(0.15));
}

TEST_CASE("beatless window yields an all-NaN morphology row") {
    std::vector<float> x(1000, 0.0f);
    auto f = mor_features(x, 64.0, {});
    for (double v : f) CHECK(std::isnan(v));
}

TEST_CASE("windowed features have the published width and edge-clipped context") {
    SynthProfile p;
    p.windows = 8;
    Record r = synthesize_record(13, p);
    auto banded = bandpass_for_beats(r);
    auto beats = ibi_quality(detect_beats(banded));
    auto fm = windowed_features(r, banded, beats);
    CHECK(fm.rows == 8);
    CHECK(fm.cols == 126);
    CHECK(fm.names.size() == 126);
    CHECK(fm.names.back() == "demo_sex");
    CHECK(fm.mask.size() == 8);

    // Demographics are constant across rows: age/100 then sex.
    for (std::size_t l = 0; l < fm.rows; ++l) {
        CHECK(fm.at(l, 124) == doctest::Approx(r.demographics.values[0] / 100.0));
        CHECK(fm.at(l, 125) == doctest::Approx(r.demographics.values[1]));
    }
}

TEST_CASE("context set equals window set for a stationary record interior") {
    SynthProfile p;
    p.windows = 10;
    p.noise_sd = 0.0;
    for (auto& st : p.stages) {
        st.rate_bpm = 60.0;
        st.rate_sd_bpm = 0.0;
        st.resp_depth = 0.1;
    }
    Record r = synthesize_record(2, p);
    auto banded = bandpass_for_beats(r);
    auto beats = ibi_quality(detect_beats(banded));
    auto fm = windowed_features(r, banded, beats);
    const auto& names = prv_feature_names();
    const std::size_t a_avnn = name_index(fm.names, "A_prv_" + names[0]);
    const std::size_t b_avnn = name_index(fm.names, "B_prv_" + names[0]);
    for (std::size_t l = 3; l < 7; ++l)
        CHECK(fm.at(l, a_avnn) == doctest::Approx(fm.at(l, b_avnn)).epsilon(0.02));
}

TEST_CASE("per-patient standardization: z-scored, constants zeroed, NaNs imputed") {
    FeatureMatrix fm;
    fm.rows = 10;
    fm.cols = 126;
    fm.values.assign(fm.rows * fm.cols, 0.0);
    fm.mask.assign(fm.rows, true);
    for (std::size_t c = 0; c < fm.cols; ++c) fm.names.push_back("f" + std::to_string(c));
    fm.names[124] = "demo_age";
    fm.names[125] = "demo_sex";
    for (std::size_t l = 0; l < fm.rows; ++l) {
        fm.at(l, 0) = static_cast<double>(l) * 3.0 + 1.0;  // varying
        fm.at(l, 1) = 7.0;                                  // constant
        fm.at(l, 2) = static_cast<double>(l);               // will get a NaN
        fm.at(l, 124) = 0.61;
        fm.at(l, 125) = 1.0;
    }
    fm.at(4, 2) = std::nan("");

    auto out = standardize_per_patient(fm);
    double mean = 0, var = 0;
    for (std::size_t l = 0; l < out.rows; ++l) mean += out.at(l, 0);
    mean /= static_cast<double>(out.rows);
    for (std::size_t l = 0; l < out.rows; ++l)
        var += (out.at(l, 0) - mean) * (out.at(l, 0) - mean);
    var /= static_cast<double>(out.rows);
    CHECK(std::abs(mean) < 1e-6);
    CHECK(std::abs(std::sqrt(var) - 1.0) < 1e-6);

    for (std::size_t l = 0; l < out.rows; ++l) CHECK(out.at(l, 1) == 0.0);
    for (std::size_t l = 0; l < out.rows; ++l) CHECK(std::isfinite(out.at(l, 2)));
    // Demographic columns pass through untouched.
    for (std::size_t l = 0; l < out.rows; ++l) {
        CHECK(out.at(l, 124) == 0.61);
        CHECK(out.at(l, 125) == 1.0);
    }
}

TEST_CASE("schema hash is stable and order-sensitive") {
    FeatureMatrix a;
    a.names = {"x", "y", "z"};
    FeatureMatrix b;
    b.names = {"x", "y", "z"};
    FeatureMatrix c;
    c.names = {"y", "x", "z"};
    CHECK(feature_schema_hash(a) == feature_schema_hash(b));
    CHECK(feature_schema_hash(a) != feature_schema_hash(c));
}

TEST_CASE("feature CSV round trip") {
    SynthProfile p;
    p.windows = 4;
    Record r = synthesize_record(17, p);
    auto banded = bandpass_for_beats(r);
    auto beats = ibi_quality(detect_beats(banded));
    auto fm = standardize_per_patient(windowed_features(r, banded, beats));

    auto dir = std::filesystem::temp_directory_path() / "sleepkit_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "features_rt.csv").string();
    write_feature_csv(fm, path);
    auto back = read_feature_csv(path);
    CHECK(back.rows == fm.rows);
    CHECK(back.cols == fm.cols);
    CHECK(back.names == fm.names);
    CHECK(feature_schema_hash(back) == feature_schema_hash(fm));
    for (std::size_t i = 0; i < fm.values.size(); ++i)
        CHECK(back.values[i] == doctest::Approx(fm.values[i]).epsilon(1e-9));
}
