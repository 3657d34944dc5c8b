#include <cstdio>
#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "sleepkit/records.hpp"

using namespace sleepkit;
namespace fs = std::filesystem;

namespace {
fs::path tmpdir(const char* name) {
    auto p = fs::temp_directory_path() / "sleepkit_test" / name;
    fs::remove_all(p);
    fs::create_directories(p);
    return p;
}
}  // namespace

TEST_CASE("label mapping collapses R&K and AASM to four classes") {
    // R&K: W, S1, S2, S3, S4, REM
    auto h = map_labels({0, 1, 2, 3, 4, 5}, LabelScheme::RK);
    REQUIRE(h.size() == 6);
    CHECK(h.stages[0] == SleepStage::Wake);
    CHECK(h.stages[1] == SleepStage::Light);
    CHECK(h.stages[2] == SleepStage::Light);
    CHECK(h.stages[3] == SleepStage::Deep);
    CHECK(h.stages[4] == SleepStage::Deep);
    CHECK(h.stages[5] == SleepStage::REM);

    auto a = map_labels({3}, LabelScheme::AASM);
    CHECK(a.stages[0] == SleepStage::Deep);  // N3

    auto pad = map_labels({9}, LabelScheme::RK);
    CHECK(pad.stages[0] == SleepStage::Pad);
}

TEST_CASE("unknown label values are rejected with the offending window named") {
    CHECK_THROWS_AS(map_labels({0, 7}, LabelScheme::AASM), DataError);
    try {
        map_labels({0, 7}, LabelScheme::AASM);
    } catch (const DataError& e) {
        CHECK(std::string(e.what()).find("1") != std::string::npos);
    }
}

TEST_CASE("normalize_duration pads short and truncates long records") {
    Record r;
    r.id = "t";
    r.fs = 2.0;

    SUBCASE("9 h of a 10 h target gets a Pad suffix") {
        const int have = 1080;  // 9 h of 30 s windows
        r.signal.assign(static_cast<std::size_t>(have * 30 * 2), 1.0f);
        r.hypnogram.stages.assign(have, SleepStage::Light);
        Record n = normalize_duration(r, 1200);
        CHECK(n.hypnogram.size() == 1200);
        CHECK(n.signal.size() == 1200u * 30 * 2);
        CHECK(n.hypnogram.stages[1079] == SleepStage::Light);
        CHECK(n.hypnogram.stages[1080] == SleepStage::Pad);
        CHECK(n.hypnogram.unpadded_size() == 1080);
        CHECK(n.signal.back() == 0.0f);  // zero-padded
    }
    SUBCASE("exact-length record is unchanged") {
        r.signal.assign(1200u * 60, 1.0f);
        r.hypnogram.stages.assign(1200, SleepStage::Wake);
        Record n = normalize_duration(r, 1200);
        CHECK(n.signal == r.signal);
        CHECK(n.hypnogram.stages == r.hypnogram.stages);
    }
    SUBCASE("11 h record keeps the first 1200 windows") {
        r.signal.assign(1320u * 60, 0.0f);
        r.signal[5] = 42.0f;
        r.hypnogram.stages.assign(1320, SleepStage::REM);
        Record n = normalize_duration(r, 1200);
        CHECK(n.hypnogram.size() == 1200);
        CHECK(n.signal.size() == 1200u * 60);
        CHECK(n.signal[5] == 42.0f);
    }
}

TEST_CASE("record save/load round trip in both wave formats") {
    auto dir = tmpdir("records_roundtrip");
    Record r;
    r.id = "rt";
    r.fs = 5.0;
    r.signal = {0.5f, -1.25f, 3.0f, 0.0f, 2.5f, -0.125f, 1.0f, 0.75f, -2.0f, 0.25f};
    r.hypnogram.stages = {SleepStage::Wake, SleepStage::Deep};
    r.demographics.values = {61.0, 1.0};
    r.groups["ahi_band"] = "low";

    for (auto fmt : {WaveFormat::CSV, WaveFormat::RAWF32}) {
        const auto path = (dir / (fmt == WaveFormat::CSV ? "r.csv" : "r.f32")).string();
        save_record(r, path, fmt);
        Record back = load_record(path, fmt);
        CHECK(back.id == "rt");
        CHECK(back.fs == 5.0);
        REQUIRE(back.signal.size() == r.signal.size());
        for (std::size_t i = 0; i < r.signal.size(); ++i)
            CHECK(back.signal[i] == doctest::Approx(r.signal[i]).epsilon(1e-6));
        CHECK(back.hypnogram.stages == r.hypnogram.stages);
        CHECK(back.demographics.values[0] == 61.0);
        CHECK(back.groups.at("ahi_band") == "low");
    }
}

TEST_CASE("sidecar sample-count mismatch is a data error") {
    auto dir = tmpdir("records_mismatch");
    Record r;
    r.id = "m";
    r.fs = 10.0;
    r.signal.assign(100, 1.0f);
    r.hypnogram.stages = {SleepStage::Wake};
    const auto path = (dir / "m.f32").string();
    save_record(r, path, WaveFormat::RAWF32);
    // Drop one sample from the wave file; the sidecar still declares 100.
    fs::resize_file(path, 99 * 4);
    CHECK_THROWS_AS(load_record(path, WaveFormat::RAWF32), DataError);
}

TEST_CASE("missing sidecar and malformed sidecar are data errors") {
    auto dir = tmpdir("records_badmeta");
    {
        std::ofstream wave(dir / "x.f32", std::ios::binary);
        wave << "\0\0\0\0";
    }
    CHECK_THROWS_AS(load_record((dir / "x.f32").string(), WaveFormat::RAWF32), DataError);
    {
        std::ofstream meta(dir / "x.meta.json");
        meta << "{not json";
    }
    CHECK_THROWS_AS(load_record((dir / "x.f32").string(), WaveFormat::RAWF32), DataError);
}

TEST_CASE("synthesizer is deterministic and honors its profile") {
    SynthProfile p;
    p.windows = 20;

    Record a = synthesize_record(11, p);
    Record b = synthesize_record(11, p);
    CHECK(a.signal == b.signal);
    CHECK(a.hypnogram.stages == b.hypnogram.stages);
    CHECK(a.true_beats == b.true_beats);

    Record c = synthesize_record(12, p);
    CHECK(a.signal != c.signal);

    CHECK(a.hypnogram.size() == 20);
    CHECK(a.signal.size() == static_cast<std::size_t>(20 * 30 * p.fs));
    for (auto s : a.hypnogram.stages) CHECK(s != SleepStage::Pad);
}

TEST_CASE("constant-rate noise-free profile yields metronomic IBIs") {
    SynthProfile p;
    p.windows = 4;
    p.noise_sd = 0.0;
    for (auto& st : p.stages) {
        st.rate_bpm = 60.0;
        st.rate_sd_bpm = 0.0;
    }
    Record r = synthesize_record(5, p);
    REQUIRE(r.true_beats.size() > 10);
    for (std::size_t i = 1; i < r.true_beats.size(); ++i)
        CHECK(r.true_beats[i] - r.true_beats[i - 1] == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("synthesizer rejects invalid profiles") {
    SynthProfile p;
    p.windows = 0;
    CHECK_THROWS_AS(synthesize_record(1, p), ConfigError);
    p.windows = 4;
    p.stages[2].rate_bpm = -5.0;
    CHECK_THROWS_AS(synthesize_record(1, p), ConfigError);
}
