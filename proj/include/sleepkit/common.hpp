#pragma once

#include <stdexcept>
#include <string>

namespace sleepkit {

// Error categories map to CLI exit codes: data 1, config 2, internal 3.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& msg) : std::runtime_error(msg) {}
};

struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

struct InternalError : std::runtime_error {
    explicit InternalError(const std::string& msg) : std::runtime_error(msg) {}
};

// Number of 30 s windows in a fully normalized 10 h record.
inline constexpr int kDefaultWindows = 1200;
inline constexpr double kWindowSeconds = 30.0;

// WAV sampling rate: 1024 samples per 30 s window.
inline constexpr double kWavRate = 1024.0 / 30.0;

// Pulse-rate series: 64 samples per 30 s window.
inline constexpr double kRateSeriesRate = 64.0 / 30.0;

}  // namespace sleepkit
