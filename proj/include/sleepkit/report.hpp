#pragma once

#include <string>
#include <vector>

#include "sleepkit/eval.hpp"
#include "sleepkit/records.hpp"

namespace sleepkit {

// Scatter of predicted vs. ground-truth values for one summary metric,
// with identity line and MSE/R^2 annotation. Returns the SVG text.
std::string scatter_svg(const std::string& title, const std::vector<double>& truth,
                        const std::vector<double>& pred);

// Stage-over-time strip; when pred is non-empty it is drawn under the truth
// row for side-by-side comparison.
std::string hypnogram_svg(const std::string& title, const Hypnogram& truth,
                          const Hypnogram& pred = {});

struct ReportInputs {
    std::vector<std::string> ids;
    std::vector<Hypnogram> truth;
    std::vector<Hypnogram> pred;
};

// Writes scatter SVGs for TST/SE/stage fractions/transition rate plus one
// hypnogram strip per record, and an index.html tying them together.
void write_report(const std::string& out_dir, const ReportInputs& in);

void write_text_file(const std::string& path, const std::string& text);

}  // namespace sleepkit
