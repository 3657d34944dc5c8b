#include "sleepkit/report.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace sleepkit {

namespace {

std::string fmt(double v, int prec = 3) {
    std::ostringstream os;
    os.precision(prec);
    os << std::fixed << v;
    return os.str();
}

constexpr const char* kStageColor[4] = {"#d9822b", "#4c86c6", "#274b72", "#7b52a1"};
constexpr const char* kStageName[4] = {"Wake", "Light", "Deep", "REM"};

void draw_strip(std::ostringstream& svg, const Hypnogram& h, double x0, double y0, double w,
                double row_h) {
    const double dx = w / static_cast<double>(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) {
        const char* color = h.stages[i] == SleepStage::Pad
                                ? "#dddddd"
                                : kStageColor[static_cast<int>(h.stages[i])];
        svg << "<rect x='" << fmt(x0 + dx * static_cast<double>(i), 2) << "' y='" << fmt(y0, 2)
            << "' width='" << fmt(dx + 0.05, 2) << "' height='" << fmt(row_h, 2) << "' fill='"
            << color << "'/>\n";
    }
}

}  // namespace

std::string scatter_svg(const std::string& title, const std::vector<double>& truth,
                        const std::vector<double>& pred) {
    if (truth.size() != pred.size() || truth.empty())
        throw DataError("scatter_svg: empty or mismatched series");
    const double W = 420, H = 420, M = 50;
    double lo = truth[0], hi = truth[0];
    for (std::size_t i = 0; i < truth.size(); ++i) {
        lo = std::min({lo, truth[i], pred[i]});
        hi = std::max({hi, truth[i], pred[i]});
    }
    if (hi <= lo) hi = lo + 1.0;
    const double pad = 0.05 * (hi - lo);
    lo -= pad;
    hi += pad;
    auto px = [&](double v) { return M + (v - lo) / (hi - lo) * (W - 2 * M); };
    auto py = [&](double v) { return H - M - (v - lo) / (hi - lo) * (H - 2 * M); };

    const auto agree = metric_agreement(truth, pred);
    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
        << "' font-family='sans-serif' font-size='12'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n"
        << "<text x='" << W / 2 << "' y='20' text-anchor='middle' font-size='14'>" << title
        << "</text>\n"
        << "<line x1='" << px(lo) << "' y1='" << py(lo) << "' x2='" << px(hi) << "' y2='"
        << py(hi) << "' stroke='#bbbbbb' stroke-dasharray='4 3'/>\n"
        << "<line x1='" << M << "' y1='" << H - M << "' x2='" << W - M << "' y2='" << H - M
        << "' stroke='black'/>\n"
        << "<line x1='" << M << "' y1='" << H - M << "' x2='" << M << "' y2='" << M
        << "' stroke='black'/>\n";
    for (int t = 0; t <= 4; ++t) {
        const double v = lo + (hi - lo) * t / 4.0;
        svg << "<text x='" << fmt(px(v), 1) << "' y='" << H - M + 16
            << "' text-anchor='middle'>" << fmt(v, 1) << "</text>\n"
            << "<text x='" << M - 6 << "' y='" << fmt(py(v) + 4, 1) << "' text-anchor='end'>"
            << fmt(v, 1) << "</text>\n";
    }
    for (std::size_t i = 0; i < truth.size(); ++i)
        svg << "<circle cx='" << fmt(px(truth[i]), 1) << "' cy='" << fmt(py(pred[i]), 1)
            << "' r='4' fill='#4c86c6' fill-opacity='0.7'/>\n";
    svg << "<text x='" << M + 4 << "' y='" << M + 14 << "'>MSE " << fmt(agree.mse) << ", R&#178; "
        << fmt(agree.r2) << "</text>\n"
        << "<text x='" << W / 2 << "' y='" << H - 10 << "' text-anchor='middle'>ground truth"
        << "</text>\n"
        << "<text x='14' y='" << H / 2 << "' text-anchor='middle' transform='rotate(-90 14 "
        << H / 2 << ")'>predicted</text>\n</svg>\n";
    return svg.str();
}

std::string hypnogram_svg(const std::string& title, const Hypnogram& truth, const Hypnogram& pred) {
    if (truth.size() == 0) throw DataError("hypnogram_svg: empty hypnogram");
    const double W = 900, row_h = 28, gap = 8;
    const bool two = pred.size() > 0;
    if (two && pred.size() != truth.size())
        throw DataError("hypnogram_svg: truth/prediction length mismatch");
    const double H = 60 + row_h + (two ? row_h + gap : 0) + 30;
    std::ostringstream svg;
    svg << "<svg xmlns='http://www.w3.org/2000/svg' width='" << W << "' height='" << H
        << "' font-family='sans-serif' font-size='12'>\n"
        << "<rect width='100%' height='100%' fill='white'/>\n"
        << "<text x='10' y='18' font-size='14'>" << title << "</text>\n";
    double y = 34;
    svg << "<text x='10' y='" << y + row_h / 2 + 4 << "'>truth</text>\n";
    draw_strip(svg, truth, 70, y, W - 90, row_h);
    if (two) {
        y += row_h + gap;
        svg << "<text x='10' y='" << y + row_h / 2 + 4 << "'>pred</text>\n";
        draw_strip(svg, pred, 70, y, W - 90, row_h);
    }
    y += row_h + 20;
    double x = 70;
    for (int c = 0; c < 4; ++c) {
        svg << "<rect x='" << x << "' y='" << y << "' width='14' height='14' fill='"
            << kStageColor[c] << "'/>\n<text x='" << x + 18 << "' y='" << y + 12 << "'>"
            << kStageName[c] << "</text>\n";
        x += 90;
    }
    svg << "</svg>\n";
    return svg.str();
}

void write_text_file(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("write_text_file: cannot open " + path);
    out << text;
    if (!out) throw DataError("write_text_file: write failure on " + path);
}

void write_report(const std::string& out_dir, const ReportInputs& in) {
    if (in.ids.size() != in.truth.size() || in.truth.size() != in.pred.size() || in.ids.empty())
        throw DataError("write_report: empty or mismatched inputs");
    std::filesystem::create_directories(out_dir);

    struct MetricCol {
        const char* name;
        double SleepMetrics::*field;
    };
    const MetricCol cols[] = {
        {"total_sleep_time_hours", &SleepMetrics::tst_hours},
        {"sleep_efficiency_percent", &SleepMetrics::se_percent},
        {"fraction_light_percent", &SleepMetrics::fr_light},
        {"fraction_deep_percent", &SleepMetrics::fr_deep},
        {"fraction_rem_percent", &SleepMetrics::fr_rem},
        {"transitions_per_hour", &SleepMetrics::transitions_per_hour},
    };

    std::ostringstream html;
    html << "<html><head><title>sleepkit report</title></head><body>\n"
         << "<h1>sleepkit report</h1>\n<h2>Summary metrics</h2>\n";
    for (const auto& col : cols) {
        std::vector<double> t, p;
        for (std::size_t i = 0; i < in.ids.size(); ++i) {
            t.push_back(sleep_metrics(in.truth[i]).*col.field);
            p.push_back(sleep_metrics(in.pred[i]).*col.field);
        }
        const std::string file = std::string("scatter_") + col.name + ".svg";
        write_text_file(out_dir + "/" + file, scatter_svg(col.name, t, p));
        html << "<img src='" << file << "'/>\n";
    }
    html << "<h2>Hypnograms</h2>\n";
    for (std::size_t i = 0; i < in.ids.size(); ++i) {
        const std::string file = "hypnogram_" + in.ids[i] + ".svg";
        write_text_file(out_dir + "/" + file, hypnogram_svg(in.ids[i], in.truth[i], in.pred[i]));
        html << "<img src='" << file << "'/><br/>\n";
    }
    html << "</body></html>\n";
    write_text_file(out_dir + "/index.html", html.str());
}

}  // namespace sleepkit
