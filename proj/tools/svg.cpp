#include "svg.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace holodisc::cli {

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 80, kRight = 20, kTop = 40, kBottom = 60;
const char* const kColours[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

std::string escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

struct Range {
    double lo = std::numeric_limits<double>::infinity();
    double hi = -std::numeric_limits<double>::infinity();
    void add(double v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    void pad() {
        if (!std::isfinite(lo)) lo = 0, hi = 1;
        if (hi - lo < 1e-12 * std::max(1.0, std::abs(hi))) {
            const double d = std::max(1e-3, 0.05 * std::abs(hi));
            lo -= d;
            hi += d;
        }
    }
};

}  // namespace

std::string render_svg(const Chart& chart) {
    auto ty = [&](double y) { return chart.log_y ? std::log10(y) : y; };
    Range xr, yr;
    for (const auto& s : chart.series) {
        if (s.x.size() != s.y.size()) throw std::invalid_argument("render_svg: series length mismatch");
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (chart.log_y && !(s.y[i] > 0.0)) continue;
            xr.add(s.x[i]);
            yr.add(ty(s.y[i]));
        }
    }
    xr.pad();
    yr.pad();
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
    auto py = [&](double y) { return kTop + (1.0 - (y - yr.lo) / (yr.hi - yr.lo)) * ph; };

    std::string out;
    out += fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{:.0f}\" height=\"{:.0f}\" viewBox=\"0 0 {:.0f} {:.0f}\">\n",
        kWidth, kHeight, kWidth, kHeight);
    out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    out += fmt::format("<text x=\"{:.1f}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" text-anchor=\"middle\">{}</text>\n",
                       kWidth / 2, escape(chart.title));
    out += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"none\" stroke=\"black\"/>\n",
                       kLeft, kTop, pw, ph);
    for (int i = 0; i <= 4; ++i) {
        const double xv = xr.lo + (xr.hi - xr.lo) * i / 4.0;
        const double yv = yr.lo + (yr.hi - yr.lo) * i / 4.0;
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">{:.4g}</text>\n",
                           px(xv), kTop + ph + 16, xv);
        const std::string ylab = chart.log_y ? fmt::format("1e{:.2g}", yv) : fmt::format("{:.4g}", yv);
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">{}</text>\n",
                           kLeft - 6, py(yv) + 4, ylab);
        out += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#dddddd\"/>\n",
                           kLeft, py(yv), kLeft + pw, py(yv));
    }
    out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">{}</text>\n",
                       kLeft + pw / 2, kHeight - 18, escape(chart.x_label));
    out += fmt::format("<text x=\"16\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1f})\">{}</text>\n",
                       kTop + ph / 2, kTop + ph / 2, escape(chart.y_label + (chart.log_y ? " (log10)" : "")));

    for (std::size_t k = 0; k < chart.series.size(); ++k) {
        const auto& s = chart.series[k];
        const char* colour = kColours[k % std::size(kColours)];
        std::string points;
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (chart.log_y && !(s.y[i] > 0.0)) continue;
            points += fmt::format("{}{:.2f},{:.2f}", points.empty() ? "" : " ", px(s.x[i]), py(ty(s.y[i])));
        }
        out += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", colour, points);
        for (std::size_t i = 0; i < s.x.size(); ++i) {
            if (chart.log_y && !(s.y[i] > 0.0)) continue;
            out += fmt::format("<circle cx=\"{:.2f}\" cy=\"{:.2f}\" r=\"2.5\" fill=\"{}\"/>\n", px(s.x[i]), py(ty(s.y[i])), colour);
        }
        out += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" fill=\"{}\">{}</text>\n",
                           kLeft + 10, kTop + 16 + 14.0 * double(k), colour, escape(s.label));
    }
    out += "</svg>\n";
    return out;
}

}  // namespace holodisc::cli
