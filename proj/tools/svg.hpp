#pragma once

// Minimal deterministic SVG line charts.

#include <string>
#include <vector>

namespace holodisc::cli {

struct Series {
    std::string label;
    std::vector<double> x;
    std::vector<double> y;
};

struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    bool log_y = false;
    std::vector<Series> series;
};

/// Fixed-precision output: identical input gives identical bytes.
std::string render_svg(const Chart& chart);

}  // namespace holodisc::cli
