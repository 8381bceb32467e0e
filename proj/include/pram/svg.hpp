#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace pram::svg {

struct Series {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;  // NaN breaks the line
};

struct ChartOptions {
    std::string title;
    std::string x_label = "iteration";
    std::string y_label = "proportion";
    int width = 760;
    int height = 440;
    std::optional<double> y_min;
    std::optional<double> y_max;
};

/// Self-contained SVG line chart with axes, ticks and a legend.
std::string line_chart(std::span<const Series> series, const ChartOptions& options = {});

/// Tick positions covering [lo, hi] at a 1/2/5 x 10^k spacing.
std::vector<double> nice_ticks(double lo, double hi, int target_count = 6);

}  // namespace pram::svg
