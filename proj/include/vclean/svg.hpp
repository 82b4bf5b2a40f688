#pragma once

#include <string>
#include <vector>

#include "vclean/serialize.hpp"

namespace vclean {

// One plotted trace: x values shared per table, y values per series.
struct PlotSeries {
    std::string name;
    std::vector<double> x;
    std::vector<double> y;
};

// Deterministic static SVG line plot: fixed canvas, fixed palette, fixed
// coordinate formatting, one legend entry per series. Long series are
// stride-downsampled to at most kMaxPointsPerSeries points.
inline constexpr std::size_t kMaxPointsPerSeries = 2048;

std::string render_line_plot(const std::vector<PlotSeries>& series,
                             const std::string& title);

// All non-x columns of a table become series named after their header.
std::vector<PlotSeries> table_series(const CsvTable& table, const std::string& prefix);

}  // namespace vclean
