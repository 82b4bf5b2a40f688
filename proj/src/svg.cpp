#include "vclean/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "vclean/errors.hpp"

namespace vclean {

namespace {

constexpr double kWidth = 960.0;
constexpr double kHeight = 360.0;
constexpr double kMarginLeft = 60.0;
constexpr double kMarginRight = 170.0;
constexpr double kMarginTop = 40.0;
constexpr double kMarginBottom = 40.0;

const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                          "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

std::string coord(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return buf;
}

std::string escape_xml(const std::string& text) {
    std::string out;
    for (char c : text) {
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

}  // namespace

std::vector<PlotSeries> table_series(const CsvTable& table, const std::string& prefix) {
    if (table.columns.empty()) throw DataError("plot: table has no columns");
    if (table.row_count() == 0) throw DataError("plot: table has no rows");
    std::vector<PlotSeries> series;
    for (std::size_t c = 1; c < table.columns.size(); ++c) {
        PlotSeries s;
        s.name = prefix.empty() ? table.header[c] : prefix + ":" + table.header[c];
        s.x = table.columns[0];
        s.y = table.columns[c];
        series.push_back(std::move(s));
    }
    if (series.empty()) throw DataError("plot: table has no series columns");
    return series;
}

std::string render_line_plot(const std::vector<PlotSeries>& series,
                             const std::string& title) {
    if (series.empty()) throw DataError("plot: no series");
    double x_min = series[0].x.front(), x_max = x_min;
    double y_min = series[0].y.front(), y_max = y_min;
    for (const auto& s : series) {
        if (s.x.size() != s.y.size() || s.x.empty()) {
            throw DataError("plot: series '" + s.name + "' is empty or misaligned");
        }
        for (double v : s.x) {
            x_min = std::min(x_min, v);
            x_max = std::max(x_max, v);
        }
        for (double v : s.y) {
            y_min = std::min(y_min, v);
            y_max = std::max(y_max, v);
        }
    }
    if (x_max == x_min) x_max = x_min + 1.0;
    if (y_max == y_min) y_max = y_min + 1.0;

    const double plot_w = kWidth - kMarginLeft - kMarginRight;
    const double plot_h = kHeight - kMarginTop - kMarginBottom;
    const auto sx = [&](double v) {
        return kMarginLeft + (v - x_min) / (x_max - x_min) * plot_w;
    };
    const auto sy = [&](double v) {
        return kMarginTop + plot_h - (v - y_min) / (y_max - y_min) * plot_h;
    };

    std::string svg;
    svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + coord(kWidth) +
           "\" height=\"" + coord(kHeight) + "\" viewBox=\"0 0 " + coord(kWidth) + " " +
           coord(kHeight) + "\">\n";
    svg += "<rect width=\"" + coord(kWidth) + "\" height=\"" + coord(kHeight) +
           "\" fill=\"white\"/>\n";
    svg += "<text x=\"" + coord(kMarginLeft) + "\" y=\"24\" font-family=\"sans-serif\" "
           "font-size=\"16\">" + escape_xml(title) + "</text>\n";

    // Axes.
    svg += "<line x1=\"" + coord(kMarginLeft) + "\" y1=\"" + coord(kMarginTop) +
           "\" x2=\"" + coord(kMarginLeft) + "\" y2=\"" + coord(kMarginTop + plot_h) +
           "\" stroke=\"#333333\"/>\n";
    svg += "<line x1=\"" + coord(kMarginLeft) + "\" y1=\"" + coord(kMarginTop + plot_h) +
           "\" x2=\"" + coord(kMarginLeft + plot_w) + "\" y2=\"" +
           coord(kMarginTop + plot_h) + "\" stroke=\"#333333\"/>\n";

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& s = series[i];
        const char* color = kPalette[i % (sizeof(kPalette) / sizeof(kPalette[0]))];
        const std::size_t stride =
            std::max<std::size_t>(1, (s.x.size() + kMaxPointsPerSeries - 1) /
                                         kMaxPointsPerSeries);
        std::string points;
        for (std::size_t j = 0; j < s.x.size(); j += stride) {
            points += coord(sx(s.x[j])) + "," + coord(sy(s.y[j])) + " ";
        }
        if (!points.empty()) points.pop_back();
        svg += "<polyline fill=\"none\" stroke=\"" + std::string(color) +
               "\" stroke-width=\"1\" points=\"" + points + "\"/>\n";

        // Legend swatch and label.
        const double ly = kMarginTop + 16.0 * static_cast<double>(i);
        svg += "<rect x=\"" + coord(kWidth - kMarginRight + 12.0) + "\" y=\"" +
               coord(ly) + "\" width=\"10\" height=\"10\" fill=\"" + color + "\"/>\n";
        svg += "<text class=\"legend-label\" x=\"" + coord(kWidth - kMarginRight + 28.0) +
               "\" y=\"" + coord(ly + 9.0) +
               "\" font-family=\"sans-serif\" font-size=\"12\">" + escape_xml(s.name) +
               "</text>\n";
    }
    svg += "</svg>\n";
    return svg;
}

}  // namespace vclean
