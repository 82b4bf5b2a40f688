#include "vclean/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "vclean/errors.hpp"
#include "vclean/format.hpp"

namespace vclean {

double snr_db(std::span<const double> clean, std::span<const double> estimate) {
    if (clean.size() != estimate.size()) {
        throw ShapeError("snr_db: clean and estimate lengths differ");
    }
    if (clean.empty()) throw DataError("snr_db: empty input");
    double signal_energy = 0.0;
    double error_energy = 0.0;
    for (std::size_t i = 0; i < clean.size(); ++i) {
        signal_energy += clean[i] * clean[i];
        const double e = clean[i] - estimate[i];
        error_energy += e * e;
    }
    if (signal_energy == 0.0) throw DataError("snr_db: reference signal has zero energy");
    if (error_energy == 0.0) return kSnrCapDb;
    return 10.0 * std::log10(signal_energy / error_energy);
}

double mean_of(std::span<const double> values) {
    double sum = 0.0;
    for (double v : values) sum += v;
    return sum / static_cast<double>(values.size());
}

double median_of(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    const std::size_t n = values.size();
    if (n % 2 == 1) return values[n / 2];
    return 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

namespace {

ColumnStats stats_of(const std::vector<double>& values) {
    return {mean_of(values), median_of(values)};
}

void recompute_aggregates(DenoiseReport& report) {
    std::vector<double> noisy, denoised, improvement, mse;
    for (const auto& row : report.rows) {
        noisy.push_back(row.snr_noisy_db);
        denoised.push_back(row.snr_denoised_db);
        improvement.push_back(row.improvement_db);
        mse.push_back(row.mse);
    }
    report.snr_noisy = stats_of(noisy);
    report.snr_denoised = stats_of(denoised);
    report.improvement = stats_of(improvement);
    report.mse = stats_of(mse);
}

}  // namespace

DenoiseReport make_report(const std::vector<std::vector<double>>& clean_windows,
                          const std::vector<std::vector<double>>& noisy_windows,
                          const std::vector<std::vector<double>>& denoised_windows,
                          const std::string& method, const std::string& noise) {
    if (clean_windows.size() != noisy_windows.size() ||
        clean_windows.size() != denoised_windows.size()) {
        throw DataError("make_report: window lists are not aligned");
    }
    if (clean_windows.empty()) throw DataError("make_report: no windows");

    DenoiseReport report;
    report.method = method;
    report.noise = noise;
    for (std::size_t i = 0; i < clean_windows.size(); ++i) {
        const auto& c = clean_windows[i];
        if (noisy_windows[i].size() != c.size() || denoised_windows[i].size() != c.size()) {
            throw DataError("make_report: window " + std::to_string(i) + " sizes differ");
        }
        ReportRow row;
        row.window_idx = i;
        row.snr_noisy_db = snr_db(c, noisy_windows[i]);
        row.snr_denoised_db = snr_db(c, denoised_windows[i]);
        row.improvement_db = row.snr_denoised_db - row.snr_noisy_db;
        double err = 0.0;
        for (std::size_t j = 0; j < c.size(); ++j) {
            const double d = denoised_windows[i][j] - c[j];
            err += d * d;
        }
        row.mse = err / static_cast<double>(c.size());
        report.rows.push_back(row);
    }
    recompute_aggregates(report);
    return report;
}

std::string report_to_csv(const DenoiseReport& report) {
    std::string out = "window_idx,snr_noisy_db,snr_denoised_db,improvement_db,mse\n";
    for (const auto& row : report.rows) {
        out += std::to_string(row.window_idx) + "," + format_double(row.snr_noisy_db) + "," +
               format_double(row.snr_denoised_db) + "," + format_double(row.improvement_db) +
               "," + format_double(row.mse) + "\n";
    }
    const auto agg = [&out](const char* name, const ColumnStats& s) {
        out += std::string("# mean_") + name + "=" + format_double(s.mean) + "\n";
        out += std::string("# median_") + name + "=" + format_double(s.median) + "\n";
    };
    agg("snr_noisy_db", report.snr_noisy);
    agg("snr_denoised_db", report.snr_denoised);
    agg("improvement_db", report.improvement);
    agg("mse", report.mse);
    out += "# method=" + report.method + "\n";
    out += "# noise=" + report.noise + "\n";
    return out;
}

namespace {

std::vector<std::string> split_fields(const std::string& line, char sep) {
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, sep)) fields.push_back(field);
    return fields;
}

}  // namespace

DenoiseReport report_from_csv(const std::string& text) {
    DenoiseReport report;
    std::stringstream ss(text);
    std::string line;
    bool saw_header = false;
    while (std::getline(ss, line)) {
        if (line.empty()) continue;
        if (line[0] == '#') {
            const auto body = trim(std::string_view(line).substr(1));
            const auto eq = body.find('=');
            if (eq == std::string_view::npos) continue;
            const std::string key(trim(body.substr(0, eq)));
            const std::string value(trim(body.substr(eq + 1)));
            if (key == "method") {
                report.method = value;
            } else if (key == "noise") {
                report.noise = value;
            } else if (key == "mean_snr_noisy_db") {
                report.snr_noisy.mean = parse_double(value);
            } else if (key == "median_snr_noisy_db") {
                report.snr_noisy.median = parse_double(value);
            } else if (key == "mean_snr_denoised_db") {
                report.snr_denoised.mean = parse_double(value);
            } else if (key == "median_snr_denoised_db") {
                report.snr_denoised.median = parse_double(value);
            } else if (key == "mean_improvement_db") {
                report.improvement.mean = parse_double(value);
            } else if (key == "median_improvement_db") {
                report.improvement.median = parse_double(value);
            } else if (key == "mean_mse") {
                report.mse.mean = parse_double(value);
            } else if (key == "median_mse") {
                report.mse.median = parse_double(value);
            }
            continue;
        }
        if (!saw_header) {
            if (line != "window_idx,snr_noisy_db,snr_denoised_db,improvement_db,mse") {
                throw DataError("report csv: unexpected header '" + line + "'");
            }
            saw_header = true;
            continue;
        }
        const auto fields = split_fields(line, ',');
        if (fields.size() != 5) throw DataError("report csv: bad row '" + line + "'");
        ReportRow row;
        row.window_idx = static_cast<std::size_t>(parse_int(fields[0]));
        row.snr_noisy_db = parse_double(fields[1]);
        row.snr_denoised_db = parse_double(fields[2]);
        row.improvement_db = parse_double(fields[3]);
        row.mse = parse_double(fields[4]);
        report.rows.push_back(row);
    }
    if (!saw_header) throw DataError("report csv: missing header");
    return report;
}

}  // namespace vclean
