#pragma once

#include <span>
#include <string>
#include <vector>

namespace vclean {

// Cap returned when the error energy is exactly zero, so SNR stays finite
// and orderable.
inline constexpr double kSnrCapDb = 300.0;

// 10 * log10(sum clean^2 / sum (clean - estimate)^2).
// Throws DataError on length mismatch or an all-zero reference.
double snr_db(std::span<const double> clean, std::span<const double> estimate);

struct ReportRow {
    std::size_t window_idx = 0;
    double snr_noisy_db = 0.0;
    double snr_denoised_db = 0.0;
    double improvement_db = 0.0;  // snr_denoised_db - snr_noisy_db
    double mse = 0.0;             // denoised vs clean
};

struct ColumnStats {
    double mean = 0.0;
    double median = 0.0;
};

// Per-window SNR/MSE rows plus mean/median aggregates, all computed in the
// de-normalized (physical amplitude) space.
struct DenoiseReport {
    std::string method;  // "AR" or "Transformer"
    std::string noise;   // free-text noise descriptor
    std::vector<ReportRow> rows;
    ColumnStats snr_noisy;
    ColumnStats snr_denoised;
    ColumnStats improvement;
    ColumnStats mse;
};

// Builds rows and aggregates from aligned window triples.
// Throws DataError when the three lists do not align.
DenoiseReport make_report(const std::vector<std::vector<double>>& clean_windows,
                          const std::vector<std::vector<double>>& noisy_windows,
                          const std::vector<std::vector<double>>& denoised_windows,
                          const std::string& method, const std::string& noise);

// CSV with header window_idx,snr_noisy_db,snr_denoised_db,improvement_db,mse
// and a trailing '#'-prefixed aggregate block. Numbers round-trip exactly.
std::string report_to_csv(const DenoiseReport& report);
DenoiseReport report_from_csv(const std::string& text);

double mean_of(std::span<const double> values);
double median_of(std::vector<double> values);  // by value: sorts a copy

}  // namespace vclean
