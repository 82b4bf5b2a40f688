#include "vclean/signal.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "vclean/errors.hpp"
#include "vclean/matrix.hpp"
#include "vclean/rng.hpp"

namespace vclean {

void Signal::validate() const {
    if (samples.empty()) throw DataError("Signal: no samples");
    if (!(sample_rate > 0.0)) throw DataError("Signal: sample_rate must be positive");
    check_finite(samples, "Signal samples");
}

void SignalSpec::validate() const {
    if (!(sample_rate > 0.0)) throw DataError("SignalSpec: sample_rate must be positive");
    for (const auto& c : components) {
        if (c.frequency >= sample_rate / 2.0) {
            throw DataError("SignalSpec: component at " + std::to_string(c.frequency) +
                            " Hz violates the Nyquist limit of " +
                            std::to_string(sample_rate / 2.0) + " Hz");
        }
        if (c.frequency < 0.0) throw DataError("SignalSpec: negative frequency");
    }
    if (std::llround(duration * sample_rate) < 1) {
        throw DataError("SignalSpec: duration * sample_rate yields an empty signal");
    }
}

void NoiseSpec::validate() const {
    if (!(variance >= 0.0)) throw DataError("NoiseSpec: variance must be >= 0");
}

Signal synth_clean(const SignalSpec& spec) {
    spec.validate();
    const auto n = static_cast<std::size_t>(std::llround(spec.duration * spec.sample_rate));
    Signal out;
    out.sample_rate = spec.sample_rate;
    out.label = "clean";
    out.samples.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / spec.sample_rate;
        double v = 0.0;
        for (const auto& c : spec.components) {
            v += c.amplitude * std::sin(2.0 * std::numbers::pi * c.frequency * t + c.phase);
        }
        out.samples[i] = v;
    }
    return out;
}

Signal add_gaussian_noise(const Signal& signal, const NoiseSpec& spec) {
    signal.validate();
    spec.validate();
    if (spec.kind != NoiseKind::Gaussian) {
        throw DataError("add_gaussian_noise: NoiseSpec kind is not Gaussian");
    }
    Signal out = signal;
    out.label = signal.label + "+gaussian";
    if (spec.variance == 0.0) return out;
    Rng rng(spec.seed);
    const double sigma = std::sqrt(spec.variance);
    for (double& v : out.samples) v += sigma * rng.normal();
    return out;
}

Signal add_brownian_noise(const Signal& signal, const NoiseSpec& spec) {
    signal.validate();
    spec.validate();
    if (spec.kind != NoiseKind::Brownian) {
        throw DataError("add_brownian_noise: NoiseSpec kind is not Brownian");
    }
    Signal out = signal;
    out.label = signal.label + "+brownian";
    if (spec.variance == 0.0) return out;
    Rng rng(spec.seed);
    const double sigma = std::sqrt(spec.variance);
    double walk = 0.0;
    for (double& v : out.samples) {
        walk += sigma * rng.normal();
        v += walk;
    }
    return out;
}

Signal add_noise(const Signal& signal, const NoiseSpec& spec) {
    return spec.kind == NoiseKind::Gaussian ? add_gaussian_noise(signal, spec)
                                            : add_brownian_noise(signal, spec);
}

std::vector<std::vector<double>> segment(const Signal& signal, int window_len, int hop) {
    signal.validate();
    if (window_len < 1) throw DataError("segment: window_len must be >= 1");
    if (hop < 1) throw DataError("segment: hop must be >= 1");
    const auto n = signal.samples.size();
    if (static_cast<std::size_t>(window_len) > n) {
        throw DataError("segment: window_len " + std::to_string(window_len) +
                        " exceeds signal length " + std::to_string(n));
    }
    std::vector<std::vector<double>> windows;
    for (std::size_t start = 0; start + window_len <= n; start += hop) {
        windows.emplace_back(signal.samples.begin() + static_cast<std::ptrdiff_t>(start),
                             signal.samples.begin() + static_cast<std::ptrdiff_t>(start) +
                                 window_len);
    }
    return windows;
}

std::pair<std::vector<double>, NormStats> normalize_window(const std::vector<double>& window) {
    if (window.empty()) throw DataError("normalize_window: empty window");
    const auto n = static_cast<double>(window.size());
    double mean = 0.0;
    for (double v : window) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : window) var += (v - mean) * (v - mean);
    var /= n;
    NormStats stats{mean, std::sqrt(var)};
    const double denom = std::max(stats.stddev, kStdFloor);
    std::vector<double> normalized(window.size());
    for (std::size_t i = 0; i < window.size(); ++i) normalized[i] = (window[i] - mean) / denom;
    return {std::move(normalized), stats};
}

std::vector<double> denormalize_window(const std::vector<double>& normalized,
                                       const NormStats& stats) {
    const double scale = std::max(stats.stddev, kStdFloor);
    std::vector<double> window(normalized.size());
    for (std::size_t i = 0; i < normalized.size(); ++i) {
        window[i] = normalized[i] * scale + stats.mean;
    }
    return window;
}

WindowedDataset build_dataset(const Signal& clean, const NoiseSpec& noise, int window_len,
                              int hop) {
    const Signal noisy = add_noise(clean, noise);
    const auto clean_windows = segment(clean, window_len, hop);
    const auto noisy_windows = segment(noisy, window_len, hop);

    WindowedDataset ds;
    ds.window_len = window_len;
    ds.label = std::string(noise.kind == NoiseKind::Gaussian ? "gaussian" : "brownian") +
               " variance=" + std::to_string(noise.variance) +
               " seed=" + std::to_string(noise.seed);
    ds.pairs.reserve(noisy_windows.size());
    for (std::size_t i = 0; i < noisy_windows.size(); ++i) {
        auto [noisy_norm, stats] = normalize_window(noisy_windows[i]);
        const double denom = std::max(stats.stddev, kStdFloor);
        std::vector<double> clean_norm(clean_windows[i].size());
        for (std::size_t j = 0; j < clean_norm.size(); ++j) {
            clean_norm[j] = (clean_windows[i][j] - stats.mean) / denom;
        }
        ds.pairs.push_back({std::move(noisy_norm), std::move(clean_norm), stats});
    }
    return ds;
}

}  // namespace vclean
