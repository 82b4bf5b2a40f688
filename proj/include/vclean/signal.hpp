#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace vclean {

// Uniformly sampled scalar time series.
struct Signal {
    std::vector<double> samples;
    double sample_rate = 0.0;  // Hz
    std::string label;

    void validate() const;  // nonempty, finite, positive rate
};

// One sinusoidal component of a synthetic shaft-vibration signal.
struct SineComponent {
    double amplitude = 0.0;
    double frequency = 0.0;  // Hz
    double phase = 0.0;      // radians
};

struct SignalSpec {
    std::vector<SineComponent> components;
    double duration = 1.0;       // seconds
    double sample_rate = 1000.0; // Hz

    void validate() const;  // Nyquist guard, at least one sample
};

enum class NoiseKind { Gaussian, Brownian };

struct NoiseSpec {
    NoiseKind kind = NoiseKind::Gaussian;
    double variance = 0.0;  // Gaussian: per sample; Brownian: per increment
    std::uint64_t seed = 0;

    void validate() const;
};

// Per-window normalization statistics. `stddev` is the population standard
// deviation of the raw window; the floor is applied only when dividing.
struct NormStats {
    double mean = 0.0;
    double stddev = 0.0;
};

struct WindowPair {
    std::vector<double> noisy;  // normalized
    std::vector<double> clean;  // normalized with the noisy window's stats
    NormStats stats;
};

// Aligned (noisy, clean) window pairs, normalized and model-ready.
struct WindowedDataset {
    int window_len = 0;
    std::string label;  // free-text provenance (noise kind, variance, seed)
    std::vector<WindowPair> pairs;
};

inline constexpr double kStdFloor = 1e-12;

// x(t) = sum_i A_i * sin(2*pi*f_i*t + phi_i), sampled at spec.sample_rate
// for round(duration * sample_rate) samples. Deterministic.
Signal synth_clean(const SignalSpec& spec);

// output[i] = input[i] + n_i with n_i iid Normal(0, variance).
Signal add_gaussian_noise(const Signal& signal, const NoiseSpec& spec);

// output[i] = input[i] + B_i, B_0 = g_0, B_i = B_{i-1} + g_i,
// g_i iid Normal(0, variance).
Signal add_brownian_noise(const Signal& signal, const NoiseSpec& spec);

// Dispatches on spec.kind.
Signal add_noise(const Signal& signal, const NoiseSpec& spec);

// Contiguous slices starting at 0, hop, 2*hop, ...; a trailing slice shorter
// than window_len is dropped. Throws DataError if window_len > signal length.
std::vector<std::vector<double>> segment(const Signal& signal, int window_len, int hop);

// normalized = (x - mean) / max(stddev, kStdFloor). Constant windows map to
// all zeros; stats always store the raw (unfloored) standard deviation.
std::pair<std::vector<double>, NormStats> normalize_window(const std::vector<double>& window);

std::vector<double> denormalize_window(const std::vector<double>& normalized,
                                       const NormStats& stats);

// Corrupts `clean` with `noise`, segments both with the same grid, and
// normalizes each pair with the noisy window's statistics.
WindowedDataset build_dataset(const Signal& clean, const NoiseSpec& noise, int window_len,
                              int hop);

}  // namespace vclean
