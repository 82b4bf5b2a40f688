#include <doctest.h>

#include <cmath>
#include <numbers>

#include "vclean/errors.hpp"
#include "vclean/rng.hpp"
#include "vclean/signal.hpp"

using namespace vclean;

namespace {

double sample_variance(const std::vector<double>& v) {
    double mean = 0.0;
    for (double x : v) mean += x;
    mean /= static_cast<double>(v.size());
    double var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    return var / static_cast<double>(v.size());
}

Signal flat_signal(std::size_t n, double rate) {
    return {std::vector<double>(n, 0.0), rate, "flat"};
}

}  // namespace

TEST_CASE("synth_clean: unit 5 Hz sine at 1 kHz peaks at 1 and starts at 0") {
    SignalSpec spec;
    spec.components = {{1.0, 5.0, 0.0}};
    spec.duration = 1.0;
    spec.sample_rate = 1000.0;
    const Signal s = synth_clean(spec);
    REQUIRE(s.samples.size() == 1000);
    CHECK(s.samples[0] == 0.0);
    double peak = 0.0;
    for (double v : s.samples) peak = std::max(peak, std::abs(v));
    CHECK(peak == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("synth_clean: no components gives zeros") {
    SignalSpec spec;
    spec.duration = 1.0;
    spec.sample_rate = 100.0;
    const Signal s = synth_clean(spec);
    REQUIRE(s.samples.size() == 100);
    for (double v : s.samples) CHECK(v == 0.0);
}

TEST_CASE("synth_clean: phase-shifted component sets the first sample") {
    SignalSpec spec;
    spec.components = {{1.0, 10.0, 0.0}, {0.5, 25.0, std::numbers::pi / 2}};
    spec.duration = 0.1;
    spec.sample_rate = 1000.0;
    const Signal s = synth_clean(spec);
    CHECK(s.samples[0] == doctest::Approx(0.5).epsilon(1e-12));
}

TEST_CASE("synth_clean rejects components at or above Nyquist") {
    SignalSpec spec;
    spec.components = {{1.0, 500.0, 0.0}};
    spec.duration = 1.0;
    spec.sample_rate = 1000.0;
    CHECK_THROWS_AS(synth_clean(spec), DataError);
    spec.components[0].frequency = 499.0;
    CHECK_NOTHROW(synth_clean(spec));
}

TEST_CASE("synth_clean is deterministic") {
    SignalSpec spec;
    spec.components = {{1.0, 13.0, 0.0}, {0.5, 48.0, 1.0}};
    spec.duration = 0.5;
    spec.sample_rate = 2000.0;
    CHECK(synth_clean(spec).samples == synth_clean(spec).samples);
}

TEST_CASE("gaussian noise: zero variance is the identity") {
    const Signal s = flat_signal(64, 100.0);
    const Signal noisy = add_gaussian_noise(s, {NoiseKind::Gaussian, 0.0, 5});
    CHECK(noisy.samples == s.samples);
}

TEST_CASE("gaussian noise: sample variance matches the spec'd variance") {
    const Signal s = flat_signal(100000, 1000.0);
    const Signal noisy = add_gaussian_noise(s, {NoiseKind::Gaussian, 0.1, 77});
    std::vector<double> diff(noisy.samples.size());
    for (std::size_t i = 0; i < diff.size(); ++i) diff[i] = noisy.samples[i] - s.samples[i];
    const double var = sample_variance(diff);
    CHECK(var >= 0.095);
    CHECK(var <= 0.105);
}

TEST_CASE("gaussian noise: same seed, identical output") {
    const Signal s = flat_signal(256, 100.0);
    const NoiseSpec spec{NoiseKind::Gaussian, 0.3, 1234};
    CHECK(add_gaussian_noise(s, spec).samples == add_gaussian_noise(s, spec).samples);
}

TEST_CASE("gaussian noise rejects a Brownian spec") {
    const Signal s = flat_signal(8, 100.0);
    CHECK_THROWS_AS(add_gaussian_noise(s, {NoiseKind::Brownian, 0.1, 0}), DataError);
}

TEST_CASE("brownian noise: zero variance is the identity") {
    const Signal s = flat_signal(64, 100.0);
    const Signal noisy = add_brownian_noise(s, {NoiseKind::Brownian, 0.0, 5});
    CHECK(noisy.samples == s.samples);
}

TEST_CASE("brownian noise: first differences recover the step variance") {
    const Signal s = flat_signal(100000, 1000.0);
    const double step_var = 0.04;
    const Signal noisy = add_brownian_noise(s, {NoiseKind::Brownian, step_var, 31});
    std::vector<double> increments;
    increments.reserve(s.samples.size() - 1);
    for (std::size_t i = 1; i < s.samples.size(); ++i) {
        const double walk_prev = noisy.samples[i - 1] - s.samples[i - 1];
        const double walk = noisy.samples[i] - s.samples[i];
        increments.push_back(walk - walk_prev);
    }
    const double var = sample_variance(increments);
    CHECK(var >= 0.95 * step_var);
    CHECK(var <= 1.05 * step_var);
}

TEST_CASE("brownian noise: ensemble variance grows as (t+1) * variance") {
    const std::size_t t = 9;
    const double step_var = 0.1;
    const Signal s = flat_signal(t + 1, 100.0);
    std::vector<double> walk_at_t;
    walk_at_t.reserve(10000);
    for (std::uint64_t seed = 0; seed < 10000; ++seed) {
        const Signal noisy = add_brownian_noise(s, {NoiseKind::Brownian, step_var, seed});
        walk_at_t.push_back(noisy.samples[t] - s.samples[t]);
    }
    const double expected = static_cast<double>(t + 1) * step_var;
    const double var = sample_variance(walk_at_t);
    CHECK(var >= 0.95 * expected);
    CHECK(var <= 1.05 * expected);
}

TEST_CASE("segment produces floor((N - window) / hop) + 1 windows") {
    CHECK(segment(flat_signal(256, 100.0), 128, 128).size() == 2);
    CHECK(segment(flat_signal(300, 100.0), 128, 128).size() == 2);
    const Signal s{std::vector<double>(128, 3.25), 100.0, "x"};
    const auto windows = segment(s, 128, 1);
    REQUIRE(windows.size() == 1);
    CHECK(windows[0] == s.samples);
}

TEST_CASE("segment rejects oversized windows and bad strides") {
    const Signal s = flat_signal(100, 100.0);
    CHECK_THROWS_AS(segment(s, 101, 1), DataError);
    CHECK_THROWS_AS(segment(s, 0, 1), DataError);
    CHECK_THROWS_AS(segment(s, 10, 0), DataError);
}

TEST_CASE("segment with hop == window_len partitions the prefix exactly") {
    SignalSpec spec;
    spec.components = {{1.0, 7.0, 0.3}};
    spec.duration = 0.777;
    spec.sample_rate = 1000.0;
    const Signal s = synth_clean(spec);
    const int window = 50;
    const auto windows = segment(s, window, window);
    std::vector<double> rebuilt;
    for (const auto& w : windows) rebuilt.insert(rebuilt.end(), w.begin(), w.end());
    REQUIRE(rebuilt.size() <= s.samples.size());
    for (std::size_t i = 0; i < rebuilt.size(); ++i) CHECK(rebuilt[i] == s.samples[i]);
}

TEST_CASE("normalize_window: constant window maps to zeros with raw stats") {
    const std::vector<double> window = {3.0, 3.0, 3.0, 3.0};
    const auto [normalized, stats] = normalize_window(window);
    CHECK(normalized == std::vector<double>{0.0, 0.0, 0.0, 0.0});
    CHECK(stats.mean == 3.0);
    CHECK(stats.stddev == 0.0);
    CHECK(denormalize_window(normalized, stats) == window);
}

TEST_CASE("normalize_window output has zero mean and unit population std") {
    Rng rng(21);
    std::vector<double> window(128);
    for (auto& v : window) v = rng.uniform(-5.0, 5.0);
    const auto [normalized, stats] = normalize_window(window);

    double mean = 0.0;
    for (double v : normalized) mean += v;
    mean /= static_cast<double>(normalized.size());
    CHECK(std::abs(mean) <= 1e-10);

    double var = 0.0;
    for (double v : normalized) var += (v - mean) * (v - mean);
    var /= static_cast<double>(normalized.size());
    CHECK(std::abs(std::sqrt(var) - 1.0) <= 1e-8);
}

TEST_CASE("normalize/denormalize round-trips within 1e-10") {
    Rng rng(22);
    std::vector<double> window(64);
    for (auto& v : window) v = rng.uniform(-100.0, 100.0);
    const auto [normalized, stats] = normalize_window(window);
    const auto back = denormalize_window(normalized, stats);
    for (std::size_t i = 0; i < window.size(); ++i) {
        CHECK(std::abs(back[i] - window[i]) <= 1e-10 * std::max(1.0, std::abs(window[i])));
    }
}

TEST_CASE("build_dataset pairs align and share stats") {
    SignalSpec spec;
    spec.components = {{1.0, 13.0, 0.0}};
    spec.duration = 0.256;
    spec.sample_rate = 1000.0;
    const Signal clean = synth_clean(spec);
    const WindowedDataset ds = build_dataset(clean, {NoiseKind::Gaussian, 0.05, 3}, 128, 128);
    REQUIRE(ds.pairs.size() == 2);
    CHECK(ds.window_len == 128);
    for (const auto& pair : ds.pairs) {
        CHECK(pair.noisy.size() == 128);
        CHECK(pair.clean.size() == 128);
        CHECK(pair.stats.stddev >= 0.0);
    }
}

TEST_CASE("build_dataset with zero variance gives identical window pairs") {
    SignalSpec spec;
    spec.components = {{0.7, 20.0, 0.1}};
    spec.duration = 0.5;
    spec.sample_rate = 1000.0;
    const Signal clean = synth_clean(spec);
    const WindowedDataset ds = build_dataset(clean, {NoiseKind::Gaussian, 0.0, 3}, 64, 32);
    REQUIRE(!ds.pairs.empty());
    for (const auto& pair : ds.pairs) CHECK(pair.noisy == pair.clean);
}
