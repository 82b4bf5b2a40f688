#pragma once

#include <filesystem>
#include <string>

#include "vclean/signal.hpp"
#include "vclean/training.hpp"
#include "vclean/transformer.hpp"

namespace vclean {

// One key-value text file drives a whole experiment: signal synthesis,
// noise, windowing, model shape and training protocol. Unknown keys are
// rejected with their line number. Every field has a default.
struct ExperimentConfig {
    std::string label = "experiment";
    SignalSpec signal;        // defaults below if no `component` lines appear
    NoiseSpec noise{NoiseKind::Gaussian, 0.1, 42};
    int window_len = 128;
    int hop = 64;
    ModelConfig model;
    TrainConfig train;
    std::string out_dir = ".";

    bool has_noise_seed = false;   // a `seed` line appeared
    bool has_train_seed = false;   // a `train_seed` line appeared
};

// Three-harmonic shaft-like demo signal: (1.0, 13 Hz, 0), (0.5, 48 Hz, 1.0),
// (0.25, 80 Hz, 2.0) at 1000 Hz.
SignalSpec default_signal_spec();

ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

// Round-trippable rendering of a config (used by `synth --write-config`).
std::string experiment_config_to_text(const ExperimentConfig& config);

}  // namespace vclean
