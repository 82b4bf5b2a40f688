#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "vclean/signal.hpp"
#include "vclean/transformer.hpp"

namespace vclean {

struct TrainConfig {
    int epochs = 50;
    int batch_size = 32;
    double val_fraction = 0.20;
    double learning_rate = 1e-3;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::uint64_t seed = 0;

    void validate() const;
};

// First/second moment estimates, shape-congruent with the parameters.
struct AdamState {
    Gradients m;
    Gradients v;
    long step = 0;
};

AdamState make_adam_state(const ModelConfig& config);

double mse_loss(std::span<const double> pred, std::span<const double> target);

// One bias-corrected Adam update, elementwise over every tensor, in place.
void adam_step(TransformerParams& params, const Gradients& grads, AdamState& state,
               const TrainConfig& config);

// Seeded-shuffle split; val takes the last floor(N * val_fraction) shuffled
// indices. Train and val are disjoint and exhaustive.
struct SplitResult {
    std::vector<std::size_t> train_indices;
    std::vector<std::size_t> val_indices;
};

SplitResult split_dataset(const WindowedDataset& dataset, double val_fraction,
                          std::uint64_t seed);

WindowedDataset subset(const WindowedDataset& dataset,
                       std::span<const std::size_t> indices);

struct EpochStats {
    double train_loss = 0.0;
    double val_loss = 0.0;
};

struct TrainRun {
    std::vector<EpochStats> history;  // one entry per epoch
    TransformerParams params;
    ModelConfig model_config;
    TrainConfig train_config;
};

// Full training loop: per epoch a seeded reshuffle, batches with the final
// partial batch kept, mean gradient per batch, one Adam step per batch.
// Bit-deterministic given (dataset, configs, seed).
TrainRun train(const WindowedDataset& dataset, const ModelConfig& model_config,
               const TrainConfig& train_config);

struct EvalResult {
    std::vector<double> per_window_mse;
    double aggregate_mse = 0.0;  // mean of per-window values
};

// Pure forward + MSE on normalized windows; parameters are not touched.
EvalResult evaluate(const TransformerParams& params, const ModelConfig& config,
                    const WindowedDataset& dataset);

}  // namespace vclean
