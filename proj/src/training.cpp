#include "vclean/training.hpp"

#include <cmath>
#include <numeric>
#include <string>

#include "vclean/errors.hpp"
#include "vclean/rng.hpp"

namespace vclean {

namespace {

// Salt keeps the epoch-shuffle stream independent from the init/split seed.
constexpr std::uint64_t kShuffleSalt = 0x9e3779b97f4a7c15ULL;

}  // namespace

void TrainConfig::validate() const {
    if (epochs < 0) throw DataError("TrainConfig: epochs must be >= 0");
    if (batch_size < 1) throw DataError("TrainConfig: batch_size must be >= 1");
    if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
        throw DataError("TrainConfig: val_fraction must be in (0, 1)");
    }
    if (!(learning_rate > 0.0)) throw DataError("TrainConfig: learning_rate must be positive");
    if (!(adam_beta1 > 0.0 && adam_beta1 < 1.0) || !(adam_beta2 > 0.0 && adam_beta2 < 1.0)) {
        throw DataError("TrainConfig: adam betas must be in (0, 1)");
    }
    if (!(adam_eps > 0.0)) throw DataError("TrainConfig: adam_eps must be positive");
}

AdamState make_adam_state(const ModelConfig& config) {
    return {zero_params(config), zero_params(config), 0};
}

double mse_loss(std::span<const double> pred, std::span<const double> target) {
    if (pred.size() != target.size()) {
        throw ShapeError("mse_loss: prediction and target lengths differ");
    }
    if (pred.empty()) throw ShapeError("mse_loss: empty input");
    double sum = 0.0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        const double d = pred[i] - target[i];
        sum += d * d;
    }
    return sum / static_cast<double>(pred.size());
}

void adam_step(TransformerParams& params, const Gradients& grads, AdamState& state,
               const TrainConfig& config) {
    const auto param_refs = tensor_refs(params);
    const auto grad_refs = tensor_refs(grads);
    const auto m_refs = tensor_refs(state.m);
    const auto v_refs = tensor_refs(state.v);
    if (param_refs.size() != grad_refs.size()) {
        throw ShapeError("adam_step: gradient tree does not match parameters");
    }

    state.step += 1;
    const double b1 = config.adam_beta1;
    const double b2 = config.adam_beta2;
    const double m_corr = 1.0 - std::pow(b1, static_cast<double>(state.step));
    const double v_corr = 1.0 - std::pow(b2, static_cast<double>(state.step));

    for (std::size_t t = 0; t < param_refs.size(); ++t) {
        if (param_refs[t].size() != grad_refs[t].size()) {
            throw ShapeError("adam_step: tensor " + param_refs[t].name + " shape mismatch");
        }
        double* theta = param_refs[t].data;
        const double* g = grad_refs[t].data;
        double* m = m_refs[t].data;
        double* v = v_refs[t].data;
        for (std::size_t i = 0; i < param_refs[t].size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            const double m_hat = m[i] / m_corr;
            const double v_hat = v[i] / v_corr;
            theta[i] -= config.learning_rate * m_hat / (std::sqrt(v_hat) + config.adam_eps);
        }
    }
}

SplitResult split_dataset(const WindowedDataset& dataset, double val_fraction,
                          std::uint64_t seed) {
    if (dataset.pairs.empty()) throw DataError("split_dataset: empty dataset");
    if (!(val_fraction > 0.0 && val_fraction < 1.0)) {
        throw DataError("split_dataset: val_fraction must be in (0, 1)");
    }
    std::vector<std::size_t> order(dataset.pairs.size());
    std::iota(order.begin(), order.end(), 0);
    Rng rng(seed);
    shuffle_indices(order, rng);

    const auto val_size = static_cast<std::size_t>(
        std::floor(static_cast<double>(order.size()) * val_fraction));
    SplitResult split;
    split.train_indices.assign(order.begin(), order.end() - static_cast<std::ptrdiff_t>(val_size));
    split.val_indices.assign(order.end() - static_cast<std::ptrdiff_t>(val_size), order.end());
    return split;
}

WindowedDataset subset(const WindowedDataset& dataset,
                       std::span<const std::size_t> indices) {
    WindowedDataset out;
    out.window_len = dataset.window_len;
    out.label = dataset.label;
    out.pairs.reserve(indices.size());
    for (std::size_t idx : indices) out.pairs.push_back(dataset.pairs.at(idx));
    return out;
}

namespace {

void accumulate(Gradients& acc, const Gradients& g) {
    auto acc_refs = tensor_refs(acc);
    auto g_refs = tensor_refs(g);
    for (std::size_t t = 0; t < acc_refs.size(); ++t) {
        for (std::size_t i = 0; i < acc_refs[t].size(); ++i) {
            acc_refs[t].data[i] += g_refs[t].data[i];
        }
    }
}

void scale(Gradients& g, double factor) {
    auto refs = tensor_refs(g);
    for (auto& ref : refs) {
        for (std::size_t i = 0; i < ref.size(); ++i) ref.data[i] *= factor;
    }
}

double validation_loss(const TransformerParams& params, const ModelConfig& config,
                       const WindowedDataset& dataset,
                       std::span<const std::size_t> indices) {
    double sum = 0.0;
    for (std::size_t idx : indices) {
        const auto& pair = dataset.pairs[idx];
        const auto fwd = forward(params, config, pair.noisy);
        sum += mse_loss(fwd.output, pair.clean);
    }
    return sum / static_cast<double>(indices.size());
}

}  // namespace

TrainRun train(const WindowedDataset& dataset, const ModelConfig& model_config,
               const TrainConfig& train_config) {
    model_config.validate();
    train_config.validate();
    if (dataset.pairs.empty()) throw DataError("train: empty dataset");
    if (dataset.window_len != model_config.seq_len) {
        throw ShapeError("train: dataset window_len " + std::to_string(dataset.window_len) +
                         " does not match model seq_len " +
                         std::to_string(model_config.seq_len));
    }

    const SplitResult split =
        split_dataset(dataset, train_config.val_fraction, train_config.seed);
    if (split.val_indices.empty()) {
        throw DataError("train: validation split is empty; need more windows");
    }

    TrainRun run;
    run.model_config = model_config;
    run.train_config = train_config;
    run.params = init_params(model_config, train_config.seed);

    AdamState adam = make_adam_state(model_config);
    Rng shuffle_rng(train_config.seed ^ kShuffleSalt);
    std::vector<std::size_t> order = split.train_indices;
    const auto batch_size = static_cast<std::size_t>(train_config.batch_size);

    for (int epoch = 0; epoch < train_config.epochs; ++epoch) {
        shuffle_indices(order, shuffle_rng);
        double loss_sum = 0.0;
        std::size_t batch_count = 0;
        for (std::size_t start = 0; start < order.size(); start += batch_size) {
            const std::size_t end = std::min(start + batch_size, order.size());
            Gradients batch_grads = zero_params(model_config);
            double batch_loss = 0.0;
            try {
                for (std::size_t i = start; i < end; ++i) {
                    const auto& pair = dataset.pairs[order[i]];
                    const BackwardResult bw =
                        backward(run.params, model_config, pair.noisy, pair.clean);
                    batch_loss += bw.loss;
                    accumulate(batch_grads, bw.grads);
                }
                const double inv = 1.0 / static_cast<double>(end - start);
                scale(batch_grads, inv);
                batch_loss *= inv;
                adam_step(run.params, batch_grads, adam, train_config);
            } catch (const NumericError& e) {
                throw NumericError(std::string(e.what()) + " (epoch " +
                                   std::to_string(epoch + 1) + ", batch " +
                                   std::to_string(batch_count + 1) + ")");
            }
            loss_sum += batch_loss;
            ++batch_count;
        }
        EpochStats stats;
        stats.train_loss = loss_sum / static_cast<double>(batch_count);
        stats.val_loss = validation_loss(run.params, model_config, dataset,
                                         split.val_indices);
        run.history.push_back(stats);
    }
    return run;
}

EvalResult evaluate(const TransformerParams& params, const ModelConfig& config,
                    const WindowedDataset& dataset) {
    if (dataset.pairs.empty()) throw DataError("evaluate: empty dataset");
    if (dataset.window_len != config.seq_len) {
        throw ShapeError("evaluate: dataset window_len does not match model seq_len");
    }
    EvalResult result;
    result.per_window_mse.reserve(dataset.pairs.size());
    double sum = 0.0;
    for (const auto& pair : dataset.pairs) {
        const auto fwd = forward(params, config, pair.noisy);
        const double loss = mse_loss(fwd.output, pair.clean);
        result.per_window_mse.push_back(loss);
        sum += loss;
    }
    result.aggregate_mse = sum / static_cast<double>(result.per_window_mse.size());
    return result;
}

}  // namespace vclean
