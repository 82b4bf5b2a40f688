// vclean: vibration-signal denoising toolkit (autoregressive + transformer).

#include <CLI11.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "vclean/ar.hpp"
#include "vclean/config.hpp"
#include "vclean/errors.hpp"
#include "vclean/format.hpp"
#include "vclean/gradcheck.hpp"
#include "vclean/metrics.hpp"
#include "vclean/serialize.hpp"
#include "vclean/svg.hpp"
#include "vclean/training.hpp"

namespace {

using namespace vclean;

std::optional<std::uint64_t> env_seed() {
    const char* value = std::getenv("VCLN_SEED");
    if (!value) return std::nullopt;
    try {
        return static_cast<std::uint64_t>(parse_int(value));
    } catch (const DataError&) {
        throw UsageError("VCLN_SEED is not an integer: '" + std::string(value) + "'");
    }
}

ExperimentConfig load_config_or_default(const std::string& path) {
    if (path.empty()) {
        ExperimentConfig config;
        config.signal = default_signal_spec();
        return config;
    }
    return load_experiment_config(path);
}

// Flag > config file > VCLN_SEED > config default.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, bool config_has_seed,
                           std::uint64_t config_seed) {
    if (flag) return *flag;
    if (config_has_seed) return config_seed;
    if (const auto env = env_seed()) return *env;
    return config_seed;
}

const std::vector<double>& pick_input_column(const CsvTable& table, std::string& name) {
    if (table.has_column("noisy")) {
        name = "noisy";
    } else if (table.has_column("clean")) {
        name = "clean";
    } else if (table.header.size() >= 2) {
        name = table.header[1];
    } else {
        throw DataError("input csv has no data column");
    }
    return table.columns[table.column_index(name)];
}

// ---------------------------------------------------------------------------
// Subcommand bodies.
// ---------------------------------------------------------------------------

struct SynthOptions {
    std::string config_path;
    std::string out_path;
    std::string write_config_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> variance;
};

void run_synth(const SynthOptions& opt) {
    ExperimentConfig config = load_config_or_default(opt.config_path);
    if (!opt.write_config_path.empty()) {
        write_file_atomic(opt.write_config_path, experiment_config_to_text(config));
        std::cout << "wrote config to " << opt.write_config_path << "\n";
        if (opt.out_path.empty()) return;
    }
    config.noise.seed = resolve_seed(opt.seed, config.has_noise_seed, config.noise.seed);
    if (opt.variance) config.noise.variance = *opt.variance;

    const Signal clean = synth_clean(config.signal);
    const Signal noisy = add_noise(clean, config.noise);
    write_file_atomic(opt.out_path, table_to_csv(signal_table(clean, &noisy)));
    std::cout << "wrote " << clean.samples.size() << " samples to " << opt.out_path << "\n";
}

struct MakeDatasetOptions {
    std::string config_path;
    std::string out_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> variance;
};

void run_make_dataset(const MakeDatasetOptions& opt) {
    ExperimentConfig config = load_config_or_default(opt.config_path);
    config.noise.seed = resolve_seed(opt.seed, config.has_noise_seed, config.noise.seed);
    if (opt.variance) config.noise.variance = *opt.variance;

    const Signal clean = synth_clean(config.signal);
    const WindowedDataset ds =
        build_dataset(clean, config.noise, config.window_len, config.hop);
    save_dataset(opt.out_path, ds);
    std::cout << "wrote " << ds.pairs.size() << " window pairs (len " << ds.window_len
              << ") to " << opt.out_path << "\n";
}

struct ArDenoiseOptions {
    std::string in_path;
    std::string out_path;
    std::string model_out_path;
    int p_max = 20;
    std::string criterion = "aic";
    int iterations = 3;
    double min_delta = 1e-6;
};

void run_ar_denoise(const ArDenoiseOptions& opt) {
    CsvTable table = table_from_csv(read_file(opt.in_path));
    std::string column;
    const std::vector<double>& input = pick_input_column(table, column);
    const Criterion criterion = opt.criterion == "bic" ? Criterion::BIC : Criterion::AIC;

    const IterativeResult result = ar_denoise_iterative(
        input, opt.p_max, criterion, RefineConfig{opt.iterations, opt.min_delta});

    table.header.push_back("denoised");
    table.columns.push_back(result.denoised);
    if (!opt.out_path.empty()) {
        write_file_atomic(opt.out_path, table_to_csv(table));
    }
    for (std::size_t i = 0; i < result.models.size(); ++i) {
        std::cout << "iteration " << (i + 1) << ": order=" << result.models[i].order
                  << " sigma2=" << format_double(result.models[i].innovation_variance)
                  << " residual_variance="
                  << format_double(result.residual_variances[i]) << "\n";
    }
    if (!opt.model_out_path.empty()) {
        if (result.models.empty()) {
            std::cerr << "no iterations ran; skipping --model-out\n";
        } else {
            write_file_atomic(opt.model_out_path,
                              ar_model_to_record(result.models.back()) + "\n");
        }
    }
}

struct TrainOptions {
    std::string config_path;
    std::string data_path;
    std::string checkpoint_path;
    std::string history_path;
    std::optional<std::uint64_t> seed;
};

void run_train(const TrainOptions& opt) {
    ExperimentConfig config = load_config_or_default(opt.config_path);
    config.train.seed = resolve_seed(opt.seed, config.has_train_seed, config.train.seed);

    const WindowedDataset dataset = load_dataset(opt.data_path);
    const TrainRun run = train(dataset, config.model, config.train);
    for (std::size_t e = 0; e < run.history.size(); ++e) {
        std::cerr << "epoch " << (e + 1) << "/" << run.history.size()
                  << " train_loss=" << format_double(run.history[e].train_loss)
                  << " val_loss=" << format_double(run.history[e].val_loss) << "\n";
    }
    if (!opt.checkpoint_path.empty()) {
        save_checkpoint(opt.checkpoint_path, run.params, run.model_config);
    }
    if (!opt.history_path.empty()) {
        write_file_atomic(opt.history_path, table_to_csv(history_table(run.history)));
    }
    if (!run.history.empty()) {
        std::cout << "final train_loss=" << format_double(run.history.back().train_loss)
                  << " val_loss=" << format_double(run.history.back().val_loss) << "\n";
    } else {
        std::cout << "no epochs requested; checkpoint holds the initialization\n";
    }
}

struct DenoiseOptions {
    std::string checkpoint_path;
    std::string in_path;
    std::string out_path;
};

void run_denoise(const DenoiseOptions& opt) {
    const Checkpoint cp = load_checkpoint(opt.checkpoint_path);
    CsvTable table = table_from_csv(read_file(opt.in_path));
    std::string column;
    const std::vector<double>& input = pick_input_column(table, column);

    const auto seq = static_cast<std::size_t>(cp.config.seq_len);
    const std::size_t n = input.size();
    if (n < seq) {
        throw DataError("input has " + std::to_string(n) +
                        " rows; need at least seq_len=" + std::to_string(seq));
    }

    const auto denoise_window = [&](std::size_t start) {
        std::vector<double> window(input.begin() + static_cast<std::ptrdiff_t>(start),
                                   input.begin() + static_cast<std::ptrdiff_t>(start + seq));
        auto [normalized, stats] = normalize_window(window);
        const auto fwd = forward(cp.params, cp.config, normalized);
        return denormalize_window(fwd.output, stats);
    };

    std::vector<double> denoised(n, 0.0);
    std::size_t covered = 0;
    for (std::size_t start = 0; start + seq <= n; start += seq) {
        const auto out = denoise_window(start);
        for (std::size_t i = 0; i < seq; ++i) denoised[start + i] = out[i];
        covered = start + seq;
    }
    if (covered < n) {
        // Overlapped final window keeps the output the same length as the input.
        const std::size_t start = n - seq;
        const auto out = denoise_window(start);
        for (std::size_t i = covered; i < n; ++i) denoised[i] = out[i - start];
    }

    table.header.push_back("denoised");
    table.columns.push_back(std::move(denoised));
    write_file_atomic(opt.out_path, table_to_csv(table));
    std::cout << "wrote " << n << " denoised samples to " << opt.out_path << "\n";
}

struct EvalOptions {
    std::string checkpoint_path;
    std::string data_path;
    std::string out_path;
    std::string config_path;
    std::string split = "all";
};

void run_eval(const EvalOptions& opt) {
    const Checkpoint cp = load_checkpoint(opt.checkpoint_path);
    WindowedDataset dataset = load_dataset(opt.data_path);

    if (opt.split != "all") {
        if (opt.config_path.empty()) {
            throw UsageError("--split " + opt.split + " needs --config for the split seed");
        }
        const ExperimentConfig config = load_experiment_config(opt.config_path);
        const SplitResult split =
            split_dataset(dataset, config.train.val_fraction, config.train.seed);
        dataset = subset(dataset, opt.split == "val" ? split.val_indices
                                                     : split.train_indices);
    }
    if (dataset.pairs.empty()) throw DataError("eval: selected split is empty");

    const EvalResult eval = evaluate(cp.params, cp.config, dataset);

    std::vector<std::vector<double>> clean_windows, noisy_windows, denoised_windows;
    for (const auto& pair : dataset.pairs) {
        const auto fwd = forward(cp.params, cp.config, pair.noisy);
        clean_windows.push_back(denormalize_window(pair.clean, pair.stats));
        noisy_windows.push_back(denormalize_window(pair.noisy, pair.stats));
        denoised_windows.push_back(denormalize_window(fwd.output, pair.stats));
    }
    const DenoiseReport report = make_report(clean_windows, noisy_windows,
                                             denoised_windows, "Transformer",
                                             dataset.label);
    if (!opt.out_path.empty()) {
        write_file_atomic(opt.out_path, report_to_csv(report));
    }
    std::cout << "windows=" << dataset.pairs.size() << " split=" << opt.split
              << " mse_normalized=" << format_double(eval.aggregate_mse)
              << " median_snr_noisy_db=" << format_double(report.snr_noisy.median)
              << " median_snr_denoised_db=" << format_double(report.snr_denoised.median)
              << " median_improvement_db=" << format_double(report.improvement.median)
              << "\n";
}

struct GradcheckOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    int seeds = 1;
    bool corrupt = false;
};

void run_gradcheck(const GradcheckOptions& opt) {
    ModelConfig config = tiny_gradcheck_config();
    if (!opt.config_path.empty()) {
        config = load_experiment_config(opt.config_path).model;
    }
    std::uint64_t seed = 0;
    if (opt.seed) {
        seed = *opt.seed;
    } else if (const auto env = env_seed()) {
        seed = *env;
    }

    GradCheckConfig check;
    check.corrupt = opt.corrupt;
    double max_rel_err = 0.0;
    std::string worst;
    bool pass = true;
    for (int i = 0; i < opt.seeds; ++i) {
        const GradCheckResult result = gradient_check(config, seed + static_cast<std::uint64_t>(i), check);
        if (result.max_rel_err > max_rel_err) {
            max_rel_err = result.max_rel_err;
            worst = result.worst_tensor;
        }
        pass = pass && result.pass;
    }
    std::cout << "gradcheck seeds=" << opt.seeds << " max_rel_err="
              << format_double(max_rel_err) << " worst_tensor=" << worst << " "
              << (pass ? "PASS" : "FAIL") << "\n";
    if (!pass) {
        throw NumericError("gradcheck: max relative error " + format_double(max_rel_err) +
                           " exceeds tolerance " + format_double(check.tolerance));
    }
}

struct PlotOptions {
    std::vector<std::string> in_paths;
    std::string out_path;
    std::string title = "vclean traces";
};

void run_export_plot(const PlotOptions& opt) {
    std::vector<PlotSeries> series;
    for (const auto& path : opt.in_paths) {
        const CsvTable table = table_from_csv(read_file(path));
        const std::string prefix =
            opt.in_paths.size() > 1 ? std::filesystem::path(path).stem().string() : "";
        for (auto& s : table_series(table, prefix)) series.push_back(std::move(s));
    }
    write_file_atomic(opt.out_path, render_line_plot(series, opt.title));
    std::cout << "wrote " << series.size() << " series to " << opt.out_path << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"vclean: vibration-signal denoising toolkit"};
    app.require_subcommand(1);

    SynthOptions synth_opt;
    auto* synth = app.add_subcommand("synth", "Synthesize a clean+noisy signal CSV");
    synth->add_option("--config", synth_opt.config_path, "Experiment config file");
    synth->add_option("--out", synth_opt.out_path, "Output CSV (t,clean,noisy)");
    synth->add_option("--seed", synth_opt.seed, "Noise seed override");
    synth->add_option("--variance", synth_opt.variance, "Noise variance override");
    synth->add_option("--write-config", synth_opt.write_config_path,
                      "Write the resolved config to this path");

    MakeDatasetOptions mkds_opt;
    auto* mkds = app.add_subcommand("make-dataset",
                                    "Build a windowed (noisy, clean) training dataset");
    mkds->add_option("--config", mkds_opt.config_path, "Experiment config file");
    mkds->add_option("--out", mkds_opt.out_path, "Output dataset file")->required();
    mkds->add_option("--seed", mkds_opt.seed, "Noise seed override");
    mkds->add_option("--variance", mkds_opt.variance, "Noise variance override");

    ArDenoiseOptions ar_opt;
    auto* ar = app.add_subcommand("ar-denoise",
                                  "Denoise a signal CSV with the autoregressive pipeline");
    ar->add_option("--in", ar_opt.in_path, "Input signal CSV")->required();
    ar->add_option("--out", ar_opt.out_path, "Output CSV with a denoised column");
    ar->add_option("--p-max", ar_opt.p_max, "Maximum AR order to consider")
        ->check(CLI::NonNegativeNumber);
    ar->add_option("--criterion", ar_opt.criterion, "Order selection criterion")
        ->check(CLI::IsMember({"aic", "bic"}));
    ar->add_option("--iterations", ar_opt.iterations, "Refinement iterations")
        ->check(CLI::NonNegativeNumber);
    ar->add_option("--min-delta", ar_opt.min_delta,
                   "Stop when residual-variance improvement drops below this");
    ar->add_option("--model-out", ar_opt.model_out_path, "Write the final AR model record");

    TrainOptions train_opt;
    auto* tr = app.add_subcommand("train", "Train the transformer denoiser");
    tr->add_option("--config", train_opt.config_path, "Experiment config file");
    tr->add_option("--data", train_opt.data_path, "Dataset file")->required();
    tr->add_option("--checkpoint-out", train_opt.checkpoint_path, "Checkpoint output path");
    tr->add_option("--history-out", train_opt.history_path, "Loss history CSV path");
    tr->add_option("--seed", train_opt.seed, "Training seed override");

    DenoiseOptions den_opt;
    auto* den = app.add_subcommand("denoise", "Denoise a signal CSV with a checkpoint");
    den->add_option("--checkpoint", den_opt.checkpoint_path, "Checkpoint file")->required();
    den->add_option("--in", den_opt.in_path, "Input signal CSV")->required();
    den->add_option("--out", den_opt.out_path, "Output CSV")->required();

    EvalOptions eval_opt;
    auto* ev = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    ev->add_option("--checkpoint", eval_opt.checkpoint_path, "Checkpoint file")->required();
    ev->add_option("--data", eval_opt.data_path, "Dataset file")->required();
    ev->add_option("--out", eval_opt.out_path, "Report CSV path");
    ev->add_option("--config", eval_opt.config_path,
                   "Experiment config (for --split train/val)");
    ev->add_option("--split", eval_opt.split, "Subset to evaluate")
        ->check(CLI::IsMember({"all", "val", "train"}));

    GradcheckOptions gc_opt;
    auto* gc = app.add_subcommand("gradcheck",
                                  "Verify analytic gradients against finite differences");
    gc->add_option("--seed", gc_opt.seed, "Base seed");
    gc->add_option("--seeds", gc_opt.seeds, "Number of consecutive seeds to check")
        ->check(CLI::PositiveNumber);
    gc->add_option("--config", gc_opt.config_path, "Experiment config for the model shape");
    gc->add_flag("--corrupt", gc_opt.corrupt,
                 "Negative-control hook: corrupt one gradient entry");

    PlotOptions plot_opt;
    auto* plot = app.add_subcommand("export-plot", "Render signal CSVs as a static SVG");
    plot->add_option("--in", plot_opt.in_paths, "Input CSV files")->required();
    plot->add_option("--out", plot_opt.out_path, "Output SVG path")->required();
    plot->add_option("--title", plot_opt.title, "Plot title");

    try {
        app.parse(argc, argv);
        if (synth->parsed()) {
            if (synth_opt.out_path.empty() && synth_opt.write_config_path.empty()) {
                throw UsageError("synth: --out (or --write-config) is required");
            }
            run_synth(synth_opt);
        } else if (mkds->parsed()) {
            run_make_dataset(mkds_opt);
        } else if (ar->parsed()) {
            run_ar_denoise(ar_opt);
        } else if (tr->parsed()) {
            run_train(train_opt);
        } else if (den->parsed()) {
            run_denoise(den_opt);
        } else if (ev->parsed()) {
            run_eval(eval_opt);
        } else if (gc->parsed()) {
            run_gradcheck(gc_opt);
        } else if (plot->parsed()) {
            run_export_plot(plot_opt);
        }
        return 0;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const NumericError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 4;
    }
}
