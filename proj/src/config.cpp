#include "vclean/config.hpp"

#include <fstream>
#include <sstream>

#include "vclean/errors.hpp"
#include "vclean/format.hpp"

namespace vclean {

SignalSpec default_signal_spec() {
    SignalSpec spec;
    spec.components = {{1.0, 13.0, 0.0}, {0.5, 48.0, 1.0}, {0.25, 80.0, 2.0}};
    spec.duration = 4.0;
    spec.sample_rate = 1000.0;
    return spec;
}

namespace {

[[noreturn]] void fail(std::size_t line_no, const std::string& message) {
    throw UsageError("config line " + std::to_string(line_no) + ": " + message);
}

double number_or_fail(const std::string& value, std::size_t line_no) {
    try {
        return parse_double(value);
    } catch (const DataError&) {
        fail(line_no, "expected a number, got '" + value + "'");
    }
}

long long int_or_fail(const std::string& value, std::size_t line_no) {
    try {
        return parse_int(value);
    } catch (const DataError&) {
        fail(line_no, "expected an integer, got '" + value + "'");
    }
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text) {
    ExperimentConfig config;
    config.signal = default_signal_spec();
    bool saw_component = false;

    std::stringstream ss(text);
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(ss, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.resize(hash);
        const auto body = trim(line);
        if (body.empty()) continue;
        const auto eq = body.find('=');
        if (eq == std::string_view::npos) fail(line_no, "expected `key = value`");
        const std::string key(trim(body.substr(0, eq)));
        const std::string value(trim(body.substr(eq + 1)));
        if (key.empty()) fail(line_no, "empty key");

        if (key == "label") {
            config.label = value;
        } else if (key == "sample_rate") {
            config.signal.sample_rate = number_or_fail(value, line_no);
        } else if (key == "duration") {
            config.signal.duration = number_or_fail(value, line_no);
        } else if (key == "component") {
            std::vector<std::string> parts;
            std::stringstream vs(value);
            std::string part;
            while (std::getline(vs, part, ',')) parts.push_back(part);
            if (parts.size() != 3) {
                fail(line_no, "component needs `amplitude, frequency, phase`");
            }
            if (!saw_component) {
                config.signal.components.clear();
                saw_component = true;
            }
            config.signal.components.push_back({number_or_fail(parts[0], line_no),
                                                number_or_fail(parts[1], line_no),
                                                number_or_fail(parts[2], line_no)});
        } else if (key == "noise") {
            if (value == "gaussian") {
                config.noise.kind = NoiseKind::Gaussian;
            } else if (value == "brownian") {
                config.noise.kind = NoiseKind::Brownian;
            } else {
                fail(line_no, "noise must be `gaussian` or `brownian`");
            }
        } else if (key == "variance") {
            config.noise.variance = number_or_fail(value, line_no);
        } else if (key == "seed") {
            config.noise.seed = static_cast<std::uint64_t>(int_or_fail(value, line_no));
            config.has_noise_seed = true;
        } else if (key == "window_len") {
            config.window_len = static_cast<int>(int_or_fail(value, line_no));
        } else if (key == "hop") {
            config.hop = static_cast<int>(int_or_fail(value, line_no));
        } else if (key == "seq_len") {
            config.model.seq_len = static_cast<int>(int_or_fail(value, line_no));
        } else if (key == "d_model") {
            config.model.d_model = static_cast<int>(int_or_fail(value, line_no));
        } else if (key == "n_heads") {
            config.model.n_heads = static_cast<int>(int_or_fail(value, line_no));
        } else if (key == "d_ff") {
            config.model.d_ff = static_cast<int>(int_or_fail(value, line_no));
        } else if (key == "ln_eps") {
            config.model.ln_eps = number_or_fail(value, line_no);
        } else if (key == "n_blocks") {
            config.model.n_blocks = static_cast<int>(int_or_fail(value, line_no));
        } else if (key == "positional") {
            if (value == "sinusoidal") {
                config.model.positional = PositionalEncodingKind::Sinusoidal;
            } else if (value == "none") {
                config.model.positional = PositionalEncodingKind::None;
            } else {
                fail(line_no, "positional must be `sinusoidal` or `none`");
            }
        } else if (key == "epochs") {
            config.train.epochs = static_cast<int>(int_or_fail(value, line_no));
        } else if (key == "batch_size") {
            config.train.batch_size = static_cast<int>(int_or_fail(value, line_no));
        } else if (key == "val_fraction") {
            config.train.val_fraction = number_or_fail(value, line_no);
        } else if (key == "learning_rate") {
            config.train.learning_rate = number_or_fail(value, line_no);
        } else if (key == "adam_beta1") {
            config.train.adam_beta1 = number_or_fail(value, line_no);
        } else if (key == "adam_beta2") {
            config.train.adam_beta2 = number_or_fail(value, line_no);
        } else if (key == "adam_eps") {
            config.train.adam_eps = number_or_fail(value, line_no);
        } else if (key == "train_seed") {
            config.train.seed = static_cast<std::uint64_t>(int_or_fail(value, line_no));
            config.has_train_seed = true;
        } else if (key == "out_dir") {
            config.out_dir = value;
        } else {
            fail(line_no, "unknown key '" + key + "'");
        }
    }
    return config;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open config '" + path.string() + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_experiment_config(std::move(ss).str());
}

std::string experiment_config_to_text(const ExperimentConfig& config) {
    std::string out;
    out += "label = " + config.label + "\n";
    out += "sample_rate = " + format_double(config.signal.sample_rate) + "\n";
    out += "duration = " + format_double(config.signal.duration) + "\n";
    for (const auto& c : config.signal.components) {
        out += "component = " + format_double(c.amplitude) + ", " +
               format_double(c.frequency) + ", " + format_double(c.phase) + "\n";
    }
    out += std::string("noise = ") +
           (config.noise.kind == NoiseKind::Gaussian ? "gaussian" : "brownian") + "\n";
    out += "variance = " + format_double(config.noise.variance) + "\n";
    out += "seed = " + std::to_string(config.noise.seed) + "\n";
    out += "window_len = " + std::to_string(config.window_len) + "\n";
    out += "hop = " + std::to_string(config.hop) + "\n";
    out += "seq_len = " + std::to_string(config.model.seq_len) + "\n";
    out += "d_model = " + std::to_string(config.model.d_model) + "\n";
    out += "n_heads = " + std::to_string(config.model.n_heads) + "\n";
    out += "d_ff = " + std::to_string(config.model.d_ff) + "\n";
    out += "ln_eps = " + format_double(config.model.ln_eps) + "\n";
    out += "n_blocks = " + std::to_string(config.model.n_blocks) + "\n";
    out += std::string("positional = ") +
           (config.model.positional == PositionalEncodingKind::Sinusoidal ? "sinusoidal"
                                                                          : "none") +
           "\n";
    out += "epochs = " + std::to_string(config.train.epochs) + "\n";
    out += "batch_size = " + std::to_string(config.train.batch_size) + "\n";
    out += "val_fraction = " + format_double(config.train.val_fraction) + "\n";
    out += "learning_rate = " + format_double(config.train.learning_rate) + "\n";
    out += "adam_beta1 = " + format_double(config.train.adam_beta1) + "\n";
    out += "adam_beta2 = " + format_double(config.train.adam_beta2) + "\n";
    out += "adam_eps = " + format_double(config.train.adam_eps) + "\n";
    out += "train_seed = " + std::to_string(config.train.seed) + "\n";
    out += "out_dir = " + config.out_dir + "\n";
    return out;
}

}  // namespace vclean
