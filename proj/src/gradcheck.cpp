#include "vclean/gradcheck.hpp"

#include <cmath>

#include "vclean/rng.hpp"
#include "vclean/training.hpp"

namespace vclean {

ModelConfig tiny_gradcheck_config() {
    ModelConfig config;
    config.seq_len = 4;
    config.d_model = 8;
    config.n_heads = 2;
    config.d_ff = 8;
    config.n_blocks = 1;
    return config;
}

GradCheckResult gradient_check(const ModelConfig& config, std::uint64_t seed,
                               const GradCheckConfig& check) {
    config.validate();
    TransformerParams params = init_params(config, seed);

    Rng rng(seed ^ 0x5bf0f3c2a9d1e647ULL);
    std::vector<double> window(static_cast<std::size_t>(config.seq_len));
    std::vector<double> target(window.size());
    for (auto& v : window) v = rng.uniform(-1.0, 1.0);
    for (auto& v : target) v = rng.uniform(-1.0, 1.0);

    BackwardResult analytic = backward(params, config, window, target);
    if (check.corrupt) analytic.grads.b_out += 1.0;

    const auto param_refs = tensor_refs(params);
    const auto grad_refs = tensor_refs(analytic.grads);

    GradCheckResult result;
    for (std::size_t t = 0; t < param_refs.size(); ++t) {
        for (std::size_t i = 0; i < param_refs[t].size(); ++i) {
            double* theta = param_refs[t].data + i;
            const double original = *theta;

            *theta = original + check.step;
            const double loss_plus =
                mse_loss(forward(params, config, window).output, target);
            *theta = original - check.step;
            const double loss_minus =
                mse_loss(forward(params, config, window).output, target);
            *theta = original;

            const double numeric = (loss_plus - loss_minus) / (2.0 * check.step);
            const double a = grad_refs[t].data[i];
            const double rel = std::abs(a - numeric) /
                               std::max({std::abs(a), std::abs(numeric), 1e-6});
            if (rel > result.max_rel_err) {
                result.max_rel_err = rel;
                result.worst_tensor = param_refs[t].name;
            }
        }
    }
    result.pass = result.max_rel_err <= check.tolerance;
    return result;
}

}  // namespace vclean
