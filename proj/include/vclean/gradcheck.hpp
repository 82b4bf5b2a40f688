#pragma once

#include <cstdint>
#include <string>

#include "vclean/transformer.hpp"

namespace vclean {

struct GradCheckConfig {
    double step = 1e-5;       // central-difference step
    double tolerance = 1e-4;  // max allowed relative error
    // Test hook: perturbs one analytic gradient entry so the check must fail.
    bool corrupt = false;
};

struct GradCheckResult {
    double max_rel_err = 0.0;
    std::string worst_tensor;
    bool pass = false;
};

// Compares analytic gradients against central finite differences of the loss
// on a random window/target pair drawn from `seed`. Relative error per entry
// is |a - n| / max(|a|, |n|, 1e-6); the floor absorbs coordinates whose true
// gradient is below finite-difference resolution.
GradCheckResult gradient_check(const ModelConfig& config, std::uint64_t seed,
                               const GradCheckConfig& check = {});

// Config used by the `gradcheck` CLI when none is given.
ModelConfig tiny_gradcheck_config();

}  // namespace vclean
