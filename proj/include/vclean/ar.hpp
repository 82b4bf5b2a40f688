#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

namespace vclean {

// Autoregressive model: x̂_t = sum_{i=1..p} coeffs[i-1] * x_{t-i}.
struct ARModel {
    int order = 0;
    std::vector<double> coeffs;          // a_1 .. a_p
    double innovation_variance = 0.0;    // one-step prediction error variance
};

enum class Criterion { AIC, BIC };

struct OrderSelection {
    Criterion criterion = Criterion::AIC;
    int p_max = 0;
    std::vector<std::pair<int, double>> scores;  // (p, score) for p = 0..p_max
    int selected = 0;                            // argmin score, ties to smaller p
};

struct RefineConfig {
    int max_iterations = 3;
    double min_residual_delta = 1e-6;
};

// Biased autocorrelation of the mean-centered series:
//   r(k) = (1/N) * sum_t (x_t - mean)(x_{t+k} - mean).
// The 1/N normalization keeps the Toeplitz system positive semidefinite.
std::vector<double> autocorrelation(std::span<const double> x, int max_lag);

// Solves the Yule-Walker equations via the Levinson-Durbin recursion on the
// biased autocorrelation; innovation variance is r(0) - sum a_i r(i).
ARModel yule_walker_fit(std::span<const double> x, int p);

// Index of the minimal score; bit-equal scores resolve to the smaller order.
std::size_t argmin_scores(std::span<const double> scores);

// AIC(p) = N ln s2_p + 2p, BIC(p) = N ln s2_p + p ln N, s2_p from
// yule_walker_fit at each order.
OrderSelection select_order(std::span<const double> x, int p_max, Criterion criterion);

// One-step prediction with the mean re-added; the first `order` samples pass
// through unchanged. An order-0 model returns the input as-is.
std::vector<double> ar_denoise(std::span<const double> x, const ARModel& model);

struct IterativeResult {
    std::vector<double> denoised;
    std::vector<ARModel> models;              // one per accepted iteration
    std::vector<double> residual_variances;   // mean squared residual per iteration
};

// Re-selects the order and refits on each iteration's output. Stops at
// max_iterations, when the residual-variance improvement drops below
// min_residual_delta, or before an iteration that would increase it (that
// iteration is discarded), so recorded residual variances never increase.
IterativeResult ar_denoise_iterative(std::span<const double> x, int p_max,
                                     Criterion criterion, const RefineConfig& refine);

// Text record `order, a_1, .., a_p, sigma2` at full round-trip precision.
std::string ar_model_to_record(const ARModel& model);
ARModel ar_model_from_record(const std::string& record);

}  // namespace vclean
