#include "vclean/ar.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "vclean/errors.hpp"
#include "vclean/format.hpp"

namespace vclean {

std::vector<double> autocorrelation(std::span<const double> x, int max_lag) {
    const auto n = x.size();
    if (n == 0) throw DataError("autocorrelation: empty input");
    if (max_lag < 0) throw DataError("autocorrelation: negative max_lag");
    if (static_cast<std::size_t>(max_lag) >= n) {
        throw DataError("autocorrelation: max_lag " + std::to_string(max_lag) +
                        " must be below series length " + std::to_string(n));
    }
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);

    std::vector<double> centered(n);
    for (std::size_t i = 0; i < n; ++i) centered[i] = x[i] - mean;

    std::vector<double> r(static_cast<std::size_t>(max_lag) + 1, 0.0);
    for (int k = 0; k <= max_lag; ++k) {
        double sum = 0.0;
        for (std::size_t t = 0; t + k < n; ++t) sum += centered[t] * centered[t + k];
        r[static_cast<std::size_t>(k)] = sum / static_cast<double>(n);
    }
    return r;
}

ARModel yule_walker_fit(std::span<const double> x, int p) {
    if (p < 0) throw DataError("yule_walker_fit: negative order");
    if (x.size() <= static_cast<std::size_t>(p)) {
        throw DataError("yule_walker_fit: need more samples than the order");
    }
    const auto r = autocorrelation(x, p);
    if (p == 0) return {0, {}, r[0]};
    if (r[0] == 0.0) {
        throw DataError("yule_walker_fit: degenerate input (constant signal)");
    }

    // Levinson-Durbin recursion on the Toeplitz system R a = r.
    std::vector<double> a(static_cast<std::size_t>(p), 0.0);
    std::vector<double> prev(a);
    double error = r[0];
    for (int m = 1; m <= p; ++m) {
        double acc = r[static_cast<std::size_t>(m)];
        for (int i = 1; i < m; ++i) {
            acc -= prev[static_cast<std::size_t>(i - 1)] * r[static_cast<std::size_t>(m - i)];
        }
        const double reflection = acc / error;
        a[static_cast<std::size_t>(m - 1)] = reflection;
        for (int i = 1; i < m; ++i) {
            a[static_cast<std::size_t>(i - 1)] =
                prev[static_cast<std::size_t>(i - 1)] -
                reflection * prev[static_cast<std::size_t>(m - i - 1)];
        }
        error *= (1.0 - reflection * reflection);
        prev = a;
    }

    double sigma2 = r[0];
    for (int i = 1; i <= p; ++i) {
        sigma2 -= a[static_cast<std::size_t>(i - 1)] * r[static_cast<std::size_t>(i)];
    }
    sigma2 = std::max(sigma2, 0.0);
    return {p, std::move(a), sigma2};
}

std::size_t argmin_scores(std::span<const double> scores) {
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] < scores[best]) best = i;
    }
    return best;
}

OrderSelection select_order(std::span<const double> x, int p_max, Criterion criterion) {
    if (p_max < 0) throw DataError("select_order: negative p_max");
    if (x.size() <= static_cast<std::size_t>(p_max)) {
        throw DataError("select_order: need more samples than p_max");
    }
    const double n = static_cast<double>(x.size());
    OrderSelection sel;
    sel.criterion = criterion;
    sel.p_max = p_max;
    std::vector<double> raw_scores;
    raw_scores.reserve(static_cast<std::size_t>(p_max) + 1);
    for (int p = 0; p <= p_max; ++p) {
        const ARModel model = yule_walker_fit(x, p);
        const double penalty = criterion == Criterion::AIC
                                   ? 2.0 * p
                                   : static_cast<double>(p) * std::log(n);
        const double score = model.innovation_variance > 0.0
                                 ? n * std::log(model.innovation_variance) + penalty
                                 : -std::numeric_limits<double>::infinity();
        raw_scores.push_back(score);
        sel.scores.emplace_back(p, score);
    }
    sel.selected = static_cast<int>(argmin_scores(raw_scores));
    return sel;
}

std::vector<double> ar_denoise(std::span<const double> x, const ARModel& model) {
    const auto n = x.size();
    if (static_cast<std::size_t>(model.order) >= n) {
        throw DataError("ar_denoise: model order must be below the series length");
    }
    std::vector<double> out(x.begin(), x.end());
    const int p = model.order;
    if (p == 0) return out;

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);

    for (std::size_t t = static_cast<std::size_t>(p); t < n; ++t) {
        double pred = 0.0;
        for (int i = 1; i <= p; ++i) {
            pred += model.coeffs[static_cast<std::size_t>(i - 1)] * (x[t - i] - mean);
        }
        out[t] = mean + pred;
    }
    return out;
}

namespace {

double mean_squared_residual(std::span<const double> a, std::span<const double> b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        sum += d * d;
    }
    return sum / static_cast<double>(a.size());
}

}  // namespace

IterativeResult ar_denoise_iterative(std::span<const double> x, int p_max,
                                     Criterion criterion, const RefineConfig& refine) {
    if (refine.max_iterations < 0) {
        throw DataError("ar_denoise_iterative: negative max_iterations");
    }
    if (refine.min_residual_delta < 0.0) {
        throw DataError("ar_denoise_iterative: negative min_residual_delta");
    }
    IterativeResult result;
    result.denoised.assign(x.begin(), x.end());
    for (int iter = 0; iter < refine.max_iterations; ++iter) {
        const OrderSelection sel = select_order(result.denoised, p_max, criterion);
        const ARModel model = yule_walker_fit(result.denoised, sel.selected);
        const std::vector<double> next = ar_denoise(result.denoised, model);
        const double resid_var = mean_squared_residual(result.denoised, next);
        if (!result.residual_variances.empty()) {
            const double prev = result.residual_variances.back();
            if (resid_var > prev) break;  // discard the worsening iteration
            result.denoised = next;
            result.models.push_back(model);
            result.residual_variances.push_back(resid_var);
            if (prev - resid_var < refine.min_residual_delta) break;
        } else {
            result.denoised = next;
            result.models.push_back(model);
            result.residual_variances.push_back(resid_var);
        }
    }
    return result;
}

std::string ar_model_to_record(const ARModel& model) {
    std::string record = std::to_string(model.order);
    for (double c : model.coeffs) record += ", " + format_double(c);
    record += ", " + format_double(model.innovation_variance);
    return record;
}

ARModel ar_model_from_record(const std::string& record) {
    std::vector<std::string> fields;
    std::stringstream ss(record);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() < 2) throw DataError("ar model record: too few fields");
    ARModel model;
    try {
        model.order = std::stoi(fields[0]);
    } catch (const std::exception&) {
        throw DataError("ar model record: bad order field");
    }
    if (model.order < 0 || fields.size() != static_cast<std::size_t>(model.order) + 2) {
        throw DataError("ar model record: field count does not match order");
    }
    for (int i = 1; i <= model.order; ++i) {
        model.coeffs.push_back(parse_double(fields[static_cast<std::size_t>(i)]));
    }
    model.innovation_variance = parse_double(fields.back());
    return model;
}

}  // namespace vclean
