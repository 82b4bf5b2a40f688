#include "vclean/matrix.hpp"

#include <cmath>
#include <string>

#include "vclean/errors.hpp"

namespace vclean {

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw ShapeError("matmul: shape mismatch " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " * " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
    }
    Matrix c(a.rows(), b.cols());
    // ikj order: the j loop runs over contiguous memory, and each output
    // element still accumulates over k in ascending order.
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* crow = c.data() + i * c.cols();
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            const double* brow = b.data() + k * b.cols();
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
        }
    }
    check_finite(c, "matmul result");
    return c;
}

Matrix softmax_rows(const Matrix& m) {
    Matrix out(m.rows(), m.cols());
    for (std::size_t i = 0; i < m.rows(); ++i) {
        double row_max = m(i, 0);
        for (std::size_t j = 1; j < m.cols(); ++j) row_max = std::max(row_max, m(i, j));
        double sum = 0.0;
        for (std::size_t j = 0; j < m.cols(); ++j) {
            out(i, j) = std::exp(m(i, j) - row_max);
            sum += out(i, j);
        }
        for (std::size_t j = 0; j < m.cols(); ++j) out(i, j) /= sum;
    }
    return out;
}

std::vector<double> layer_norm(std::span<const double> x, std::span<const double> gamma,
                               std::span<const double> beta, double eps, LayerNormCache* cache) {
    const std::size_t n = x.size();
    if (gamma.size() != n || beta.size() != n) {
        throw ShapeError("layer_norm: gamma/beta length does not match input");
    }
    if (n == 0) throw ShapeError("layer_norm: empty input");
    if (!(eps > 0.0)) throw DataError("layer_norm: eps must be positive");

    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double v : x) var += (v - mean) * (v - mean);
    var /= static_cast<double>(n);
    const double inv_sigma = 1.0 / std::sqrt(var + eps);

    std::vector<double> y(n);
    if (cache) {
        cache->xhat.resize(n);
        cache->inv_sigma = inv_sigma;
    }
    for (std::size_t i = 0; i < n; ++i) {
        const double xhat = (x[i] - mean) * inv_sigma;
        if (cache) cache->xhat[i] = xhat;
        y[i] = gamma[i] * xhat + beta[i];
    }
    return y;
}

std::vector<double> relu(std::span<const double> x) {
    std::vector<double> y(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) y[i] = x[i] > 0.0 ? x[i] : 0.0;
    return y;
}

std::vector<double> affine(std::span<const double> x, const Matrix& w,
                           std::span<const double> b) {
    if (x.size() != w.rows() || b.size() != w.cols()) {
        throw ShapeError("affine: input/bias length does not match weight shape");
    }
    std::vector<double> y(b.begin(), b.end());
    for (std::size_t k = 0; k < w.rows(); ++k) {
        const double xk = x[k];
        const double* wrow = w.data() + k * w.cols();
        for (std::size_t j = 0; j < w.cols(); ++j) y[j] += xk * wrow[j];
    }
    return y;
}

void check_finite(std::span<const double> values, const char* what) {
    for (double v : values) {
        if (!std::isfinite(v)) {
            throw NumericError(std::string(what) + ": non-finite value encountered");
        }
    }
}

void check_finite(const Matrix& m, const char* what) {
    check_finite(std::span<const double>(m.data(), m.size()), what);
}

}  // namespace vclean
