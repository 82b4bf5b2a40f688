#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace vclean {

// Dense row-major matrix of doubles. The whole project uses the row-vector
// convention: activations are rows, data flows as x * W.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n);

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }

    bool operator==(const Matrix& other) const = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// C = A * B. Per output element the sum over the inner dimension runs in
// ascending index order, so results are bit-stable for identical inputs.
// Throws ShapeError on a.cols != b.rows, NumericError if the product is
// not finite.
Matrix matmul(const Matrix& a, const Matrix& b);

// Row-wise softmax with max subtraction; each output row sums to 1.
Matrix softmax_rows(const Matrix& m);

// Per-row cache of a layer_norm application, needed by the backward pass.
struct LayerNormCache {
    std::vector<double> xhat;  // (x - mean) / sqrt(var + eps)
    double inv_sigma = 0.0;    // 1 / sqrt(var + eps)
};

// y = gamma * (x - mean) / sqrt(var + eps) + beta, population variance.
// When `cache` is given the normalized row and 1/sigma are stored for reuse.
std::vector<double> layer_norm(std::span<const double> x,
                               std::span<const double> gamma,
                               std::span<const double> beta, double eps,
                               LayerNormCache* cache = nullptr);

// Elementwise max(x, 0).
std::vector<double> relu(std::span<const double> x);

// Row-vector affine map: x * w + b, with x of length w.rows().
std::vector<double> affine(std::span<const double> x, const Matrix& w,
                           std::span<const double> b);

// Throws NumericError naming `what` if any entry is NaN or Inf.
void check_finite(std::span<const double> values, const char* what);
void check_finite(const Matrix& m, const char* what);

}  // namespace vclean
