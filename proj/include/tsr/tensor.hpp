#pragma once

#include <algorithm>
#include <cassert>
#include <cstddef>
#include <span>
#include <vector>

namespace tsr {

/// Non-owning row-major view.
struct MatView {
    double* data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;

    double& operator()(std::size_t r, std::size_t c) const noexcept { return data[r * cols + c]; }
    [[nodiscard]] std::span<double> row(std::size_t r) const noexcept { return {data + r * cols, cols}; }
    [[nodiscard]] std::size_t size() const noexcept { return rows * cols; }
};

struct ConstMatView {
    const double* data = nullptr;
    std::size_t rows = 0;
    std::size_t cols = 0;

    ConstMatView() = default;
    ConstMatView(const double* d, std::size_t r, std::size_t c) : data(d), rows(r), cols(c) {}
    ConstMatView(const MatView& v) : data(v.data), rows(v.rows), cols(v.cols) {}  // NOLINT

    double operator()(std::size_t r, std::size_t c) const noexcept { return data[r * cols + c]; }
    [[nodiscard]] std::span<const double> row(std::size_t r) const noexcept { return {data + r * cols, cols}; }
    [[nodiscard]] std::size_t size() const noexcept { return rows * cols; }
};

/// Owning dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double value = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, value) {}

    [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
    [[nodiscard]] std::size_t cols() const noexcept { return cols_; }
    [[nodiscard]] std::size_t size() const noexcept { return data_.size(); }
    [[nodiscard]] double* data() noexcept { return data_.data(); }
    [[nodiscard]] const double* data() const noexcept { return data_.data(); }
    [[nodiscard]] std::span<double> values() noexcept { return data_; }
    [[nodiscard]] std::span<const double> values() const noexcept { return data_; }

    double& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }
    [[nodiscard]] std::span<double> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    [[nodiscard]] std::span<const double> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }

    /// Reshape keeping capacity; contents are zeroed.
    void reset(std::size_t rows, std::size_t cols) {
        rows_ = rows;
        cols_ = cols;
        data_.assign(rows * cols, 0.0);
    }
    void fill(double v) noexcept { std::fill(data_.begin(), data_.end(), v); }

    [[nodiscard]] MatView view() noexcept { return {data_.data(), rows_, cols_}; }
    [[nodiscard]] ConstMatView view() const noexcept { return {data_.data(), rows_, cols_}; }
    operator MatView() noexcept { return view(); }            // NOLINT
    operator ConstMatView() const noexcept { return view(); } // NOLINT

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

// Products through the dispatched kernels. C must already have the output
// shape; shapes are checked with assert only.

/// C (+)= A * B
void matmul(ConstMatView a, ConstMatView b, MatView c, bool accumulate = false);
/// C (+)= A * B^T
void matmul_nt(ConstMatView a, ConstMatView b, MatView c, bool accumulate = false);
/// C (+)= A^T * B
void matmul_tn(ConstMatView a, ConstMatView b, MatView c, bool accumulate = false);

} // namespace tsr
