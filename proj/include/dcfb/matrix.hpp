#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace dcfb {

// Dense row-major matrix of doubles. Columns are samples throughout the
// code base (a batch of k patches is an n^2 x k matrix).
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double value = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, value) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    std::size_t size() const { return data_.size(); }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    double* row(std::size_t r) { return data_.data() + r * cols_; }
    const double* row(std::size_t r) const { return data_.data() + r * cols_; }

    std::span<double> data() { return data_; }
    std::span<const double> data() const { return data_; }

    void fill(double value) { data_.assign(data_.size(), value); }

    bool same_shape(const Matrix& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_;
    }

    std::vector<double> column(std::size_t c) const {
        std::vector<double> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
        return out;
    }

    void set_column(std::size_t c, std::span<const double> values) {
        for (std::size_t r = 0; r < rows_; ++r) (*this)(r, c) = values[r];
    }

    // Copies column `src` of `from` into column `dst` of this matrix.
    void copy_column_from(const Matrix& from, std::size_t src, std::size_t dst) {
        for (std::size_t r = 0; r < rows_; ++r) (*this)(r, dst) = from(r, src);
    }

private:
    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

// a (r x k) * b (k x c) -> (r x c)
Matrix matmul(const Matrix& a, const Matrix& b);

// a^T (k x r -> r x k) * b (k x c) -> (r x c); a is given untransposed.
Matrix matmul_transpose_a(const Matrix& a, const Matrix& b);

// a (r x k) * b^T (c x k -> k x c) -> (r x c); b is given untransposed.
Matrix matmul_transpose_b(const Matrix& a, const Matrix& b);

bool all_finite(const Matrix& m);

} // namespace dcfb
