#include "dcfb/matrix.hpp"

#include <cmath>

#include "dcfb/errors.hpp"

namespace dcfb {

// All three products accumulate over the contraction index in ascending
// order, so a given output entry is bit-identical no matter how the other
// columns are batched.

Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) {
        throw InputError("matmul: inner dimensions differ (" + std::to_string(a.cols()) +
                         " vs " + std::to_string(b.rows()) + ")");
    }
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        double* crow = c.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const double aik = a(i, k);
            const double* brow = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aik * brow[j];
        }
    }
    return c;
}

Matrix matmul_transpose_a(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw InputError("matmul_transpose_a: contraction dimensions differ");
    }
    Matrix c(a.cols(), b.cols());
    for (std::size_t k = 0; k < a.rows(); ++k) {
        const double* arow = a.row(k);
        const double* brow = b.row(k);
        for (std::size_t i = 0; i < a.cols(); ++i) {
            const double aki = arow[i];
            double* crow = c.row(i);
            for (std::size_t j = 0; j < b.cols(); ++j) crow[j] += aki * brow[j];
        }
    }
    return c;
}

Matrix matmul_transpose_b(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) {
        throw InputError("matmul_transpose_b: contraction dimensions differ");
    }
    Matrix c(a.rows(), b.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const double* arow = a.row(i);
        double* crow = c.row(i);
        for (std::size_t j = 0; j < b.rows(); ++j) {
            const double* brow = b.row(j);
            double sum = 0.0;
            for (std::size_t k = 0; k < a.cols(); ++k) sum += arow[k] * brow[k];
            crow[j] = sum;
        }
    }
    return c;
}

bool all_finite(const Matrix& m) {
    for (double v : m.data()) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

} // namespace dcfb
