#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "dygcn/core.hpp"

namespace dygcn {

// Dense row-major matrix of doubles. Embeddings are row vectors, so layer
// weights always multiply on the right: Z' = Z * W.
class Matrix {
  public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }
    bool empty() const { return data_.empty(); }

    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    std::span<double> row(std::size_t i) { return {data_.data() + i * cols_, cols_}; }
    std::span<const double> row(std::size_t i) const {
        return {data_.data() + i * cols_, cols_};
    }

    std::vector<double>& data() { return data_; }
    const std::vector<double>& data() const { return data_; }

    bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

    Matrix& operator+=(const Matrix& o) {
        require_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
        return *this;
    }
    Matrix& operator-=(const Matrix& o) {
        require_same_shape(o);
        for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= o.data_[i];
        return *this;
    }
    Matrix& operator*=(double s) {
        for (double& x : data_) x *= s;
        return *this;
    }

    friend Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
    friend Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }

    friend bool operator==(const Matrix& a, const Matrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
    }

    bool all_finite() const {
        for (double x : data_)
            if (!std::isfinite(x)) return false;
        return true;
    }

    double frobenius_norm() const {
        double s = 0.0;
        for (double x : data_) s += x * x;
        return std::sqrt(s);
    }

    double max_abs_diff(const Matrix& o) const {
        require_same_shape(o);
        double m = 0.0;
        for (std::size_t i = 0; i < data_.size(); ++i)
            m = std::max(m, std::abs(data_[i] - o.data_[i]));
        return m;
    }

  private:
    void require_same_shape(const Matrix& o) const {
        if (!same_shape(o)) throw contract_error("matrix shape mismatch");
    }

    std::size_t rows_ = 0, cols_ = 0;
    std::vector<double> data_;
};

inline Matrix matmul(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.rows()) throw contract_error("matmul: inner dimension mismatch");
    Matrix c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t k = 0; k < a.cols(); ++k) {
            double aik = a(i, k);
            if (aik == 0.0) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    }
    return c;
}

inline Matrix transpose(const Matrix& a) {
    Matrix t(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) t(j, i) = a(i, j);
    return t;
}

// dst += outer(a, b), i.e. dst[i][j] += a[i] * b[j].
inline void add_outer(Matrix& dst, std::span<const double> a, std::span<const double> b) {
    if (dst.rows() != a.size() || dst.cols() != b.size())
        throw contract_error("add_outer: shape mismatch");
    for (std::size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0.0) continue;
        for (std::size_t j = 0; j < b.size(); ++j) dst(i, j) += a[i] * b[j];
    }
}

// out = row * W (row-vector times matrix).
inline void row_times_matrix(std::span<const double> row, const Matrix& w,
                             std::span<double> out) {
    if (row.size() != w.rows() || out.size() != w.cols())
        throw contract_error("row_times_matrix: shape mismatch");
    for (std::size_t j = 0; j < out.size(); ++j) out[j] = 0.0;
    for (std::size_t k = 0; k < row.size(); ++k) {
        double rk = row[k];
        if (rk == 0.0) continue;
        for (std::size_t j = 0; j < out.size(); ++j) out[j] += rk * w(k, j);
    }
}

inline double max_abs_diff(const Matrix& a, const Matrix& b) { return a.max_abs_diff(b); }

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline Matrix apply_activation(Activation act, Matrix m) {
    if (act == Activation::identity) return m;
    for (double& x : m.data()) x = activate(act, x);
    return m;
}

}  // namespace dygcn
