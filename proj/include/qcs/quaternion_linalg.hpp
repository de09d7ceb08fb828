#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qcs/quaternion.hpp"

namespace qcs {

/// Fixed-length vector of quaternions.
class QVector {
  public:
    QVector() = default;
    explicit QVector(std::size_t length) : entries_(length) {}
    explicit QVector(std::vector<Quaternion> entries) : entries_(std::move(entries)) {}

    std::size_t size() const { return entries_.size(); }
    Quaternion& operator[](std::size_t r) { return entries_.at(r); }
    const Quaternion& operator[](std::size_t r) const { return entries_.at(r); }

    auto begin() const { return entries_.begin(); }
    auto end() const { return entries_.end(); }

    bool operator==(const QVector&) const = default;

    friend QVector operator-(const QVector& a, const QVector& b) {
        if (a.size() != b.size()) {
            throw std::invalid_argument("QVector: length mismatch");
        }
        QVector d(a.size());
        for (std::size_t r = 0; r < a.size(); ++r) d[r] = a[r] - b[r];
        return d;
    }

  private:
    std::vector<Quaternion> entries_;
};

/// Dense quaternion matrix, row-major.
class QMatrix {
  public:
    QMatrix() = default;
    QMatrix(std::size_t rows, std::size_t cols)
        : rows_(rows), cols_(cols), entries_(rows * cols) {}

    static QMatrix identity(std::size_t n) {
        QMatrix eye(n, n);
        for (std::size_t i = 0; i < n; ++i) eye(i, i) = Quaternion(1.0);
        return eye;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    Quaternion& operator()(std::size_t i, std::size_t r) { return entries_.at(i * cols_ + r); }
    const Quaternion& operator()(std::size_t i, std::size_t r) const {
        return entries_.at(i * cols_ + r);
    }

    bool operator==(const QMatrix&) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<Quaternion> entries_;
};

/// y = A * x with Hamilton products, matrix entry on the left of the signal entry.
inline QVector operator*(const QMatrix& A, const QVector& x) {
    if (A.cols() != x.size()) {
        throw std::invalid_argument("QMatrix * QVector: dimension mismatch");
    }
    QVector y(A.rows());
    for (std::size_t i = 0; i < A.rows(); ++i) {
        Quaternion acc;
        for (std::size_t r = 0; r < A.cols(); ++r) acc += A(i, r) * x[r];
        y[i] = acc;
    }
    return y;
}

/// l_p norm of a quaternion vector, p in {1, 2}:  (sum_r |x_r|^p)^(1/p).
inline double lp_norm(const QVector& x, int p) {
    if (p != 1 && p != 2) {
        throw std::invalid_argument("lp_norm: p must be 1 or 2");
    }
    double acc = 0.0;
    for (const Quaternion& q : x) {
        acc += (p == 1) ? modulus(q) : modulus_sq(q);
    }
    return (p == 1) ? acc : std::sqrt(acc);
}

}  // namespace qcs
