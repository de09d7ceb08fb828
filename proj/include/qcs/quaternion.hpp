#pragma once

#include <cmath>
#include <stdexcept>

namespace qcs {

/// A quaternion q = re + im_i*i + im_j*j + im_k*k over double-precision reals.
///
/// Multiplication follows the Hamilton rules i^2 = j^2 = k^2 = -1,
/// ij = -ji = k, jk = -kj = i, ki = -ik = j, and is therefore
/// non-commutative.  Constructors reject non-finite components so that
/// downstream numeric code can rely on clean inputs.
struct Quaternion {
    double re = 0.0;
    double im_i = 0.0;
    double im_j = 0.0;
    double im_k = 0.0;

    Quaternion() = default;

    Quaternion(double re_, double im_i_, double im_j_, double im_k_)
        : re(re_), im_i(im_i_), im_j(im_j_), im_k(im_k_) {
        if (!std::isfinite(re) || !std::isfinite(im_i) ||
            !std::isfinite(im_j) || !std::isfinite(im_k)) {
            throw std::invalid_argument("Quaternion: non-finite component");
        }
    }

    /// Real quaternion (imaginary parts zero).
    explicit Quaternion(double re_) : Quaternion(re_, 0.0, 0.0, 0.0) {}

    bool operator==(const Quaternion&) const = default;

    Quaternion& operator+=(const Quaternion& q) {
        return *this = Quaternion(re + q.re, im_i + q.im_i, im_j + q.im_j, im_k + q.im_k);
    }
    Quaternion& operator-=(const Quaternion& q) {
        return *this = Quaternion(re - q.re, im_i - q.im_i, im_j - q.im_j, im_k - q.im_k);
    }

    friend Quaternion operator+(Quaternion p, const Quaternion& q) { return p += q; }
    friend Quaternion operator-(Quaternion p, const Quaternion& q) { return p -= q; }
    friend Quaternion operator-(const Quaternion& q) {
        return Quaternion(-q.re, -q.im_i, -q.im_j, -q.im_k);
    }
    friend Quaternion operator*(double a, const Quaternion& q) {
        return Quaternion(a * q.re, a * q.im_i, a * q.im_j, a * q.im_k);
    }
    friend Quaternion operator*(const Quaternion& q, double a) { return a * q; }

    /// Hamilton product.  Order matters: p * q != q * p in general.
    friend Quaternion operator*(const Quaternion& p, const Quaternion& q) {
        return Quaternion(
            p.re * q.re - p.im_i * q.im_i - p.im_j * q.im_j - p.im_k * q.im_k,
            p.re * q.im_i + p.im_i * q.re + p.im_j * q.im_k - p.im_k * q.im_j,
            p.re * q.im_j - p.im_i * q.im_k + p.im_j * q.re + p.im_k * q.im_i,
            p.re * q.im_k + p.im_i * q.im_j - p.im_j * q.im_i + p.im_k * q.re);
    }
};

/// Conjugate: negates the three imaginary parts.
inline Quaternion conj(const Quaternion& q) {
    return Quaternion(q.re, -q.im_i, -q.im_j, -q.im_k);
}

inline double modulus_sq(const Quaternion& q) {
    return q.re * q.re + q.im_i * q.im_i + q.im_j * q.im_j + q.im_k * q.im_k;
}

/// Modulus |q| = sqrt(re^2 + im_i^2 + im_j^2 + im_k^2).
inline double modulus(const Quaternion& q) { return std::sqrt(modulus_sq(q)); }

}  // namespace qcs
