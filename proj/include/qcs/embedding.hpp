#pragma once

#include <Eigen/Dense>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "qcs/quaternion_linalg.hpp"

namespace qcs {

/// Real cone-program data equivalent to  min ||x||_1  s.t.  y = A x  over
/// quaternions.  The real variable x_hat interleaves
/// (t_r, R(x_r), I(x_r), J(x_r), K(x_r)) per signal entry, and each 5-block
/// lives in a second-order cone so that |x_r| <= t_r.
struct EmbeddedProblem {
    Eigen::VectorXd c_hat;                // length 5m, one 1 at each block head
    Eigen::MatrixXd A_hat;                // 4n x 5m, block heads are zero columns
    Eigen::VectorXd y_hat;                // length 4n
    std::vector<Eigen::Index> cone_dims;  // m entries, all equal to 5
    std::size_t m = 0;                    // signal length
    std::size_t n = 0;                    // measurement count
};

/// The 4x4 real matrix M with vec4(q * x) = M * vec4(x) for every quaternion
/// x, where vec4 stacks components in the order (R, I, J, K).
inline Eigen::Matrix4d left_mult_block(const Quaternion& q) {
    const double a = q.re, b = q.im_i, c = q.im_j, d = q.im_k;
    Eigen::Matrix4d blk;
    blk << a, -b, -c, -d,
           b,  a, -d,  c,
           c,  d,  a, -b,
           d, -c,  b,  a;
    return blk;
}

/// Plane-major real embedding of a quaternion vector:
/// [R(v); I(v); J(v); K(v)], each plane of length v.size().
inline Eigen::VectorXd embed_vec4(const QVector& v) {
    const Eigen::Index len = static_cast<Eigen::Index>(v.size());
    Eigen::VectorXd out(4 * len);
    for (Eigen::Index r = 0; r < len; ++r) {
        const Quaternion& q = v[static_cast<std::size_t>(r)];
        out(r) = q.re;
        out(len + r) = q.im_i;
        out(2 * len + r) = q.im_j;
        out(3 * len + r) = q.im_k;
    }
    return out;
}

/// Builds the full real cone program for the instance (A, y).  Row blocks of
/// A_hat follow the plane-major layout of embed_vec4, so that
/// A_hat * x_hat == embed_vec4(A * x) whenever x_hat interleaves x with any
/// block heads (the head columns are identically zero).
inline EmbeddedProblem build_socp(const QMatrix& A, const QVector& y) {
    if (A.rows() != y.size()) {
        throw std::invalid_argument("build_socp: A.rows() must equal y.size()");
    }
    if (A.rows() == 0 || A.cols() == 0) {
        throw std::invalid_argument("build_socp: empty instance");
    }
    const std::size_t n = A.rows();
    const std::size_t m = A.cols();

    EmbeddedProblem out;
    out.m = m;
    out.n = n;
    out.c_hat = Eigen::VectorXd::Zero(5 * static_cast<Eigen::Index>(m));
    out.y_hat = embed_vec4(y);
    out.A_hat = Eigen::MatrixXd::Zero(4 * static_cast<Eigen::Index>(n),
                                      5 * static_cast<Eigen::Index>(m));
    out.cone_dims.assign(m, 5);

    for (std::size_t r = 0; r < m; ++r) {
        out.c_hat(5 * static_cast<Eigen::Index>(r)) = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const Eigen::Matrix4d blk = left_mult_block(A(i, r));
            for (int plane = 0; plane < 4; ++plane) {
                const Eigen::Index row =
                    static_cast<Eigen::Index>(plane) * static_cast<Eigen::Index>(n) +
                    static_cast<Eigen::Index>(i);
                out.A_hat.block<1, 4>(row, 5 * static_cast<Eigen::Index>(r) + 1) =
                    blk.row(plane);
            }
        }
    }
    return out;
}

/// Packs (t, x) into the interleaved variable layout; inverse of
/// extract_solution.
inline Eigen::VectorXd interleave_solution(const Eigen::VectorXd& t, const QVector& x) {
    if (t.size() != static_cast<Eigen::Index>(x.size())) {
        throw std::invalid_argument("interleave_solution: length mismatch");
    }
    Eigen::VectorXd x_hat(5 * t.size());
    for (Eigen::Index r = 0; r < t.size(); ++r) {
        const Quaternion& q = x[static_cast<std::size_t>(r)];
        x_hat(5 * r + 0) = t(r);
        x_hat(5 * r + 1) = q.re;
        x_hat(5 * r + 2) = q.im_i;
        x_hat(5 * r + 3) = q.im_j;
        x_hat(5 * r + 4) = q.im_k;
    }
    return x_hat;
}

struct ExtractedSolution {
    QVector x;
    Eigen::VectorXd t;
};

/// De-interleaves a real solution vector of length 5m into the quaternion
/// signal and the per-entry bound variables.
inline ExtractedSolution extract_solution(const Eigen::VectorXd& x_hat, std::size_t m) {
    if (x_hat.size() != 5 * static_cast<Eigen::Index>(m)) {
        throw std::invalid_argument("extract_solution: length must be 5*m");
    }
    ExtractedSolution out{QVector(m), Eigen::VectorXd(static_cast<Eigen::Index>(m))};
    for (Eigen::Index r = 0; r < static_cast<Eigen::Index>(m); ++r) {
        out.t(r) = x_hat(5 * r + 0);
        out.x[static_cast<std::size_t>(r)] =
            Quaternion(x_hat(5 * r + 1), x_hat(5 * r + 2), x_hat(5 * r + 3), x_hat(5 * r + 4));
    }
    return out;
}

}  // namespace qcs
