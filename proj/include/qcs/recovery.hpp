#pragma once

#include <chrono>
#include <optional>
#include <stdexcept>

#include "qcs/embedding.hpp"
#include "qcs/socp.hpp"

namespace qcs {

/// Recovery counts as perfect when the l2 error does not exceed this bound.
inline constexpr double kPerfectRecoveryThreshold = 1e-8;

struct RecoveryResult {
    QVector x_recovered;
    std::optional<double> error_l2;  // filled only when a ground truth is known
    SolveStatus solver_status = SolveStatus::NumericalFailure;
    double objective = 0.0;  // achieved ||x_recovered||_1
    std::chrono::duration<double, std::milli> solve_time{0.0};
};

/// ||x_r - x_true||_2 over the quaternion entries.
inline double recovery_error(const QVector& x_r, const QVector& x_true) {
    return lp_norm(x_r - x_true, 2);
}

inline bool is_perfect(double error) { return error <= kPerfectRecoveryThreshold; }

/// Solves  min ||x||_1  s.t.  y = A x  by embedding the instance as a real
/// second-order cone program and running the interior-point solver.  A
/// non-Optimal solver status is reported in the result together with the
/// last iterate, so callers can count failures.
inline RecoveryResult l1_minimize(const QMatrix& A, const QVector& y,
                                  const SolverOptions& opts = {}) {
    if (A.rows() != y.size()) {
        throw std::invalid_argument("l1_minimize: A.rows() must equal y.size()");
    }
    const auto start = std::chrono::steady_clock::now();

    RecoveryResult result;
    bool y_is_zero = true;
    for (const Quaternion& q : y) {
        if (modulus_sq(q) != 0.0) {
            y_is_zero = false;
            break;
        }
    }
    if (y_is_zero) {
        // Zero is feasible with the minimal possible l1 norm; nothing to solve.
        result.x_recovered = QVector(A.cols());
        result.solver_status = SolveStatus::Optimal;
        result.objective = 0.0;
        result.solve_time = std::chrono::steady_clock::now() - start;
        return result;
    }

    EmbeddedProblem embedded = build_socp(A, y);
    SocpProblem prob{std::move(embedded.c_hat), std::move(embedded.A_hat),
                     std::move(embedded.y_hat), std::move(embedded.cone_dims)};
    const SocpSolution sol = solve(prob, opts);

    result.x_recovered = extract_solution(sol.x, A.cols()).x;
    result.solver_status = sol.status;
    result.objective = lp_norm(result.x_recovered, 1);
    result.solve_time = std::chrono::steady_clock::now() - start;
    return result;
}

}  // namespace qcs
