#pragma once

#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <stdexcept>
#include <thread>
#include <vector>

#include "qcs/recovery.hpp"
#include "qcs/rng.hpp"

namespace qcs {

/// One planted-sparse-signal recovery experiment.
struct TrialSpec {
    std::size_t m = 0;        // signal length
    std::size_t n = 0;        // measurement count
    std::size_t s = 0;        // sparsity (support size)
    std::uint64_t seed = 0;

    void validate() const {
        if (m < 1 || n < 1 || n > m || s > m) {
            throw std::invalid_argument("TrialSpec: need 1 <= n <= m and 0 <= s <= m");
        }
    }
};

struct TrialResult {
    TrialSpec spec;
    double error_l2 = 0.0;
    bool perfect = false;
    SolveStatus solver_status = SolveStatus::NumericalFailure;
    std::chrono::duration<double, std::milli> solve_time{0.0};
};

struct SweepCell {
    std::size_t n = 0;
    std::size_t s = 0;
    int successes = 0;
    double success_rate = 0.0;
    double mean_error = 0.0;
    double mean_solve_ms = 0.0;
};

/// Success-rate table over an (n, s) grid; rows are n-major in the order of
/// n_values x s_values.
struct SweepGrid {
    std::size_t m = 0;
    std::vector<std::size_t> n_values;
    std::vector<std::size_t> s_values;
    int trials_per_cell = 0;
    std::uint64_t base_seed = 0;
    std::vector<SweepCell> cells;

    const SweepCell& cell(std::size_t n, std::size_t s) const {
        for (const SweepCell& c : cells) {
            if (c.n == n && c.s == s) return c;
        }
        throw std::invalid_argument("SweepGrid: no such cell");
    }
};

/// Random Gaussian quaternion measurement matrix: every entry has four
/// i.i.d. N(0, 1/4) components, so E|q|^2 = 1.
inline QMatrix gen_measurement_matrix(std::size_t n, std::size_t m, CounterRng& rng) {
    if (n < 1 || m < 1 || n > m) {
        throw std::invalid_argument("gen_measurement_matrix: need 1 <= n <= m");
    }
    QMatrix A(n, m);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t r = 0; r < m; ++r) {
            A(i, r) = Quaternion(0.5 * rng.next_normal(), 0.5 * rng.next_normal(),
                                 0.5 * rng.next_normal(), 0.5 * rng.next_normal());
        }
    }
    return A;
}

struct SparseSignal {
    QVector x;
    std::vector<std::size_t> support;  // ascending indices, exactly s of them
};

/// Sparse quaternion signal: support of size s drawn uniformly without
/// replacement (partial Fisher-Yates), Gaussian entries on the support,
/// exact zeros elsewhere.
inline SparseSignal gen_sparse_signal(std::size_t m, std::size_t s, CounterRng& rng) {
    if (s > m) {
        throw std::invalid_argument("gen_sparse_signal: s must not exceed m");
    }
    std::vector<std::size_t> indices(m);
    for (std::size_t i = 0; i < m; ++i) indices[i] = i;
    for (std::size_t i = 0; i < s; ++i) {
        const std::size_t j = i + static_cast<std::size_t>(rng.next_below(m - i));
        std::swap(indices[i], indices[j]);
    }
    SparseSignal out{QVector(m), {indices.begin(), indices.begin() + static_cast<std::ptrdiff_t>(s)}};
    std::sort(out.support.begin(), out.support.end());
    for (std::size_t idx : out.support) {
        out.x[idx] = Quaternion(0.5 * rng.next_normal(), 0.5 * rng.next_normal(),
                                0.5 * rng.next_normal(), 0.5 * rng.next_normal());
    }
    return out;
}

/// Pure function mapping a sweep coordinate to its per-trial seed, so any
/// single cell can be reproduced without running the rest of the grid.
inline std::uint64_t trial_seed(std::uint64_t base_seed, std::size_t m, std::size_t n,
                                std::size_t s, int trial_index) {
    return derive_seed(base_seed, {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(n),
                                   static_cast<std::uint64_t>(s),
                                   static_cast<std::uint64_t>(trial_index)});
}

/// Generates one instance from the spec's seed, measures it, recovers it,
/// and scores the outcome against the planted signal.
inline TrialResult run_trial(const TrialSpec& spec, const SolverOptions& opts = {}) {
    spec.validate();
    CounterRng rng_matrix(derive_seed(spec.seed, {1}));
    CounterRng rng_signal(derive_seed(spec.seed, {2}));

    const QMatrix A = gen_measurement_matrix(spec.n, spec.m, rng_matrix);
    const SparseSignal planted = gen_sparse_signal(spec.m, spec.s, rng_signal);
    const QVector y = A * planted.x;

    const RecoveryResult rec = l1_minimize(A, y, opts);

    TrialResult result;
    result.spec = spec;
    result.error_l2 = recovery_error(rec.x_recovered, planted.x);
    result.perfect = rec.solver_status == SolveStatus::Optimal && is_perfect(result.error_l2);
    result.solver_status = rec.solver_status;
    result.solve_time = rec.solve_time;
    return result;
}

namespace detail {

inline unsigned sweep_workers(unsigned requested) {
    if (requested > 0) return requested;
    if (const char* env = std::getenv("QCS_THREADS")) {
        const long parsed = std::strtol(env, nullptr, 10);
        if (parsed >= 1) return static_cast<unsigned>(parsed);
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw > 0 ? hw : 1;
}

}  // namespace detail

/// Runs trials_per_cell seeded trials for every (n, s) cell.  Trials are
/// independent and may run on several workers; per-trial seeding makes the
/// result identical regardless of execution order or parallelism.  When
/// trial_log is given it receives every TrialResult in (cell, trial) order.
inline SweepGrid sweep(std::size_t m, std::vector<std::size_t> n_values,
                       std::vector<std::size_t> s_values, int trials_per_cell,
                       std::uint64_t base_seed, const SolverOptions& opts = {},
                       unsigned workers = 0, std::vector<TrialResult>* trial_log = nullptr) {
    if (n_values.empty() || s_values.empty() || trials_per_cell < 1) {
        throw std::invalid_argument("sweep: need non-empty value lists and trials >= 1");
    }
    std::sort(n_values.begin(), n_values.end());
    n_values.erase(std::unique(n_values.begin(), n_values.end()), n_values.end());
    std::sort(s_values.begin(), s_values.end());
    s_values.erase(std::unique(s_values.begin(), s_values.end()), s_values.end());
    for (std::size_t n : n_values) {
        for (std::size_t s : s_values) {
            TrialSpec{m, n, s, 0}.validate();
        }
    }

    SweepGrid grid;
    grid.m = m;
    grid.n_values = n_values;
    grid.s_values = s_values;
    grid.trials_per_cell = trials_per_cell;
    grid.base_seed = base_seed;

    const std::size_t n_cells = n_values.size() * s_values.size();
    const std::size_t n_tasks = n_cells * static_cast<std::size_t>(trials_per_cell);
    std::vector<TrialResult> results(n_tasks);

    const auto run_task = [&](std::size_t task) {
        const std::size_t cell = task / static_cast<std::size_t>(trials_per_cell);
        const int trial = static_cast<int>(task % static_cast<std::size_t>(trials_per_cell));
        const std::size_t n = n_values[cell / s_values.size()];
        const std::size_t s = s_values[cell % s_values.size()];
        const TrialSpec spec{m, n, s, trial_seed(base_seed, m, n, s, trial)};
        results[task] = run_trial(spec, opts);
    };

    const unsigned n_workers =
        std::min<unsigned>(detail::sweep_workers(workers), static_cast<unsigned>(n_tasks));
    if (n_workers <= 1) {
        for (std::size_t task = 0; task < n_tasks; ++task) run_task(task);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(n_workers);
        for (unsigned w = 0; w < n_workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t task = next.fetch_add(1); task < n_tasks;
                     task = next.fetch_add(1)) {
                    run_task(task);
                }
            });
        }
        for (std::thread& t : pool) t.join();
    }

    grid.cells.resize(n_cells);
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
        SweepCell& c = grid.cells[cell];
        c.n = n_values[cell / s_values.size()];
        c.s = s_values[cell % s_values.size()];
        double err_sum = 0.0, ms_sum = 0.0;
        for (int trial = 0; trial < trials_per_cell; ++trial) {
            const TrialResult& r =
                results[cell * static_cast<std::size_t>(trials_per_cell) +
                        static_cast<std::size_t>(trial)];
            c.successes += r.perfect ? 1 : 0;
            err_sum += r.error_l2;
            ms_sum += r.solve_time.count();
        }
        c.success_rate = static_cast<double>(c.successes) / static_cast<double>(trials_per_cell);
        c.mean_error = err_sum / static_cast<double>(trials_per_cell);
        c.mean_solve_ms = ms_sum / static_cast<double>(trials_per_cell);
    }
    if (trial_log != nullptr) *trial_log = std::move(results);
    return grid;
}

/// The success-rate row of the grid at a fixed n, ordered by s.
inline std::vector<std::pair<std::size_t, double>> cross_section(const SweepGrid& grid,
                                                                 std::size_t n) {
    if (std::find(grid.n_values.begin(), grid.n_values.end(), n) == grid.n_values.end()) {
        throw std::invalid_argument("cross_section: n is not part of the grid");
    }
    std::vector<std::pair<std::size_t, double>> row;
    row.reserve(grid.s_values.size());
    for (std::size_t s : grid.s_values) {
        row.emplace_back(s, grid.cell(n, s).success_rate);
    }
    return row;
}

}  // namespace qcs
