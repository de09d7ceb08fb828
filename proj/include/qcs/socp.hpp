#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace qcs {

/// Standard-form cone program:
///
///   minimize    c' x
///   subject to  A_eq x = b,   x in K_1 x ... x K_r,
///
/// where each block K_i is the nonnegative half-line (size 1) or the
/// second-order cone { (u0, u_bar) : ||u_bar||_2 <= u0 } (size >= 2).
struct SocpProblem {
    Eigen::VectorXd c;
    Eigen::MatrixXd A_eq;
    Eigen::VectorXd b;
    std::vector<Eigen::Index> cones;

    void validate() const {
        if (A_eq.cols() != c.size() || A_eq.rows() != b.size()) {
            throw std::invalid_argument("SocpProblem: inconsistent dimensions");
        }
        if (!c.allFinite() || !b.allFinite() || !A_eq.allFinite()) {
            throw std::invalid_argument("SocpProblem: non-finite data");
        }
        Eigen::Index total = 0;
        for (Eigen::Index d : cones) {
            if (d < 1) throw std::invalid_argument("SocpProblem: cone size must be >= 1");
            total += d;
        }
        if (total != c.size()) {
            throw std::invalid_argument("SocpProblem: cone sizes must sum to the variable count");
        }
    }
};

enum class SolveStatus {
    Optimal,
    MaxIterations,
    PrimalInfeasible,
    DualInfeasible,
    NumericalFailure,
};

inline const char* to_string(SolveStatus s) {
    switch (s) {
        case SolveStatus::Optimal: return "Optimal";
        case SolveStatus::MaxIterations: return "MaxIterations";
        case SolveStatus::PrimalInfeasible: return "PrimalInfeasible";
        case SolveStatus::DualInfeasible: return "DualInfeasible";
        case SolveStatus::NumericalFailure: return "NumericalFailure";
    }
    return "Unknown";
}

struct SolverOptions {
    // Tolerances sit two decades under the 1e-8 perfect-recovery threshold;
    // at 1e-9 the recovery error straddles that threshold on m=256 instances.
    double tol_feas = 1e-10;
    double tol_gap = 1e-10;
    int max_iterations = 100;
    double step_fraction = 0.99;  // fraction-to-boundary factor

    void validate() const {
        if (!(tol_feas > 0.0) || !(tol_gap > 0.0)) {
            throw std::invalid_argument("SolverOptions: tolerances must be positive");
        }
        if (max_iterations < 1) {
            throw std::invalid_argument("SolverOptions: max_iterations must be >= 1");
        }
        if (!(step_fraction > 0.0) || !(step_fraction < 1.0)) {
            throw std::invalid_argument("SolverOptions: step_fraction must lie in (0,1)");
        }
    }
};

struct IterationStat {
    double mu;               // complementarity x's / (number of cones)
    double primal_residual;  // ||A x - b|| / (1 + ||b||)
    double dual_residual;    // ||A'y + s - c|| / (1 + ||c||)
    double step;             // step length taken to reach this iterate (0 for the start)
};

struct SocpSolution {
    Eigen::VectorXd x;
    Eigen::VectorXd y_dual;
    Eigen::VectorXd s;
    SolveStatus status = SolveStatus::NumericalFailure;
    double gap = 0.0;
    double primal_residual = 0.0;
    double dual_residual = 0.0;
    int iterations = 0;
    std::vector<IterationStat> trace;  // one entry per visited iterate
};

struct Residuals {
    double primal;
    double dual;
    double gap;
};

/// Recomputes the scaled KKT residuals of a candidate solution.
inline Residuals residuals(const SocpProblem& p, const SocpSolution& sol) {
    if (sol.x.size() != p.c.size() || sol.s.size() != p.c.size() ||
        sol.y_dual.size() != p.b.size()) {
        throw std::invalid_argument("residuals: dimension mismatch");
    }
    Residuals r;
    r.primal = (p.A_eq * sol.x - p.b).norm() / (1.0 + p.b.norm());
    r.dual = (p.A_eq.transpose() * sol.y_dual + sol.s - p.c).norm() / (1.0 + p.c.norm());
    r.gap = sol.x.dot(sol.s) / (1.0 + std::abs(p.c.dot(sol.x)));
    return r;
}

/// True iff every block of v satisfies its cone membership to tolerance:
/// u >= -tol for size-1 blocks, u0 >= ||u_bar|| - tol otherwise.
inline bool cone_membership(const Eigen::VectorXd& v, const std::vector<Eigen::Index>& cones,
                            double tol) {
    Eigen::Index total = 0;
    for (Eigen::Index d : cones) total += d;
    if (total != v.size()) {
        throw std::invalid_argument("cone_membership: cone sizes must sum to v.size()");
    }
    Eigen::Index off = 0;
    for (Eigen::Index d : cones) {
        if (d == 1) {
            if (v(off) < -tol) return false;
        } else {
            if (v(off) < v.segment(off + 1, d - 1).norm() - tol) return false;
        }
        off += d;
    }
    return true;
}

namespace detail {

// Per-block cone layout plus the Jordan-algebra primitives the solver needs.
struct ConeLayout {
    std::vector<Eigen::Index> dims;
    std::vector<Eigen::Index> offs;
    Eigen::Index total = 0;

    explicit ConeLayout(const std::vector<Eigen::Index>& cones) : dims(cones) {
        offs.reserve(dims.size());
        for (Eigen::Index d : dims) {
            offs.push_back(total);
            total += d;
        }
    }

    Eigen::Index blocks() const { return static_cast<Eigen::Index>(dims.size()); }

    // Identity element e (head 1 per block).
    Eigen::VectorXd identity() const {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(total);
        for (std::size_t k = 0; k < dims.size(); ++k) e(offs[k]) = 1.0;
        return e;
    }

    // Jordan product u o v.
    void jprod(const Eigen::VectorXd& u, const Eigen::VectorXd& v, Eigen::VectorXd& out) const {
        out.resize(total);
        for (std::size_t k = 0; k < dims.size(); ++k) {
            const Eigen::Index o = offs[k], d = dims[k];
            if (d == 1) {
                out(o) = u(o) * v(o);
            } else {
                const auto ub = u.segment(o + 1, d - 1);
                const auto vb = v.segment(o + 1, d - 1);
                out(o) = u.segment(o, d).dot(v.segment(o, d));
                out.segment(o + 1, d - 1) = u(o) * vb + v(o) * ub;
            }
        }
    }

    // Largest alpha >= 0 with u + alpha * du still in the cone (u strictly interior).
    double max_step(const Eigen::VectorXd& u, const Eigen::VectorXd& du) const {
        double alpha = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < dims.size(); ++k) {
            const Eigen::Index o = offs[k], d = dims[k];
            if (d == 1) {
                if (du(o) < 0.0) alpha = std::min(alpha, -u(o) / du(o));
                continue;
            }
            const auto ub = u.segment(o + 1, d - 1);
            const auto db = du.segment(o + 1, d - 1);
            const double qa = du(o) * du(o) - db.squaredNorm();
            const double qb = u(o) * du(o) - ub.dot(db);
            const double qc = u(o) * u(o) - ub.squaredNorm();
            // Smallest positive root of qc + 2 qb t + qa t^2, if any.
            double root = std::numeric_limits<double>::infinity();
            if (qa == 0.0) {
                if (qb < 0.0) root = -qc / (2.0 * qb);
            } else {
                const double disc = qb * qb - qa * qc;
                if (disc >= 0.0) {
                    const double sq = std::sqrt(disc);
                    const double q = -(qb + std::copysign(sq, qb));
                    const double r1 = (qa != 0.0) ? q / qa : std::numeric_limits<double>::infinity();
                    const double r2 = (q != 0.0) ? qc / q : std::numeric_limits<double>::infinity();
                    for (double r : {r1, r2}) {
                        if (r > 0.0) root = std::min(root, r);
                    }
                }
            }
            if (du(o) < 0.0) root = std::min(root, -u(o) / du(o));
            alpha = std::min(alpha, root);
        }
        return alpha;
    }
};

// Nesterov-Todd scaling W for the current (x, s), with W s = W^{-T} x = lambda.
// For each second-order cone block W = eta * (2 v v' - J) with v'Jv = 1 and
// J = diag(1, -1, ..., -1); for size-1 blocks W is the scalar sqrt(x/s).
struct NtScaling {
    const ConeLayout& layout;
    Eigen::VectorXd eta;     // one scalar per block
    Eigen::VectorXd v;       // packed Householder vectors (SOC blocks only)
    Eigen::VectorXd lambda;  // scaled point

    explicit NtScaling(const ConeLayout& lay)
        : layout(lay),
          eta(lay.blocks()),
          v(Eigen::VectorXd::Zero(lay.total)),
          lambda(lay.total) {}

    bool compute(const Eigen::VectorXd& x, const Eigen::VectorXd& s) {
        for (std::size_t k = 0; k < layout.dims.size(); ++k) {
            const Eigen::Index o = layout.offs[k], d = layout.dims[k];
            if (d == 1) {
                if (x(o) <= 0.0 || s(o) <= 0.0) return false;
                eta(static_cast<Eigen::Index>(k)) = std::sqrt(x(o) / s(o));
                lambda(o) = std::sqrt(x(o) * s(o));
                continue;
            }
            const auto xb = x.segment(o, d);
            const auto sb = s.segment(o, d);
            const double xres = xb(0) * xb(0) - xb.tail(d - 1).squaredNorm();
            const double sres = sb(0) * sb(0) - sb.tail(d - 1).squaredNorm();
            if (xres <= 0.0 || sres <= 0.0 || xb(0) <= 0.0 || sb(0) <= 0.0) return false;
            const double xnorm = std::sqrt(xres);
            const double snorm = std::sqrt(sres);
            eta(static_cast<Eigen::Index>(k)) = std::sqrt(xnorm / snorm);

            const Eigen::VectorXd xt = xb / xnorm;
            const Eigen::VectorXd st = sb / snorm;
            const double gamma = std::sqrt(0.5 * (1.0 + xt.dot(st)));

            // Normalized scaling point, then its Jordan square root: the
            // Householder form 2 v v' - J represents the quadratic map of v.
            const double w0 = (xt(0) + st(0)) / (2.0 * gamma);
            const double vscale = std::sqrt(2.0 * (1.0 + w0));
            v(o) = (w0 + 1.0) / vscale;
            v.segment(o + 1, d - 1) =
                (xt.tail(d - 1) - st.tail(d - 1)) / (2.0 * gamma * vscale);

            const double scale = std::sqrt(xnorm * snorm);
            const double denom = 2.0 * gamma + xt(0) + st(0);
            lambda(o) = scale * gamma;
            lambda.segment(o + 1, d - 1) =
                scale *
                ((gamma + st(0)) * xt.tail(d - 1) + (gamma + xt(0)) * st.tail(d - 1)) / denom;
        }
        return true;
    }

    // out = W * in
    void apply_w(const Eigen::VectorXd& in, Eigen::VectorXd& out) const {
        out.resize(layout.total);
        for (std::size_t k = 0; k < layout.dims.size(); ++k) {
            const Eigen::Index o = layout.offs[k], d = layout.dims[k];
            const double e = eta(static_cast<Eigen::Index>(k));
            if (d == 1) {
                out(o) = e * in(o);
                continue;
            }
            const auto vb = v.segment(o, d);
            const auto ib = in.segment(o, d);
            const double proj = 2.0 * vb.dot(ib);
            out.segment(o, d) = e * (proj * vb);
            out(o) -= e * ib(0);
            out.segment(o + 1, d - 1) += e * ib.tail(d - 1);
        }
    }

    // out = W^{-1} * in   (W is symmetric, so this is also W^{-T} * in)
    void apply_w_inv(const Eigen::VectorXd& in, Eigen::VectorXd& out) const {
        out.resize(layout.total);
        for (std::size_t k = 0; k < layout.dims.size(); ++k) {
            const Eigen::Index o = layout.offs[k], d = layout.dims[k];
            const double e = eta(static_cast<Eigen::Index>(k));
            if (d == 1) {
                out(o) = in(o) / e;
                continue;
            }
            // W^{-1} = (1/eta) * (2 (Jv)(Jv)' - J)
            const auto vb = v.segment(o, d);
            const auto ib = in.segment(o, d);
            double proj = vb(0) * ib(0) - vb.tail(d - 1).dot(ib.tail(d - 1));
            proj *= 2.0;
            out(o) = (proj * vb(0) - ib(0)) / e;
            out.segment(o + 1, d - 1) = (-proj * vb.tail(d - 1) + ib.tail(d - 1)) / e;
        }
    }

    // Solve lambda o u = d for u.
    void jdiv_lambda(const Eigen::VectorXd& d_in, Eigen::VectorXd& out) const {
        out.resize(layout.total);
        for (std::size_t k = 0; k < layout.dims.size(); ++k) {
            const Eigen::Index o = layout.offs[k], d = layout.dims[k];
            if (d == 1) {
                out(o) = d_in(o) / lambda(o);
                continue;
            }
            const auto lb = lambda.segment(o + 1, d - 1);
            const auto db = d_in.segment(o + 1, d - 1);
            const double det = lambda(o) * lambda(o) - lb.squaredNorm();
            const double u0 = (lambda(o) * d_in(o) - lb.dot(db)) / det;
            out(o) = u0;
            out.segment(o + 1, d - 1) = (db - u0 * lb) / lambda(o);
        }
    }

    // B = A * W, exploiting the block-diagonal structure of W.
    void right_multiply(const Eigen::MatrixXd& A, Eigen::MatrixXd& B) const {
        B.resize(A.rows(), A.cols());
        for (std::size_t k = 0; k < layout.dims.size(); ++k) {
            const Eigen::Index o = layout.offs[k], d = layout.dims[k];
            const double e = eta(static_cast<Eigen::Index>(k));
            if (d == 1) {
                B.col(o) = e * A.col(o);
                continue;
            }
            Eigen::MatrixXd wk = 2.0 * v.segment(o, d) * v.segment(o, d).transpose();
            wk(0, 0) -= 1.0;
            wk.diagonal().tail(d - 1).array() += 1.0;
            B.middleCols(o, d).noalias() = A.middleCols(o, d) * (e * wk);
        }
    }
};

struct PresolvedRows {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    std::vector<Eigen::Index> kept;
    Eigen::VectorXd multiplicity;  // duplicates folded into each kept row
    bool infeasible = false;
};

// Drops all-zero and exactly-duplicate rows; conflicting right-hand sides on
// such rows prove primal infeasibility outright.  Multiplicities let the
// caller score residuals against the original row multiset.
inline PresolvedRows presolve_rows(const Eigen::MatrixXd& A, const Eigen::VectorXd& b) {
    PresolvedRows out;
    std::map<std::vector<double>, std::size_t> seen;
    std::vector<double> mult;
    for (Eigen::Index i = 0; i < A.rows(); ++i) {
        if (A.row(i).cwiseAbs().maxCoeff() == 0.0) {
            if (b(i) != 0.0) {
                out.infeasible = true;
                return out;
            }
            continue;
        }
        std::vector<double> key(A.cols());
        Eigen::Map<Eigen::RowVectorXd>(key.data(), A.cols()) = A.row(i);
        auto [it, inserted] = seen.emplace(std::move(key), out.kept.size());
        if (!inserted) {
            if (b(out.kept[it->second]) != b(i)) {
                out.infeasible = true;
                return out;
            }
            mult[it->second] += 1.0;
            continue;
        }
        out.kept.push_back(i);
        mult.push_back(1.0);
    }
    out.A.resize(static_cast<Eigen::Index>(out.kept.size()), A.cols());
    out.b.resize(static_cast<Eigen::Index>(out.kept.size()));
    out.multiplicity = Eigen::Map<Eigen::VectorXd>(mult.data(), static_cast<Eigen::Index>(mult.size()));
    for (std::size_t r = 0; r < out.kept.size(); ++r) {
        out.A.row(static_cast<Eigen::Index>(r)) = A.row(out.kept[r]);
        out.b(static_cast<Eigen::Index>(r)) = b(out.kept[r]);
    }
    return out;
}

}  // namespace detail

/// Primal-dual path-following solver with Mehrotra predictor-corrector steps
/// and Nesterov-Todd scaling.  Each Newton direction is obtained from the
/// normal equations (A W)(A W)' dy = rhs by dense Cholesky factorization with
/// iterative refinement; near-singular systems get a small diagonal
/// regularization before the factorization is retried.
///
/// The method is deterministic: identical inputs and options produce the
/// identical iterate sequence.
inline SocpSolution solve(const SocpProblem& prob, const SolverOptions& opts = {}) {
    prob.validate();
    opts.validate();

    const Eigen::Index n_var = prob.c.size();
    const Eigen::Index m_rows = prob.b.size();
    const detail::ConeLayout layout(prob.cones);
    const double n_blocks = static_cast<double>(layout.blocks());
    const Eigen::VectorXd e = layout.identity();

    SocpSolution sol;
    sol.x = e;
    sol.s = e;
    sol.y_dual = Eigen::VectorXd::Zero(m_rows);

    const detail::PresolvedRows pre = detail::presolve_rows(prob.A_eq, prob.b);
    const auto finalize = [&](SolveStatus status, const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y_pre, const Eigen::VectorXd& s) {
        sol.status = status;
        sol.x = x;
        sol.s = s;
        sol.y_dual = Eigen::VectorXd::Zero(m_rows);
        for (std::size_t r = 0; r < pre.kept.size(); ++r) {
            sol.y_dual(pre.kept[r]) = y_pre(static_cast<Eigen::Index>(r));
        }
        const Residuals res = residuals(prob, sol);
        sol.primal_residual = res.primal;
        sol.dual_residual = res.dual;
        sol.gap = res.gap;
        return sol;
    };
    if (pre.infeasible) {
        return finalize(SolveStatus::PrimalInfeasible, e, Eigen::VectorXd::Zero(0), e);
    }

    const Eigen::MatrixXd& A = pre.A;
    const Eigen::VectorXd& b = pre.b;
    const Eigen::Index m_pre = b.size();
    const double b_scale = 1.0 + prob.b.norm();
    const double c_scale = 1.0 + prob.c.norm();

    Eigen::VectorXd x = e, s = e;
    Eigen::VectorXd y = Eigen::VectorXd::Zero(m_pre);

    detail::NtScaling scaling(layout);
    Eigen::MatrixXd B(m_pre, n_var);
    Eigen::MatrixXd G(m_pre, m_pre);
    Eigen::LLT<Eigen::MatrixXd> llt;

    Eigen::VectorXd rp(m_pre), rd(n_var);
    Eigen::VectorXd lam_sq(n_var), dc(n_var), u(n_var), w_rd(n_var);
    Eigen::VectorXd dx(n_var), ds(n_var), dy(m_pre), px(n_var), pz(n_var);
    Eigen::VectorXd px_aff(n_var), pz_aff(n_var), corr(n_var);

    // Solves the reduced Newton system for the complementarity target dc,
    // reusing the factorization of G = (A W)(A W)'.  The back-substitutions
    // keep the dual and complementarity rows exact, so iterative refinement
    // only needs to polish A dx = rp, evaluated through the factored form.
    const auto newton_direction = [&](const Eigen::VectorXd& target) {
        scaling.jdiv_lambda(target, u);
        scaling.apply_w(rd, w_rd);
        const Eigen::VectorXd rhs = rp + B * (w_rd - u);
        dy = llt.solve(rhs);
        const auto back_substitute = [&] {
            ds = rd - A.transpose() * dy;
            scaling.apply_w(ds, pz);
            px = u - pz;
            scaling.apply_w(px, dx);
        };
        back_substitute();
        double prev_norm = std::numeric_limits<double>::infinity();
        for (int pass = 0; pass < 4; ++pass) {
            const Eigen::VectorXd r1 = rp - A * dx;
            const double norm = r1.norm();
            if (norm <= 1e-14 * (1.0 + rhs.norm()) || norm >= 0.5 * prev_norm) break;
            prev_norm = norm;
            dy += llt.solve(r1);
            back_substitute();
        }
    };

    double last_step = 0.0;
    int steps_done = 0;
    std::vector<double> pres_hist, dres_hist, gapm_hist;
    SolveStatus status = SolveStatus::MaxIterations;

    // Best iterate by worst-of-three score relative to the tolerances; it is
    // the answer of record if the endgame turns numerically sour.
    Eigen::VectorXd x_best = x, y_best = y, s_best = s;
    double score_best = std::numeric_limits<double>::infinity();

    for (int iter = 0;; ++iter) {
        rp = b - A * x;
        rd = prob.c - A.transpose() * y - s;
        const double ctx = prob.c.dot(x);
        const double gap_abs = x.dot(s);
        // Score the primal residual against the original row multiset, so the
        // reported residuals of the unpresolved problem meet the tolerance.
        const double pres =
            std::sqrt(rp.array().square().matrix().dot(pre.multiplicity)) / b_scale;
        const double dres = rd.norm() / c_scale;
        const double gapm = gap_abs / (1.0 + std::abs(ctx));
        const double mu = gap_abs / n_blocks;

        sol.trace.push_back({mu, pres, dres, last_step});

        const double score = std::max({pres / opts.tol_feas, dres / opts.tol_feas,
                                       gap_abs / (opts.tol_gap * std::max(1.0, std::abs(ctx)))});
        if (score < score_best) {
            score_best = score;
            x_best = x;
            y_best = y;
            s_best = s;
        }
        if (score <= 1.0) {
            status = SolveStatus::Optimal;
            break;
        }

        // Divergence heuristic: a residual growing tenfold while the gap
        // measure fails to halve over a 10-iteration window signals an
        // infeasible or unbounded instance.
        pres_hist.push_back(pres);
        dres_hist.push_back(dres);
        gapm_hist.push_back(gapm);
        if (iter >= 10) {
            const std::size_t j = static_cast<std::size_t>(iter - 10);
            const bool grown_p = pres > 10.0 * pres_hist[j] && pres > 1e-6;
            const bool grown_d = dres > 10.0 * dres_hist[j] && dres > 1e-6;
            const bool gap_stalled = gapm > 0.5 * gapm_hist[j];
            if ((grown_p || grown_d) && gap_stalled) {
                status = (pres / (pres_hist[j] + 1e-300) >= dres / (dres_hist[j] + 1e-300))
                             ? SolveStatus::PrimalInfeasible
                             : SolveStatus::DualInfeasible;
                break;
            }
        }
        // Certificate checks once the iterates blow up: a cone-feasible ray
        // with A xn ~ 0 and c'xn < 0 proves dual infeasibility; a multiplier
        // ray with A'yn + sn ~ 0 and b'yn > 0 proves primal infeasibility.
        if (x.lpNorm<Eigen::Infinity>() > 1e5 * (1.0 + std::sqrt(n_blocks))) {
            const Eigen::VectorXd xn = x / x.norm();
            if ((m_pre == 0 || (A * xn).lpNorm<Eigen::Infinity>() <= 1e-7) &&
                prob.c.dot(xn) <= -1e-7 && cone_membership(xn, prob.cones, 1e-7)) {
                status = SolveStatus::DualInfeasible;
                break;
            }
        }
        if (m_pre > 0 && y.lpNorm<Eigen::Infinity>() > 1e5) {
            const double yscale = y.norm();
            const Eigen::VectorXd yn = y / yscale;
            const Eigen::VectorXd sn = s / yscale;
            if ((A.transpose() * yn + sn).lpNorm<Eigen::Infinity>() <= 1e-7 &&
                b.dot(yn) >= 1e-7) {
                status = SolveStatus::PrimalInfeasible;
                break;
            }
        }

        if (iter >= opts.max_iterations) {
            status = SolveStatus::MaxIterations;
            break;
        }

        if (!scaling.compute(x, s)) {
            status = SolveStatus::NumericalFailure;
            break;
        }

        scaling.right_multiply(A, B);
        G.setZero();
        G.selfadjointView<Eigen::Lower>().rankUpdate(B);
        // Static jitter keeps the factorization benign once the scaling gets
        // extreme near convergence; refinement corrects for it.  Escalate to
        // the stronger near-dependence regularization only on failure.
        double reg = (m_pre > 0) ? 1e-13 * (1.0 + G.diagonal().maxCoeff()) : 0.0;
        G.diagonal().array() += reg;
        for (int attempt = 0;; ++attempt) {
            llt.compute(G.selfadjointView<Eigen::Lower>());
            if (llt.info() == Eigen::Success) break;
            if (attempt >= 3) break;
            const double bump =
                std::max(reg * 1000.0, 1e-10 * (1.0 + G.diagonal().maxCoeff()));
            G.diagonal().array() += bump - reg;
            reg = bump;
        }
        if (m_pre > 0 && llt.info() != Eigen::Success) {
            status = SolveStatus::NumericalFailure;
            break;
        }

        // Predictor: aim at full complementarity reduction.
        layout.jprod(scaling.lambda, scaling.lambda, lam_sq);
        newton_direction(-lam_sq);
        px_aff = px;
        pz_aff = pz;
        const double ap_aff = layout.max_step(scaling.lambda, px);
        const double ad_aff = layout.max_step(scaling.lambda, pz);
        const double alpha_aff = std::min({1.0, ap_aff, ad_aff});
        const double mu_aff =
            (x + alpha_aff * dx).dot(s + alpha_aff * ds) / n_blocks;
        const double sigma = std::clamp(std::pow(mu_aff / mu, 3.0), 0.0, 1.0);

        // Combined corrector step with the Mehrotra second-order term.
        layout.jprod(px_aff, pz_aff, corr);
        dc = sigma * mu * e - lam_sq - corr;
        newton_direction(dc);

        // Safeguarded step length: fraction-to-boundary, then keep the
        // complementarity measure from rising by more than a whisker.  When
        // the second-order term forces the measure upward at any step length
        // (typical of early infeasible iterates), drop it: the centered
        // direction has d(mu)/d(alpha) = (sigma - 1) * mu <= 0 at alpha = 0.
        const auto ftb_step = [&] {
            const double ap = layout.max_step(scaling.lambda, px);
            const double ad = layout.max_step(scaling.lambda, pz);
            return std::min(1.0, opts.step_fraction * std::min(ap, ad));
        };
        const auto mu_at = [&](double a) {
            return (gap_abs + a * (s.dot(dx) + x.dot(ds)) + a * a * dx.dot(ds)) / n_blocks;
        };
        double alpha = ftb_step();
        for (int halving = 0; halving < 4 && mu_at(alpha) > 1.005 * mu; ++halving) {
            alpha *= 0.5;
        }
        if (mu_at(alpha) > 1.005 * mu) {
            dc = sigma * mu * e - lam_sq;
            newton_direction(dc);
            alpha = ftb_step();
            const double quad = dx.dot(ds);
            if (quad > 0.0) {
                alpha = std::min(alpha, std::sqrt(0.005 * gap_abs / quad));
            }
        }
        if (alpha <= 1e-9) {
            status = SolveStatus::NumericalFailure;
            break;
        }

        x += alpha * dx;
        y += alpha * dy;
        s += alpha * ds;
        last_step = alpha;
        ++steps_done;
    }

    // Certificate-bearing statuses report the diverging iterates themselves;
    // everything else reports the best iterate visited.
    if (status == SolveStatus::PrimalInfeasible || status == SolveStatus::DualInfeasible ||
        status == SolveStatus::Optimal) {
        finalize(status, x, y, s);
    } else {
        finalize(status, x_best, y_best, s_best);
    }
    sol.iterations = steps_done;
    return sol;
}

}  // namespace qcs
