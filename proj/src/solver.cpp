#include "kssc/solver.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace kssc {

void SolverOptions::validate() const {
    if (!(rho > 0.0)) throw InvalidArgumentError("solver: rho must be > 0");
    if (max_iter < 1) throw InvalidArgumentError("solver: max_iter must be >= 1");
    if (tol_abs < 0.0 || tol_rel < 0.0)
        throw InvalidArgumentError("solver: tolerances must be nonnegative");
}

Vector soft_threshold(const Eigen::Ref<const Vector>& v, double tau) {
    if (tau < 0.0) throw InvalidArgumentError("soft_threshold: tau must be nonnegative");
    return v.array().sign() * (v.array().abs() - tau).max(0.0);
}

double effective_lambda(double lambda, int rank, LambdaScaling scaling) {
    if (rank < 1) throw InvalidArgumentError("effective_lambda: rank must be >= 1");
    return scaling == LambdaScaling::sqrt_rank ? std::sqrt(static_cast<double>(rank)) * lambda
                                               : lambda;
}

namespace {

void soft_threshold_inplace(Matrix& m, const Eigen::ArrayXd& tau_per_col) {
    for (Eigen::Index j = 0; j < m.cols(); ++j)
        m.col(j) = m.col(j).array().sign() * (m.col(j).array().abs() - tau_per_col[j]).max(0.0);
}

void keep_columns(Matrix& m, const std::vector<int>& keep) {
    Matrix packed(m.rows(), static_cast<Eigen::Index>(keep.size()));
    for (size_t k = 0; k < keep.size(); ++k)
        packed.col(static_cast<Eigen::Index>(k)) = m.col(keep[k]);
    m = std::move(packed);
}

void keep_entries(Eigen::ArrayXd& v, const std::vector<int>& keep) {
    Eigen::ArrayXd packed(static_cast<Eigen::Index>(keep.size()));
    for (size_t k = 0; k < keep.size(); ++k) packed[static_cast<Eigen::Index>(k)] = v[keep[k]];
    v = std::move(packed);
}

// Both objectives share one splitting: per column j, variables (a, c, e) with
// constraints e = y_j - Y a and a = c, c_j = 0. The a-step solves the same
// rho-free SPD system (Y^T Y + I) for every column, so one factorization is
// shared and per-column penalties stay independent. All columns iterate
// together in matrix form; a column that meets the stopping criteria is
// flushed to the output and dropped from the working set.
SelfRepresentation solve_ssc_admm(const Matrix& y, double lambda, const SolverOptions& opts,
                                  bool robust) {
    const Eigen::Index n = y.cols();
    const Eigen::Index r = y.rows();
    if (n < 2)
        throw InvalidArgumentError("solver: need at least 2 columns, got " + std::to_string(n));
    if (r < 1) throw InvalidArgumentError("solver: coordinate matrix has no rows");
    if (!(lambda > 0.0)) throw InvalidArgumentError("solver: lambda must be > 0");
    opts.validate();

    const Matrix gram = y.transpose() * y;
    const Eigen::LLT<Matrix> llt(gram + Matrix::Identity(n, n));
    if (llt.info() != Eigen::Success)
        throw DegenerateInputError("solver: factorization of (Y^T Y + I) failed");

    // Working state, packed over still-active columns.
    std::vector<int> active(static_cast<size_t>(n));
    std::iota(active.begin(), active.end(), 0);
    Matrix a = Matrix::Zero(n, n);
    Matrix c = Matrix::Zero(n, n);
    Matrix u2 = Matrix::Zero(n, n);
    Matrix targets = y;
    Matrix e = y;  // feasible start for e = y_j - Y a with a = 0
    Matrix u1 = Matrix::Zero(r, n);
    Eigen::ArrayXd rho = Eigen::ArrayXd::Constant(n, opts.rho);
    Eigen::ArrayXd target_norm = y.colwise().norm().transpose().array();

    SelfRepresentation result;
    result.c = Matrix::Zero(n, n);
    result.diagnostics.iterations.assign(static_cast<size_t>(n), opts.max_iter);
    result.diagnostics.primal_residuals.assign(static_cast<size_t>(n), 0.0);
    result.diagnostics.objectives.assign(static_cast<size_t>(n), 0.0);
    result.diagnostics.converged.assign(static_cast<size_t>(n), false);

    const double sqrt_r = std::sqrt(static_cast<double>(r));
    const double sqrt_n = std::sqrt(static_cast<double>(n));
    constexpr int check_every = 5;
    // Rescaling the duals on a rho change excites a transient in the
    // single-step dual residual that can re-trigger the opposite change and
    // lock the column into a limit cycle; balancing is therefore confined to
    // an early scale-finding window and rho stays fixed for the endgame.
    constexpr int adapt_until = 250;

    Matrix c_prev, e_prev;
    for (int iter = 1; iter <= opts.max_iter && !active.empty(); ++iter) {
        const bool checking = iter % check_every == 0 || iter == opts.max_iter;
        if (checking) {
            c_prev = c;
            e_prev = e;
        }

        // a-step: (Y^T Y + I) a = Y^T (y_j - e + u1) + (c - u2)
        a = llt.solve(y.transpose() * (targets - e + u1) + (c - u2));
        const Matrix ya = y * a;

        // c-step: prox of ||.||_1 composed with the zero-diagonal constraint
        c = a + u2;
        soft_threshold_inplace(c, 1.0 / rho);
        for (size_t k = 0; k < active.size(); ++k)
            c(active[k], static_cast<Eigen::Index>(k)) = 0.0;

        // e-step
        e = targets - ya + u1;
        if (robust) {
            soft_threshold_inplace(e, lambda / rho);
        } else {
            for (Eigen::Index j = 0; j < e.cols(); ++j) e.col(j) *= rho[j] / (lambda + rho[j]);
        }

        // dual ascent
        const Matrix r2 = a - c;
        u1 += targets - ya - e;
        u2 += r2;

        if (!checking) continue;

        // Stopping is judged against c (the reported variable), not a.
        const Matrix rc1 = targets - y * c - e;
        const Matrix dual_mat = y.transpose() * (e - e_prev) - (c - c_prev);
        const Matrix dual_scale_mat = y.transpose() * u1 + u2;

        std::vector<int> keep_positions;
        keep_positions.reserve(active.size());
        for (size_t k = 0; k < active.size(); ++k) {
            const auto kk = static_cast<Eigen::Index>(k);
            const int col = active[k];
            const double pri1 = rc1.col(kk).norm();
            const double pri2 = r2.col(kk).norm();
            const double dual = rho[kk] * dual_mat.col(kk).norm();
            const double eps_pri1 = opts.tol_abs * sqrt_r + opts.tol_rel * target_norm[kk];
            const double eps_pri2 = opts.tol_abs * sqrt_n +
                                    opts.tol_rel * std::max(a.col(kk).norm(), c.col(kk).norm());
            const double eps_dual =
                opts.tol_abs * sqrt_n + opts.tol_rel * rho[kk] * dual_scale_mat.col(kk).norm();

            if (pri1 <= eps_pri1 && pri2 <= eps_pri2 && dual <= eps_dual) {
                result.c.col(col) = c.col(kk);
                result.diagnostics.iterations[static_cast<size_t>(col)] = iter;
                result.diagnostics.primal_residuals[static_cast<size_t>(col)] = pri1;
                result.diagnostics.converged[static_cast<size_t>(col)] = true;
                continue;
            }

            if (opts.adaptive_rho && iter <= adapt_until) {
                // Residuals are compared relative to their own tolerance
                // scales; raw magnitudes live on different scales and a raw
                // comparison keeps re-triggering near the solution.
                const double pri = std::max(pri1 / eps_pri1, pri2 / eps_pri2);
                const double dua = dual / eps_dual;
                if (pri > 10.0 * dua && rho[kk] < 1e4) {
                    rho[kk] = std::min(rho[kk] * 2.0, 1e4);
                    u1.col(kk) *= 0.5;
                    u2.col(kk) *= 0.5;
                } else if (dua > 10.0 * pri && rho[kk] > 1e-4) {
                    rho[kk] = std::max(rho[kk] * 0.5, 1e-4);
                    u1.col(kk) *= 2.0;
                    u2.col(kk) *= 2.0;
                }
            }
            keep_positions.push_back(static_cast<int>(k));
        }

        if (keep_positions.size() != active.size()) {
            std::vector<int> still_active;
            still_active.reserve(keep_positions.size());
            for (int k : keep_positions) still_active.push_back(active[static_cast<size_t>(k)]);
            active = std::move(still_active);
            if (!active.empty()) {
                keep_columns(a, keep_positions);
                keep_columns(c, keep_positions);
                keep_columns(u2, keep_positions);
                keep_columns(e, keep_positions);
                keep_columns(u1, keep_positions);
                keep_columns(targets, keep_positions);
                keep_entries(rho, keep_positions);
                keep_entries(target_norm, keep_positions);
            }
        }
    }

    // Columns that never converged keep their final iterate.
    for (size_t k = 0; k < active.size(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        const int col = active[k];
        result.c.col(col) = c.col(kk);
        result.diagnostics.primal_residuals[static_cast<size_t>(col)] =
            (y.col(col) - y * c.col(kk) - e.col(kk)).norm();
    }

    // Objectives from the returned coefficients; E is the residual Y - Y C.
    const Matrix residual = y - y * result.c;
    for (Eigen::Index j = 0; j < n; ++j) {
        const double l1_c = result.c.col(j).lpNorm<1>();
        result.diagnostics.objectives[static_cast<size_t>(j)] =
            robust ? l1_c + lambda * residual.col(j).lpNorm<1>()
                   : l1_c + 0.5 * lambda * residual.col(j).squaredNorm();
    }
    if (robust) result.e = residual;
    return result;
}

}  // namespace

SelfRepresentation solve_robust_ssc(const Matrix& y, double lambda_e, const SolverOptions& opts) {
    return solve_ssc_admm(y, lambda_e, opts, true);
}

SelfRepresentation solve_frobenius_ssc(const Matrix& y, double lambda_z,
                                       const SolverOptions& opts) {
    return solve_ssc_admm(y, lambda_z, opts, false);
}

}  // namespace kssc
