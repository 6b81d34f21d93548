#pragma once

#include <vector>

#include "kssc/types.hpp"

namespace kssc {

enum class LambdaScaling { none, sqrt_rank };

struct SolverOptions {
    double rho = 1.0;
    double tol_abs = 1e-6;
    double tol_rel = 1e-4;
    int max_iter = 5000;
    bool adaptive_rho = true;
    LambdaScaling lambda_scaling = LambdaScaling::none;

    void validate() const;
};

/// Per-column solver state reported back with the solution. A column that
/// never met the stopping criteria is flagged, not thrown: downstream
/// spectral clustering tolerates approximate coefficients.
struct SolverDiagnostics {
    std::vector<int> iterations;             // iteration at which the column converged (or max_iter)
    std::vector<double> primal_residuals;    // ||y_j - Y c_j - e_j||_2 at exit
    std::vector<double> objectives;
    std::vector<bool> converged;

    int non_converged_count() const {
        int k = 0;
        for (bool c : converged)
            if (!c) ++k;
        return k;
    }
};

/// Self-representation coefficients with an exactly zero diagonal. In robust
/// mode `e` holds the residual Y - Y C (R x N); in Frobenius mode it is empty.
struct SelfRepresentation {
    Matrix c;
    Matrix e;
    SolverDiagnostics diagnostics;
};

/// Elementwise sign(v_i) * max(|v_i| - tau, 0).
Vector soft_threshold(const Eigen::Ref<const Vector>& v, double tau);

/// lambda, or sqrt(R) * lambda under sqrt_rank scaling.
double effective_lambda(double lambda, int rank, LambdaScaling scaling);

/// min ||C||_1 + lambda ||Y - Y C||_1  s.t. diag(C) = 0.
/// Column-separable; solved by ADMM with a single shared factorization of
/// (Y^T Y + I). lambda is used as given (apply effective_lambda beforehand).
SelfRepresentation solve_robust_ssc(const Matrix& y, double lambda_e,
                                    const SolverOptions& opts = {});

/// min ||C||_1 + (lambda/2) ||Y - Y C||_F^2  s.t. diag(C) = 0.
SelfRepresentation solve_frobenius_ssc(const Matrix& y, double lambda_z,
                                       const SolverOptions& opts = {});

}  // namespace kssc
