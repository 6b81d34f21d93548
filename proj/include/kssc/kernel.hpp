#pragma once

#include "kssc/types.hpp"

namespace kssc {

enum class KernelFamily { linear, polynomial, gaussian };

/// Kernel family plus its parameters. Polynomial kernels are restricted to
/// integer degree >= 1 and offset b >= 0 so the Gram matrix is positive
/// semidefinite; Gaussian kernels require sigma2 > 0.
struct KernelSpec {
    KernelFamily family = KernelFamily::linear;
    double b = 0.0;       // polynomial offset
    int degree = 1;       // polynomial degree
    double sigma2 = 1.0;  // gaussian bandwidth (sigma squared)

    static KernelSpec linear() { return {}; }
    static KernelSpec polynomial(double b, int degree) {
        KernelSpec s;
        s.family = KernelFamily::polynomial;
        s.b = b;
        s.degree = degree;
        s.validate();
        return s;
    }
    static KernelSpec gaussian(double sigma2) {
        KernelSpec s;
        s.family = KernelFamily::gaussian;
        s.sigma2 = sigma2;
        s.validate();
        return s;
    }

    void validate() const;
};

/// N x N kernel matrix. Exactly symmetric by construction (entries are
/// written pairwise); `centered` distinguishes the raw Gram from its
/// double-centered form.
struct GramMatrix {
    Matrix entries;
    bool centered = false;

    Eigen::Index size() const { return entries.rows(); }
};

/// Length-N vector of kernel evaluations of one point against the training
/// columns.
struct KernelVector {
    Vector entries;
    bool centered = false;
};

/// Per-model centering statistics: the row means of the uncentered Gram and
/// their grand mean. These are all that out-of-sample centering needs at
/// inference time.
struct CenteringStats {
    Vector row_means;
    double grand_mean = 0.0;
};

/// kappa(xi, xj) for the selected family. Symmetric in its arguments.
double eval_kernel(const KernelSpec& spec, const Eigen::Ref<const Vector>& xi,
                   const Eigen::Ref<const Vector>& xj);

/// Uncentered Gram matrix of the columns of X. Requires N >= 2.
GramMatrix gram(const KernelSpec& spec, const Matrix& x);

/// Double-centering: K = (I - E) Kappa (I - E) with E = (1/N) 11^T.
/// Every row of the result sums to ~0. Input must be uncentered.
GramMatrix center_gram(const GramMatrix& kappa);

/// Kernel evaluations of x against every training column.
KernelVector kernel_vector(const KernelSpec& spec, const Matrix& x_train,
                           const Eigen::Ref<const Vector>& x);

CenteringStats centering_stats(const GramMatrix& kappa);

/// Centered kernel vector k(x) = (I - E)[kappa(x) - (1/N) Kappa 1].
/// For a training column j this reproduces column j of the centered Gram.
KernelVector center_kernel_vector(const CenteringStats& stats, const KernelVector& kv);
KernelVector center_kernel_vector(const GramMatrix& kappa, const KernelVector& kv);

}  // namespace kssc
