#include "kssc/kernel.hpp"

#include <cmath>
#include <string>

namespace kssc {

namespace {

// Integer power by repeated multiplication; bit-reproducible across libms.
double ipow(double base, int exp) {
    double out = 1.0;
    double acc = base;
    for (int e = exp; e > 0; e >>= 1) {
        if (e & 1) out *= acc;
        acc *= acc;
    }
    return out;
}

}  // namespace

void KernelSpec::validate() const {
    switch (family) {
        case KernelFamily::linear:
            break;
        case KernelFamily::polynomial:
            if (degree < 1)
                throw InvalidArgumentError("polynomial kernel requires degree >= 1, got " +
                                           std::to_string(degree));
            if (b < 0.0)
                throw InvalidArgumentError("polynomial kernel requires offset b >= 0, got " +
                                           std::to_string(b));
            break;
        case KernelFamily::gaussian:
            if (!(sigma2 > 0.0))
                throw InvalidArgumentError("gaussian kernel requires sigma2 > 0, got " +
                                           std::to_string(sigma2));
            break;
    }
}

double eval_kernel(const KernelSpec& spec, const Eigen::Ref<const Vector>& xi,
                   const Eigen::Ref<const Vector>& xj) {
    if (xi.size() != xj.size())
        throw DimensionError("eval_kernel: arguments have lengths " + std::to_string(xi.size()) +
                             " and " + std::to_string(xj.size()));
    spec.validate();
    switch (spec.family) {
        case KernelFamily::linear:
            return xi.dot(xj);
        case KernelFamily::polynomial:
            return ipow(xi.dot(xj) + spec.b, spec.degree);
        case KernelFamily::gaussian:
            return std::exp(-(xi - xj).squaredNorm() / (2.0 * spec.sigma2));
    }
    return 0.0;  // unreachable
}

GramMatrix gram(const KernelSpec& spec, const Matrix& x) {
    const Eigen::Index n = x.cols();
    if (n == 0) throw InvalidArgumentError("gram: empty data matrix");
    if (n < 2) throw InvalidArgumentError("gram: need at least 2 samples, got " + std::to_string(n));
    spec.validate();

    // Entries are written pairwise, so the matrix is symmetric bit-for-bit
    // and the (M + M^T)/2 symmetrization is the identity.
    Matrix m(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i <= j; ++i) {
            const double v = eval_kernel(spec, x.col(i), x.col(j));
            m(i, j) = v;
            m(j, i) = v;
        }
    return GramMatrix{std::move(m), false};
}

GramMatrix center_gram(const GramMatrix& kappa) {
    if (kappa.centered) throw InvalidArgumentError("center_gram: input is already centered");
    const Eigen::Index n = kappa.size();
    if (n == 0 || kappa.entries.cols() != n)
        throw InvalidArgumentError("center_gram: input must be a nonempty square matrix");

    const Vector row_means = kappa.entries.rowwise().mean();
    const double grand_mean = row_means.mean();

    Matrix k(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i <= j; ++i) {
            // row_means[i] + row_means[j] is evaluated once so K stays
            // exactly symmetric.
            const double v = kappa.entries(i, j) - (row_means[i] + row_means[j]) + grand_mean;
            k(i, j) = v;
            k(j, i) = v;
        }
    return GramMatrix{std::move(k), true};
}

KernelVector kernel_vector(const KernelSpec& spec, const Matrix& x_train,
                           const Eigen::Ref<const Vector>& x) {
    if (x.size() != x_train.rows())
        throw DimensionError("kernel_vector: point has length " + std::to_string(x.size()) +
                             ", training data has dimension " + std::to_string(x_train.rows()));
    const Eigen::Index n = x_train.cols();
    Vector v(n);
    for (Eigen::Index i = 0; i < n; ++i) v[i] = eval_kernel(spec, x_train.col(i), x);
    return KernelVector{std::move(v), false};
}

CenteringStats centering_stats(const GramMatrix& kappa) {
    if (kappa.centered)
        throw InvalidArgumentError("centering_stats: expects the uncentered Gram matrix");
    CenteringStats stats;
    stats.row_means = kappa.entries.rowwise().mean();
    stats.grand_mean = stats.row_means.mean();
    return stats;
}

KernelVector center_kernel_vector(const CenteringStats& stats, const KernelVector& kv) {
    if (kv.centered)
        throw InvalidArgumentError("center_kernel_vector: input vector is already centered");
    if (kv.entries.size() != stats.row_means.size())
        throw DimensionError("center_kernel_vector: vector length " +
                             std::to_string(kv.entries.size()) + " does not match Gram size " +
                             std::to_string(stats.row_means.size()));
    const double kv_mean = kv.entries.mean();
    Vector out = kv.entries - stats.row_means;
    out.array() += stats.grand_mean - kv_mean;
    return KernelVector{std::move(out), true};
}

KernelVector center_kernel_vector(const GramMatrix& kappa, const KernelVector& kv) {
    return center_kernel_vector(centering_stats(kappa), kv);
}

}  // namespace kssc
