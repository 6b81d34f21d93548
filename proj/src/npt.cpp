#include "kssc/npt.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace kssc {

NptModel fit(const GramMatrix& k_centered, const RankPolicy& policy) {
    if (!k_centered.centered) throw InvalidArgumentError("fit: Gram matrix must be centered");
    const Eigen::Index n = k_centered.size();
    if (n < 2 || k_centered.entries.cols() != n)
        throw InvalidArgumentError("fit: need a square Gram matrix with N >= 2");
    if (policy.mode == RankPolicy::Mode::explicit_rank && policy.r < 1)
        throw InvalidArgumentError("fit: explicit rank must be >= 1");
    if (policy.mode == RankPolicy::Mode::threshold && !(policy.eps_rel > 0.0))
        throw InvalidArgumentError("fit: threshold eps_rel must be > 0");

    Eigen::SelfAdjointEigenSolver<Matrix> es(k_centered.entries);
    if (es.info() != Eigen::Success) throw DegenerateInputError("fit: eigendecomposition failed");

    const Vector& evals = es.eigenvalues();  // ascending
    const double lambda_max = evals[n - 1];
    const double cutoff = std::max(RankPolicy::eps_abs, policy.eps_rel * std::max(lambda_max, 0.0));

    // Numerical rank: eigenvalues strictly above the noise cutoff.
    int num_rank = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        if (evals[i] > cutoff) ++num_rank;
    if (num_rank == 0)
        throw DegenerateInputError("fit: Gram matrix is numerically zero (no positive eigenvalue)");

    const int r = policy.mode == RankPolicy::Mode::explicit_rank
                      ? std::min(policy.r, num_rank)
                      : num_rank;

    NptModel model;
    model.u.resize(n, r);
    model.lambda.resize(r);
    model.y.resize(r, n);
    model.requested_rank = policy.mode == RankPolicy::Mode::explicit_rank ? policy.r : 0;
    for (int k = 0; k < r; ++k) {
        const Eigen::Index src = n - 1 - k;  // descending order
        model.lambda[k] = evals[src];
        model.u.col(k) = es.eigenvectors().col(src);
        model.y.row(k) = std::sqrt(evals[src]) * es.eigenvectors().col(src).transpose();
    }
    return model;
}

NptModel fit_from_data(const KernelSpec& spec, const Matrix& x, const RankPolicy& policy) {
    const GramMatrix kappa = gram(spec, x);
    const CenteringStats stats = centering_stats(kappa);
    NptModel model = fit(center_gram(kappa), policy);
    model.centering = stats;
    model.spec = spec;
    model.training_data = x;
    return model;
}

Vector project(const NptModel& model, const KernelVector& kx_centered) {
    if (!kx_centered.centered)
        throw InvalidArgumentError("project: kernel vector must be centered");
    if (kx_centered.entries.size() != model.sample_count())
        throw DimensionError("project: kernel vector length " +
                             std::to_string(kx_centered.entries.size()) +
                             " does not match training size " +
                             std::to_string(model.sample_count()));
    Vector out = model.u.transpose() * kx_centered.entries;
    for (int k = 0; k < model.rank(); ++k) out[k] /= std::sqrt(model.lambda[k]);
    return out;
}

Vector project_point(const NptModel& model, const Eigen::Ref<const Vector>& x) {
    if (model.training_data.size() == 0)
        throw InvalidArgumentError("project_point: model has no training data attached");
    const KernelVector kv = kernel_vector(model.spec, model.training_data, x);
    return project(model, center_kernel_vector(model.centering, kv));
}

}  // namespace kssc
