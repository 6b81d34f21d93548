#pragma once

#include "kssc/kernel.hpp"
#include "kssc/types.hpp"

namespace kssc {

/// How many eigen-directions to retain when fitting the embedding.
/// `threshold` keeps eigenvalues above max(eps_abs, eps_rel * lambda_max),
/// which discards the centering null direction and roundoff noise;
/// `explicit_rank` keeps the top r, silently truncated to the numerical rank.
struct RankPolicy {
    enum class Mode { explicit_rank, threshold };

    Mode mode = Mode::threshold;
    int r = 0;
    double eps_rel = 1e-9;

    static constexpr double eps_abs = 1e-12;

    static RankPolicy explicit_rank(int r) {
        RankPolicy p;
        p.mode = Mode::explicit_rank;
        p.r = r;
        return p;
    }
    static RankPolicy threshold(double eps_rel = 1e-9) {
        RankPolicy p;
        p.eps_rel = eps_rel;
        return p;
    }
};

/// Fitted empirical-feature-space embedding.
///
/// `u` holds the retained eigenvectors of the centered Gram matrix (N x R),
/// `lambda` the matching eigenvalues sorted descending (all > 0), and
/// `y = diag(lambda)^{1/2} u^T` the in-sample coordinates (R x N).
/// Coordinates are unique only up to a sign flip per eigen-direction, so
/// consumers must compare gauge-invariant quantities (y^T y, distances,
/// cluster partitions), never raw entries.
///
/// `training_data`, `spec` and `centering` make the model self-contained for
/// out-of-sample projection: a new point only touches the training set
/// through kernel evaluations and the stored centering statistics.
struct NptModel {
    Matrix u;        // N x R
    Vector lambda;   // R, descending, strictly positive
    Matrix y;        // R x N
    CenteringStats centering;
    KernelSpec spec;
    Matrix training_data;  // D x N
    int requested_rank = 0;  // 0 when fitted with a threshold policy

    int rank() const { return static_cast<int>(lambda.size()); }
    Eigen::Index sample_count() const { return u.rows(); }
};

/// Eigendecompose a centered Gram matrix and build coordinates.
/// The returned model has empty inference fields (spec, training data,
/// centering); `fit_from_data` fills them.
/// Throws DegenerateInputError when no eigenvalue clears the threshold.
NptModel fit(const GramMatrix& k_centered, const RankPolicy& policy = {});

/// Full chain: Gram + centering statistics + eigenfit, with the inference
/// fields populated.
NptModel fit_from_data(const KernelSpec& spec, const Matrix& x, const RankPolicy& policy = {});

/// Coordinates of a point given its centered kernel vector:
/// y = diag(lambda)^{-1/2} u^T k(x).
Vector project(const NptModel& model, const KernelVector& kx_centered);

/// Kernel-evaluate, center, and project a raw input-space point. Requires a
/// model built by fit_from_data (or with inference fields filled in).
Vector project_point(const NptModel& model, const Eigen::Ref<const Vector>& x);

}  // namespace kssc
