#pragma once

#include <vector>

#include "kssc/npt.hpp"
#include "kssc/types.hpp"

namespace kssc {

struct ClusterSubspace {
    Vector mean;    // length R
    Matrix basis;   // R x d_m, orthonormal columns
    int count = 0;  // members seen at fit time
};

/// Per-cluster affine subspace models fit from in-sample coordinates.
struct ClusterModel {
    std::vector<ClusterSubspace> clusters;
    int dim_request = 0;  // the global d; each basis is truncated to min(d, N_m, R)
    int cluster_count() const { return static_cast<int>(clusters.size()); }
};

/// Fit one mean + SVD basis per cluster from coordinates y (columns are
/// samples). Cluster count is max(labels) + 1 and every cluster must be
/// nonempty. Basis width is min(d, N_m, R) for a cluster with N_m members.
ClusterModel fit_subspaces(const Matrix& y, const std::vector<int>& labels, int d);

/// Distance from y to each cluster's affine subspace:
/// ||(y - mean_m) - U_m U_m^T (y - mean_m)||_2, one entry per cluster.
Vector subspace_residuals(const ClusterModel& models, const Vector& y);

/// Label of the subspace nearest to y; ties go to the lowest cluster index.
int assign(const ClusterModel& models, const Vector& y);

/// Out-of-sample chain: kernel vector against the training data, centered
/// with the training statistics, projected into coordinates, then assigned.
int oos_pipeline(const NptModel& npt, const ClusterModel& models, const Vector& x);

}  // namespace kssc
