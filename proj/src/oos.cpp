#include "kssc/oos.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <string>

#include "kssc/kernel.hpp"

namespace kssc {

ClusterModel fit_subspaces(const Matrix& y, const std::vector<int>& labels, int d) {
    const Eigen::Index r = y.rows();
    const Eigen::Index n = y.cols();
    if (static_cast<Eigen::Index>(labels.size()) != n)
        throw DimensionError("fit_subspaces: " + std::to_string(labels.size()) +
                             " labels for " + std::to_string(n) + " columns");
    if (d < 1) throw InvalidArgumentError("fit_subspaces: subspace dimension must be >= 1");

    int c = 0;
    for (int lab : labels) {
        if (lab < 0) throw InvalidArgumentError("fit_subspaces: negative label");
        c = std::max(c, lab + 1);
    }
    if (c == 0) throw InvalidArgumentError("fit_subspaces: no samples");

    ClusterModel model;
    model.dim_request = d;
    model.clusters.resize(static_cast<size_t>(c));

    for (int m = 0; m < c; ++m) {
        std::vector<Eigen::Index> members;
        for (Eigen::Index i = 0; i < n; ++i)
            if (labels[static_cast<size_t>(i)] == m) members.push_back(i);
        if (members.empty())
            throw DegenerateInputError("fit_subspaces: cluster " + std::to_string(m) +
                                       " is empty");

        Matrix cols(r, static_cast<Eigen::Index>(members.size()));
        for (size_t k = 0; k < members.size(); ++k) cols.col(static_cast<Eigen::Index>(k)) = y.col(members[k]);

        ClusterSubspace& sub = model.clusters[static_cast<size_t>(m)];
        sub.count = static_cast<int>(members.size());
        sub.mean = cols.rowwise().mean();
        cols.colwise() -= sub.mean;

        const Eigen::Index dm =
            std::min<Eigen::Index>({static_cast<Eigen::Index>(d), cols.cols(), r});
        Eigen::JacobiSVD<Matrix> svd(cols, Eigen::ComputeThinU);
        sub.basis = svd.matrixU().leftCols(dm);
    }
    return model;
}

Vector subspace_residuals(const ClusterModel& models, const Vector& y) {
    if (models.clusters.empty()) throw InvalidArgumentError("subspace_residuals: empty model");
    const Eigen::Index r = models.clusters.front().mean.size();
    if (y.size() != r)
        throw DimensionError("subspace_residuals: point has " + std::to_string(y.size()) +
                             " entries, model expects " + std::to_string(r));
    Vector out(static_cast<Eigen::Index>(models.clusters.size()));
    for (size_t m = 0; m < models.clusters.size(); ++m) {
        const ClusterSubspace& sub = models.clusters[m];
        const Vector centered = y - sub.mean;
        out[static_cast<Eigen::Index>(m)] =
            (centered - sub.basis * (sub.basis.transpose() * centered)).norm();
    }
    return out;
}

int assign(const ClusterModel& models, const Vector& y) {
    const Vector res = subspace_residuals(models, y);
    int best = 0;
    for (Eigen::Index m = 1; m < res.size(); ++m)
        if (res[m] < res[best]) best = static_cast<int>(m);
    return best;
}

int oos_pipeline(const NptModel& npt, const ClusterModel& models, const Vector& x) {
    return assign(models, project_point(npt, x));
}

}  // namespace kssc
