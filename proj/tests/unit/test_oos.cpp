#include <Eigen/SVD>
#include <limits>
#include <string>
#include <vector>

#include "doctest.h"
#include "kssc/data.hpp"
#include "kssc/metrics.hpp"
#include "kssc/npt.hpp"
#include "kssc/oos.hpp"
#include "kssc/rng.hpp"
#include "kssc/spectral.hpp"

using kssc::Matrix;
using kssc::Vector;

namespace {

Matrix random_matrix(int rows, int cols, std::uint64_t seed) {
    kssc::SplitMix64 rng(seed);
    Matrix m(rows, cols);
    for (int j = 0; j < cols; ++j)
        for (int i = 0; i < rows; ++i) m(i, j) = rng.next_normal();
    return m;
}

}  // namespace

TEST_CASE("members of an affine line have zero projection residual") {
    Matrix y(3, 4);
    const Vector mean = (Vector(3) << 2, -1, 0.5).finished();
    const Vector dir = (Vector(3) << 1, 0, 0).finished();
    const double ts[4] = {-1.0, 0.0, 1.0, 2.0};
    for (int j = 0; j < 4; ++j) y.col(j) = mean + ts[j] * dir;
    const kssc::ClusterModel model = kssc::fit_subspaces(y, {0, 0, 0, 0}, 1);
    for (int j = 0; j < 4; ++j)
        CHECK(kssc::subspace_residuals(model, y.col(j))(0) < 1e-12);
}

TEST_CASE("basis width is capped by member count and ambient dimension") {
    const Matrix y = random_matrix(3, 2, 5);
    const kssc::ClusterModel model = kssc::fit_subspaces(y, {0, 0}, 5);
    CHECK(model.clusters[0].basis.cols() == 2);  // min(5, N_m=2, R=3)
    CHECK(model.dim_request == 5);
    // orthonormal columns
    const Matrix g = model.clusters[0].basis.transpose() * model.clusters[0].basis;
    CHECK((g - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("orthogonal single-direction clusters recover the axes") {
    Matrix y(2, 4);
    y << 1, -1, 0, 0, 0, 0, 1, -1;  // cluster 0 spans e1, cluster 1 spans e2
    const kssc::ClusterModel model = kssc::fit_subspaces(y, {0, 0, 1, 1}, 1);
    CHECK(model.clusters[0].mean.norm() < 1e-15);
    CHECK(model.clusters[1].mean.norm() < 1e-15);
    CHECK(std::abs(std::abs(model.clusters[0].basis(0, 0)) - 1.0) < 1e-12);
    CHECK(std::abs(model.clusters[0].basis(1, 0)) < 1e-12);
    CHECK(std::abs(std::abs(model.clusters[1].basis(1, 0)) - 1.0) < 1e-12);

    // direct residual: y = (1, 0.1) is 0.1 from the e1 line, 1.0 from e2
    const Vector probe = (Vector(2) << 1.0, 0.1).finished();
    const Vector res = kssc::subspace_residuals(model, probe);
    CHECK(res(0) == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(res(1) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(kssc::assign(model, probe) == 0);

    // equidistant point: lowest index wins
    const Vector tie = (Vector(2) << 1.0, 1.0).finished();
    CHECK(kssc::assign(model, tie) == 0);
}

TEST_CASE("fit_subspaces rejects an empty cluster by name") {
    const Matrix y = random_matrix(2, 3, 8);
    try {
        kssc::fit_subspaces(y, {0, 0, 2}, 1);
        FAIL("expected an empty-cluster error");
    } catch (const kssc::DegenerateInputError& e) {
        CHECK(std::string(e.what()).find("cluster 1") != std::string::npos);
    }
    CHECK_THROWS_AS(kssc::fit_subspaces(y, {0, 0}, 1), kssc::DimensionError);
    CHECK_THROWS_AS(kssc::fit_subspaces(y, {0, 0, 0}, 0), kssc::InvalidArgumentError);
}

TEST_CASE("projection residual is non-increasing in the subspace dimension") {
    const Matrix y = random_matrix(6, 10, 21);
    const Vector probe = random_matrix(6, 1, 22).col(0);
    const std::vector<int> labels(10, 0);
    double prev = std::numeric_limits<double>::infinity();
    for (int d = 1; d <= 6; ++d) {
        const kssc::ClusterModel model = kssc::fit_subspaces(y, labels, d);
        const double r = kssc::subspace_residuals(model, probe)(0);
        CHECK(r <= prev + 1e-10);
        prev = r;
    }
}

namespace {

struct Split {
    Matrix train, test;
    std::vector<int> train_labels, test_labels;
};

// hold out the last `holdout` points of each cluster
Split split_dataset(const kssc::LabeledDataset& ds, int per_cluster, int holdout) {
    Split s;
    std::vector<int> train_idx, test_idx;
    std::vector<int> seen(16, 0);
    for (int i = 0; i < static_cast<int>(ds.labels.size()); ++i) {
        const int m = ds.labels[i];
        if (seen[m]++ < per_cluster - holdout)
            train_idx.push_back(i);
        else
            test_idx.push_back(i);
    }
    s.train.resize(ds.data.rows(), static_cast<Eigen::Index>(train_idx.size()));
    s.test.resize(ds.data.rows(), static_cast<Eigen::Index>(test_idx.size()));
    for (std::size_t j = 0; j < train_idx.size(); ++j) {
        s.train.col(static_cast<Eigen::Index>(j)) = ds.data.col(train_idx[j]);
        s.train_labels.push_back(ds.labels[train_idx[j]]);
    }
    for (std::size_t j = 0; j < test_idx.size(); ++j) {
        s.test.col(static_cast<Eigen::Index>(j)) = ds.data.col(test_idx[j]);
        s.test_labels.push_back(ds.labels[test_idx[j]]);
    }
    return s;
}

}  // namespace

TEST_CASE("out-of-sample chain labels held-out points from the same subspaces") {
    const kssc::LabeledDataset ds = kssc::gen_union_subspaces(20, 3, 2, 30, 0.0, 11);
    const Split s = split_dataset(ds, 30, 6);
    const Matrix x_train = kssc::unit_normalize_columns(s.train);
    const kssc::NptModel npt = kssc::fit_from_data(kssc::KernelSpec::linear(), x_train);
    const kssc::ClusterResult res =
        kssc::cluster(npt.y, 3, kssc::SscMode::frobenius, 50.0, kssc::SolverOptions{}, 2);
    REQUIRE(kssc::accuracy(s.train_labels, res.labels) == 1.0);

    const kssc::ClusterModel model = kssc::fit_subspaces(npt.y, res.labels, 2);

    // every training point maps back to its in-sample label
    std::vector<int> train_again(static_cast<std::size_t>(x_train.cols()));
    for (Eigen::Index i = 0; i < x_train.cols(); ++i)
        train_again[static_cast<std::size_t>(i)] = kssc::oos_pipeline(npt, model, x_train.col(i));
    CHECK(train_again == res.labels);

    // a perturbed duplicate keeps its label
    Vector wiggled = x_train.col(0);
    wiggled(0) += 1e-9;
    CHECK(kssc::oos_pipeline(npt, model, wiggled) == res.labels[0]);

    // held-out points land in the clusters of their generating subspaces
    const Matrix x_test = kssc::unit_normalize_columns(s.test);
    std::vector<int> oos(static_cast<std::size_t>(x_test.cols()));
    for (Eigen::Index i = 0; i < x_test.cols(); ++i)
        oos[static_cast<std::size_t>(i)] = kssc::oos_pipeline(npt, model, x_test.col(i));
    CHECK(kssc::accuracy(s.test_labels, oos) == 1.0);

    // relabeling the clusters does not change the induced partition
    std::vector<int> relabeled(res.labels.size());
    for (std::size_t i = 0; i < res.labels.size(); ++i) relabeled[i] = (res.labels[i] + 1) % 3;
    const kssc::ClusterModel model2 = kssc::fit_subspaces(npt.y, relabeled, 2);
    std::vector<int> oos2(static_cast<std::size_t>(x_test.cols()));
    for (Eigen::Index i = 0; i < x_test.cols(); ++i)
        oos2[static_cast<std::size_t>(i)] = kssc::oos_pipeline(npt, model2, x_test.col(i));
    CHECK(kssc::accuracy(oos, oos2) == 1.0);

    // dimension mismatch propagates out of the chain
    CHECK_THROWS_AS(kssc::oos_pipeline(npt, model, Vector::Zero(7)), kssc::DimensionError);
}
