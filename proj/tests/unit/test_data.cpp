#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "kssc/data.hpp"

using kssc::Matrix;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name) : path("/tmp/kssc_test_" + name) {}
    ~TempFile() { std::remove(path.c_str()); }
};

void write_text(const std::string& path, const std::string& body) {
    std::ofstream out(path);
    out << body;
}

}  // namespace

TEST_CASE("csv rows are samples and become columns on load") {
    TempFile f("basic.csv");
    write_text(f.path, "1,0\n0,1\n");
    const Matrix x = kssc::load_matrix(f.path, kssc::MatrixFormat::csv);
    CHECK((x - Matrix::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("csv header row is auto-detected and skipped") {
    TempFile f("header.csv");
    write_text(f.path, "f1,f2\n1,2\n3,4\n");
    const Matrix x = kssc::load_matrix(f.path, kssc::MatrixFormat::csv);
    CHECK(x.rows() == 2);
    CHECK(x.cols() == 2);
    CHECK(x(0, 0) == 1.0);
    CHECK(x(1, 1) == 4.0);
}

TEST_CASE("csv rejects non-finite values, ragged rows, and garbage") {
    TempFile f("bad.csv");
    write_text(f.path, "1,2\n3,nan\n");
    CHECK_THROWS_AS(kssc::load_matrix(f.path, kssc::MatrixFormat::csv), kssc::ParseError);
    write_text(f.path, "1,2\n3\n");
    CHECK_THROWS_AS(kssc::load_matrix(f.path, kssc::MatrixFormat::csv), kssc::ParseError);
    write_text(f.path, "1,2\n3,4x\n");
    try {
        kssc::load_matrix(f.path, kssc::MatrixFormat::csv);
        FAIL("expected a parse error");
    } catch (const kssc::ParseError& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
    CHECK_THROWS_AS(kssc::load_matrix("/nonexistent/nope.csv", kssc::MatrixFormat::csv),
                    kssc::IoError);
}

TEST_CASE("raw-binary round-trip is bit-identical") {
    TempFile f("roundtrip.bin");
    Matrix x(3, 4);
    for (int i = 0; i < 12; ++i) x(i % 3, i / 3) = std::pow(-1.1, i);
    kssc::save_matrix(f.path, x, kssc::MatrixFormat::raw_binary);
    const Matrix back = kssc::load_matrix(f.path, kssc::MatrixFormat::raw_binary);
    REQUIRE(back.rows() == 3);
    REQUIRE(back.cols() == 4);
    CHECK(back.cwiseEqual(x).all());
}

TEST_CASE("raw-binary rejects a corrupted header") {
    TempFile f("magic.bin");
    write_text(f.path, "NOPE this is not a matrix");
    CHECK_THROWS_AS(kssc::load_matrix(f.path, kssc::MatrixFormat::raw_binary), kssc::ParseError);
}

TEST_CASE("format is inferred from the path suffix") {
    CHECK(kssc::format_from_path("a/b/data.csv") == kssc::MatrixFormat::csv);
    CHECK(kssc::format_from_path("a/b/data.bin") == kssc::MatrixFormat::raw_binary);
}

TEST_CASE("labels round-trip through single-column csv") {
    TempFile f("labels.csv");
    const std::vector<int> labels = {0, 2, 1, 1, 0};
    kssc::save_labels(f.path, labels);
    CHECK(kssc::load_labels(f.path) == labels);
}

TEST_CASE("unit normalization scales a 3-4-5 column and is idempotent") {
    Matrix x(2, 1);
    x << 3, 4;
    const Matrix u = kssc::unit_normalize_columns(x);
    CHECK(u(0, 0) == doctest::Approx(0.6).epsilon(1e-14));
    CHECK(u(1, 0) == doctest::Approx(0.8).epsilon(1e-14));
    const Matrix uu = kssc::unit_normalize_columns(u);
    CHECK((uu - u).cwiseAbs().maxCoeff() < 1e-15);

    Matrix with_zero(2, 3);
    with_zero << 1, 0, 2, 0, 0, 1;
    try {
        kssc::unit_normalize_columns(with_zero);
        FAIL("expected an error naming the zero column");
    } catch (const kssc::DegenerateInputError& e) {
        CHECK(std::string(e.what()).find("column 1") != std::string::npos);
    }
}

TEST_CASE("subspace generator emits points exactly on seeded subspaces") {
    const kssc::LabeledDataset ds = kssc::gen_union_subspaces(12, 3, 2, 7, 0.0, 42);
    CHECK(ds.data.rows() == 12);
    CHECK(ds.data.cols() == 21);
    CHECK(ds.labels.size() == 21);
    CHECK(ds.clusters == 3);
    CHECK(ds.provenance.kind == "union_subspaces");
    CHECK(ds.provenance.seed == 42);
    for (int m = 0; m < 3; ++m)
        CHECK(std::count(ds.labels.begin(), ds.labels.end(), m) == 7);

    // zero noise: every cluster's points live in a 2-dimensional span, so any
    // member is reproduced by projecting onto the others
    for (int m = 0; m < 3; ++m) {
        Matrix member(12, 7);
        int k = 0;
        for (int j = 0; j < 21; ++j)
            if (ds.labels[j] == m) member.col(k++) = ds.data.col(j);
        Eigen::JacobiSVD<Matrix> svd(member);
        int rank = 0;
        for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
            if (svd.singularValues()(i) > 1e-9 * svd.singularValues()(0)) ++rank;
        CHECK(rank == 2);
    }

    const kssc::LabeledDataset again = kssc::gen_union_subspaces(12, 3, 2, 7, 0.0, 42);
    CHECK(again.data.cwiseEqual(ds.data).all());
    CHECK(again.labels == ds.labels);
    const kssc::LabeledDataset other = kssc::gen_union_subspaces(12, 3, 2, 7, 0.0, 43);
    CHECK(!other.data.cwiseEqual(ds.data).all());

    CHECK_THROWS_AS(kssc::gen_union_subspaces(2, 2, 2, 5, 0.0, 0), kssc::InvalidArgumentError);
    CHECK_THROWS_AS(kssc::gen_union_subspaces(5, 2, 2, 5, -1.0, 0), kssc::InvalidArgumentError);
}

TEST_CASE("concentric circles have the requested radii") {
    const kssc::LabeledDataset ds = kssc::gen_concentric_circles({1.0, 3.0}, 25, 0.0, 7);
    CHECK(ds.data.rows() == 2);
    CHECK(ds.data.cols() == 50);
    for (int j = 0; j < 50; ++j) {
        const double r = ds.data.col(j).norm();
        const double expected = ds.labels[j] == 0 ? 1.0 : 3.0;
        CHECK(r == doctest::Approx(expected).epsilon(1e-12));
    }
    for (int m = 0; m < 2; ++m)
        CHECK(std::count(ds.labels.begin(), ds.labels.end(), m) == 25);

    const kssc::LabeledDataset again = kssc::gen_concentric_circles({1.0, 3.0}, 25, 0.0, 7);
    CHECK(again.data.cwiseEqual(ds.data).all());

    CHECK_THROWS_AS(kssc::gen_concentric_circles({1.0, 1.0}, 5, 0.0, 0),
                    kssc::InvalidArgumentError);
    CHECK_THROWS_AS(kssc::gen_concentric_circles({-1.0}, 5, 0.0, 0), kssc::InvalidArgumentError);
}

TEST_CASE("polynomial embedding is balanced and deterministic") {
    const kssc::LabeledDataset ds = kssc::gen_polynomial_embedding(6, 2, 15, 0.0, 3);
    CHECK(ds.data.rows() == 6);
    CHECK(ds.data.cols() == 30);
    for (int m = 0; m < 2; ++m)
        CHECK(std::count(ds.labels.begin(), ds.labels.end(), m) == 15);
    const kssc::LabeledDataset again = kssc::gen_polynomial_embedding(6, 2, 15, 0.0, 3);
    CHECK(again.data.cwiseEqual(ds.data).all());
}

TEST_CASE("sparse corruption touches exactly the contracted entry count") {
    Matrix x = Matrix::Constant(10, 9, 0.5);
    const Matrix same = kssc::corrupt_sparse(x, 0.0, 100.0, 1);
    CHECK(same.cwiseEqual(x).all());

    const Matrix all = kssc::corrupt_sparse(x, 1.0, 100.0, 1);
    CHECK((all.cwiseAbs().array() == 100.0).all());

    const Matrix some = kssc::corrupt_sparse(x, 0.1, 100.0, 1);
    int changed = 0;
    for (int j = 0; j < 9; ++j)
        for (int i = 0; i < 10; ++i)
            if (some(i, j) != x(i, j)) ++changed;
    CHECK(changed == 9);  // round(0.1 * 90)

    // corrupted entries are +-magnitude
    for (int j = 0; j < 9; ++j)
        for (int i = 0; i < 10; ++i)
            if (some(i, j) != x(i, j)) CHECK(std::abs(some(i, j)) == 100.0);

    const Matrix again = kssc::corrupt_sparse(x, 0.1, 100.0, 1);
    CHECK(again.cwiseEqual(some).all());
    const Matrix other = kssc::corrupt_sparse(x, 0.1, 100.0, 2);
    CHECK(!other.cwiseEqual(some).all());

    CHECK_THROWS_AS(kssc::corrupt_sparse(x, 1.5, 1.0, 0), kssc::InvalidArgumentError);
}
