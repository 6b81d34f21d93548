#pragma once

#include <cstdint>
#include <vector>

#include "kssc/solver.hpp"
#include "kssc/types.hpp"

namespace kssc {

enum class SscMode { robust, frobenius };

/// Symmetric nonnegative similarity matrix with a zero diagonal, built from
/// self-representation coefficients.
struct Affinity {
    Matrix entries;
};

struct KMeansResult {
    std::vector<int> labels;
    double inertia = 0.0;
    int best_restart = 0;
    int restarts = 0;
};

struct ClusterResult {
    std::vector<int> labels;
    Vector laplacian_eigenvalues;  // the c smallest
    double kmeans_inertia = 0.0;
    int kmeans_best_restart = 0;
    int kmeans_restarts = 0;
    SolverDiagnostics solver;
};

/// A = (|C| + |C|^T) / 2 with the diagonal forced to zero. Exactly symmetric.
Affinity affinity(const Matrix& c);

/// Normalized graph Laplacian L = I - D^{-1/2} A D^{-1/2}. Isolated vertices
/// (zero degree) get an identity row/column.
Matrix laplacian(const Affinity& a);

/// Rows are the N points embedded in the span of the c smallest-eigenvalue
/// eigenvectors of L, each row normalized to unit length (zero rows kept).
Matrix spectral_embed(const Matrix& l, int c);

/// Deterministic k-means on the rows of v: k-means++ seeding from a
/// counter-based generator keyed by (seed, restart), fixed restart count,
/// best inertia wins with ties broken by lowest restart index. An empty
/// cluster is reseeded to the point farthest from its assigned centroid.
KMeansResult kmeans(const Matrix& v, int c, std::uint64_t seed, int restarts = 20,
                    int max_iter = 300);

/// Full solve -> affinity -> Laplacian -> embed -> k-means chain on
/// coordinates y. `lambda` is the base value; sqrt-rank scaling from `opts`
/// is applied internally using R = rows(y).
ClusterResult cluster(const Matrix& y, int c, SscMode mode, double lambda,
                      const SolverOptions& opts, std::uint64_t seed);

}  // namespace kssc
