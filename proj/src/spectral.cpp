#include "kssc/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "kssc/rng.hpp"

namespace kssc {

Affinity affinity(const Matrix& c) {
    const Eigen::Index n = c.rows();
    if (c.cols() != n) throw InvalidArgumentError("affinity: matrix must be square");
    Matrix a(n, n);
    for (Eigen::Index j = 0; j < n; ++j) {
        a(j, j) = 0.0;
        for (Eigen::Index i = 0; i < j; ++i) {
            const double v = 0.5 * (std::abs(c(i, j)) + std::abs(c(j, i)));
            a(i, j) = v;
            a(j, i) = v;
        }
    }
    return Affinity{std::move(a)};
}

Matrix laplacian(const Affinity& a) {
    const Eigen::Index n = a.entries.rows();
    const Vector degree = a.entries.rowwise().sum();
    Vector inv_sqrt(n);
    for (Eigen::Index i = 0; i < n; ++i)
        inv_sqrt[i] = degree[i] > 0.0 ? 1.0 / std::sqrt(degree[i]) : 0.0;

    Matrix l = Matrix::Identity(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i = 0; i < j; ++i) {
            const double v = -(inv_sqrt[i] * inv_sqrt[j]) * a.entries(i, j);
            l(i, j) = v;
            l(j, i) = v;
        }
    return l;
}

namespace {

// Embedding plus the eigenvalues it was built from; cluster() reports both.
std::pair<Matrix, Vector> spectral_embed_impl(const Matrix& l, int c) {
    const Eigen::Index n = l.rows();
    if (l.cols() != n) throw InvalidArgumentError("spectral_embed: matrix must be square");
    if (c < 1 || c > n)
        throw InvalidArgumentError("spectral_embed: cluster count " + std::to_string(c) +
                                   " out of range for N = " + std::to_string(n));
    Eigen::SelfAdjointEigenSolver<Matrix> es(l);
    if (es.info() != Eigen::Success)
        throw DegenerateInputError("spectral_embed: eigendecomposition failed");
    Matrix v = es.eigenvectors().leftCols(c);  // ascending eigenvalues
    for (Eigen::Index i = 0; i < n; ++i) {
        const double norm = v.row(i).norm();
        if (norm > 0.0) v.row(i) /= norm;
    }
    return {std::move(v), es.eigenvalues().head(c)};
}

}  // namespace

Matrix spectral_embed(const Matrix& l, int c) { return spectral_embed_impl(l, c).first; }

namespace {

struct SingleKMeans {
    std::vector<int> labels;
    double inertia = 0.0;
};

SingleKMeans kmeans_once(const Matrix& points, int c, SplitMix64& rng, int max_iter) {
    const Eigen::Index n = points.rows();
    const Eigen::Index dim = points.cols();

    // k-means++ seeding
    Matrix centers(c, dim);
    Vector dist2 = Vector::Constant(n, std::numeric_limits<double>::infinity());
    centers.row(0) = points.row(static_cast<Eigen::Index>(rng.next_below(static_cast<std::uint64_t>(n))));
    for (int k = 1; k < c; ++k) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            dist2[i] = std::min(dist2[i], (points.row(i) - centers.row(k - 1)).squaredNorm());
            total += dist2[i];
        }
        Eigen::Index pick = 0;
        if (total > 0.0) {
            const double r = rng.next_double() * total;
            double acc = 0.0;
            pick = n - 1;
            for (Eigen::Index i = 0; i < n; ++i) {
                acc += dist2[i];
                if (acc >= r) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = static_cast<Eigen::Index>(rng.next_below(static_cast<std::uint64_t>(n)));
        }
        centers.row(k) = points.row(pick);
    }

    std::vector<int> labels(static_cast<size_t>(n), 0);
    std::vector<int> counts(static_cast<size_t>(c), 0);
    Vector point_dist2(n);
    for (int iter = 0; iter < max_iter; ++iter) {
        // assignment; ties go to the lowest center index
        bool changed = false;
        for (Eigen::Index i = 0; i < n; ++i) {
            int best = 0;
            double best_d = (points.row(i) - centers.row(0)).squaredNorm();
            for (int k = 1; k < c; ++k) {
                const double d = (points.row(i) - centers.row(k)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = k;
                }
            }
            point_dist2[i] = best_d;
            if (labels[static_cast<size_t>(i)] != best) {
                labels[static_cast<size_t>(i)] = best;
                changed = true;
            }
        }

        std::fill(counts.begin(), counts.end(), 0);
        for (Eigen::Index i = 0; i < n; ++i) ++counts[static_cast<size_t>(labels[static_cast<size_t>(i)])];

        // empty clusters grab the farthest point from its current centroid
        for (int k = 0; k < c; ++k) {
            if (counts[static_cast<size_t>(k)] > 0) continue;
            Eigen::Index far = 0;
            double far_d = -1.0;
            for (Eigen::Index i = 0; i < n; ++i) {
                if (counts[static_cast<size_t>(labels[static_cast<size_t>(i)])] <= 1) continue;
                if (point_dist2[i] > far_d) {
                    far_d = point_dist2[i];
                    far = i;
                }
            }
            --counts[static_cast<size_t>(labels[static_cast<size_t>(far)])];
            labels[static_cast<size_t>(far)] = k;
            counts[static_cast<size_t>(k)] = 1;
            point_dist2[far] = 0.0;
            changed = true;
        }

        // centroid update
        Matrix sums = Matrix::Zero(c, dim);
        for (Eigen::Index i = 0; i < n; ++i)
            sums.row(labels[static_cast<size_t>(i)]) += points.row(i);
        for (int k = 0; k < c; ++k)
            centers.row(k) = sums.row(k) / static_cast<double>(counts[static_cast<size_t>(k)]);

        if (!changed) break;
    }

    SingleKMeans out;
    out.labels = std::move(labels);
    out.inertia = 0.0;
    for (Eigen::Index i = 0; i < n; ++i)
        out.inertia += (points.row(i) - centers.row(out.labels[static_cast<size_t>(i)])).squaredNorm();
    return out;
}

}  // namespace

KMeansResult kmeans(const Matrix& v, int c, std::uint64_t seed, int restarts, int max_iter) {
    const Eigen::Index n = v.rows();
    if (c < 1 || c > n)
        throw InvalidArgumentError("kmeans: cluster count " + std::to_string(c) +
                                   " out of range for N = " + std::to_string(n));
    if (restarts < 1) throw InvalidArgumentError("kmeans: restarts must be >= 1");

    KMeansResult best;
    best.restarts = restarts;
    best.inertia = std::numeric_limits<double>::infinity();
    for (int restart = 0; restart < restarts; ++restart) {
        SplitMix64 rng(seed, static_cast<std::uint64_t>(restart));
        SingleKMeans run = kmeans_once(v, c, rng, max_iter);
        if (run.inertia < best.inertia) {
            best.inertia = run.inertia;
            best.labels = std::move(run.labels);
            best.best_restart = restart;
        }
    }
    return best;
}

ClusterResult cluster(const Matrix& y, int c, SscMode mode, double lambda,
                      const SolverOptions& opts, std::uint64_t seed) {
    const double lam = effective_lambda(lambda, static_cast<int>(y.rows()), opts.lambda_scaling);
    SelfRepresentation rep = mode == SscMode::robust ? solve_robust_ssc(y, lam, opts)
                                                     : solve_frobenius_ssc(y, lam, opts);
    const Affinity a = affinity(rep.c);
    const Matrix l = laplacian(a);
    auto [v, evals] = spectral_embed_impl(l, c);
    KMeansResult km = kmeans(v, c, seed);

    ClusterResult out;
    out.labels = std::move(km.labels);
    out.laplacian_eigenvalues = std::move(evals);
    out.kmeans_inertia = km.inertia;
    out.kmeans_best_restart = km.best_restart;
    out.kmeans_restarts = km.restarts;
    out.solver = std::move(rep.diagnostics);
    return out;
}

}  // namespace kssc
