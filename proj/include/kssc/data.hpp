#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "kssc/types.hpp"

namespace kssc {

enum class MatrixFormat { csv, raw_binary };

/// Provenance of a generated dataset, echoed into result files.
struct GeneratorInfo {
    std::string kind;
    std::string params;
    std::uint64_t seed = 0;
};

struct LabeledDataset {
    Matrix data;              // D x N, columns are samples
    std::vector<int> labels;  // values in [0, clusters)
    int clusters = 0;
    GeneratorInfo provenance;
};

/// ".csv" -> csv, anything else -> raw_binary.
MatrixFormat format_from_path(const std::string& path);

/// CSV rows are samples and are transposed on load, so columns of the result
/// are samples. An optional header row (non-numeric first line) is skipped.
/// Non-finite values, ragged rows, and malformed fields are rejected with the
/// offending line number. A file with no data rows is an error unless
/// allow_empty is set, in which case it loads as a zero-column matrix.
Matrix load_matrix(const std::string& path, MatrixFormat format, bool allow_empty = false);
void save_matrix(const std::string& path, const Matrix& x, MatrixFormat format);

/// Single-column CSV of integers, optional header auto-detected.
std::vector<int> load_labels(const std::string& path);
void save_labels(const std::string& path, const std::vector<int>& labels);

/// Scale every column to unit l2 norm. A zero column is an error naming the
/// column index.
Matrix unit_normalize_columns(const Matrix& x);

/// c random dim-dimensional linear subspaces of R^D (seeded orthonormal
/// bases), n_per_cluster gaussian points on each, plus optional isotropic
/// gaussian noise of scale noise_sigma.
LabeledDataset gen_union_subspaces(int d_ambient, int c, int dim_per_subspace,
                                   int n_per_cluster, double noise_sigma, std::uint64_t seed);

/// Concentric circles in the plane, one radius per cluster (radii must be
/// distinct and positive), uniform angles, optional gaussian noise.
LabeledDataset gen_concentric_circles(const std::vector<double>& radii, int n_per_cluster,
                                      double noise_sigma, std::uint64_t seed);

/// One-dimensional parameters pushed through a distinct low-degree monomial
/// map per cluster into R^D, plus optional gaussian noise.
LabeledDataset gen_polynomial_embedding(int d_ambient, int c, int n_per_cluster,
                                        double noise_sigma, std::uint64_t seed);

/// Replace exactly round(fraction * D * N) entries, chosen uniformly without
/// replacement, by +-magnitude with random sign.
Matrix corrupt_sparse(const Matrix& x, double fraction, double magnitude, std::uint64_t seed);

}  // namespace kssc
