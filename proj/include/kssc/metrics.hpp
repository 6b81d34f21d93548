#pragma once

#include <cstddef>
#include <vector>

#include "kssc/types.hpp"

namespace kssc {

struct MetricsReport {
    double acc = 0.0;
    double nmi = 0.0;
    double f1 = 0.0;
    std::size_t n = 0;
};

/// Fraction of samples correctly labeled under the best one-to-one matching
/// between predicted and true cluster ids (optimal assignment on the
/// confusion matrix, padded to square when cluster counts differ).
double accuracy(const std::vector<int>& truth, const std::vector<int>& pred);

/// Normalized mutual information I(truth;pred) / sqrt(H(truth) H(pred)).
/// Both entropies zero -> 1; exactly one zero -> 0.
double nmi(const std::vector<int>& truth, const std::vector<int>& pred);

/// F1 over unordered sample pairs: a pair counts as positive when both
/// samples share a cluster. P + R = 0 -> 0; both pair sets empty -> 1.
double pairwise_f1(const std::vector<int>& truth, const std::vector<int>& pred);

/// Two-sided Wilcoxon rank-sum p-value. Exact by enumeration of rank splits
/// when the pooled size is <= 12 with no ties; otherwise a normal
/// approximation with midranks, tie correction, and continuity correction.
double wilcoxon_ranksum(const std::vector<double>& a, const std::vector<double>& b);

MetricsReport evaluate(const std::vector<int>& truth, const std::vector<int>& pred);

}  // namespace kssc
