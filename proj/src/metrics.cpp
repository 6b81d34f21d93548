#include "kssc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <string>

namespace kssc {

namespace {

// Map arbitrary label values to contiguous ids 0..k-1 (order of first use is
// irrelevant to every metric here).
std::vector<int> compress(const std::vector<int>& labels, int& k) {
    std::map<int, int> ids;
    std::vector<int> out(labels.size());
    for (size_t i = 0; i < labels.size(); ++i) {
        auto [it, fresh] = ids.emplace(labels[i], static_cast<int>(ids.size()));
        (void)fresh;
        out[i] = it->second;
    }
    k = static_cast<int>(ids.size());
    return out;
}

void require_same_length(const std::vector<int>& truth, const std::vector<int>& pred,
                         const char* op) {
    if (truth.size() != pred.size())
        throw DimensionError(std::string(op) + ": label sequences have lengths " +
                             std::to_string(truth.size()) + " and " +
                             std::to_string(pred.size()));
}

std::vector<std::vector<std::int64_t>> confusion(const std::vector<int>& truth,
                                                 const std::vector<int>& pred, int kt,
                                                 int kp) {
    std::vector<std::vector<std::int64_t>> m(static_cast<size_t>(kt),
                                             std::vector<std::int64_t>(static_cast<size_t>(kp), 0));
    for (size_t i = 0; i < truth.size(); ++i)
        ++m[static_cast<size_t>(truth[i])][static_cast<size_t>(pred[i])];
    return m;
}

// Min-cost perfect matching on a square cost matrix (Hungarian algorithm with
// potentials, O(n^3)). Returns the total cost of the optimal assignment.
double hungarian_min_cost(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(static_cast<size_t>(n) + 1, 0.0), v(static_cast<size_t>(n) + 1, 0.0);
    std::vector<int> match(static_cast<size_t>(n) + 1, 0);  // match[col] = row, 1-based
    for (int i = 1; i <= n; ++i) {
        match[0] = i;
        int j0 = 0;
        std::vector<double> minv(static_cast<size_t>(n) + 1, inf);
        std::vector<char> used(static_cast<size_t>(n) + 1, 0);
        std::vector<int> way(static_cast<size_t>(n) + 1, 0);
        do {
            used[static_cast<size_t>(j0)] = 1;
            const int i0 = match[static_cast<size_t>(j0)];
            double delta = inf;
            int j1 = 0;
            for (int j = 1; j <= n; ++j) {
                if (used[static_cast<size_t>(j)]) continue;
                const double cur = cost[static_cast<size_t>(i0 - 1)][static_cast<size_t>(j - 1)] -
                                   u[static_cast<size_t>(i0)] - v[static_cast<size_t>(j)];
                if (cur < minv[static_cast<size_t>(j)]) {
                    minv[static_cast<size_t>(j)] = cur;
                    way[static_cast<size_t>(j)] = j0;
                }
                if (minv[static_cast<size_t>(j)] < delta) {
                    delta = minv[static_cast<size_t>(j)];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[static_cast<size_t>(j)]) {
                    u[static_cast<size_t>(match[static_cast<size_t>(j)])] += delta;
                    v[static_cast<size_t>(j)] -= delta;
                } else {
                    minv[static_cast<size_t>(j)] -= delta;
                }
            }
            j0 = j1;
        } while (match[static_cast<size_t>(j0)] != 0);
        do {
            const int j1 = way[static_cast<size_t>(j0)];
            match[static_cast<size_t>(j0)] = match[static_cast<size_t>(j1)];
            j0 = j1;
        } while (j0 != 0);
    }
    double total = 0.0;
    for (int j = 1; j <= n; ++j)
        total += cost[static_cast<size_t>(match[static_cast<size_t>(j)] - 1)][static_cast<size_t>(j - 1)];
    return total;
}

double entropy(const std::vector<std::int64_t>& counts, std::int64_t n) {
    double h = 0.0;
    for (std::int64_t c : counts) {
        if (c == 0) continue;
        const double p = static_cast<double>(c) / static_cast<double>(n);
        h -= p * std::log(p);
    }
    return h;
}

std::int64_t pairs(std::int64_t c) { return c * (c - 1) / 2; }

}  // namespace

double accuracy(const std::vector<int>& truth, const std::vector<int>& pred) {
    require_same_length(truth, pred, "accuracy");
    if (truth.empty()) throw InvalidArgumentError("accuracy: empty labelings");
    int kt = 0, kp = 0;
    const std::vector<int> t = compress(truth, kt);
    const std::vector<int> p = compress(pred, kp);
    const auto conf = confusion(t, p, kt, kp);
    const int n = std::max(kt, kp);
    std::vector<std::vector<double>> cost(static_cast<size_t>(n),
                                          std::vector<double>(static_cast<size_t>(n), 0.0));
    for (int i = 0; i < kt; ++i)
        for (int j = 0; j < kp; ++j)
            cost[static_cast<size_t>(i)][static_cast<size_t>(j)] =
                -static_cast<double>(conf[static_cast<size_t>(i)][static_cast<size_t>(j)]);
    const double matched = -hungarian_min_cost(cost);
    return matched / static_cast<double>(truth.size());
}

double nmi(const std::vector<int>& truth, const std::vector<int>& pred) {
    require_same_length(truth, pred, "nmi");
    if (truth.empty()) throw InvalidArgumentError("nmi: empty labelings");
    int kt = 0, kp = 0;
    const std::vector<int> t = compress(truth, kt);
    const std::vector<int> p = compress(pred, kp);
    const auto conf = confusion(t, p, kt, kp);
    const auto n = static_cast<std::int64_t>(truth.size());

    std::vector<std::int64_t> row(static_cast<size_t>(kt), 0), col(static_cast<size_t>(kp), 0);
    for (int i = 0; i < kt; ++i)
        for (int j = 0; j < kp; ++j) {
            row[static_cast<size_t>(i)] += conf[static_cast<size_t>(i)][static_cast<size_t>(j)];
            col[static_cast<size_t>(j)] += conf[static_cast<size_t>(i)][static_cast<size_t>(j)];
        }

    const double ht = entropy(row, n);
    const double hp = entropy(col, n);
    if (ht == 0.0 && hp == 0.0) return 1.0;
    if (ht == 0.0 || hp == 0.0) return 0.0;

    double mi = 0.0;
    for (int i = 0; i < kt; ++i)
        for (int j = 0; j < kp; ++j) {
            const std::int64_t nij = conf[static_cast<size_t>(i)][static_cast<size_t>(j)];
            if (nij == 0) continue;
            const double pij = static_cast<double>(nij) / static_cast<double>(n);
            mi += pij * std::log(static_cast<double>(nij) * static_cast<double>(n) /
                                 (static_cast<double>(row[static_cast<size_t>(i)]) *
                                  static_cast<double>(col[static_cast<size_t>(j)])));
        }
    return std::clamp(mi / std::sqrt(ht * hp), 0.0, 1.0);
}

double pairwise_f1(const std::vector<int>& truth, const std::vector<int>& pred) {
    require_same_length(truth, pred, "pairwise_f1");
    if (truth.size() < 2) throw InvalidArgumentError("pairwise_f1: need at least two samples");
    int kt = 0, kp = 0;
    const std::vector<int> t = compress(truth, kt);
    const std::vector<int> p = compress(pred, kp);
    const auto conf = confusion(t, p, kt, kp);

    std::int64_t both = 0, same_truth = 0, same_pred = 0;
    std::vector<std::int64_t> row(static_cast<size_t>(kt), 0), col(static_cast<size_t>(kp), 0);
    for (int i = 0; i < kt; ++i)
        for (int j = 0; j < kp; ++j) {
            const std::int64_t nij = conf[static_cast<size_t>(i)][static_cast<size_t>(j)];
            both += pairs(nij);
            row[static_cast<size_t>(i)] += nij;
            col[static_cast<size_t>(j)] += nij;
        }
    for (std::int64_t c : row) same_truth += pairs(c);
    for (std::int64_t c : col) same_pred += pairs(c);

    if (same_truth == 0 && same_pred == 0) return 1.0;
    const double precision = same_pred > 0 ? static_cast<double>(both) / static_cast<double>(same_pred) : 0.0;
    const double recall = same_truth > 0 ? static_cast<double>(both) / static_cast<double>(same_truth) : 0.0;
    if (precision + recall == 0.0) return 0.0;
    return 2.0 * precision * recall / (precision + recall);
}

namespace {

// Exact two-sided tail: enumerate every size-na subset of ranks {1..n} and
// count splits at least as far from the mean rank-sum as the observed one.
// Comparisons use 2W - na(n+1) so everything stays in integers.
double exact_ranksum_p(int n, int na, std::int64_t w_obs) {
    const std::int64_t center = static_cast<std::int64_t>(na) * (n + 1);
    const std::int64_t obs_dev = std::llabs(2 * w_obs - center);
    std::int64_t total = 0, extreme = 0;

    std::vector<int> idx(static_cast<size_t>(na));
    for (int i = 0; i < na; ++i) idx[static_cast<size_t>(i)] = i;
    while (true) {
        std::int64_t w = 0;
        for (int i = 0; i < na; ++i) w += idx[static_cast<size_t>(i)] + 1;
        ++total;
        if (std::llabs(2 * w - center) >= obs_dev) ++extreme;

        int pos = na - 1;
        while (pos >= 0 && idx[static_cast<size_t>(pos)] == n - na + pos) --pos;
        if (pos < 0) break;
        ++idx[static_cast<size_t>(pos)];
        for (int i = pos + 1; i < na; ++i)
            idx[static_cast<size_t>(i)] = idx[static_cast<size_t>(i - 1)] + 1;
    }
    return static_cast<double>(extreme) / static_cast<double>(total);
}

}  // namespace

double wilcoxon_ranksum(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.empty() || b.empty())
        throw InvalidArgumentError("wilcoxon_ranksum: both samples must be nonempty");
    const int na = static_cast<int>(a.size());
    const int nb = static_cast<int>(b.size());
    const int n = na + nb;

    std::vector<std::pair<double, int>> pooled;  // (value, 0 for a / 1 for b)
    pooled.reserve(static_cast<size_t>(n));
    for (double x : a) pooled.emplace_back(x, 0);
    for (double x : b) pooled.emplace_back(x, 1);
    std::sort(pooled.begin(), pooled.end(),
              [](const auto& l, const auto& r) { return l.first < r.first; });

    // midranks + tie bookkeeping
    std::vector<double> rank(static_cast<size_t>(n));
    bool has_ties = false;
    double tie_term = 0.0;  // sum of t^3 - t over tie groups
    for (int i = 0; i < n;) {
        int j = i;
        while (j < n && pooled[static_cast<size_t>(j)].first == pooled[static_cast<size_t>(i)].first) ++j;
        const double mid = 0.5 * static_cast<double>(i + 1 + j);
        for (int k = i; k < j; ++k) rank[static_cast<size_t>(k)] = mid;
        const auto t = static_cast<double>(j - i);
        if (j - i > 1) {
            has_ties = true;
            tie_term += t * t * t - t;
        }
        i = j;
    }

    double w = 0.0;
    for (int i = 0; i < n; ++i)
        if (pooled[static_cast<size_t>(i)].second == 0) w += rank[static_cast<size_t>(i)];

    if (n <= 12 && !has_ties)
        return exact_ranksum_p(n, na, static_cast<std::int64_t>(std::llround(w)));

    const double mu = static_cast<double>(na) * (n + 1) / 2.0;
    const double var = static_cast<double>(na) * nb / 12.0 *
                       (static_cast<double>(n + 1) -
                        tie_term / (static_cast<double>(n) * (n - 1)));
    if (var <= 0.0) return 1.0;
    const double z = std::max(0.0, std::abs(w - mu) - 0.5) / std::sqrt(var);
    return std::min(1.0, std::erfc(z / std::sqrt(2.0)));
}

MetricsReport evaluate(const std::vector<int>& truth, const std::vector<int>& pred) {
    MetricsReport report;
    report.acc = accuracy(truth, pred);
    report.nmi = nmi(truth, pred);
    report.f1 = pairwise_f1(truth, pred);
    report.n = truth.size();
    return report;
}

}  // namespace kssc
