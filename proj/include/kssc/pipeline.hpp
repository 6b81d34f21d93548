#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "kssc/data.hpp"
#include "kssc/kernel.hpp"
#include "kssc/metrics.hpp"
#include "kssc/npt.hpp"
#include "kssc/oos.hpp"
#include "kssc/solver.hpp"
#include "kssc/spectral.hpp"

namespace kssc {

using Json = nlohmann::json;

/// One clustering run, start to finish. Serialized verbatim into every
/// output file for provenance. `kernel == nullopt` clusters the raw
/// coordinates directly (no feature-space embedding).
struct RunConfig {
    SscMode mode = SscMode::robust;
    std::optional<KernelSpec> kernel = KernelSpec::gaussian(1.0);
    RankPolicy rank = RankPolicy::threshold();
    double lambda = 10.0;
    int clusters = 2;
    std::uint64_t seed = 0;
    int oos_dim = 5;
    bool normalize = true;
    SolverOptions solver;  // carries lambda_scaling
    std::string in_path;
    std::string truth_path;
    std::string out_path;
    std::string models_path;

    void validate() const;
};

Json config_to_json(const RunConfig& config);

/// Flat key set mirroring the CLI flags. Unknown keys are rejected unless
/// listed in `extra_allowed` (the benchmark command shares the file).
RunConfig config_from_json(const Json& j,
                           const std::vector<std::string>& extra_allowed = {});

Json read_json_file(const std::string& path);
void write_json_file(const std::string& path, const Json& j);

/// Everything assignment needs to replay the training-time inference path:
/// normalization -> kernel evaluation/centering -> projection -> per-cluster
/// subspace residuals.
struct PipelineModel {
    RunConfig config;
    std::optional<NptModel> npt;  // nullopt: solver ran on raw coordinates
    ClusterModel subspaces;
    std::vector<int> labels;  // in-sample labels

    Eigen::Index input_dim() const;
};

struct PipelineFit {
    PipelineModel model;
    Matrix y;  // solver coordinates, R x N
    ClusterResult clustering;
    std::vector<std::pair<std::string, double>> timings;  // stage, seconds
};

/// normalize -> (gram -> center -> eigenfit -> coordinates | raw) -> solver
/// -> spectral chain -> per-cluster subspace models.
PipelineFit fit_pipeline(const RunConfig& config, const Matrix& x);

Vector assign_residuals(const PipelineModel& model, const Vector& x);
int assign_point(const PipelineModel& model, const Vector& x);
std::vector<int> assign_batch(const PipelineModel& model, const Matrix& x);

Json models_to_json(const PipelineModel& model);
PipelineModel models_from_json(const Json& j);

/// File-level commands backing the CLI. Each returns the JSON result object
/// and writes it to the configured output path when one is set. Errors
/// propagate as exceptions; the CLI turns them into error objects + exit 1.
Json run_cluster(const RunConfig& config);
Json run_assign(const std::string& models_path, const std::string& in_path,
                const std::string& out_path);
Json run_eval(const std::string& truth_path, const std::string& pred_path);

/// Per-trial dataset recipe for the benchmark runner. When the base config
/// has an input file, trials draw seeded per-class subsets from it instead
/// of generating data.
struct SynthSpec {
    std::string kind = "union-subspaces";  // union-subspaces | circles | poly
    int ambient_dim = 30;
    int subspace_dim = 2;
    int per_cluster = 50;
    int oos_per_cluster = 0;
    double noise_sigma = 0.0;
    std::vector<double> radii;  // circles; must match the cluster count
    double corrupt_fraction = 0.0;
    double corrupt_magnitude = 0.0;
};

struct VariantSpec {
    std::string name;  // token as configured, e.g. "rkssc-gauss=20"
    SscMode mode = SscMode::frobenius;
    std::optional<KernelFamily> kernel;  // params come from the base config
    std::optional<double> lambda;        // per-variant override
};

/// Grammar: ssc | rssc | [r]kssc-{linear|poly|gauss}, with an optional
/// "=<lambda>" suffix overriding the base lambda. The r prefix selects the
/// robust objective; ssc/rssc run on raw coordinates.
VariantSpec parse_variant(const std::string& token);

struct BenchmarkConfig {
    RunConfig base;
    int trials = 10;
    std::vector<VariantSpec> variants;
    SynthSpec synth;
    int threads = 0;  // 0: one per hardware thread, capped at the trial count
};

struct TrialOutcome {
    int trial = 0;
    std::string variant;
    bool ok = false;
    std::string error;
    MetricsReport in_sample;
    MetricsReport out_of_sample;  // n == 0 when no held-out points
    double seconds = 0.0;
};

struct BenchmarkReport {
    BenchmarkConfig config;
    std::vector<TrialOutcome> rows;  // trial-major, variants in config order
};

/// Runs trials in parallel with per-trial seed = base seed + trial index.
/// Trial failures are recorded in their rows, not thrown.
BenchmarkReport run_benchmark(const BenchmarkConfig& config);

/// Rows plus mean/std aggregates per variant and two-sided rank-sum p-values
/// for every variant pair on every metric. Variants with fewer than two
/// successful trials are excluded from aggregates and flagged under
/// "underpowered_variants".
Json report_to_json(const BenchmarkReport& report);

}  // namespace kssc
