#include "kssc/pipeline.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <thread>

#include "kssc/rng.hpp"

#ifndef KSSC_VERSION
#define KSSC_VERSION "dev"
#endif

namespace kssc {

namespace {

class StageTimer {
public:
    double lap() {
        const auto now = Clock::now();
        const double s = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        return s;
    }

private:
    using Clock = std::chrono::steady_clock;
    Clock::time_point last_ = Clock::now();
};

std::string mode_to_string(SscMode mode) {
    return mode == SscMode::robust ? "robust" : "frobenius";
}

SscMode mode_from_string(const std::string& s) {
    if (s == "robust") return SscMode::robust;
    if (s == "frobenius") return SscMode::frobenius;
    throw InvalidArgumentError("unknown mode '" + s + "' (expected robust or frobenius)");
}

std::string family_to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::linear: return "linear";
        case KernelFamily::polynomial: return "poly";
        case KernelFamily::gaussian: return "gauss";
    }
    return "linear";
}

KernelFamily family_from_string(const std::string& s) {
    if (s == "linear") return KernelFamily::linear;
    if (s == "poly") return KernelFamily::polynomial;
    if (s == "gauss") return KernelFamily::gaussian;
    throw InvalidArgumentError("unknown kernel '" + s +
                               "' (expected linear, poly, gauss, or none)");
}

std::string scaling_to_string(LambdaScaling s) {
    return s == LambdaScaling::sqrt_rank ? "sqrt-rank" : "none";
}

LambdaScaling scaling_from_string(const std::string& s) {
    if (s == "none") return LambdaScaling::none;
    if (s == "sqrt-rank") return LambdaScaling::sqrt_rank;
    throw InvalidArgumentError("unknown lambda scaling '" + s +
                               "' (expected none or sqrt-rank)");
}

Json vector_to_json(const Vector& v) {
    Json out = Json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Json matrix_to_json(const Matrix& m) {
    Json rows = Json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        Json row = Json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
        rows.push_back(std::move(row));
    }
    return rows;
}

Vector vector_from_json(const Json& j, const std::string& what) {
    if (!j.is_array()) throw ParseError(what + ": expected an array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw ParseError(what + ": non-numeric entry");
        v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
    }
    return v;
}

Matrix matrix_from_json(const Json& j, const std::string& what) {
    if (!j.is_array()) throw ParseError(what + ": expected an array of rows");
    const auto n_rows = static_cast<Eigen::Index>(j.size());
    if (n_rows == 0) return Matrix(0, 0);
    if (!j[0].is_array()) throw ParseError(what + ": expected an array of rows");
    const auto n_cols = static_cast<Eigen::Index>(j[0].size());
    Matrix m(n_rows, n_cols);
    for (Eigen::Index i = 0; i < n_rows; ++i) {
        const Json& row = j[static_cast<size_t>(i)];
        if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n_cols)
            throw ParseError(what + ": ragged rows");
        for (Eigen::Index k = 0; k < n_cols; ++k) {
            const Json& cell = row[static_cast<size_t>(k)];
            if (!cell.is_number()) throw ParseError(what + ": non-numeric entry");
            m(i, k) = cell.get<double>();
        }
    }
    return m;
}

Json metrics_to_json(const MetricsReport& r) {
    Json j;
    j["acc"] = r.acc;
    j["nmi"] = r.nmi;
    j["f1"] = r.f1;
    j["n"] = r.n;
    return j;
}

template <typename T>
void read_key(const Json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const Json::exception&) {
        throw InvalidArgumentError(std::string("config key '") + key +
                                   "' has the wrong type");
    }
}

const std::vector<std::string> kConfigKeys = {
    "adaptive_rho", "b",    "clusters",  "degree",  "in",      "kernel",
    "lambda",       "lambda_scaling",    "max_iter", "mode",   "models",
    "normalize",    "oos_dim",           "out",      "rank",   "rank_eps",
    "rho",          "seed",              "sigma2",   "tol_abs", "tol_rel",
    "truth"};

}  // namespace

void RunConfig::validate() const {
    if (clusters < 1) throw InvalidArgumentError("config: clusters must be >= 1");
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw InvalidArgumentError("config: lambda must be positive and finite");
    if (oos_dim < 1) throw InvalidArgumentError("config: oos-dim must be >= 1");
    if (kernel) kernel->validate();
    if (rank.mode == RankPolicy::Mode::explicit_rank && rank.r < 1)
        throw InvalidArgumentError("config: explicit rank must be >= 1");
    if (rank.mode == RankPolicy::Mode::threshold && !(rank.eps_rel > 0.0))
        throw InvalidArgumentError("config: rank threshold must be positive");
    solver.validate();
}

Json config_to_json(const RunConfig& config) {
    const KernelSpec kparams = config.kernel.value_or(KernelSpec{});
    Json j;
    j["mode"] = mode_to_string(config.mode);
    j["kernel"] = config.kernel ? family_to_string(config.kernel->family) : "none";
    j["b"] = kparams.b;
    j["degree"] = kparams.degree;
    j["sigma2"] = kparams.sigma2;
    if (config.rank.mode == RankPolicy::Mode::explicit_rank)
        j["rank"] = config.rank.r;
    else
        j["rank"] = "auto";
    j["rank_eps"] = config.rank.eps_rel;
    j["lambda"] = config.lambda;
    j["lambda_scaling"] = scaling_to_string(config.solver.lambda_scaling);
    j["clusters"] = config.clusters;
    j["seed"] = config.seed;
    j["oos_dim"] = config.oos_dim;
    j["normalize"] = config.normalize;
    j["rho"] = config.solver.rho;
    j["tol_abs"] = config.solver.tol_abs;
    j["tol_rel"] = config.solver.tol_rel;
    j["max_iter"] = config.solver.max_iter;
    j["adaptive_rho"] = config.solver.adaptive_rho;
    j["in"] = config.in_path;
    j["truth"] = config.truth_path;
    j["out"] = config.out_path;
    j["models"] = config.models_path;
    return j;
}

RunConfig config_from_json(const Json& j, const std::vector<std::string>& extra_allowed) {
    if (!j.is_object()) throw InvalidArgumentError("config: expected a JSON object");
    for (const auto& item : j.items()) {
        const std::string& key = item.key();
        if (std::find(kConfigKeys.begin(), kConfigKeys.end(), key) != kConfigKeys.end())
            continue;
        if (std::find(extra_allowed.begin(), extra_allowed.end(), key) != extra_allowed.end())
            continue;
        throw InvalidArgumentError("config: unknown key '" + key + "'");
    }

    RunConfig config;
    std::string mode_s = mode_to_string(config.mode);
    read_key(j, "mode", mode_s);
    config.mode = mode_from_string(mode_s);

    KernelSpec kparams = config.kernel.value_or(KernelSpec{});
    std::string kernel_s = config.kernel ? family_to_string(config.kernel->family) : "none";
    read_key(j, "kernel", kernel_s);
    read_key(j, "b", kparams.b);
    read_key(j, "degree", kparams.degree);
    read_key(j, "sigma2", kparams.sigma2);
    if (kernel_s == "none") {
        config.kernel.reset();
    } else {
        kparams.family = family_from_string(kernel_s);
        config.kernel = kparams;
    }

    if (j.contains("rank")) {
        const Json& r = j.at("rank");
        if (r.is_string() && r.get<std::string>() == "auto") {
            config.rank = RankPolicy::threshold();
        } else if (r.is_number_integer()) {
            config.rank = RankPolicy::explicit_rank(r.get<int>());
        } else {
            throw InvalidArgumentError("config key 'rank' must be an integer or \"auto\"");
        }
    }
    double rank_eps = config.rank.eps_rel;
    read_key(j, "rank_eps", rank_eps);
    config.rank.eps_rel = rank_eps;

    read_key(j, "lambda", config.lambda);
    std::string scaling_s = scaling_to_string(config.solver.lambda_scaling);
    read_key(j, "lambda_scaling", scaling_s);
    config.solver.lambda_scaling = scaling_from_string(scaling_s);
    read_key(j, "clusters", config.clusters);
    read_key(j, "seed", config.seed);
    read_key(j, "oos_dim", config.oos_dim);
    read_key(j, "normalize", config.normalize);
    read_key(j, "rho", config.solver.rho);
    read_key(j, "tol_abs", config.solver.tol_abs);
    read_key(j, "tol_rel", config.solver.tol_rel);
    read_key(j, "max_iter", config.solver.max_iter);
    read_key(j, "adaptive_rho", config.solver.adaptive_rho);
    read_key(j, "in", config.in_path);
    read_key(j, "truth", config.truth_path);
    read_key(j, "out", config.out_path);
    read_key(j, "models", config.models_path);
    return config;
}

Json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "' for reading");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw ParseError("'" + path + "': " + e.what());
    }
}

void write_json_file(const std::string& path, const Json& j) {
    std::ofstream out(path);
    if (!out) throw IoError("cannot open '" + path + "' for writing");
    out << j.dump(2) << '\n';
    if (!out) throw IoError("write to '" + path + "' failed");
}

Eigen::Index PipelineModel::input_dim() const {
    if (npt) return npt->training_data.rows();
    if (subspaces.clusters.empty()) return 0;
    return subspaces.clusters.front().mean.size();
}

PipelineFit fit_pipeline(const RunConfig& config, const Matrix& x) {
    config.validate();
    if (x.cols() < 2)
        throw DegenerateInputError("pipeline: need at least two samples, got " +
                                   std::to_string(x.cols()));

    PipelineFit fit;
    fit.model.config = config;
    StageTimer timer;

    const Matrix data = config.normalize ? unit_normalize_columns(x) : x;
    fit.timings.emplace_back("normalize", timer.lap());

    if (config.kernel) {
        fit.model.npt = fit_from_data(*config.kernel, data, config.rank);
        fit.y = fit.model.npt->y;
    } else {
        fit.y = data;
    }
    fit.timings.emplace_back("embed", timer.lap());

    fit.clustering = cluster(fit.y, config.clusters, config.mode, config.lambda,
                             config.solver, config.seed);
    fit.model.labels = fit.clustering.labels;
    fit.timings.emplace_back("cluster", timer.lap());

    fit.model.subspaces = fit_subspaces(fit.y, fit.model.labels, config.oos_dim);
    fit.timings.emplace_back("subspaces", timer.lap());
    return fit;
}

Vector assign_residuals(const PipelineModel& model, const Vector& x) {
    if (x.size() != model.input_dim())
        throw DimensionError("assign: point has " + std::to_string(x.size()) +
                             " entries, model expects " + std::to_string(model.input_dim()));
    Vector v = x;
    if (model.config.normalize) {
        const double norm = v.norm();
        if (norm == 0.0) throw DegenerateInputError("assign: zero input vector");
        v /= norm;
    }
    const Vector y = model.npt ? project_point(*model.npt, v) : v;
    return subspace_residuals(model.subspaces, y);
}

int assign_point(const PipelineModel& model, const Vector& x) {
    const Vector res = assign_residuals(model, x);
    int best = 0;
    for (Eigen::Index m = 1; m < res.size(); ++m)
        if (res[m] < res[best]) best = static_cast<int>(m);
    return best;
}

std::vector<int> assign_batch(const PipelineModel& model, const Matrix& x) {
    std::vector<int> labels(static_cast<size_t>(x.cols()));
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        labels[static_cast<size_t>(j)] = assign_point(model, x.col(j));
    return labels;
}

Json models_to_json(const PipelineModel& model) {
    Json j;
    j["version"] = KSSC_VERSION;
    j["config"] = config_to_json(model.config);
    j["labels"] = model.labels;
    if (model.npt) {
        Json n;
        n["u"] = matrix_to_json(model.npt->u);
        n["lambda"] = vector_to_json(model.npt->lambda);
        n["row_means"] = vector_to_json(model.npt->centering.row_means);
        n["grand_mean"] = model.npt->centering.grand_mean;
        n["training"] = matrix_to_json(model.npt->training_data);
        n["requested_rank"] = model.npt->requested_rank;
        j["npt"] = std::move(n);
    } else {
        j["npt"] = nullptr;
    }
    Json clusters = Json::array();
    for (const ClusterSubspace& sub : model.subspaces.clusters) {
        Json s;
        s["mean"] = vector_to_json(sub.mean);
        s["basis"] = matrix_to_json(sub.basis);
        s["count"] = sub.count;
        clusters.push_back(std::move(s));
    }
    j["subspaces"] = Json{{"d", model.subspaces.dim_request}, {"clusters", std::move(clusters)}};
    return j;
}

PipelineModel models_from_json(const Json& j) {
    if (!j.is_object() || !j.contains("config") || !j.contains("subspaces") ||
        !j.contains("npt"))
        throw ParseError("models file: missing config/npt/subspaces");

    PipelineModel model;
    model.config = config_from_json(j.at("config"));

    if (j.at("npt").is_null()) {
        if (model.config.kernel)
            throw ParseError("models file: config declares a kernel but npt is null");
    } else {
        if (!model.config.kernel)
            throw ParseError("models file: npt present but config kernel is none");
        const Json& n = j.at("npt");
        NptModel npt;
        npt.u = matrix_from_json(n.at("u"), "models npt.u");
        npt.lambda = vector_from_json(n.at("lambda"), "models npt.lambda");
        npt.centering.row_means = vector_from_json(n.at("row_means"), "models npt.row_means");
        npt.centering.grand_mean = n.at("grand_mean").get<double>();
        npt.training_data = matrix_from_json(n.at("training"), "models npt.training");
        npt.requested_rank = n.at("requested_rank").get<int>();
        npt.spec = *model.config.kernel;
        if (npt.u.cols() != npt.lambda.size() || npt.u.rows() != npt.training_data.cols() ||
            npt.centering.row_means.size() != npt.u.rows())
            throw ParseError("models file: inconsistent npt shapes");
        model.npt = std::move(npt);
    }

    const Json& subs = j.at("subspaces");
    model.subspaces.dim_request = subs.at("d").get<int>();
    for (const Json& s : subs.at("clusters")) {
        ClusterSubspace sub;
        sub.mean = vector_from_json(s.at("mean"), "models subspace mean");
        sub.basis = matrix_from_json(s.at("basis"), "models subspace basis");
        sub.count = s.at("count").get<int>();
        if (sub.basis.rows() != sub.mean.size())
            throw ParseError("models file: subspace basis/mean shape mismatch");
        model.subspaces.clusters.push_back(std::move(sub));
    }
    if (model.subspaces.clusters.empty())
        throw ParseError("models file: no cluster subspaces");

    if (j.contains("labels")) model.labels = j.at("labels").get<std::vector<int>>();
    return model;
}

namespace {

std::string derive_models_path(const std::string& out_path) {
    const std::string suffix = ".json";
    if (out_path.size() > suffix.size() &&
        out_path.compare(out_path.size() - suffix.size(), suffix.size(), suffix) == 0)
        return out_path.substr(0, out_path.size() - suffix.size()) + ".models.json";
    return out_path + ".models.json";
}

Json diagnostics_to_json(const RunConfig& config, const PipelineFit& fit,
                         Eigen::Index input_rows, Eigen::Index input_cols) {
    Json solver;
    solver["iterations"] = fit.clustering.solver.iterations;
    solver["primal_residuals"] = fit.clustering.solver.primal_residuals;
    solver["objectives"] = fit.clustering.solver.objectives;
    solver["converged"] = fit.clustering.solver.converged;
    solver["non_converged_columns"] = fit.clustering.solver.non_converged_count();

    Json diag;
    diag["input"] = Json{{"d", input_rows}, {"n", input_cols}};
    diag["rank"] = fit.y.rows();
    diag["lambda_effective"] = effective_lambda(config.lambda, static_cast<int>(fit.y.rows()),
                                                config.solver.lambda_scaling);
    diag["laplacian_eigenvalues"] = vector_to_json(fit.clustering.laplacian_eigenvalues);
    diag["kmeans"] = Json{{"inertia", fit.clustering.kmeans_inertia},
                          {"best_restart", fit.clustering.kmeans_best_restart},
                          {"restarts", fit.clustering.kmeans_restarts}};
    diag["solver"] = std::move(solver);
    return diag;
}

}  // namespace

Json run_cluster(const RunConfig& config) {
    config.validate();
    if (config.in_path.empty())
        throw InvalidArgumentError("cluster: no input path configured");

    StageTimer timer;
    const Matrix x = load_matrix(config.in_path, format_from_path(config.in_path));
    std::optional<std::vector<int>> truth;
    if (!config.truth_path.empty()) {
        truth = load_labels(config.truth_path);
        if (static_cast<Eigen::Index>(truth->size()) != x.cols())
            throw DimensionError("cluster: " + std::to_string(truth->size()) +
                                 " truth labels for " + std::to_string(x.cols()) +
                                 " samples");
    }
    const double load_seconds = timer.lap();

    PipelineFit fit = fit_pipeline(config, x);

    std::string models_path = config.models_path;
    if (models_path.empty() && !config.out_path.empty())
        models_path = derive_models_path(config.out_path);
    if (!models_path.empty()) write_json_file(models_path, models_to_json(fit.model));

    Json result;
    result["version"] = KSSC_VERSION;
    result["config"] = config_to_json(config);
    result["labels"] = fit.model.labels;
    result["metrics"] = truth ? metrics_to_json(evaluate(*truth, fit.model.labels))
                              : Json(nullptr);
    result["diagnostics"] = diagnostics_to_json(config, fit, x.rows(), x.cols());
    result["models_path"] = models_path.empty() ? Json(nullptr) : Json(models_path);
    result["error"] = nullptr;

    Json timings;
    timings["load"] = load_seconds;
    for (const auto& [stage, seconds] : fit.timings) timings[stage] = seconds;
    result["timings"] = std::move(timings);

    if (!config.out_path.empty()) write_json_file(config.out_path, result);
    return result;
}

Json run_assign(const std::string& models_path, const std::string& in_path,
                const std::string& out_path) {
    if (models_path.empty()) throw InvalidArgumentError("assign: no models path given");
    if (in_path.empty()) throw InvalidArgumentError("assign: no input path given");
    const PipelineModel model = models_from_json(read_json_file(models_path));
    const Matrix x = load_matrix(in_path, format_from_path(in_path), /*allow_empty=*/true);
    if (x.cols() > 0 && x.rows() != model.input_dim())
        throw DimensionError("assign: input has " + std::to_string(x.rows()) +
                             " rows, model expects " + std::to_string(model.input_dim()));

    Json labels = Json::array();
    Json residuals = Json::array();
    for (Eigen::Index jcol = 0; jcol < x.cols(); ++jcol) {
        const Vector res = assign_residuals(model, x.col(jcol));
        int best = 0;
        for (Eigen::Index m = 1; m < res.size(); ++m)
            if (res[m] < res[best]) best = static_cast<int>(m);
        labels.push_back(best);
        residuals.push_back(vector_to_json(res));
    }

    Json result;
    result["version"] = KSSC_VERSION;
    result["config"] = config_to_json(model.config);
    result["labels"] = std::move(labels);
    result["residuals"] = std::move(residuals);
    result["error"] = nullptr;
    if (!out_path.empty()) write_json_file(out_path, result);
    return result;
}

Json run_eval(const std::string& truth_path, const std::string& pred_path) {
    const std::vector<int> truth = load_labels(truth_path);
    const std::vector<int> pred = load_labels(pred_path);
    const MetricsReport report = evaluate(truth, pred);
    Json result = metrics_to_json(report);
    result["version"] = KSSC_VERSION;
    result["error"] = nullptr;
    return result;
}

VariantSpec parse_variant(const std::string& token) {
    std::string t;
    for (char ch : token)
        if (!std::isspace(static_cast<unsigned char>(ch)))
            t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    if (t.empty()) throw InvalidArgumentError("variant: empty token");

    VariantSpec v;
    v.name = t;
    std::string head = t;
    const size_t eq = t.find('=');
    if (eq != std::string::npos) {
        head = t.substr(0, eq);
        const std::string val = t.substr(eq + 1);
        double lambda = 0.0;
        const char* begin = val.data();
        const char* end = begin + val.size();
        const auto [ptr, ec] = std::from_chars(begin, end, lambda);
        if (ec != std::errc() || ptr != end || !(lambda > 0.0) || !std::isfinite(lambda))
            throw InvalidArgumentError("variant '" + token +
                                       "': lambda override must be a positive number");
        v.lambda = lambda;
    }

    if (head == "ssc") {
        v.mode = SscMode::frobenius;
    } else if (head == "rssc") {
        v.mode = SscMode::robust;
    } else {
        const bool robust = head.rfind("rkssc-", 0) == 0;
        const bool plain = head.rfind("kssc-", 0) == 0;
        if (!robust && !plain)
            throw InvalidArgumentError(
                "variant '" + token +
                "': expected ssc, rssc, or [r]kssc-{linear|poly|gauss}, optionally "
                "=<lambda>");
        v.mode = robust ? SscMode::robust : SscMode::frobenius;
        v.kernel = family_from_string(head.substr(robust ? 6 : 5));
    }
    return v;
}

namespace {

struct TrialData {
    Matrix train;
    std::vector<int> train_truth;
    Matrix test;
    std::vector<int> test_truth;
};

// Split a generator's contiguous per-cluster blocks into train/test columns.
TrialData split_blocks(const Matrix& data, int c, int per_total, int per_train) {
    const Eigen::Index d = data.rows();
    const int per_test = per_total - per_train;
    TrialData out;
    out.train.resize(d, static_cast<Eigen::Index>(c) * per_train);
    out.test.resize(d, static_cast<Eigen::Index>(c) * per_test);
    out.train_truth.reserve(static_cast<size_t>(c) * static_cast<size_t>(per_train));
    out.test_truth.reserve(static_cast<size_t>(c) * static_cast<size_t>(per_test));
    for (int m = 0; m < c; ++m) {
        const Eigen::Index base = static_cast<Eigen::Index>(m) * per_total;
        out.train.middleCols(static_cast<Eigen::Index>(m) * per_train, per_train) =
            data.middleCols(base, per_train);
        if (per_test > 0)
            out.test.middleCols(static_cast<Eigen::Index>(m) * per_test, per_test) =
                data.middleCols(base + per_train, per_test);
        for (int k = 0; k < per_train; ++k) out.train_truth.push_back(m);
        for (int k = 0; k < per_test; ++k) out.test_truth.push_back(m);
    }
    return out;
}

TrialData make_synth_trial(const BenchmarkConfig& config, std::uint64_t trial_seed) {
    const SynthSpec& s = config.synth;
    const int per_total = s.per_cluster + s.oos_per_cluster;
    if (s.per_cluster < 1)
        throw InvalidArgumentError("benchmark: per_cluster must be >= 1");
    if (s.oos_per_cluster < 0)
        throw InvalidArgumentError("benchmark: oos_per_cluster must be >= 0");

    LabeledDataset ds;
    if (s.kind == "union-subspaces") {
        ds = gen_union_subspaces(s.ambient_dim, config.base.clusters, s.subspace_dim,
                                 per_total, s.noise_sigma, trial_seed);
    } else if (s.kind == "circles") {
        if (static_cast<int>(s.radii.size()) != config.base.clusters)
            throw InvalidArgumentError("benchmark: circles need one radius per cluster");
        ds = gen_concentric_circles(s.radii, per_total, s.noise_sigma, trial_seed);
    } else if (s.kind == "poly") {
        ds = gen_polynomial_embedding(s.ambient_dim, config.base.clusters, per_total,
                                      s.noise_sigma, trial_seed);
    } else {
        throw InvalidArgumentError("benchmark: unknown synth kind '" + s.kind + "'");
    }

    Matrix data = std::move(ds.data);
    if (s.corrupt_fraction > 0.0) {
        const std::uint64_t corrupt_seed = SplitMix64(trial_seed, 0xDA7Aull).next_u64();
        data = corrupt_sparse(data, s.corrupt_fraction, s.corrupt_magnitude, corrupt_seed);
    }
    return split_blocks(data, config.base.clusters, per_total, s.per_cluster);
}

// Seeded per-class subsets of a fixed labeled dataset.
TrialData make_subset_trial(const BenchmarkConfig& config, const Matrix& x_all,
                            const std::vector<int>& labels_all, std::uint64_t trial_seed) {
    const SynthSpec& s = config.synth;
    std::map<int, std::vector<Eigen::Index>> by_class;
    for (size_t i = 0; i < labels_all.size(); ++i)
        by_class[labels_all[i]].push_back(static_cast<Eigen::Index>(i));
    if (static_cast<int>(by_class.size()) != config.base.clusters)
        throw InvalidArgumentError("benchmark: input has " +
                                   std::to_string(by_class.size()) +
                                   " classes but config says " +
                                   std::to_string(config.base.clusters));

    const int per_total = s.per_cluster + s.oos_per_cluster;
    TrialData out;
    out.train.resize(x_all.rows(),
                     static_cast<Eigen::Index>(by_class.size()) * s.per_cluster);
    out.test.resize(x_all.rows(),
                    static_cast<Eigen::Index>(by_class.size()) * s.oos_per_cluster);

    int class_id = 0;
    Eigen::Index train_col = 0, test_col = 0;
    for (auto& [value, idx] : by_class) {
        if (static_cast<int>(idx.size()) < per_total)
            throw DegenerateInputError("benchmark: class " + std::to_string(value) +
                                       " has " + std::to_string(idx.size()) +
                                       " samples, need " + std::to_string(per_total));
        SplitMix64 rng(trial_seed, static_cast<std::uint64_t>(class_id) + 0x5eedull);
        for (int k = 0; k < per_total; ++k) {
            const auto pick = static_cast<size_t>(k) +
                              static_cast<size_t>(rng.next_below(idx.size() - static_cast<size_t>(k)));
            std::swap(idx[static_cast<size_t>(k)], idx[pick]);
        }
        for (int k = 0; k < s.per_cluster; ++k) {
            out.train.col(train_col++) = x_all.col(idx[static_cast<size_t>(k)]);
            out.train_truth.push_back(class_id);
        }
        for (int k = s.per_cluster; k < per_total; ++k) {
            out.test.col(test_col++) = x_all.col(idx[static_cast<size_t>(k)]);
            out.test_truth.push_back(class_id);
        }
        ++class_id;
    }

    if (s.corrupt_fraction > 0.0) {
        out.train = corrupt_sparse(out.train, s.corrupt_fraction, s.corrupt_magnitude,
                                   SplitMix64(trial_seed, 0xDA7Aull).next_u64());
        if (out.test.cols() > 0)
            out.test = corrupt_sparse(out.test, s.corrupt_fraction, s.corrupt_magnitude,
                                      SplitMix64(trial_seed, 0xDA7Bull).next_u64());
    }
    return out;
}

RunConfig variant_config(const BenchmarkConfig& config, const VariantSpec& variant,
                         std::uint64_t trial_seed) {
    RunConfig rc = config.base;
    rc.mode = variant.mode;
    rc.seed = trial_seed;
    rc.in_path.clear();
    rc.truth_path.clear();
    rc.out_path.clear();
    rc.models_path.clear();
    if (variant.kernel) {
        KernelSpec params = config.base.kernel.value_or(KernelSpec{});
        params.family = *variant.kernel;
        params.validate();
        rc.kernel = params;
    } else {
        rc.kernel.reset();
    }
    if (variant.lambda) rc.lambda = *variant.lambda;
    return rc;
}

}  // namespace

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
    if (config.trials < 2) throw InvalidArgumentError("benchmark: trials must be >= 2");
    if (config.variants.empty())
        throw InvalidArgumentError("benchmark: at least one variant required");
    {
        std::set<std::string> names;
        for (const VariantSpec& v : config.variants)
            if (!names.insert(v.name).second)
                throw InvalidArgumentError("benchmark: duplicate variant '" + v.name + "'");
    }
    config.base.validate();

    // Subset mode loads once; trials share the matrix read-only.
    Matrix x_all;
    std::vector<int> labels_all;
    const bool subset_mode = !config.base.in_path.empty();
    if (subset_mode) {
        if (config.base.truth_path.empty())
            throw InvalidArgumentError("benchmark: subset mode requires a truth file");
        x_all = load_matrix(config.base.in_path, format_from_path(config.base.in_path));
        labels_all = load_labels(config.base.truth_path);
        if (static_cast<Eigen::Index>(labels_all.size()) != x_all.cols())
            throw DimensionError("benchmark: " + std::to_string(labels_all.size()) +
                                 " truth labels for " + std::to_string(x_all.cols()) +
                                 " samples");
    }

    const int n_variants = static_cast<int>(config.variants.size());
    BenchmarkReport report;
    report.config = config;
    report.rows.resize(static_cast<size_t>(config.trials) * static_cast<size_t>(n_variants));

    const auto run_trial = [&](int trial) {
        const std::uint64_t trial_seed = config.base.seed + static_cast<std::uint64_t>(trial);
        TrialData data;
        std::string data_error;
        try {
            data = subset_mode ? make_subset_trial(config, x_all, labels_all, trial_seed)
                               : make_synth_trial(config, trial_seed);
        } catch (const std::exception& e) {
            data_error = e.what();
        }

        for (int vi = 0; vi < n_variants; ++vi) {
            TrialOutcome& row =
                report.rows[static_cast<size_t>(trial) * static_cast<size_t>(n_variants) +
                            static_cast<size_t>(vi)];
            row.trial = trial;
            row.variant = config.variants[static_cast<size_t>(vi)].name;
            if (!data_error.empty()) {
                row.ok = false;
                row.error = data_error;
                continue;
            }
            StageTimer timer;
            try {
                const RunConfig rc =
                    variant_config(config, config.variants[static_cast<size_t>(vi)], trial_seed);
                const PipelineFit fit = fit_pipeline(rc, data.train);
                row.in_sample = evaluate(data.train_truth, fit.model.labels);
                if (data.test.cols() > 0) {
                    const std::vector<int> pred = assign_batch(fit.model, data.test);
                    row.out_of_sample = evaluate(data.test_truth, pred);
                }
                row.ok = true;
            } catch (const std::exception& e) {
                row.ok = false;
                row.error = e.what();
            }
            row.seconds = timer.lap();
        }
    };

    unsigned hw = std::thread::hardware_concurrency();
    if (hw == 0) hw = 1;
    const int workers = std::max(
        1, std::min(config.trials,
                    config.threads > 0 ? config.threads : static_cast<int>(hw)));
    if (workers == 1) {
        for (int t = 0; t < config.trials; ++t) run_trial(t);
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<size_t>(workers));
        for (int w = 0; w < workers; ++w)
            pool.emplace_back([&, w] {
                for (int t = w; t < config.trials; t += workers) run_trial(t);
            });
        for (std::thread& th : pool) th.join();
    }
    return report;
}

namespace {

Json mean_std(const std::vector<double>& xs) {
    const auto n = static_cast<double>(xs.size());
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= n;
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    var = xs.size() > 1 ? var / (n - 1.0) : 0.0;
    return Json{{"mean", mean}, {"std", std::sqrt(var)}};
}

Json synth_to_json(const SynthSpec& s) {
    Json j;
    j["kind"] = s.kind;
    j["ambient_dim"] = s.ambient_dim;
    j["subspace_dim"] = s.subspace_dim;
    j["per_cluster"] = s.per_cluster;
    j["oos_per_cluster"] = s.oos_per_cluster;
    j["noise_sigma"] = s.noise_sigma;
    j["radii"] = s.radii;
    j["corrupt_fraction"] = s.corrupt_fraction;
    j["corrupt_magnitude"] = s.corrupt_magnitude;
    return j;
}

}  // namespace

Json report_to_json(const BenchmarkReport& report) {
    Json rows = Json::array();
    for (const TrialOutcome& row : report.rows) {
        Json r;
        r["trial"] = row.trial;
        r["variant"] = row.variant;
        r["ok"] = row.ok;
        r["error"] = row.ok ? Json(nullptr) : Json(row.error);
        r["in_sample"] = row.ok ? metrics_to_json(row.in_sample) : Json(nullptr);
        r["out_of_sample"] =
            row.ok && row.out_of_sample.n > 0 ? metrics_to_json(row.out_of_sample) : Json(nullptr);
        r["seconds"] = row.seconds;
        rows.push_back(std::move(r));
    }

    struct Series {
        std::vector<double> acc, nmi, f1;
        std::vector<double> oos_acc, oos_nmi, oos_f1;
        int ok = 0;
    };
    std::vector<std::string> names;
    std::map<std::string, Series> series;
    for (const VariantSpec& v : report.config.variants) {
        names.push_back(v.name);
        series[v.name];
    }
    for (const TrialOutcome& row : report.rows) {
        if (!row.ok) continue;
        Series& s = series[row.variant];
        ++s.ok;
        s.acc.push_back(row.in_sample.acc);
        s.nmi.push_back(row.in_sample.nmi);
        s.f1.push_back(row.in_sample.f1);
        if (row.out_of_sample.n > 0) {
            s.oos_acc.push_back(row.out_of_sample.acc);
            s.oos_nmi.push_back(row.out_of_sample.nmi);
            s.oos_f1.push_back(row.out_of_sample.f1);
        }
    }

    Json aggregates = Json::object();
    Json underpowered = Json::array();
    for (const std::string& name : names) {
        const Series& s = series[name];
        if (s.ok < 2) {
            underpowered.push_back(name);
            continue;
        }
        Json a;
        a["trials_ok"] = s.ok;
        a["in_sample"] =
            Json{{"acc", mean_std(s.acc)}, {"nmi", mean_std(s.nmi)}, {"f1", mean_std(s.f1)}};
        a["out_of_sample"] = s.oos_acc.size() == s.acc.size() && !s.oos_acc.empty()
                                 ? Json{{"acc", mean_std(s.oos_acc)},
                                        {"nmi", mean_std(s.oos_nmi)},
                                        {"f1", mean_std(s.oos_f1)}}
                                 : Json(nullptr);
        aggregates[name] = std::move(a);
    }

    Json wilcoxon = Json::array();
    const auto add_pairs = [&](const std::string& scope, auto member) {
        for (size_t i = 0; i < names.size(); ++i)
            for (size_t k = i + 1; k < names.size(); ++k) {
                const Series& a = series[names[i]];
                const Series& b = series[names[k]];
                const std::vector<double>& xa = a.*member;
                const std::vector<double>& xb = b.*member;
                if (xa.size() < 2 || xb.size() < 2) continue;
                const char* metric = member == &Series::acc || member == &Series::oos_acc
                                         ? "acc"
                                         : (member == &Series::nmi || member == &Series::oos_nmi
                                                ? "nmi"
                                                : "f1");
                wilcoxon.push_back(Json{{"a", names[i]},
                                        {"b", names[k]},
                                        {"scope", scope},
                                        {"metric", metric},
                                        {"p", wilcoxon_ranksum(xa, xb)}});
            }
    };
    add_pairs("in_sample", &Series::acc);
    add_pairs("in_sample", &Series::nmi);
    add_pairs("in_sample", &Series::f1);
    add_pairs("out_of_sample", &Series::oos_acc);
    add_pairs("out_of_sample", &Series::oos_nmi);
    add_pairs("out_of_sample", &Series::oos_f1);

    Json variant_tokens = Json::array();
    for (const std::string& name : names) variant_tokens.push_back(name);

    Json j;
    j["version"] = KSSC_VERSION;
    j["config"] = Json{{"base", config_to_json(report.config.base)},
                       {"trials", report.config.trials},
                       {"variants", std::move(variant_tokens)},
                       {"synth", synth_to_json(report.config.synth)},
                       {"threads", report.config.threads}};
    j["rows"] = std::move(rows);
    j["aggregates"] = std::move(aggregates);
    j["underpowered_variants"] = std::move(underpowered);
    j["wilcoxon"] = std::move(wilcoxon);
    j["error"] = nullptr;
    return j;
}

}  // namespace kssc
