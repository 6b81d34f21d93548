#include <cstdint>
#include <functional>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "kssc/pipeline.hpp"
#include "kssc/rng.hpp"

#ifndef KSSC_VERSION
#define KSSC_VERSION "dev"
#endif

namespace {

using kssc::Json;

int emit_error(const std::string& out_path, const std::string& kind,
               const std::string& message) {
    Json err;
    err["version"] = KSSC_VERSION;
    err["error"] = Json{{"kind", kind}, {"message", message}};
    std::cout << err.dump(2) << '\n';
    if (!out_path.empty()) {
        try {
            kssc::write_json_file(out_path, err);
        } catch (...) {
            // the primary error is already on stdout
        }
    }
    return 1;
}

int run_guarded(const std::string& out_path, const std::function<int()>& body) {
    try {
        return body();
    } catch (const kssc::Error& e) {
        return emit_error(out_path, e.kind(), e.what());
    } catch (const Json::exception& e) {
        return emit_error(out_path, "parse", e.what());
    } catch (const std::exception& e) {
        return emit_error(out_path, "internal", e.what());
    }
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    size_t start = 0;
    while (start <= s.size()) {
        const size_t comma = s.find(',', start);
        if (comma == std::string::npos) {
            if (start < s.size()) out.push_back(s.substr(start));
            break;
        }
        if (comma > start) out.push_back(s.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

std::vector<double> parse_double_list(const std::string& s, const char* what) {
    std::vector<double> out;
    for (const std::string& tok : split_commas(s)) {
        try {
            size_t pos = 0;
            const double v = std::stod(tok, &pos);
            if (pos != tok.size()) throw std::invalid_argument(tok);
            out.push_back(v);
        } catch (const std::exception&) {
            throw kssc::InvalidArgumentError(std::string(what) + ": bad number '" + tok + "'");
        }
    }
    return out;
}

/// Flag values staged before merging over the config file.
struct CommonFlags {
    std::string config_path;
    std::string mode;
    std::string kernel;
    double b = 0.0;
    int degree = 1;
    double sigma2 = 1.0;
    int rank = 0;
    bool rank_auto = false;
    double lambda = 0.0;
    std::string lambda_scaling;
    int clusters = 2;
    std::uint64_t seed = 0;
    int oos_dim = 5;
    bool no_normalize = false;
    std::string in, truth, out, models;
};

void add_common_flags(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config_path, "flat JSON config file; flags override it");
    cmd->add_option("--mode", f.mode, "objective: robust | frobenius")
        ->check(CLI::IsMember({"robust", "frobenius"}));
    cmd->add_option("--kernel", f.kernel, "kernel family: linear | poly | gauss | none")
        ->check(CLI::IsMember({"linear", "poly", "gauss", "none"}));
    cmd->add_option("--b", f.b, "polynomial kernel offset");
    cmd->add_option("--degree", f.degree, "polynomial kernel degree");
    cmd->add_option("--sigma2", f.sigma2, "gaussian kernel bandwidth (sigma squared)");
    auto* rank_opt = cmd->add_option("--rank", f.rank, "number of embedding directions");
    cmd->add_flag("--rank-auto", f.rank_auto, "keep all directions above the eigenvalue threshold")
        ->excludes(rank_opt);
    cmd->add_option("--lambda", f.lambda, "residual penalty weight");
    cmd->add_option("--lambda-scaling", f.lambda_scaling, "none | sqrt-rank")
        ->check(CLI::IsMember({"none", "sqrt-rank"}));
    cmd->add_option("--clusters", f.clusters, "number of clusters");
    cmd->add_option("--seed", f.seed, "random seed");
    cmd->add_option("--oos-dim", f.oos_dim, "per-cluster subspace dimension for assignment");
    cmd->add_flag("--no-normalize", f.no_normalize, "skip unit column normalization");
    cmd->add_option("--in", f.in, "input matrix (.csv or raw binary)");
    cmd->add_option("--truth", f.truth, "ground-truth labels (single-column CSV)");
    cmd->add_option("--out", f.out, "result JSON path");
    cmd->add_option("--models", f.models, "models JSON path (default: derived from --out)");
}

/// Start from the config file (or an empty object), patch in every flag the
/// user passed, and parse the merged object once.
Json merged_config_json(CLI::App* cmd, const CommonFlags& f) {
    Json j = cmd->count("--config") ? kssc::read_json_file(f.config_path) : Json::object();
    if (cmd->count("--mode")) j["mode"] = f.mode;
    if (cmd->count("--kernel")) j["kernel"] = f.kernel;
    if (cmd->count("--b")) j["b"] = f.b;
    if (cmd->count("--degree")) j["degree"] = f.degree;
    if (cmd->count("--sigma2")) j["sigma2"] = f.sigma2;
    if (cmd->count("--rank")) j["rank"] = f.rank;
    if (cmd->count("--rank-auto")) j["rank"] = "auto";
    if (cmd->count("--lambda")) j["lambda"] = f.lambda;
    if (cmd->count("--lambda-scaling")) j["lambda_scaling"] = f.lambda_scaling;
    if (cmd->count("--clusters")) j["clusters"] = f.clusters;
    if (cmd->count("--seed")) j["seed"] = f.seed;
    if (cmd->count("--oos-dim")) j["oos_dim"] = f.oos_dim;
    if (cmd->count("--no-normalize")) j["normalize"] = false;
    if (cmd->count("--in")) j["in"] = f.in;
    if (cmd->count("--truth")) j["truth"] = f.truth;
    if (cmd->count("--out")) j["out"] = f.out;
    if (cmd->count("--models")) j["models"] = f.models;
    return j;
}

const std::vector<std::string> kBenchmarkKeys = {
    "trials",          "variants",       "threads",
    "synth_kind",      "ambient_dim",    "subspace_dim",
    "per_cluster",     "oos_per_cluster", "noise_sigma",
    "radii",           "corrupt_fraction", "corrupt_magnitude"};

struct BenchmarkFlags {
    int trials = 10;
    std::string variants;
    int threads = 0;
    std::string synth_kind;
    int ambient_dim = 30;
    int subspace_dim = 2;
    int per_cluster = 50;
    int oos_per_cluster = 0;
    double noise_sigma = 0.0;
    std::string radii;
    double corrupt_fraction = 0.0;
    double corrupt_magnitude = 0.0;
};

void add_benchmark_flags(CLI::App* cmd, BenchmarkFlags& f) {
    cmd->add_option("--trials", f.trials, "number of seeded trials");
    cmd->add_option("--variants", f.variants,
                    "comma list: ssc | rssc | [r]kssc-{linear|poly|gauss}[=lambda]");
    cmd->add_option("--threads", f.threads, "worker threads (0 = auto)");
    cmd->add_option("--synth-kind", f.synth_kind,
                    "per-trial generator: union-subspaces | circles | poly");
    cmd->add_option("--ambient-dim", f.ambient_dim, "generator ambient dimension");
    cmd->add_option("--subspace-dim", f.subspace_dim, "generator subspace dimension");
    cmd->add_option("--per-cluster", f.per_cluster, "training points per cluster");
    cmd->add_option("--oos-per-cluster", f.oos_per_cluster, "held-out points per cluster");
    cmd->add_option("--noise-sigma", f.noise_sigma, "generator noise scale");
    cmd->add_option("--radii", f.radii, "comma list of circle radii");
    cmd->add_option("--corrupt-fraction", f.corrupt_fraction,
                    "fraction of entries to corrupt");
    cmd->add_option("--corrupt-magnitude", f.corrupt_magnitude,
                    "magnitude of corrupted entries");
}

Json merged_benchmark_json(CLI::App* cmd, const BenchmarkFlags& f, Json j) {
    if (cmd->count("--trials")) j["trials"] = f.trials;
    if (cmd->count("--variants")) j["variants"] = f.variants;
    if (cmd->count("--threads")) j["threads"] = f.threads;
    if (cmd->count("--synth-kind")) j["synth_kind"] = f.synth_kind;
    if (cmd->count("--ambient-dim")) j["ambient_dim"] = f.ambient_dim;
    if (cmd->count("--subspace-dim")) j["subspace_dim"] = f.subspace_dim;
    if (cmd->count("--per-cluster")) j["per_cluster"] = f.per_cluster;
    if (cmd->count("--oos-per-cluster")) j["oos_per_cluster"] = f.oos_per_cluster;
    if (cmd->count("--noise-sigma")) j["noise_sigma"] = f.noise_sigma;
    if (cmd->count("--radii")) j["radii"] = f.radii;
    if (cmd->count("--corrupt-fraction")) j["corrupt_fraction"] = f.corrupt_fraction;
    if (cmd->count("--corrupt-magnitude")) j["corrupt_magnitude"] = f.corrupt_magnitude;
    return j;
}

template <typename T>
T json_get(const Json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception&) {
        throw kssc::InvalidArgumentError(std::string("config key '") + key +
                                         "' has the wrong type");
    }
}

kssc::BenchmarkConfig benchmark_config_from_json(const Json& j) {
    kssc::BenchmarkConfig bc;
    bc.base = kssc::config_from_json(j, kBenchmarkKeys);
    bc.trials = json_get(j, "trials", bc.trials);
    bc.threads = json_get(j, "threads", bc.threads);

    std::vector<std::string> tokens;
    if (j.contains("variants")) {
        const Json& v = j.at("variants");
        if (v.is_string()) {
            tokens = split_commas(v.get<std::string>());
        } else if (v.is_array()) {
            for (const Json& item : v) {
                if (!item.is_string())
                    throw kssc::InvalidArgumentError("config key 'variants' must hold strings");
                tokens.push_back(item.get<std::string>());
            }
        } else {
            throw kssc::InvalidArgumentError(
                "config key 'variants' must be a string or string array");
        }
    }
    for (const std::string& tok : tokens) bc.variants.push_back(kssc::parse_variant(tok));

    bc.synth.kind = json_get(j, "synth_kind", bc.synth.kind);
    bc.synth.ambient_dim = json_get(j, "ambient_dim", bc.synth.ambient_dim);
    bc.synth.subspace_dim = json_get(j, "subspace_dim", bc.synth.subspace_dim);
    bc.synth.per_cluster = json_get(j, "per_cluster", bc.synth.per_cluster);
    bc.synth.oos_per_cluster = json_get(j, "oos_per_cluster", bc.synth.oos_per_cluster);
    bc.synth.noise_sigma = json_get(j, "noise_sigma", bc.synth.noise_sigma);
    bc.synth.corrupt_fraction = json_get(j, "corrupt_fraction", bc.synth.corrupt_fraction);
    bc.synth.corrupt_magnitude = json_get(j, "corrupt_magnitude", bc.synth.corrupt_magnitude);
    if (j.contains("radii")) {
        const Json& r = j.at("radii");
        if (r.is_string()) {
            bc.synth.radii = parse_double_list(r.get<std::string>(), "radii");
        } else if (r.is_array()) {
            for (const Json& item : r) {
                if (!item.is_number())
                    throw kssc::InvalidArgumentError("config key 'radii' must hold numbers");
                bc.synth.radii.push_back(item.get<double>());
            }
        } else {
            throw kssc::InvalidArgumentError(
                "config key 'radii' must be a string or number array");
        }
    }
    return bc;
}

struct SynthFlags {
    std::string kind = "union-subspaces";
    int clusters = 2;
    int ambient_dim = 30;
    int subspace_dim = 2;
    int per_cluster = 50;
    double noise_sigma = 0.0;
    std::string radii;
    double corrupt_fraction = 0.0;
    double corrupt_magnitude = 0.0;
    std::uint64_t seed = 0;
    std::string out;
    std::string labels_out;
};

int run_synth_command(const SynthFlags& f) {
    kssc::LabeledDataset ds;
    if (f.kind == "union-subspaces") {
        ds = kssc::gen_union_subspaces(f.ambient_dim, f.clusters, f.subspace_dim,
                                       f.per_cluster, f.noise_sigma, f.seed);
    } else if (f.kind == "circles") {
        std::vector<double> radii = parse_double_list(f.radii, "radii");
        if (radii.empty()) radii = {1.0, 3.0};
        ds = kssc::gen_concentric_circles(radii, f.per_cluster, f.noise_sigma, f.seed);
    } else if (f.kind == "poly") {
        ds = kssc::gen_polynomial_embedding(f.ambient_dim, f.clusters, f.per_cluster,
                                            f.noise_sigma, f.seed);
    } else {
        throw kssc::InvalidArgumentError("synth: unknown kind '" + f.kind + "'");
    }
    if (f.corrupt_fraction > 0.0)
        ds.data = kssc::corrupt_sparse(ds.data, f.corrupt_fraction, f.corrupt_magnitude,
                                       kssc::SplitMix64(f.seed, 0xDA7Aull).next_u64());

    kssc::save_matrix(f.out, ds.data, kssc::format_from_path(f.out));
    const std::string labels_path = f.labels_out.empty() ? f.out + ".labels.csv" : f.labels_out;
    kssc::save_labels(labels_path, ds.labels);

    Json result;
    result["version"] = KSSC_VERSION;
    result["d"] = ds.data.rows();
    result["n"] = ds.data.cols();
    result["clusters"] = ds.clusters;
    result["data_path"] = f.out;
    result["labels_path"] = labels_path;
    result["provenance"] = Json{{"kind", ds.provenance.kind},
                                {"params", ds.provenance.params},
                                {"seed", ds.provenance.seed}};
    result["error"] = nullptr;
    std::cout << result.dump(2) << '\n';
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"kernel sparse subspace clustering"};
    app.set_version_flag("--version", KSSC_VERSION);
    app.require_subcommand(1);

    CLI::App* cluster_cmd = app.add_subcommand("cluster", "cluster an input matrix");
    CommonFlags cluster_flags;
    add_common_flags(cluster_cmd, cluster_flags);

    CLI::App* assign_cmd =
        app.add_subcommand("assign", "label new points with a saved models file");
    std::string assign_models, assign_in, assign_out;
    assign_cmd->add_option("--models", assign_models, "models JSON from a cluster run")
        ->required();
    assign_cmd->add_option("--in", assign_in, "matrix of points to label")->required();
    assign_cmd->add_option("--out", assign_out, "result JSON path");

    CLI::App* bench_cmd =
        app.add_subcommand("benchmark", "repeated seeded trials across algorithm variants");
    CommonFlags bench_common;
    BenchmarkFlags bench_flags;
    add_common_flags(bench_cmd, bench_common);
    add_benchmark_flags(bench_cmd, bench_flags);

    CLI::App* synth_cmd = app.add_subcommand("synth", "generate a labeled dataset");
    SynthFlags synth_flags;
    synth_cmd->add_option("--kind", synth_flags.kind,
                          "union-subspaces | circles | poly");
    synth_cmd->add_option("--clusters", synth_flags.clusters, "number of clusters");
    synth_cmd->add_option("--ambient-dim", synth_flags.ambient_dim, "ambient dimension");
    synth_cmd->add_option("--subspace-dim", synth_flags.subspace_dim, "subspace dimension");
    synth_cmd->add_option("--per-cluster", synth_flags.per_cluster, "points per cluster");
    synth_cmd->add_option("--noise-sigma", synth_flags.noise_sigma, "noise scale");
    synth_cmd->add_option("--radii", synth_flags.radii, "comma list of circle radii");
    synth_cmd->add_option("--corrupt-fraction", synth_flags.corrupt_fraction,
                          "fraction of entries to corrupt");
    synth_cmd->add_option("--corrupt-magnitude", synth_flags.corrupt_magnitude,
                          "magnitude of corrupted entries");
    synth_cmd->add_option("--seed", synth_flags.seed, "random seed");
    synth_cmd->add_option("--out", synth_flags.out, "data file (.csv or raw binary)")
        ->required();
    synth_cmd->add_option("--labels-out", synth_flags.labels_out,
                          "labels CSV (default: <out>.labels.csv)");

    CLI::App* eval_cmd = app.add_subcommand("eval", "score predicted labels against truth");
    std::string eval_truth, eval_pred, eval_out;
    eval_cmd->add_option("--truth", eval_truth, "ground-truth labels CSV")->required();
    eval_cmd->add_option("--pred", eval_pred, "predicted labels CSV")->required();
    eval_cmd->add_option("--out", eval_out, "result JSON path");

    CLI11_PARSE(app, argc, argv);

    if (cluster_cmd->parsed()) {
        return run_guarded(cluster_flags.out, [&] {
            const kssc::RunConfig config =
                kssc::config_from_json(merged_config_json(cluster_cmd, cluster_flags));
            const Json result = kssc::run_cluster(config);
            std::cout << result.dump(2) << '\n';
            return 0;
        });
    }
    if (assign_cmd->parsed()) {
        return run_guarded(assign_out, [&] {
            const Json result = kssc::run_assign(assign_models, assign_in, assign_out);
            std::cout << result.dump(2) << '\n';
            return 0;
        });
    }
    if (bench_cmd->parsed()) {
        return run_guarded(bench_common.out, [&] {
            const Json merged = merged_benchmark_json(
                bench_cmd, bench_flags, merged_config_json(bench_cmd, bench_common));
            const kssc::BenchmarkConfig bc = benchmark_config_from_json(merged);
            const kssc::BenchmarkReport report = kssc::run_benchmark(bc);
            Json rj = kssc::report_to_json(report);
            const bool underpowered = !rj.at("underpowered_variants").empty();
            if (underpowered)
                rj["error"] = Json{{"kind", "degenerate"},
                                   {"message",
                                    "variant(s) with fewer than two successful trials"}};
            if (!bc.base.out_path.empty()) kssc::write_json_file(bc.base.out_path, rj);
            std::cout << rj.dump(2) << '\n';
            return underpowered ? 1 : 0;
        });
    }
    if (synth_cmd->parsed()) {
        return run_guarded("", [&] { return run_synth_command(synth_flags); });
    }
    if (eval_cmd->parsed()) {
        return run_guarded(eval_out, [&] {
            const Json result = kssc::run_eval(eval_truth, eval_pred);
            if (!eval_out.empty()) kssc::write_json_file(eval_out, result);
            std::cout << result.dump(2) << '\n';
            return 0;
        });
    }
    return 0;
}
