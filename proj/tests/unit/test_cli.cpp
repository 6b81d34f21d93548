#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

#include "doctest.h"
#include "kssc/pipeline.hpp"

#ifndef KSSC_CLI_PATH
#error "KSSC_CLI_PATH must point at the command-line binary"
#endif

namespace {

using kssc::Json;

struct CliResult {
    int exit_code = -1;
    std::string out;
    Json json() const { return Json::parse(out); }
};

CliResult run_cli(const std::string& args) {
    CliResult r;
    const std::string cmd = std::string(KSSC_CLI_PATH) + " " + args + " 2>/dev/null";
    std::FILE* pipe = popen(cmd.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::array<char, 4096> buf{};
    std::size_t got = 0;
    while ((got = std::fread(buf.data(), 1, buf.size(), pipe)) > 0)
        r.out.append(buf.data(), got);
    const int status = pclose(pipe);
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

struct TempDir {
    std::string path;
    TempDir() {
        char tmpl[] = "/tmp/kssc_cli_XXXXXX";
        path = mkdtemp(tmpl);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return path + "/" + name; }
};

}  // namespace

TEST_CASE("synth then cluster recovers the generated partition") {
    TempDir dir;
    const std::string data = dir.file("data.csv");
    const std::string labels = dir.file("labels.csv");
    const std::string result_path = dir.file("result.json");

    const CliResult synth = run_cli("synth --kind union-subspaces --clusters 3 "
                                    "--ambient-dim 25 --subspace-dim 2 --per-cluster 40 "
                                    "--seed 17 --out " +
                                    data + " --labels-out " + labels);
    REQUIRE(synth.exit_code == 0);
    const Json sj = synth.json();
    CHECK(sj["d"] == 25);
    CHECK(sj["n"] == 120);
    CHECK(sj["clusters"] == 3);
    CHECK(kssc::load_matrix(data, kssc::MatrixFormat::csv).cols() == 120);

    const CliResult cluster = run_cli("cluster --kernel linear --mode frobenius --lambda 50 "
                                      "--clusters 3 --seed 4 --in " +
                                      data + " --truth " + labels + " --out " + result_path);
    REQUIRE(cluster.exit_code == 0);
    const Json rj = cluster.json();
    CHECK(rj["metrics"]["acc"].get<double>() == 1.0);
    CHECK(rj["error"].is_null());
    CHECK(rj["config"]["kernel"] == "linear");
    CHECK(rj["config"]["mode"] == "frobenius");
    CHECK(rj["config"]["lambda"].get<double>() == 50.0);
    CHECK(kssc::read_json_file(result_path) == rj);

    SUBCASE("a saved models file labels the training data identically") {
        const std::string models = dir.file("result.models.json");  // derived from --out
        const std::string assign_out = dir.file("assigned.json");
        const CliResult assign =
            run_cli("assign --models " + models + " --in " + data + " --out " + assign_out);
        REQUIRE(assign.exit_code == 0);
        CHECK(assign.json()["labels"] == rj["labels"]);

        const std::string empty = dir.file("empty.csv");
        std::ofstream(empty).flush();
        const CliResult none = run_cli("assign --models " + models + " --in " + empty);
        CHECK(none.exit_code == 0);
        CHECK(none.json()["labels"].empty());

        const std::string wrong = dir.file("wrong.csv");
        kssc::save_matrix(wrong, kssc::Matrix::Identity(4, 4), kssc::MatrixFormat::csv);
        const CliResult bad = run_cli("assign --models " + models + " --in " + wrong);
        CHECK(bad.exit_code == 1);
        CHECK(bad.json()["error"]["kind"] == "dimension");
    }
}

TEST_CASE("missing input exits 1 with a machine-readable io error") {
    TempDir dir;
    const std::string out = dir.file("err.json");
    const CliResult r = run_cli("cluster --in /nonexistent/input.csv --clusters 2 --out " + out);
    CHECK(r.exit_code == 1);
    CHECK(r.json()["error"]["kind"] == "io");
    CHECK(kssc::read_json_file(out)["error"]["kind"] == "io");  // error object also on disk
}

TEST_CASE("flags override the config file") {
    TempDir dir;
    const kssc::LabeledDataset ds = kssc::gen_union_subspaces(15, 2, 2, 20, 0.0, 3);
    const std::string data = dir.file("data.csv");
    kssc::save_matrix(data, ds.data, kssc::MatrixFormat::csv);

    const std::string config = dir.file("config.json");
    kssc::write_json_file(config, Json{{"mode", "frobenius"},
                                       {"kernel", "linear"},
                                       {"lambda", 5.0},
                                       {"clusters", 2},
                                       {"in", data}});
    const CliResult r = run_cli("cluster --config " + config + " --lambda 50");
    REQUIRE(r.exit_code == 0);
    CHECK(r.json()["config"]["lambda"].get<double>() == 50.0);  // flag wins
    CHECK(r.json()["config"]["mode"] == "frobenius");           // file value kept
    CHECK(r.json()["metrics"].is_null());                       // no truth given

    const CliResult unknown = run_cli("cluster --config " + config + " --not-a-flag 1");
    CHECK(unknown.exit_code != 0);
}

TEST_CASE("eval scores label files and rejects mismatched lengths") {
    TempDir dir;
    const std::string truth = dir.file("truth.csv");
    const std::string pred = dir.file("pred.csv");
    kssc::save_labels(truth, {0, 0, 1, 1});
    kssc::save_labels(pred, {1, 1, 0, 0});
    const CliResult r = run_cli("eval --truth " + truth + " --pred " + pred);
    REQUIRE(r.exit_code == 0);
    CHECK(r.json()["acc"].get<double>() == 1.0);
    CHECK(r.json()["nmi"].get<double>() == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(r.json()["f1"].get<double>() == 1.0);

    kssc::save_labels(pred, {0, 1});
    const CliResult bad = run_cli("eval --truth " + truth + " --pred " + pred);
    CHECK(bad.exit_code == 1);
    CHECK(bad.json()["error"]["kind"] == "dimension");
}

TEST_CASE("benchmark emits rows, aggregates, and rank-sum comparisons") {
    TempDir dir;
    const std::string out = dir.file("bench.json");
    const CliResult r = run_cli("benchmark --trials 2 --variants kssc-linear,ssc "
                                "--kernel linear --mode frobenius --lambda 50 --clusters 3 "
                                "--ambient-dim 20 --subspace-dim 2 --per-cluster 25 "
                                "--oos-per-cluster 4 --seed 12 --out " +
                                out);
    REQUIRE(r.exit_code == 0);
    const Json j = r.json();
    CHECK(j["rows"].size() == 4);  // 2 trials x 2 variants
    for (const auto& row : j["rows"]) {
        CHECK(row["ok"].get<bool>());
        CHECK(row["in_sample"]["acc"].get<double>() == 1.0);
        CHECK(row["out_of_sample"]["n"].get<int>() == 12);
    }
    CHECK(j["aggregates"]["kssc-linear"]["in_sample"]["acc"]["mean"].get<double>() == 1.0);
    CHECK(j["aggregates"]["ssc"]["trials_ok"].get<int>() == 2);
    bool found_pair = false;
    for (const auto& entry : j["wilcoxon"])
        if (entry["metric"] == "acc" && entry["scope"] == "in_sample") found_pair = true;
    CHECK(found_pair);
    CHECK(kssc::read_json_file(out)["rows"].size() == 4);
}
