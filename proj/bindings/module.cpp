#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "kssc/pipeline.hpp"

#ifndef KSSC_VERSION
#define KSSC_VERSION "dev"
#endif

namespace py = pybind11;

namespace {

kssc::RunConfig make_config(int clusters, const std::string& mode, const std::string& kernel,
                            double b, int degree, double sigma2, int rank, double lambda,
                            const std::string& lambda_scaling, std::uint64_t seed,
                            int oos_dim, bool normalize) {
    kssc::Json j;
    j["clusters"] = clusters;
    j["mode"] = mode;
    j["kernel"] = kernel;
    j["b"] = b;
    j["degree"] = degree;
    j["sigma2"] = sigma2;
    if (rank > 0)
        j["rank"] = rank;
    else
        j["rank"] = "auto";
    j["lambda"] = lambda;
    j["lambda_scaling"] = lambda_scaling;
    j["seed"] = seed;
    j["oos_dim"] = oos_dim;
    j["normalize"] = normalize;
    return kssc::config_from_json(j);
}

py::dict metrics_dict(const kssc::MetricsReport& r) {
    py::dict d;
    d["acc"] = r.acc;
    d["nmi"] = r.nmi;
    d["f1"] = r.f1;
    d["n"] = r.n;
    return d;
}

}  // namespace

PYBIND11_MODULE(_kssc, m) {
    m.doc() = "Kernel sparse subspace clustering: robust (l1) and Frobenius objectives, "
              "spectral labeling, and subspace-based out-of-sample assignment.";
    m.attr("__version__") = KSSC_VERSION;

    py::register_exception<kssc::Error>(m, "Error");

    py::class_<kssc::PipelineModel>(m, "Model",
                                    "Fitted clustering model; columns are samples everywhere.")
        .def_property_readonly("labels",
                               [](const kssc::PipelineModel& model) { return model.labels; })
        .def_property_readonly(
            "clusters",
            [](const kssc::PipelineModel& model) { return model.subspaces.cluster_count(); })
        .def_property_readonly("input_dim",
                               [](const kssc::PipelineModel& model) {
                                   return static_cast<int>(model.input_dim());
                               })
        .def_property_readonly("rank",
                               [](const kssc::PipelineModel& model) {
                                   return model.npt ? model.npt->rank()
                                                    : static_cast<int>(model.input_dim());
                               })
        .def(
            "assign",
            [](const kssc::PipelineModel& model, const kssc::Matrix& x) {
                return kssc::assign_batch(model, x);
            },
            py::arg("x"), "Labels for the columns of x.")
        .def(
            "assign_residuals",
            [](const kssc::PipelineModel& model, const kssc::Vector& x) {
                return kssc::assign_residuals(model, x);
            },
            py::arg("x"), "Distance from one point to each cluster subspace.")
        .def(
            "save",
            [](const kssc::PipelineModel& model, const std::string& path) {
                kssc::write_json_file(path, kssc::models_to_json(model));
            },
            py::arg("path"))
        .def_static(
            "load",
            [](const std::string& path) {
                return kssc::models_from_json(kssc::read_json_file(path));
            },
            py::arg("path"));

    m.def(
        "fit",
        [](const kssc::Matrix& x, int clusters, const std::string& mode,
           const std::string& kernel, double b, int degree, double sigma2, int rank,
           double lam, const std::string& lambda_scaling, std::uint64_t seed, int oos_dim,
           bool normalize) {
            const kssc::RunConfig config =
                make_config(clusters, mode, kernel, b, degree, sigma2, rank, lam,
                            lambda_scaling, seed, oos_dim, normalize);
            return kssc::fit_pipeline(config, x).model;
        },
        py::arg("x"), py::arg("clusters"), py::arg("mode") = "robust",
        py::arg("kernel") = "gauss", py::arg("b") = 0.0, py::arg("degree") = 1,
        py::arg("sigma2") = 1.0, py::arg("rank") = 0, py::arg("lam") = 10.0,
        py::arg("lambda_scaling") = "none", py::arg("seed") = 0, py::arg("oos_dim") = 5,
        py::arg("normalize") = true,
        "Cluster the columns of x. kernel='none' runs on raw coordinates; rank=0 keeps "
        "every direction above the eigenvalue threshold.");

    const auto solver_options = [](double rho, double tol_abs, double tol_rel, int max_iter,
                                   bool adaptive_rho) {
        kssc::SolverOptions opts;
        opts.rho = rho;
        opts.tol_abs = tol_abs;
        opts.tol_rel = tol_rel;
        opts.max_iter = max_iter;
        opts.adaptive_rho = adaptive_rho;
        return opts;
    };
    m.def(
        "solve_robust_ssc",
        [solver_options](const kssc::Matrix& y, double lam, double rho, double tol_abs,
                         double tol_rel, int max_iter, bool adaptive_rho) {
            kssc::SelfRepresentation rep = kssc::solve_robust_ssc(
                y, lam, solver_options(rho, tol_abs, tol_rel, max_iter, adaptive_rho));
            return py::make_tuple(rep.c, rep.e);
        },
        py::arg("y"), py::arg("lam"), py::arg("rho") = 1.0, py::arg("tol_abs") = 1e-6,
        py::arg("tol_rel") = 1e-4, py::arg("max_iter") = 5000, py::arg("adaptive_rho") = true,
        "Self-representation (C, E) minimizing ||C||_1 + lam ||Y - YC||_1, diag(C)=0.");
    m.def(
        "solve_frobenius_ssc",
        [solver_options](const kssc::Matrix& y, double lam, double rho, double tol_abs,
                         double tol_rel, int max_iter, bool adaptive_rho) {
            return kssc::solve_frobenius_ssc(
                       y, lam, solver_options(rho, tol_abs, tol_rel, max_iter, adaptive_rho))
                .c;
        },
        py::arg("y"), py::arg("lam"), py::arg("rho") = 1.0, py::arg("tol_abs") = 1e-6,
        py::arg("tol_rel") = 1e-4, py::arg("max_iter") = 5000, py::arg("adaptive_rho") = true,
        "Self-representation C minimizing ||C||_1 + (lam/2) ||Y - YC||_F^2, diag(C)=0.");

    m.def("accuracy", &kssc::accuracy, py::arg("truth"), py::arg("pred"));
    m.def("nmi", &kssc::nmi, py::arg("truth"), py::arg("pred"));
    m.def("pairwise_f1", &kssc::pairwise_f1, py::arg("truth"), py::arg("pred"));
    m.def("wilcoxon_ranksum", &kssc::wilcoxon_ranksum, py::arg("a"), py::arg("b"));
    m.def(
        "evaluate",
        [](const std::vector<int>& truth, const std::vector<int>& pred) {
            return metrics_dict(kssc::evaluate(truth, pred));
        },
        py::arg("truth"), py::arg("pred"));

    m.def(
        "gen_union_subspaces",
        [](int d_ambient, int c, int dim_per_subspace, int n_per_cluster, double noise_sigma,
           std::uint64_t seed) {
            kssc::LabeledDataset ds = kssc::gen_union_subspaces(
                d_ambient, c, dim_per_subspace, n_per_cluster, noise_sigma, seed);
            return py::make_tuple(ds.data, ds.labels);
        },
        py::arg("d_ambient"), py::arg("c"), py::arg("dim_per_subspace"),
        py::arg("n_per_cluster"), py::arg("noise_sigma") = 0.0, py::arg("seed") = 0);
    m.def(
        "gen_concentric_circles",
        [](const std::vector<double>& radii, int n_per_cluster, double noise_sigma,
           std::uint64_t seed) {
            kssc::LabeledDataset ds =
                kssc::gen_concentric_circles(radii, n_per_cluster, noise_sigma, seed);
            return py::make_tuple(ds.data, ds.labels);
        },
        py::arg("radii"), py::arg("n_per_cluster"), py::arg("noise_sigma") = 0.0,
        py::arg("seed") = 0);
    m.def(
        "gen_polynomial_embedding",
        [](int d_ambient, int c, int n_per_cluster, double noise_sigma, std::uint64_t seed) {
            kssc::LabeledDataset ds =
                kssc::gen_polynomial_embedding(d_ambient, c, n_per_cluster, noise_sigma, seed);
            return py::make_tuple(ds.data, ds.labels);
        },
        py::arg("d_ambient"), py::arg("c"), py::arg("n_per_cluster"),
        py::arg("noise_sigma") = 0.0, py::arg("seed") = 0);
    m.def("corrupt_sparse", &kssc::corrupt_sparse, py::arg("x"), py::arg("fraction"),
          py::arg("magnitude"), py::arg("seed") = 0,
          "Replace round(fraction*D*N) random entries by +-magnitude.");
    m.def("unit_normalize_columns", &kssc::unit_normalize_columns, py::arg("x"));
}
