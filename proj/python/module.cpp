#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "hwforest/cascade.hpp"
#include "hwforest/dataset.hpp"
#include "hwforest/evalstats.hpp"
#include "hwforest/parallel.hpp"
#include "hwforest/serialize.hpp"

namespace py = pybind11;

namespace {

using namespace hwforest;

Dataset make_dataset(const std::vector<std::vector<double>>& features,
                     const std::vector<std::int32_t>& labels, std::int32_t n_classes,
                     std::optional<std::pair<std::size_t, std::size_t>> image_shape) {
    Dataset d;
    const std::size_t n = features.size();
    const std::size_t w = n ? features[0].size() : 0;
    d.features = Matrix(n, w);
    for (std::size_t r = 0; r < n; ++r) {
        if (features[r].size() != w) fail(Errc::RaggedRow, "feature rows differ in length");
        std::copy(features[r].begin(), features[r].end(), d.features.row(r));
    }
    d.labels = labels;
    if (n_classes > 0) {
        d.n_classes = n_classes;
    } else {
        std::int32_t top = -1;
        for (std::int32_t l : labels) top = std::max(top, l);
        d.n_classes = top + 1;
    }
    d.image_shape = image_shape;
    d.validate();
    return d;
}

py::dict report_to_dict(const EvalReport& r) {
    py::dict out;
    out["accuracy"] = r.accuracy;
    py::list levels;
    for (const LevelReport& level : r.levels) {
        py::dict row;
        row["wt"] = level.wt;
        row["ta"] = level.ta;
        row["entering"] = level.entering;
        row["retired"] = level.retired;
        row["oof_accuracy"] = level.oof_accuracy;
        levels.append(std::move(row));
    }
    out["levels"] = std::move(levels);
    py::list grains;
    for (const GrainReport& g : r.grains) {
        py::dict row;
        row["window"] = g.window;
        row["total_locations"] = g.total_locations;
        row["retained"] = g.retained;
        grains.append(std::move(row));
    }
    out["grains"] = std::move(grains);
    out["wall_time_seconds"] = r.wall_time_seconds;
    out["validation_accuracy"] = r.validation_accuracy;
    out["test_exit_counts"] = r.test_exit_counts;
    return out;
}

} // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "deep forest with hashing and window confidence screening";

    py::register_exception<Error>(m, "HwForestError");

    py::enum_<ScreeningKind>(m, "ScreeningKind")
        .value("window", ScreeningKind::window)
        .value("binning", ScreeningKind::binning)
        .value("none", ScreeningKind::none);

    py::class_<GrainConfig>(m, "GrainConfig")
        .def(py::init<>())
        .def_readwrite("window", &GrainConfig::window)
        .def_readwrite("stride", &GrainConfig::stride)
        .def_readwrite("n_trees_per_forest", &GrainConfig::n_trees_per_forest)
        .def_readwrite("hash_screen", &GrainConfig::hash_screen)
        .def_readwrite("patch_subsample", &GrainConfig::patch_subsample)
        .def_readwrite("min_leaf", &GrainConfig::min_leaf);

    py::class_<CascadeConfig>(m, "CascadeConfig")
        .def(py::init<>())
        .def_readwrite("n_random_forests", &CascadeConfig::n_random_forests)
        .def_readwrite("n_completely_random_forests",
                       &CascadeConfig::n_completely_random_forests)
        .def_readwrite("trees_per_forest", &CascadeConfig::trees_per_forest)
        .def_readwrite("cv_folds", &CascadeConfig::cv_folds)
        .def_readwrite("max_levels", &CascadeConfig::max_levels)
        .def_readwrite("screening", &CascadeConfig::screening)
        .def_readwrite("binning_bins", &CascadeConfig::binning_bins)
        .def_readwrite("error_shrink", &CascadeConfig::error_shrink)
        .def_readwrite("min_leaf", &CascadeConfig::min_leaf)
        .def_readwrite("seed", &CascadeConfig::seed)
        .def_readwrite("grains", &CascadeConfig::grains)
        .def_readwrite("validation_fraction", &CascadeConfig::validation_fraction);

    py::class_<Dataset>(m, "Dataset")
        .def(py::init(&make_dataset), py::arg("features"), py::arg("labels"),
             py::arg("n_classes") = 0, py::arg("image_shape") = py::none())
        .def_property_readonly("n_instances", &Dataset::n_instances)
        .def_property_readonly("n_features", &Dataset::n_features)
        .def_readonly("n_classes", &Dataset::n_classes)
        .def_readonly("labels", &Dataset::labels)
        .def_readonly("label_names", &Dataset::label_names)
        .def_readwrite("image_shape", &Dataset::image_shape)
        .def("feature_row",
             [](const Dataset& d, std::size_t i) {
                 if (i >= d.n_instances()) throw py::index_error("row out of range");
                 const double* r = d.features.row(i);
                 return std::vector<double>(r, r + d.n_features());
             })
        .def("validate", &Dataset::validate);

    m.def("load_idx", &load_idx, py::arg("images"), py::arg("labels"),
          "read an IDX image/label pair (plain or gzip-compressed)");
    m.def(
        "load_csv",
        [](const std::string& path, const std::string& label,
           const std::map<std::string, std::string>& encodings) {
            CsvOptions o;
            o.encodings = encodings;
            return load_csv(path, label, o);
        },
        py::arg("path"), py::arg("label") = "label",
        py::arg("encodings") = std::map<std::string, std::string>{});
    m.def(
        "split",
        [](const Dataset& d, double train_fraction, std::uint64_t seed, bool stratified) {
            SplitSpec s;
            s.train_fraction = train_fraction;
            s.seed = seed;
            s.stratified = stratified;
            return split(d, s);
        },
        py::arg("dataset"), py::arg("train_fraction") = 0.8, py::arg("seed") = 0,
        py::arg("stratified") = true);
    m.def("subsample", &subsample, py::arg("dataset"), py::arg("fraction"), py::arg("seed") = 0);

    py::class_<CascadeModel>(m, "Model")
        .def_readonly("n_classes", &CascadeModel::n_classes)
        .def_readonly("label_names", &CascadeModel::label_names)
        .def_property_readonly("n_levels",
                               [](const CascadeModel& cm) { return cm.levels.size(); })
        .def_property_readonly("feature_width",
                               [](const CascadeModel& cm) { return cm.raw_width; })
        .def(
            "predict",
            [](const CascadeModel& cm, const std::vector<double>& x) { return predict(cm, x); },
            py::arg("x"), py::call_guard<py::gil_scoped_release>())
        .def(
            "predict_label",
            [](const CascadeModel& cm, const std::vector<double>& x) {
                const ClassDistribution dist = predict(cm, x);
                return static_cast<std::int32_t>(
                    std::max_element(dist.begin(), dist.end()) - dist.begin());
            },
            py::arg("x"), py::call_guard<py::gil_scoped_release>())
        .def(
            "evaluate",
            [](const CascadeModel& cm, const Dataset& d) {
                const TestEvaluation ev = evaluate(cm, d);
                return std::make_tuple(ev.accuracy, ev.predicted, ev.exit_counts);
            },
            py::arg("dataset"), py::call_guard<py::gil_scoped_release>(),
            "returns (accuracy, predicted labels, per-level exit counts)")
        .def(
            "save",
            [](const CascadeModel& cm, const std::string& path) { save_model(cm, path); },
            py::arg("path"));

    m.def(
        "fit",
        [](const Dataset& train, const Dataset& validation, const CascadeConfig& cfg) {
            FitResult r = fit(train, validation, cfg);
            return std::make_tuple(std::move(r.model), r.validation_accuracy);
        },
        py::arg("train"), py::arg("validation"), py::arg("config"),
        py::call_guard<py::gil_scoped_release>(),
        "returns (model, per-level validation accuracy)");
    m.def(
        "fit_eval",
        [](const Dataset& train, const Dataset& test, const CascadeConfig& cfg) {
            FitEvalResult r = fit_eval(train, test, cfg);
            return std::make_tuple(std::move(r.model), report_to_dict(r.report));
        },
        py::arg("train"), py::arg("test"), py::arg("config"),
        "returns (model, report dict)");
    m.def("load_model", &load_model, py::arg("path"));

    m.def(
        "paired_t", [](const std::vector<double>& diffs) { return paired_t({diffs}); },
        py::arg("diffs"));
    m.def(
        "friedman",
        [](const std::vector<double>& mean_ranks, std::size_t n_datasets) {
            RankTable rt;
            rt.mean_ranks = mean_ranks;
            rt.n_datasets = n_datasets;
            return friedman(rt);
        },
        py::arg("mean_ranks"), py::arg("n_datasets"));
    m.def("nemenyi_cd", &nemenyi_cd, py::arg("k"), py::arg("n_datasets"), py::arg("q_alpha"));
    m.def("accuracy", &accuracy, py::arg("predictions"), py::arg("labels"));
    m.def("set_thread_limit", &set_thread_limit, py::arg("n"),
          "0 restores the HWFOREST_THREADS / hardware default");
}
