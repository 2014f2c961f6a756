#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hwforest/cascade.hpp"
#include "hwforest/config.hpp"
#include "hwforest/dataset.hpp"
#include "hwforest/evalstats.hpp"

namespace hwforest {

/// Run settings after overlaying a named preset's defaults with the
/// config keys. Presets: "paper" (the defaults throughout this library)
/// and "desk" (reduced tree counts and patch subsampling for laptop-scale
/// runs). Explicit keys always win over the preset.
struct RunSettings {
    std::string preset;
    std::string data_format;
    std::string train_images, train_labels, test_images, test_labels;
    std::string train_csv, test_csv;
    std::string label_column;
    /// csv only: first N rows become the train set, the rest the test set.
    std::uint64_t head_train_rows = 0;
    CsvOptions csv_options;
    double train_subsample = 1.0;
    double test_subsample = 1.0;
    CascadeConfig cascade;
    std::uint64_t seed = 0;
    std::uint64_t threads = 0;
    std::string out_dir;
    std::string model_path;

    /// The resolved-config map embedded in reports for provenance.
    std::map<std::string, std::string> provenance() const;
};

RunSettings resolve_settings(const ConfigMap& cfg);

struct LoadedData {
    Dataset train;
    std::optional<Dataset> test;
};

/// Loads the configured datasets, applies subsampling and the head split,
/// and aligns test labels to the train label space for csv sources.
LoadedData load_data(const RunSettings& rs);

/// Remaps d's labels into the given name space (training label spellings).
/// With empty names, d's label spellings must parse as class ids below
/// n_classes. Throws OutOfRange on a label unseen in training.
void align_labels(Dataset& d, const std::vector<std::string>& names, std::int32_t n_classes);

struct TrainOutput {
    CascadeModel model;
    EvalReport report;
    std::map<std::string, std::string> resolved;
    std::string model_file;
    std::string report_file;
};

/// train command: fit on the configured data, write model.bin and
/// report.json under the out directory. Without a test set the report's
/// accuracy is the stopping-validation accuracy.
TrainOutput run_train(const ConfigMap& cfg);

struct EvalOutput {
    EvalReport report;
    std::string report_file;
};

/// eval command: load a saved model (key `model`) and score it on the
/// configured data (test set when present, otherwise the train set).
EvalOutput run_eval(const ConfigMap& cfg);

struct BenchArm {
    std::string name;
    CascadeConfig cascade;
    std::vector<double> fold_accuracy;
    std::vector<double> fold_seconds;
    std::vector<std::size_t> fold_retained;
    double mean_accuracy = 0.0;
    double mean_seconds = 0.0;
};

/// One non-baseline arm compared against arms[0], fold by fold.
struct BenchComparison {
    std::string arm;
    double accuracy_delta = 0.0;
    double seconds_delta = 0.0;
    std::optional<double> accuracy_t;
    std::optional<double> seconds_t;
    bool accuracy_zero_variance = false;
    bool seconds_zero_variance = false;
};

struct BenchOutput {
    std::size_t folds = 0;
    std::vector<BenchArm> arms;
    std::vector<BenchComparison> comparisons;
    std::vector<std::string> arm_files;
    std::string summary_file;
};

/// bench command: paired k-fold runs of every arm over the same fold
/// splits and per-fold seeds, so arm deltas isolate the config difference.
/// Arms come from `bench.arms = name,...` with per-arm overrides under
/// `arm.<name>.` (hash_screen, screening, trees, scan.subsample).
BenchOutput run_bench(const ConfigMap& cfg);

struct StatsOutput {
    std::vector<std::string> models;
    std::vector<std::string> datasets;
    RankTable ranks;
    double friedman_statistic = 0.0;
    double critical_difference = 0.0;
    double q_alpha = 0.0;
    std::string report_file;
};

/// stats command: per-dataset, per-model accuracy CSV (key `stats.input`)
/// to mean ranks, Friedman statistic, and Nemenyi critical difference.
StatsOutput run_stats(const ConfigMap& cfg);

} // namespace hwforest
