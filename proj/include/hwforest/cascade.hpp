#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hwforest/conf_screen.hpp"
#include "hwforest/dataset.hpp"
#include "hwforest/errors.hpp"
#include "hwforest/forest.hpp"
#include "hwforest/matrix.hpp"
#include "hwforest/scanning.hpp"

namespace hwforest {

enum class ScreeningKind : std::uint8_t { window, binning, none };

struct CascadeConfig {
    std::size_t n_random_forests = 1;
    std::size_t n_completely_random_forests = 1;
    std::size_t trees_per_forest = 50;
    std::size_t cv_folds = 5;
    std::size_t max_levels = 20;
    ScreeningKind screening = ScreeningKind::window;
    std::size_t binning_bins = 100;
    /// TA_t = 1 - (1 - A_t) / error_shrink: each level must shrink the
    /// out-of-fold error by this factor over its certified instances.
    double error_shrink = 2.0;
    std::size_t min_leaf = 1;
    std::uint64_t seed = 0;
    /// Grain configurations for image-shaped data; empty means the raw
    /// features feed the cascade directly.
    std::vector<GrainConfig> grains;
    /// Fraction of the training set carved out as the stopping validation
    /// set by fit_eval / train entry points that receive no explicit
    /// validation split.
    double validation_fraction = 0.2;

    std::size_t slots() const noexcept { return n_random_forests + n_completely_random_forests; }
};

/// One committed cascade level: the per-slot fold-model bundles plus the
/// screening outcome on the level's surviving training instances.
struct CascadeLevel {
    std::vector<CvForest> forests;
    double wt = 0.0;
    double ta = 0.0;
    double oof_accuracy = 0.0;
    std::size_t n_entering = 0;
    std::size_t n_retired = 0;
};

struct CascadeModel {
    ScanModel scan;
    std::vector<CascadeLevel> levels;
    std::int32_t n_classes = 0;
    std::size_t raw_width = 0;
    std::size_t base_width = 0;
    CascadeConfig config;
    /// Original label spellings of the training set, when it had any.
    std::vector<std::string> label_names;

    bool uses_scanning() const noexcept { return !scan.grains.empty(); }
};

/// fit() byproducts used by reports and tests.
struct FitResult {
    CascadeModel model;
    /// Level (1-based) at which each training instance retired; instances
    /// surviving the last committed level carry that level's index.
    std::vector<std::int32_t> train_exit_level;
    /// Validation accuracy of the model prefix ending at each committed
    /// level.
    std::vector<double> validation_accuracy;
};

/// Trains the cascade per the level loop: out-of-fold class vectors from
/// each slot, confidence screening with TA_t = 1 - (1 - A_t)/shrink,
/// feature augmentation for survivors, and validation-driven stopping
/// (a level whose validation error exceeds its predecessor's is trained,
/// detected, and discarded; level 1 is always kept).
FitResult fit(const Dataset& train, const Dataset& validation, const CascadeConfig& cfg);

ClassDistribution predict(const CascadeModel& m, const double* x, std::size_t len);
ClassDistribution predict(const CascadeModel& m, const std::vector<double>& x);

/// predict plus the 1-based level that produced the distribution and the
/// number of levels whose forests were evaluated (equal to exit level).
struct TracedPrediction {
    ClassDistribution distribution;
    std::size_t exit_level = 0;
    std::size_t levels_evaluated = 0;
};

TracedPrediction predict_traced(const CascadeModel& m, const double* x, std::size_t len);

/// Row-per-instance batch prediction; identical to per-instance predict.
Matrix predict_matrix(const CascadeModel& m, const Dataset& d);

std::vector<std::int32_t> predict_labels(const CascadeModel& m, const Dataset& d);

/// Accuracy, per-instance predictions, and per-level exit counts of a
/// fitted model over a labeled set.
struct TestEvaluation {
    double accuracy = 0.0;
    std::vector<std::int32_t> predicted;
    std::vector<std::size_t> exit_counts;
};

TestEvaluation evaluate(const CascadeModel& m, const Dataset& test);

struct LevelReport {
    double wt = 0.0;
    double ta = 0.0;
    std::size_t entering = 0;
    std::size_t retired = 0;
    double oof_accuracy = 0.0;
};

struct GrainReport {
    std::size_t window = 0;
    std::size_t total_locations = 0;
    std::size_t retained = 0;
};

struct EvalReport {
    double accuracy = 0.0;
    std::vector<LevelReport> levels;
    std::vector<GrainReport> grains;
    double wall_time_seconds = 0.0;
    double validation_accuracy = 0.0;
    std::vector<std::size_t> test_exit_counts;
};

/// Carves a stratified validation split from train, fits, evaluates on
/// test, and assembles the run report.
struct FitEvalResult {
    CascadeModel model;
    EvalReport report;
};

FitEvalResult fit_eval(const Dataset& train, const Dataset& test, const CascadeConfig& cfg);

/// The report rows derivable from a fitted model alone (no test set).
EvalReport describe(const CascadeModel& m);

} // namespace hwforest
