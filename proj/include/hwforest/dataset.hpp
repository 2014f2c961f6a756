#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "hwforest/errors.hpp"
#include "hwforest/matrix.hpp"

namespace hwforest {

/// Instances-by-features table with integer class labels in [0, n_classes).
/// image_shape, when present, declares features as a height x width image
/// in row-major pixel order.
struct Dataset {
    Matrix features;
    std::vector<std::int32_t> labels;
    std::int32_t n_classes = 0;
    std::optional<std::pair<std::size_t, std::size_t>> image_shape;
    /// Original label spelling per class id, in first-appearance order.
    /// Empty for sources whose labels are already integers (IDX).
    std::vector<std::string> label_names;

    std::size_t n_instances() const noexcept { return features.rows(); }
    std::size_t n_features() const noexcept { return features.cols(); }

    /// Checks the structural invariants; throws on violation.
    void validate() const;
};

struct SplitSpec {
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    bool stratified = true;
};

/// Optional per-column treatment of non-numeric CSV features. Keys are
/// header names or 0-based column indices in decimal; values are
/// "ordinal" (first-appearance integer codes) or "onehot".
struct CsvOptions {
    std::map<std::string, std::string> encodings;
};

/// Reads an IDX image/label pair (plain or gzip-compressed). Pixel bytes
/// are scaled to [0,1] by division by 255; image_shape comes from the
/// header. Throws BadMagic, CountMismatch, TruncatedFile, Io.
Dataset load_idx(const std::string& images_path, const std::string& labels_path);

/// Reads a comma-separated table. label_column is a header name or a
/// 0-based column index in decimal. A header row is assumed when some
/// column is non-numeric in row 1 but numeric in row 2. Labels are
/// remapped to 0..K-1 by first appearance. Throws RaggedRow,
/// UnknownLabelColumn, NonNumericCell, EmptyDataset, Io.
Dataset load_csv(const std::string& path, const std::string& label_column,
                 const CsvOptions& options = {});

/// Writes features plus a final label column (original spellings when
/// recorded). Feature formatting round-trips doubles bit-exactly.
void save_csv(const Dataset& d, const std::string& path);

/// Deterministic train/test split. Stratified mode apportions each class
/// by largest remainder so the train total is round(fraction * n) exactly
/// and every class deviates from its quota by less than one instance.
/// Throws ClassWithSingleInstance in stratified mode.
std::pair<Dataset, Dataset> split(const Dataset& d, const SplitSpec& s);

/// New dataset holding the given rows, in the given order. Class count
/// and names are preserved from the source.
Dataset take(const Dataset& d, const std::vector<std::size_t>& rows);

/// Stratified deterministic subsample of round(fraction * n) instances.
Dataset subsample(const Dataset& d, double fraction, std::uint64_t seed);

} // namespace hwforest
