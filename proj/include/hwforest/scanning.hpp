#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hwforest/dataset.hpp"
#include "hwforest/errors.hpp"
#include "hwforest/forest.hpp"
#include "hwforest/hash_screen.hpp"
#include "hwforest/matrix.hpp"

namespace hwforest {

/// One scanning grain: a square sliding window plus the training knobs of
/// its two patch forests.
struct GrainConfig {
    std::size_t window = 4;
    std::size_t stride = 1;
    std::size_t n_trees_per_forest = 30;
    bool hash_screen = true;
    /// Fraction of pooled retained patches used to fit the grain forests.
    double patch_subsample = 1.0;
    std::size_t min_leaf = 1;
};

/// Fitted grain: screening outcome plus one random and one completely
/// random forest over the retained patch locations.
struct GrainModel {
    GrainConfig config;
    std::size_t image_height = 0;
    std::size_t image_width = 0;
    std::size_t n_locations = 0;
    HashThresholdResult threshold;
    std::vector<std::size_t> retained_locations;
    std::vector<ForestModel> forests;

    std::size_t patch_len() const noexcept { return config.window * config.window; }
    /// Transform width contributed per instance: retained x forests x K.
    std::size_t out_width() const noexcept {
        return retained_locations.size() * forests.size() *
               (forests.empty() ? 0 : static_cast<std::size_t>(forests.front().n_classes));
    }
};

/// Number of window placements along one axis.
std::size_t axis_locations(std::size_t image_extent, std::size_t window, std::size_t stride);

/// Row-major sliding-window extraction: one output row per location.
/// Throws WindowLargerThanImage.
Matrix extract_patches(const double* image, std::size_t height, std::size_t width,
                       std::size_t window, std::size_t stride);

/// All patches of every instance as a PatchSet (instance-major).
PatchSet extract_all(const Dataset& d, const GrainConfig& g);

/// Screens locations over the training set, pools retained patches with
/// their source instances' labels, and trains the two grain forests.
/// Throws AllLocationsEliminated on a pathological screen outcome.
GrainModel fit_grain(const Dataset& train, const GrainConfig& g, std::uint64_t seed);

/// Class-vector features for every instance: for each retained location
/// (ascending), each forest emits K probabilities; column order is
/// (location, forest, class). Throws ShapeMismatch.
Matrix transform(const GrainModel& m, const Dataset& d);

/// Multi-grain bundle; transforms concatenate in grain order.
struct ScanModel {
    std::vector<GrainModel> grains;

    std::size_t out_width() const noexcept {
        std::size_t w = 0;
        for (const GrainModel& g : grains) w += g.out_width();
        return w;
    }
};

ScanModel fit_scan(const Dataset& train, const std::vector<GrainConfig>& grains,
                   std::uint64_t seed);

Matrix transform(const ScanModel& m, const Dataset& d);

} // namespace hwforest
