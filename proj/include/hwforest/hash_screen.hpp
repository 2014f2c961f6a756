#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "hwforest/errors.hpp"

namespace hwforest {

/// Bit signature of one feature vector: bit j = 1 iff v[j] exceeds mean(v).
struct HashSignature {
    std::vector<std::uint8_t> bits;
};

/// Per-location statistics across all instances.
/// folded[j] = min(bit_means[j], 1 - bit_means[j]); distance = mean(folded).
struct LocationGroup {
    std::size_t location = 0;
    std::vector<double> bit_means;
    std::vector<double> folded;
    double distance = 0.0;
};

/// Outcome of threshold selection over a set of location groups.
///
/// order holds locations by descending distance (ties by ascending original
/// index); n_table[g-1] = N(g) = smallest m whose top-m distance prefix
/// reaches g percent of total_mass. p = 0 means no percentage was selected
/// (all-zero distances or no qualifying step) and every location is kept.
struct HashThresholdResult {
    std::vector<std::size_t> order;
    double total_mass = 0.0;
    std::array<std::uint32_t, 100> n_table{};
    int p = 0;
    double ht = 0.0;
    std::vector<std::size_t> keep;

    bool kept(std::size_t location) const;
};

/// Sliding-window patches for every instance at every location.
/// Storage is instance-major: patch j of values belongs to location
/// (j % n_locations) of instance (j / n_locations).
struct PatchSet {
    std::size_t n_instances = 0;
    std::size_t n_locations = 0;
    std::size_t patch_len = 0;
    std::vector<double> values;

    double* patch(std::size_t instance, std::size_t location) {
        return values.data() + (instance * n_locations + location) * patch_len;
    }
    const double* patch(std::size_t instance, std::size_t location) const {
        return values.data() + (instance * n_locations + location) * patch_len;
    }
};

/// Binarizes v against its own mean, strict comparison.
HashSignature signature(const double* v, std::size_t len);
HashSignature signature(const std::vector<double>& v);

/// min(f, 1-f) for f in [0,1]. Throws OutOfRange otherwise.
double fold_bit_mean(double ones_fraction);

/// Arithmetic mean of the folded entries.
double group_distance(const LocationGroup& g);

/// N(g): smallest m with sum of the top-m distances >= total * g/100.
/// e must be sorted descending; throws ZeroTotalMass when total <= 0.
std::size_t n_of(unsigned g, const std::vector<double>& e, double total);

/// Builds one LocationGroup per location from the signatures of every
/// instance's patch at that location.
std::vector<LocationGroup> location_groups(const PatchSet& ps);

/// Selects the screening threshold HT: scan u = 100..2 and take the first u
/// with N(u) - N(u-1) <= r/50, then HT = the N(u)-th largest distance and
/// keep = locations with distance >= HT. Degenerate inputs (all distances
/// zero, or no qualifying u) keep every location with HT = 0.
HashThresholdResult hashing_threshold(const std::vector<LocationGroup>& groups);

/// Applies hashing_threshold to a patch set and drops eliminated locations
/// from every instance identically, preserving original location order.
std::pair<HashThresholdResult, PatchSet> screen(const PatchSet& ps);

} // namespace hwforest
