#pragma once

// Randomized input builders shared by the unit and acceptance binaries.
// Everything draws through hwforest::Rng, so one seed pins an entire case
// sequence across platforms.

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "hwforest/conf_screen.hpp"
#include "hwforest/dataset.hpp"
#include "hwforest/errors.hpp"
#include "hwforest/hash_screen.hpp"
#include "hwforest/matrix.hpp"
#include "hwforest/rng.hpp"

namespace testsupport {

/// Runs fn and reports the typed error code it threw, if any.
template <typename F>
std::optional<hwforest::Errc> code_of(F&& fn) {
    try {
        std::forward<F>(fn)();
    } catch (const hwforest::Error& e) {
        return e.code();
    }
    return std::nullopt;
}

using hwforest::Rng;

/// Uniform integer in [lo, hi], inclusive.
inline std::size_t pick(Rng& rng, std::size_t lo, std::size_t hi) {
    return lo + static_cast<std::size_t>(rng.next_below(hi - lo + 1));
}

/// Uniform real in [lo, hi); gridded snaps to 9 levels so exact ties occur.
inline double pick_real(Rng& rng, double lo, double hi, bool gridded = false) {
    if (!gridded) return rng.next_real(lo, hi);
    return lo + (hi - lo) / 8.0 * static_cast<double>(rng.next_below(9));
}

/// Label vector where every class id below k appears at least twice
/// (stratified splitting rejects singleton classes), shuffled in place.
inline std::vector<std::int32_t> balanced_labels(Rng& rng, std::size_t n, std::int32_t k) {
    std::vector<std::int32_t> y(n);
    for (std::size_t i = 0; i < n; ++i)
        y[i] = static_cast<std::int32_t>(i % static_cast<std::size_t>(k));
    for (std::size_t i = n; i > 1; --i) std::swap(y[i - 1], y[rng.next_below(i)]);
    return y;
}

/// Unstructured dataset: features carry no class signal. Gridded features
/// produce repeated values, the interesting case for split search.
inline hwforest::Dataset random_dataset(Rng& rng, std::size_t n, std::size_t f, std::int32_t k,
                                        bool gridded = true, bool named = false) {
    hwforest::Dataset d;
    d.features = hwforest::Matrix(n, f);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < f; ++c)
            d.features.at(i, c) = pick_real(rng, -2.0, 2.0, gridded);
    d.labels = balanced_labels(rng, n, k);
    d.n_classes = k;
    if (named)
        for (std::int32_t c = 0; c < k; ++c)
            d.label_names.push_back(std::string("class_") + static_cast<char>('a' + c));
    return d;
}

/// Bell-ish noise without touching std::normal_distribution (whose stream
/// is implementation defined): mean of three uniforms, centered.
inline double soft_noise(Rng& rng, double sigma) {
    const double s = rng.next_unit() + rng.next_unit() + rng.next_unit();
    return (s - 1.5) * 2.0 * sigma;
}

/// Separable blobs: class c centers at 2c on every feature; sigma controls
/// overlap. Small sigma makes the task learnable by a handful of trees.
inline hwforest::Dataset blob_dataset(Rng& rng, std::size_t n, std::size_t f, std::int32_t k,
                                      double sigma) {
    hwforest::Dataset d;
    d.features = hwforest::Matrix(n, f);
    d.labels = balanced_labels(rng, n, k);
    d.n_classes = k;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t c = 0; c < f; ++c)
            d.features.at(i, c) = 2.0 * static_cast<double>(d.labels[i]) + soft_noise(rng, sigma);
    return d;
}

/// Tiny square images in [0,1] where class c brightens quadrant c mod 4,
/// so sliding-window forests have something to learn and flat background
/// regions stay redundant across instances.
inline hwforest::Dataset image_dataset(Rng& rng, std::size_t n, std::size_t side,
                                       std::int32_t k) {
    hwforest::Dataset d;
    d.features = hwforest::Matrix(n, side * side);
    d.labels = balanced_labels(rng, n, k);
    d.n_classes = k;
    d.image_shape = {side, side};
    const std::size_t half = side / 2;
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t q = static_cast<std::size_t>(d.labels[i]) % 4;
        const std::size_t top = (q / 2) * half;
        const std::size_t left = (q % 2) * half;
        for (std::size_t r = 0; r < side; ++r)
            for (std::size_t c = 0; c < side; ++c) {
                const bool hot = r >= top && r < top + half && c >= left && c < left + half;
                const double level = hot ? 0.75 : 0.1;
                d.features.at(i, r * side + c) =
                    std::min(1.0, std::max(0.0, level + soft_noise(rng, 0.08)));
            }
    }
    return d;
}

/// Confidence records whose correctness tracks confidence the way real
/// screening inputs do. tie_heavy snaps confidences to a coarse grid.
inline std::vector<hwforest::ConfidenceRecord> random_records(Rng& rng, std::size_t m,
                                                              std::int32_t k,
                                                              bool tie_heavy = false) {
    std::vector<hwforest::ConfidenceRecord> records;
    records.reserve(m);
    const auto kk = static_cast<std::size_t>(k);
    std::vector<double> probs(kk);
    for (std::size_t i = 0; i < m; ++i) {
        const double lo = 1.0 / static_cast<double>(k);
        const double conf = pick_real(rng, lo + 0.01, 0.99, tie_heavy);
        const auto top = static_cast<std::size_t>(rng.next_below(kk));
        for (std::size_t c = 0; c < kk; ++c)
            probs[c] = c == top ? conf : (1.0 - conf) / static_cast<double>(k - 1);
        hwforest::ConfidenceRecord rec = hwforest::make_record(i, probs.data(), kk, 0);
        rec.label = rng.next_unit() < rec.confidence
                        ? rec.predicted
                        : static_cast<std::int32_t>(rng.next_below(kk));
        records.push_back(std::move(rec));
    }
    return records;
}

/// Pre-ranked records realizing a prescribed correctness pattern: rank
/// i+1 has confidence 1 - 0.02(i+1), prediction class 0, and a label that
/// matches exactly when correct[i] is set.
inline std::vector<hwforest::ConfidenceRecord> records_from_pattern(
    const std::vector<bool>& correct) {
    std::vector<hwforest::ConfidenceRecord> records;
    records.reserve(correct.size());
    for (std::size_t i = 0; i < correct.size(); ++i) {
        const double conf = 1.0 - 0.02 * static_cast<double>(i + 1);
        const double probs[2] = {conf, 1.0 - conf};
        hwforest::ConfidenceRecord rec = hwforest::make_record(i, probs, 2, correct[i] ? 0 : 1);
        records.push_back(std::move(rec));
    }
    return records;
}

/// Patch set with its first n_constant locations frozen to one shared
/// patch per location (zero spread across instances) and the rest drawn
/// per instance from a 5-level grid.
inline hwforest::PatchSet random_patchset(Rng& rng, std::size_t n_instances,
                                          std::size_t n_locations, std::size_t patch_len,
                                          std::size_t n_constant) {
    hwforest::PatchSet ps;
    ps.n_instances = n_instances;
    ps.n_locations = n_locations;
    ps.patch_len = patch_len;
    ps.values.resize(n_instances * n_locations * patch_len);

    std::vector<double> frozen(n_constant * patch_len);
    for (double& v : frozen) v = pick_real(rng, 0.0, 1.0, true);

    for (std::size_t i = 0; i < n_instances; ++i)
        for (std::size_t loc = 0; loc < n_locations; ++loc) {
            double* dst = ps.patch(i, loc);
            if (loc < n_constant)
                std::copy(frozen.begin() + loc * patch_len,
                          frozen.begin() + (loc + 1) * patch_len, dst);
            else
                for (std::size_t j = 0; j < patch_len; ++j)
                    dst[j] = pick_real(rng, 0.0, 1.0, true);
        }
    return ps;
}

} // namespace testsupport
