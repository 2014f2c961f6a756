#include "hwforest/scanning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hwforest/parallel.hpp"
#include "hwforest/rng.hpp"

namespace hwforest {

namespace {

void require_image(const Dataset& d) {
    if (!d.image_shape) fail(Errc::ShapeMismatch, "dataset carries no image shape");
}

void check_window(std::size_t height, std::size_t width, const GrainConfig& g) {
    if (g.window == 0 || g.stride == 0)
        fail(Errc::InvalidBounds, "window and stride must be positive");
    if (g.window > height || g.window > width)
        fail(Errc::WindowLargerThanImage,
             std::to_string(g.window) + "x" + std::to_string(g.window) + " window over a " +
                 std::to_string(height) + "x" + std::to_string(width) + " image");
}

void copy_patch(const double* image, std::size_t width, std::size_t top, std::size_t left,
                std::size_t window, double* out) {
    for (std::size_t r = 0; r < window; ++r) {
        const double* src = image + (top + r) * width + left;
        std::copy(src, src + window, out + r * window);
    }
}

/// Signature accumulation over all instances without materializing every
/// patch: per (location, bit) counts of ones.
std::vector<LocationGroup> screen_groups(const Dataset& d, const GrainConfig& g) {
    const auto [height, width] = *d.image_shape;
    const std::size_t rows_out = axis_locations(height, g.window, g.stride);
    const std::size_t cols_out = axis_locations(width, g.window, g.stride);
    const std::size_t n_locations = rows_out * cols_out;
    const std::size_t patch_len = g.window * g.window;

    std::vector<std::uint32_t> one_counts(n_locations * patch_len, 0);
    std::vector<double> patch(patch_len);
    for (std::size_t i = 0; i < d.n_instances(); ++i) {
        const double* image = d.features.row(i);
        std::size_t loc = 0;
        for (std::size_t top = 0; top + g.window <= height; top += g.stride) {
            for (std::size_t left = 0; left + g.window <= width; left += g.stride, ++loc) {
                copy_patch(image, width, top, left, g.window, patch.data());
                const HashSignature sig = signature(patch);
                std::uint32_t* counts = one_counts.data() + loc * patch_len;
                for (std::size_t j = 0; j < patch_len; ++j) counts[j] += sig.bits[j];
            }
        }
    }

    std::vector<LocationGroup> groups(n_locations);
    for (std::size_t r = 0; r < n_locations; ++r) {
        LocationGroup& grp = groups[r];
        grp.location = r;
        grp.bit_means.resize(patch_len);
        grp.folded.resize(patch_len);
        const std::uint32_t* counts = one_counts.data() + r * patch_len;
        for (std::size_t j = 0; j < patch_len; ++j) {
            grp.bit_means[j] =
                static_cast<double>(counts[j]) / static_cast<double>(d.n_instances());
            grp.folded[j] = fold_bit_mean(grp.bit_means[j]);
        }
        grp.distance = group_distance(grp);
    }
    return groups;
}

HashThresholdResult keep_all_result(std::size_t n_locations) {
    HashThresholdResult res;
    res.order.resize(n_locations);
    std::iota(res.order.begin(), res.order.end(), std::size_t{0});
    res.keep = res.order;
    return res;
}

} // namespace

std::size_t axis_locations(std::size_t image_extent, std::size_t window, std::size_t stride) {
    return (image_extent - window) / stride + 1;
}

Matrix extract_patches(const double* image, std::size_t height, std::size_t width,
                       std::size_t window, std::size_t stride) {
    GrainConfig probe;
    probe.window = window;
    probe.stride = stride;
    check_window(height, width, probe);

    const std::size_t rows_out = axis_locations(height, window, stride);
    const std::size_t cols_out = axis_locations(width, window, stride);
    Matrix out(rows_out * cols_out, window * window);
    std::size_t loc = 0;
    for (std::size_t top = 0; top + window <= height; top += stride) {
        for (std::size_t left = 0; left + window <= width; left += stride, ++loc)
            copy_patch(image, width, top, left, window, out.row(loc));
    }
    return out;
}

PatchSet extract_all(const Dataset& d, const GrainConfig& g) {
    require_image(d);
    const auto [height, width] = *d.image_shape;
    check_window(height, width, g);

    PatchSet ps;
    ps.n_instances = d.n_instances();
    ps.n_locations = axis_locations(height, g.window, g.stride) *
                     axis_locations(width, g.window, g.stride);
    ps.patch_len = g.window * g.window;
    ps.values.resize(ps.n_instances * ps.n_locations * ps.patch_len);
    parallel_for(d.n_instances(), [&](std::size_t i) {
        const double* image = d.features.row(i);
        std::size_t loc = 0;
        for (std::size_t top = 0; top + g.window <= height; top += g.stride)
            for (std::size_t left = 0; left + g.window <= width; left += g.stride, ++loc)
                copy_patch(image, width, top, left, g.window, ps.patch(i, loc));
    });
    return ps;
}

GrainModel fit_grain(const Dataset& train, const GrainConfig& g, std::uint64_t seed) {
    require_image(train);
    if (train.n_instances() == 0) fail(Errc::EmptyDataset, "no training instances");
    const auto [height, width] = *train.image_shape;
    check_window(height, width, g);

    GrainModel model;
    model.config = g;
    model.image_height = height;
    model.image_width = width;
    model.n_locations = axis_locations(height, g.window, g.stride) *
                        axis_locations(width, g.window, g.stride);

    model.threshold = g.hash_screen ? hashing_threshold(screen_groups(train, g))
                                    : keep_all_result(model.n_locations);
    model.retained_locations = model.threshold.keep;
    if (model.retained_locations.empty())
        fail(Errc::AllLocationsEliminated, "hash screening kept no locations");

    // Pool retained patches; each inherits its source instance's label.
    const std::size_t patch_len = g.window * g.window;
    const std::size_t n_retained = model.retained_locations.size();
    std::size_t n_pool = train.n_instances() * n_retained;
    std::vector<std::size_t> picked;
    if (g.patch_subsample < 1.0) {
        const auto want = static_cast<std::size_t>(
            std::llround(g.patch_subsample * static_cast<double>(n_pool)));
        picked.resize(n_pool);
        std::iota(picked.begin(), picked.end(), std::size_t{0});
        Rng rng(mix_seed(seed, 0x5b5aULL));
        for (std::size_t i = n_pool; i > 1; --i)
            std::swap(picked[i - 1], picked[rng.next_below(i)]);
        picked.resize(std::max<std::size_t>(want, 1));
        std::sort(picked.begin(), picked.end());
        n_pool = picked.size();
    }

    Matrix pooled(n_pool, patch_len);
    std::vector<std::int32_t> pooled_labels(n_pool);
    std::vector<double> patch(patch_len);
    const std::size_t cols_out = axis_locations(width, g.window, g.stride);
    for (std::size_t row = 0; row < n_pool; ++row) {
        const std::size_t flat = picked.empty() ? row : picked[row];
        const std::size_t i = flat / n_retained;
        const std::size_t loc = model.retained_locations[flat % n_retained];
        const std::size_t top = (loc / cols_out) * g.stride;
        const std::size_t left = (loc % cols_out) * g.stride;
        copy_patch(train.features.row(i), width, top, left, g.window, pooled.row(row));
        pooled_labels[row] = train.labels[i];
    }

    const ColMatrix X(pooled);
    pooled = Matrix();
    const FeatureQuant quant = quantize_features(X);
    std::vector<std::size_t> rows(n_pool);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    TreeOptions opts;
    opts.min_leaf = g.min_leaf;
    model.forests.push_back(train_forest_rows(X, pooled_labels, train.n_classes, rows,
                                              ForestKind::random, g.n_trees_per_forest,
                                              mix_seed(seed, 1), opts, &quant));
    model.forests.push_back(train_forest_rows(X, pooled_labels, train.n_classes, rows,
                                              ForestKind::completely_random, g.n_trees_per_forest,
                                              mix_seed(seed, 2), opts, &quant));
    return model;
}

Matrix transform(const GrainModel& m, const Dataset& d) {
    require_image(d);
    const auto [height, width] = *d.image_shape;
    if (height != m.image_height || width != m.image_width)
        fail(Errc::ShapeMismatch, "image shape differs from the fitted grain");

    const std::size_t k = static_cast<std::size_t>(m.forests.front().n_classes);
    const std::size_t block = m.forests.size() * k;
    const std::size_t patch_len = m.patch_len();
    const std::size_t cols_out = axis_locations(width, m.config.window, m.config.stride);

    Matrix out(d.n_instances(), m.out_width());
    parallel_for(d.n_instances(), [&](std::size_t i) {
        std::vector<double> patch(patch_len);
        const double* image = d.features.row(i);
        double* dst = out.row(i);
        for (std::size_t r = 0; r < m.retained_locations.size(); ++r) {
            const std::size_t loc = m.retained_locations[r];
            const std::size_t top = (loc / cols_out) * m.config.stride;
            const std::size_t left = (loc % cols_out) * m.config.stride;
            copy_patch(image, width, top, left, m.config.window, patch.data());
            for (std::size_t f = 0; f < m.forests.size(); ++f) {
                const ClassDistribution dist =
                    predict_distribution(m.forests[f], patch.data(), patch_len);
                std::copy(dist.begin(), dist.end(), dst + r * block + f * k);
            }
        }
    });
    return out;
}

ScanModel fit_scan(const Dataset& train, const std::vector<GrainConfig>& grains,
                   std::uint64_t seed) {
    ScanModel model;
    model.grains.reserve(grains.size());
    for (std::size_t gi = 0; gi < grains.size(); ++gi)
        model.grains.push_back(fit_grain(train, grains[gi], mix_seed(seed, 0x9a0 + gi)));
    return model;
}

Matrix transform(const ScanModel& m, const Dataset& d) {
    Matrix out(d.n_instances(), m.out_width());
    std::size_t offset = 0;
    for (const GrainModel& g : m.grains) {
        const Matrix part = transform(g, d);
        for (std::size_t i = 0; i < d.n_instances(); ++i)
            std::copy(part.row(i), part.row(i) + part.cols(), out.row(i) + offset);
        offset += part.cols();
    }
    return out;
}

} // namespace hwforest
