#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hwforest/dataset.hpp"
#include "hwforest/errors.hpp"
#include "hwforest/matrix.hpp"

namespace hwforest {

enum class ForestKind : std::uint8_t { random, completely_random };

/// Probabilities over classes; entries sum to 1 within 1e-9.
using ClassDistribution = std::vector<double>;

/// Compact tree storage. Children of an internal node are adjacent
/// (right = left + 1). A leaf stores either its pure class directly or a
/// reference into mixed_counts (value -(offset+1)) holding K class counts.
struct TreeNode {
    double threshold = 0.0;
    std::int32_t feature = -1;
    std::int32_t left = 0;
    std::int32_t count = 0;

    bool is_leaf() const noexcept { return feature < 0; }
};

struct Tree {
    std::vector<TreeNode> nodes;
    std::vector<std::int32_t> mixed_counts;

    std::size_t leaf_for(const double* x) const {
        std::size_t i = 0;
        while (!nodes[i].is_leaf())
            i = static_cast<std::size_t>(x[nodes[i].feature] <= nodes[i].threshold
                                             ? nodes[i].left
                                             : nodes[i].left + 1);
        return i;
    }

    /// Adds the leaf's class distribution for x into acc[0..n_classes).
    void accumulate(const double* x, double* acc, std::size_t n_classes) const;
};

struct ForestModel {
    ForestKind kind = ForestKind::random;
    std::int32_t n_classes = 0;
    std::size_t n_features = 0;
    std::uint64_t seed = 0;
    std::vector<Tree> trees;
};

/// Fold assignment for out-of-fold class vectors.
/// Sizes differ by at most 1; deterministic for a fixed seed.
struct FoldPlan {
    std::size_t k = 0;
    std::vector<std::int32_t> fold_of;
};

FoldPlan make_fold_plan(std::size_t n_instances, std::size_t k, std::uint64_t seed);

/// Training knobs beyond the forest kind.
/// n_candidates == 0 selects ceil(sqrt(n_features)). min_leaf is the
/// smallest admissible child size; 1 gives the classic grow-to-purity rule.
struct TreeOptions {
    std::size_t n_candidates = 0;
    std::size_t min_leaf = 1;
};

/// Per-feature sorted distinct-value tables for features with at most 256
/// levels (raw pixels, small integer features). Split search over such a
/// feature uses counting over value buckets instead of sorting; both paths
/// select identical splits. Features with more levels get an empty table.
struct FeatureQuant {
    std::vector<std::vector<double>> tables;
};

FeatureQuant quantize_features(const ColMatrix& X);

/// random kind: per-tree bootstrap, ceil(sqrt(d)) candidate features per
/// split, best midpoint threshold by Gini impurity reduction.
/// completely_random kind: full sample, uniformly random feature, threshold
/// uniform over the node's observed value range. Both stop at purity or
/// fewer than 2 (or 2*min_leaf) instances.
ForestModel train_forest(const Dataset& d, ForestKind kind, std::size_t n_trees,
                         std::uint64_t seed, const TreeOptions& opts = {});

/// Core used by every caller: train over an explicit row subset of a
/// column-major matrix. quant may be null (tables built on demand by
/// train_forest-level callers that reuse them).
ForestModel train_forest_rows(const ColMatrix& X, const std::vector<std::int32_t>& y,
                              std::int32_t n_classes, const std::vector<std::size_t>& rows,
                              ForestKind kind, std::size_t n_trees, std::uint64_t seed,
                              const TreeOptions& opts, const FeatureQuant* quant);

ClassDistribution predict_distribution(const ForestModel& f, const double* x, std::size_t len);
ClassDistribution predict_distribution(const ForestModel& f, const std::vector<double>& x);

/// Row i = predict_distribution over X row i.
Matrix predict_matrix(const ForestModel& f, const Matrix& X);

/// Out-of-fold class vectors: row i comes from the forest trained with
/// fold_of(i) held out. Throws FoldCountTooSmall when plan.k < 2.
Matrix oof_class_vectors(const Dataset& d, ForestKind kind, std::size_t n_trees,
                         const FoldPlan& plan, std::uint64_t seed);

/// K-fold forest bundle: the per-fold models plus the OOF matrix, so the
/// same cross-validation both screens training instances and serves
/// test-time prediction (fold-model average).
struct CvForest {
    ForestKind kind = ForestKind::random;
    std::int32_t n_classes = 0;
    std::vector<ForestModel> fold_models;
    Matrix oof;
};

CvForest train_cv_forest(const ColMatrix& X, const std::vector<std::int32_t>& y,
                         std::int32_t n_classes, const std::vector<std::size_t>& rows,
                         ForestKind kind, std::size_t n_trees, const FoldPlan& plan,
                         std::uint64_t seed, const TreeOptions& opts, const FeatureQuant* quant);

/// Mean distribution over the bundle's fold models.
ClassDistribution cv_predict(const CvForest& f, const double* x, std::size_t len);

namespace detail {

/// Split candidate outcome, exposed for equivalence testing against
/// exhaustive enumeration. objective = sum_child (sum_k count_k^2) / n_child,
/// maximized; equal-objective ties resolve to the lowest feature index,
/// then the lowest threshold.
struct SplitChoice {
    bool found = false;
    std::size_t feature = 0;
    double threshold = 0.0;
    double objective = 0.0;
};

SplitChoice best_split(const ColMatrix& X, const std::vector<std::int32_t>& y,
                       std::int32_t n_classes, const std::vector<std::size_t>& rows,
                       const std::vector<std::size_t>& candidate_features, std::size_t min_leaf,
                       const FeatureQuant* quant);

} // namespace detail

} // namespace hwforest
