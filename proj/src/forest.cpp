#include "hwforest/forest.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hwforest/parallel.hpp"
#include "hwforest/rng.hpp"

namespace hwforest {

namespace {

constexpr std::size_t kMaxQuantLevels = 256;
// Below this node size the sort path beats zeroing a bucket table.
constexpr std::size_t kBucketMinRows = 64;

struct NodeRange {
    std::size_t node = 0;
    std::size_t begin = 0;
    std::size_t end = 0;
};

/// Per-candidate split evaluation state shared across one node.
struct SplitScan {
    const ColMatrix* X = nullptr;
    const std::vector<std::int32_t>* y = nullptr;
    std::int32_t n_classes = 0;
    const std::size_t* rows = nullptr;
    std::size_t n = 0;
    std::size_t min_leaf = 1;
    const std::vector<std::int32_t>* node_counts = nullptr;
    std::int64_t total_sq = 0;

    // Scratch reused across candidates.
    std::vector<std::pair<double, std::int32_t>> sorted;
    std::vector<std::int32_t> left;
    std::vector<std::int32_t> bucket_counts;
    std::vector<std::int32_t> seen_buckets;

    void bind(const ColMatrix& mx, const std::vector<std::int32_t>& labels, std::int32_t k,
              const std::size_t* r, std::size_t count, std::size_t ml,
              const std::vector<std::int32_t>& counts) {
        X = &mx;
        y = &labels;
        n_classes = k;
        rows = r;
        n = count;
        min_leaf = ml;
        node_counts = &counts;
        total_sq = 0;
        for (std::int32_t c : counts) total_sq += std::int64_t(c) * c;
    }

    /// Offers one (threshold, left-state) cut to the running best.
    static void offer(detail::SplitChoice& best, std::size_t feature, double threshold,
                      double objective) {
        if (!best.found || objective > best.objective ||
            (objective == best.objective &&
             (feature < best.feature || (feature == best.feature && threshold < best.threshold)))) {
            best.found = true;
            best.feature = feature;
            best.threshold = threshold;
            best.objective = objective;
        }
    }

    static double midpoint(double lo, double hi) {
        const double mid = lo + (hi - lo) / 2.0;
        // Adjacent representables can round the midpoint up to hi; the
        // routing rule (<= goes left) then needs the lower value.
        return mid < hi ? mid : lo;
    }

    void scan_sorted(std::size_t feature, detail::SplitChoice& best) {
        const double* col = X->col(feature);
        sorted.resize(n);
        for (std::size_t i = 0; i < n; ++i)
            sorted[i] = {col[rows[i]], (*y)[rows[i]]};
        std::sort(sorted.begin(), sorted.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
        if (sorted.front().first == sorted.back().first) return;

        left.assign(static_cast<std::size_t>(n_classes), 0);
        std::int64_t sum_l = 0;
        std::int64_t sum_r = total_sq;
        std::vector<std::int32_t> right(*node_counts);
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const auto cls = static_cast<std::size_t>(sorted[i].second);
            sum_l += 2 * std::int64_t(left[cls]) + 1;
            sum_r -= 2 * std::int64_t(right[cls]) - 1;
            ++left[cls];
            --right[cls];
            if (sorted[i + 1].first == sorted[i].first) continue;
            const std::size_t n_l = i + 1;
            const std::size_t n_r = n - n_l;
            if (n_l < min_leaf || n_r < min_leaf) continue;
            const double objective = static_cast<double>(sum_l) / static_cast<double>(n_l) +
                                     static_cast<double>(sum_r) / static_cast<double>(n_r);
            offer(best, feature, midpoint(sorted[i].first, sorted[i + 1].first), objective);
        }
    }

    void scan_buckets(std::size_t feature, const std::vector<double>& table,
                      detail::SplitChoice& best) {
        const double* col = X->col(feature);
        const std::size_t k = static_cast<std::size_t>(n_classes);
        bucket_counts.assign(table.size() * k, 0);
        seen_buckets.assign(table.size(), 0);
        for (std::size_t i = 0; i < n; ++i) {
            const double v = col[rows[i]];
            const auto b = static_cast<std::size_t>(
                std::lower_bound(table.begin(), table.end(), v) - table.begin());
            ++bucket_counts[b * k + static_cast<std::size_t>((*y)[rows[i]])];
            seen_buckets[b] = 1;
        }

        left.assign(k, 0);
        std::vector<std::int32_t> right(*node_counts);
        std::int64_t sum_l = 0;
        std::int64_t sum_r = total_sq;
        std::size_t n_l = 0;
        // Last non-empty bucket contributes no cut; find it to know where
        // thresholds stop.
        std::size_t last = table.size();
        for (std::size_t b = table.size(); b-- > 0;)
            if (seen_buckets[b]) {
                last = b;
                break;
            }
        for (std::size_t b = 0; b < last; ++b) {
            if (!seen_buckets[b]) continue;
            const std::int32_t* bc = bucket_counts.data() + b * k;
            for (std::size_t c = 0; c < k; ++c) {
                if (!bc[c]) continue;
                sum_l += std::int64_t(bc[c]) * (2 * std::int64_t(left[c]) + bc[c]);
                sum_r -= std::int64_t(bc[c]) * (2 * std::int64_t(right[c]) - bc[c]);
                left[c] += bc[c];
                right[c] -= bc[c];
                n_l += static_cast<std::size_t>(bc[c]);
            }
            const std::size_t n_r = n - n_l;
            if (n_l < min_leaf || n_r < min_leaf) continue;
            std::size_t nxt = b + 1;
            while (!seen_buckets[nxt]) ++nxt;
            const double objective = static_cast<double>(sum_l) / static_cast<double>(n_l) +
                                     static_cast<double>(sum_r) / static_cast<double>(n_r);
            offer(best, feature, midpoint(table[b], table[nxt]), objective);
        }
    }

    /// Evaluates one candidate feature into best. Returns false when the
    /// feature is constant over the node.
    bool scan(std::size_t feature, const FeatureQuant* quant, detail::SplitChoice& best) {
        const std::vector<double>* table = nullptr;
        if (quant && !quant->tables[feature].empty()) table = &quant->tables[feature];
        detail::SplitChoice before = best;
        if (table && n >= kBucketMinRows)
            scan_buckets(feature, *table, best);
        else
            scan_sorted(feature, best);
        if (best.found && (!before.found || best.objective != before.objective ||
                           best.feature != before.feature || best.threshold != before.threshold))
            return true;
        // No change can also mean the feature offered equal-or-worse cuts;
        // distinguish constants by a direct range check.
        const double* col = X->col(feature);
        const double first = col[rows[0]];
        for (std::size_t i = 1; i < n; ++i)
            if (col[rows[i]] != first) return true;
        return false;
    }
};

class TreeBuilder {
public:
    TreeBuilder(const ColMatrix& X, const std::vector<std::int32_t>& y, std::int32_t n_classes,
                ForestKind kind, const TreeOptions& opts, const FeatureQuant* quant,
                std::uint64_t seed)
        : X_(X), y_(y), n_classes_(n_classes), kind_(kind), opts_(opts), quant_(quant), rng_(seed) {
        perm_.resize(X.cols());
        std::iota(perm_.begin(), perm_.end(), std::size_t{0});
        n_candidates_ = opts.n_candidates
                            ? opts.n_candidates
                            : static_cast<std::size_t>(
                                  std::ceil(std::sqrt(static_cast<double>(X.cols()))));
    }

    Tree build(std::vector<std::size_t> rows) {
        rows_ = std::move(rows);
        scratch_.resize(rows_.size());
        tree_ = Tree{};
        tree_.nodes.reserve(rows_.size() > 64 ? rows_.size() / 2 : 16);

        tree_.nodes.emplace_back();
        std::vector<NodeRange> stack{{0, 0, rows_.size()}};
        while (!stack.empty()) {
            const NodeRange item = stack.back();
            stack.pop_back();
            process(item, stack);
        }
        return std::move(tree_);
    }

private:
    void make_leaf(std::size_t node, const std::vector<std::int32_t>& counts, std::size_t n) {
        TreeNode& leaf = tree_.nodes[node];
        leaf.feature = -1;
        leaf.count = static_cast<std::int32_t>(n);
        std::int32_t pure_class = -1;
        for (std::size_t c = 0; c < counts.size(); ++c) {
            if (counts[c] == static_cast<std::int32_t>(n)) {
                pure_class = static_cast<std::int32_t>(c);
                break;
            }
        }
        if (pure_class >= 0) {
            leaf.left = pure_class;
        } else {
            leaf.left = -static_cast<std::int32_t>(tree_.mixed_counts.size()) - 1;
            tree_.mixed_counts.insert(tree_.mixed_counts.end(), counts.begin(), counts.end());
        }
    }

    /// Draws the i-th element of a gradually materialized random feature
    /// permutation.
    std::size_t draw_feature(std::size_t i) {
        const std::size_t j = i + rng_.next_below(perm_.size() - i);
        std::swap(perm_[i], perm_[j]);
        return perm_[i];
    }

    bool choose_split(std::size_t begin, std::size_t end,
                      const std::vector<std::int32_t>& counts, detail::SplitChoice& best) {
        const std::size_t n = end - begin;
        scan_.bind(X_, y_, n_classes_, rows_.data() + begin, n, opts_.min_leaf, counts);
        if (kind_ == ForestKind::random) {
            // Sample the candidate set; when every candidate is constant,
            // keep drawing fresh features so a splittable node never
            // degrades into a mixed leaf.
            std::size_t usable = 0;
            for (std::size_t i = 0; i < perm_.size(); ++i) {
                if (i >= n_candidates_ && (usable > 0 || best.found)) break;
                if (scan_.scan(draw_feature(i), quant_, best)) ++usable;
            }
            return best.found;
        }
        // Completely random: uniformly pick a feature with spread, then a
        // uniform threshold over its node range. Labels are never read.
        for (std::size_t i = 0; i < perm_.size(); ++i) {
            const std::size_t f = draw_feature(i);
            const double* col = X_.col(f);
            double lo = col[rows_[begin]];
            double hi = lo;
            for (std::size_t r = begin + 1; r < end; ++r) {
                const double v = col[rows_[r]];
                lo = std::min(lo, v);
                hi = std::max(hi, v);
            }
            if (lo < hi) {
                best.found = true;
                best.feature = f;
                best.threshold = rng_.next_real(lo, hi);
                return true;
            }
        }
        return false;
    }

    void process(const NodeRange& item, std::vector<NodeRange>& stack) {
        const std::size_t n = item.end - item.begin;
        std::vector<std::int32_t> counts(static_cast<std::size_t>(n_classes_), 0);
        for (std::size_t i = item.begin; i < item.end; ++i)
            ++counts[static_cast<std::size_t>(y_[rows_[i]])];

        bool pure = false;
        for (std::int32_t c : counts)
            if (c == static_cast<std::int32_t>(n)) pure = true;
        if (pure || n < 2 || n < 2 * opts_.min_leaf) {
            make_leaf(item.node, counts, n);
            return;
        }

        detail::SplitChoice best;
        if (!choose_split(item.begin, item.end, counts, best)) {
            make_leaf(item.node, counts, n);
            return;
        }

        // Stable partition through scratch keeps within-side order
        // deterministic.
        const double* col = X_.col(best.feature);
        std::size_t n_left = 0;
        std::size_t tail = n;
        for (std::size_t i = item.begin; i < item.end; ++i) {
            if (col[rows_[i]] <= best.threshold)
                scratch_[n_left++] = rows_[i];
            else
                scratch_[--tail] = rows_[i];
        }
        std::copy(scratch_.begin(), scratch_.begin() + n_left, rows_.begin() + item.begin);
        for (std::size_t i = 0; i < n - n_left; ++i)
            rows_[item.begin + n_left + i] = scratch_[n - 1 - i];

        const auto left_idx = static_cast<std::int32_t>(tree_.nodes.size());
        tree_.nodes[item.node].feature = static_cast<std::int32_t>(best.feature);
        tree_.nodes[item.node].threshold = best.threshold;
        tree_.nodes[item.node].left = left_idx;
        tree_.nodes[item.node].count = static_cast<std::int32_t>(n);
        tree_.nodes.emplace_back();
        tree_.nodes.emplace_back();
        const std::size_t mid = item.begin + n_left;
        stack.push_back({static_cast<std::size_t>(left_idx) + 1, mid, item.end});
        stack.push_back({static_cast<std::size_t>(left_idx), item.begin, mid});
    }

    const ColMatrix& X_;
    const std::vector<std::int32_t>& y_;
    std::int32_t n_classes_;
    ForestKind kind_;
    TreeOptions opts_;
    const FeatureQuant* quant_;
    Rng rng_;
    std::size_t n_candidates_ = 0;
    std::vector<std::size_t> perm_;
    std::vector<std::size_t> rows_;
    std::vector<std::size_t> scratch_;
    SplitScan scan_;
    Tree tree_;
};

std::vector<std::size_t> all_rows(std::size_t n) {
    std::vector<std::size_t> rows(n);
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    return rows;
}

} // namespace

void Tree::accumulate(const double* x, double* acc, std::size_t n_classes) const {
    const TreeNode& leaf = nodes[leaf_for(x)];
    if (leaf.left >= 0) {
        acc[static_cast<std::size_t>(leaf.left)] += 1.0;
        return;
    }
    const auto offset = static_cast<std::size_t>(-leaf.left - 1);
    const double total = static_cast<double>(leaf.count);
    for (std::size_t c = 0; c < n_classes; ++c)
        acc[c] += static_cast<double>(mixed_counts[offset + c]) / total;
}

FoldPlan make_fold_plan(std::size_t n_instances, std::size_t k, std::uint64_t seed) {
    if (k < 2) fail(Errc::FoldCountTooSmall, "fold plan needs k >= 2");
    if (k > n_instances) fail(Errc::FoldCountTooSmall, "more folds than instances");
    std::vector<std::size_t> idx = all_rows(n_instances);
    Rng rng(mix_seed(seed, 0x0f1dULL));
    for (std::size_t i = n_instances; i > 1; --i)
        std::swap(idx[i - 1], idx[rng.next_below(i)]);
    FoldPlan plan;
    plan.k = k;
    plan.fold_of.resize(n_instances);
    for (std::size_t i = 0; i < n_instances; ++i)
        plan.fold_of[idx[i]] = static_cast<std::int32_t>(i % k);
    return plan;
}

FeatureQuant quantize_features(const ColMatrix& X) {
    FeatureQuant q;
    q.tables.resize(X.cols());
    std::vector<double> vals;
    for (std::size_t f = 0; f < X.cols(); ++f) {
        vals.assign(X.col(f), X.col(f) + X.rows());
        std::sort(vals.begin(), vals.end());
        vals.erase(std::unique(vals.begin(), vals.end()), vals.end());
        if (vals.size() <= kMaxQuantLevels && vals.size() >= 2) q.tables[f] = vals;
    }
    return q;
}

ForestModel train_forest_rows(const ColMatrix& X, const std::vector<std::int32_t>& y,
                              std::int32_t n_classes, const std::vector<std::size_t>& rows,
                              ForestKind kind, std::size_t n_trees, std::uint64_t seed,
                              const TreeOptions& opts, const FeatureQuant* quant) {
    if (rows.empty() || X.rows() == 0 || X.cols() == 0)
        fail(Errc::EmptyDataset, "cannot train a forest on no data");
    if (n_trees == 0) fail(Errc::OutOfRange, "n_trees must be >= 1");

    ForestModel model;
    model.kind = kind;
    model.n_classes = n_classes;
    model.n_features = X.cols();
    model.seed = seed;
    model.trees.resize(n_trees);

    parallel_for(n_trees, [&](std::size_t t) {
        const std::uint64_t tree_seed = mix_seed(seed, t);
        TreeBuilder builder(X, y, n_classes, kind, opts, quant, tree_seed);
        std::vector<std::size_t> tree_rows;
        if (kind == ForestKind::random) {
            Rng boot(mix_seed(tree_seed, 0xb007ULL));
            tree_rows.resize(rows.size());
            for (std::size_t i = 0; i < rows.size(); ++i)
                tree_rows[i] = rows[boot.next_below(rows.size())];
            std::sort(tree_rows.begin(), tree_rows.end());
        } else {
            tree_rows = rows;
        }
        model.trees[t] = builder.build(std::move(tree_rows));
    });
    return model;
}

ForestModel train_forest(const Dataset& d, ForestKind kind, std::size_t n_trees,
                         std::uint64_t seed, const TreeOptions& opts) {
    if (d.n_instances() == 0) fail(Errc::EmptyDataset, "cannot train a forest on no data");
    const ColMatrix X(d.features);
    const FeatureQuant quant = quantize_features(X);
    return train_forest_rows(X, d.labels, d.n_classes, all_rows(d.n_instances()), kind, n_trees,
                             seed, opts, &quant);
}

ClassDistribution predict_distribution(const ForestModel& f, const double* x, std::size_t len) {
    if (len != f.n_features) fail(Errc::DimensionMismatch, "input width differs from training width");
    ClassDistribution out(static_cast<std::size_t>(f.n_classes), 0.0);
    for (const Tree& t : f.trees) t.accumulate(x, out.data(), out.size());
    const double inv = 1.0 / static_cast<double>(f.trees.size());
    for (double& v : out) v *= inv;
    return out;
}

ClassDistribution predict_distribution(const ForestModel& f, const std::vector<double>& x) {
    return predict_distribution(f, x.data(), x.size());
}

Matrix predict_matrix(const ForestModel& f, const Matrix& X) {
    if (X.cols() != f.n_features)
        fail(Errc::DimensionMismatch, "input width differs from training width");
    Matrix out(X.rows(), static_cast<std::size_t>(f.n_classes));
    parallel_for(X.rows(), [&](std::size_t i) {
        ClassDistribution dist = predict_distribution(f, X.row(i), X.cols());
        std::copy(dist.begin(), dist.end(), out.row(i));
    });
    return out;
}

CvForest train_cv_forest(const ColMatrix& X, const std::vector<std::int32_t>& y,
                         std::int32_t n_classes, const std::vector<std::size_t>& rows,
                         ForestKind kind, std::size_t n_trees, const FoldPlan& plan,
                         std::uint64_t seed, const TreeOptions& opts, const FeatureQuant* quant) {
    if (plan.k < 2) fail(Errc::FoldCountTooSmall, "out-of-fold vectors need k >= 2");
    if (plan.fold_of.size() != rows.size())
        fail(Errc::CountMismatch, "fold plan does not cover the training rows");

    CvForest cv;
    cv.kind = kind;
    cv.n_classes = n_classes;
    cv.fold_models.resize(plan.k);
    cv.oof = Matrix(rows.size(), static_cast<std::size_t>(n_classes));

    std::vector<double> x(X.cols());
    for (std::size_t fold = 0; fold < plan.k; ++fold) {
        std::vector<std::size_t> train_rows;
        train_rows.reserve(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i)
            if (plan.fold_of[i] != static_cast<std::int32_t>(fold)) train_rows.push_back(rows[i]);
        cv.fold_models[fold] = train_forest_rows(X, y, n_classes, train_rows, kind, n_trees,
                                                 mix_seed(seed, fold), opts, quant);
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (plan.fold_of[i] != static_cast<std::int32_t>(fold)) continue;
            for (std::size_t c = 0; c < X.cols(); ++c) x[c] = X.at(rows[i], c);
            ClassDistribution dist = predict_distribution(cv.fold_models[fold], x.data(), x.size());
            std::copy(dist.begin(), dist.end(), cv.oof.row(i));
        }
    }
    return cv;
}

ClassDistribution cv_predict(const CvForest& f, const double* x, std::size_t len) {
    ClassDistribution out(static_cast<std::size_t>(f.n_classes), 0.0);
    for (const ForestModel& m : f.fold_models) {
        ClassDistribution dist = predict_distribution(m, x, len);
        for (std::size_t c = 0; c < out.size(); ++c) out[c] += dist[c];
    }
    const double inv = 1.0 / static_cast<double>(f.fold_models.size());
    for (double& v : out) v *= inv;
    return out;
}

Matrix oof_class_vectors(const Dataset& d, ForestKind kind, std::size_t n_trees,
                         const FoldPlan& plan, std::uint64_t seed) {
    if (plan.fold_of.size() != d.n_instances())
        fail(Errc::CountMismatch, "fold plan does not cover the dataset");
    const ColMatrix X(d.features);
    const FeatureQuant quant = quantize_features(X);
    CvForest cv = train_cv_forest(X, d.labels, d.n_classes, all_rows(d.n_instances()), kind,
                                  n_trees, plan, seed, TreeOptions{}, &quant);
    return std::move(cv.oof);
}

namespace detail {

SplitChoice best_split(const ColMatrix& X, const std::vector<std::int32_t>& y,
                       std::int32_t n_classes, const std::vector<std::size_t>& rows,
                       const std::vector<std::size_t>& candidate_features, std::size_t min_leaf,
                       const FeatureQuant* quant) {
    std::vector<std::int32_t> counts(static_cast<std::size_t>(n_classes), 0);
    for (std::size_t r : rows) ++counts[static_cast<std::size_t>(y[r])];
    SplitScan scan;
    scan.bind(X, y, n_classes, rows.data(), rows.size(), min_leaf, counts);
    SplitChoice best;
    for (std::size_t f : candidate_features) scan.scan(f, quant, best);
    return best;
}

} // namespace detail

} // namespace hwforest
