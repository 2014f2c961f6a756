#include <doctest.h>

#include <cmath>
#include <numeric>
#include <vector>

#include "hwforest/forest.hpp"
#include "support/properties.hpp"

using hwforest::ColMatrix;
using hwforest::Dataset;
using hwforest::Errc;
using hwforest::ForestKind;
using hwforest::Matrix;
using testsupport::code_of;

namespace {

void check_suite(const testsupport::SuiteResult& r) {
    INFO("suite '" << r.name << "' first failure: " << r.first_failure);
    CHECK(r.failures == 0);
    CHECK(r.cases > 0);
}

Dataset column_dataset(std::vector<double> values, std::vector<std::int32_t> labels,
                       std::int32_t k) {
    Dataset d;
    d.features = Matrix(values.size(), 1);
    for (std::size_t i = 0; i < values.size(); ++i) d.features.at(i, 0) = values[i];
    d.labels = std::move(labels);
    d.n_classes = k;
    return d;
}

} // namespace

TEST_CASE("best split on a two-value column") {
    const Dataset d = column_dataset({1.0, 1.0, 2.0, 2.0}, {0, 0, 1, 1}, 2);
    const ColMatrix X(d.features);
    const std::vector<std::size_t> rows{0, 1, 2, 3};
    const std::vector<std::size_t> cand{0};

    const auto cut = hwforest::detail::best_split(X, d.labels, 2, rows, cand, 1, nullptr);
    CHECK(cut.found);
    CHECK(cut.feature == 0);
    CHECK(cut.threshold == 1.5);
    // Both children pure pairs: 2^2/2 + 2^2/2.
    CHECK(cut.objective == 4.0);

    const auto starved = hwforest::detail::best_split(X, d.labels, 2, rows, cand, 3, nullptr);
    CHECK(!starved.found);
}

TEST_CASE("best split is infeasible on a constant column") {
    const Dataset d = column_dataset({0.7, 0.7, 0.7}, {0, 1, 0}, 2);
    const auto cut = hwforest::detail::best_split(ColMatrix(d.features), d.labels, 2, {0, 1, 2},
                                                  {0}, 1, nullptr);
    CHECK(!cut.found);
}

TEST_CASE("midpoints between adjacent representables collapse to the lower value") {
    const double lo = 1.0;
    const double hi = std::nextafter(lo, 2.0);
    const Dataset d = column_dataset({lo, hi}, {0, 1}, 2);
    const auto cut = hwforest::detail::best_split(ColMatrix(d.features), d.labels, 2, {0, 1},
                                                  {0}, 1, nullptr);
    CHECK(cut.found);
    // No double fits strictly between lo and hi, so the cut lands on lo and
    // routes lo left via the <= rule.
    CHECK(cut.threshold == lo);
}

TEST_CASE("every mixed bootstrap of the two-cluster column splits at the midpoint") {
    const Dataset d = column_dataset({1.0, 1.0, 2.0, 2.0}, {0, 0, 1, 1}, 2);
    const auto fm = hwforest::train_forest(d, ForestKind::random, 50, 42);
    REQUIRE(fm.trees.size() == 50);

    std::size_t internal_roots = 0;
    for (const auto& tree : fm.trees) {
        CHECK(tree.nodes[0].count == 4);
        if (tree.nodes[0].is_leaf()) continue; // single-class bootstrap
        ++internal_roots;
        CHECK(tree.nodes[0].feature == 0);
        CHECK(tree.nodes[0].threshold == 1.5);
    }
    CHECK(internal_roots > 25);

    const auto low = hwforest::predict_distribution(fm, std::vector<double>{1.0});
    const auto high = hwforest::predict_distribution(fm, std::vector<double>{2.0});
    CHECK(low[0] > 0.8);
    CHECK(high[1] > 0.8);
}

TEST_CASE("an unsplittable mixed node predicts its class frequencies") {
    const Dataset d = column_dataset({5.0, 5.0}, {0, 1}, 2);
    const auto fm = hwforest::train_forest(d, ForestKind::completely_random, 2, 9);
    const auto p = hwforest::predict_distribution(fm, std::vector<double>{5.0});
    CHECK(p == hwforest::ClassDistribution{0.5, 0.5});
}

TEST_CASE("single-class folds give one-hot out-of-fold vectors") {
    Dataset d = column_dataset({0.0, 1.0, 2.0, 3.0, 4.0, 5.0}, {0, 0, 0, 0, 0, 0}, 2);
    const ColMatrix X(d.features);
    std::vector<std::size_t> rows(d.n_instances());
    std::iota(rows.begin(), rows.end(), std::size_t{0});
    const auto plan = hwforest::make_fold_plan(d.n_instances(), 2, 3);
    const auto cv =
        hwforest::train_cv_forest(X, d.labels, 2, rows, ForestKind::random, 3, plan, 5, {}, nullptr);
    REQUIRE(cv.oof.rows() == 6);
    for (std::size_t i = 0; i < 6; ++i) {
        CHECK(cv.oof.at(i, 0) == 1.0);
        CHECK(cv.oof.at(i, 1) == 0.0);
    }
}

TEST_CASE("out-of-fold accuracy tracks a single in-sample tree on separable blobs") {
    testsupport::Rng rng(0xb10b);
    const Dataset d = testsupport::blob_dataset(rng, 100, 2, 2, 0.5);
    const ColMatrix X(d.features);
    std::vector<std::size_t> rows(d.n_instances());
    std::iota(rows.begin(), rows.end(), std::size_t{0});

    const auto plan = hwforest::make_fold_plan(d.n_instances(), 5, 17);
    const auto cv =
        hwforest::train_cv_forest(X, d.labels, 2, rows, ForestKind::random, 5, plan, 17, {}, nullptr);
    std::vector<std::int32_t> oof_pred(d.n_instances());
    for (std::size_t i = 0; i < d.n_instances(); ++i)
        oof_pred[i] = cv.oof.at(i, 0) >= cv.oof.at(i, 1) ? 0 : 1;
    const double oof_acc = hwforest::accuracy(oof_pred, d.labels);

    const auto single = hwforest::train_forest(d, ForestKind::random, 1, 17);
    std::vector<std::int32_t> tree_pred(d.n_instances());
    for (std::size_t i = 0; i < d.n_instances(); ++i) {
        const auto p = hwforest::predict_distribution(single, d.features.row(i), 2);
        tree_pred[i] = p[0] >= p[1] ? 0 : 1;
    }
    const double tree_acc = hwforest::accuracy(tree_pred, d.labels);

    CHECK(oof_acc >= tree_acc - 0.10);
}

TEST_CASE("fold plans balance fold sizes and reject bad counts") {
    const auto plan = hwforest::make_fold_plan(10, 3, 99);
    REQUIRE(plan.fold_of.size() == 10);
    CHECK(plan.k == 3);
    std::vector<std::size_t> sizes(3, 0);
    for (auto f : plan.fold_of) {
        REQUIRE(f >= 0);
        REQUIRE(f < 3);
        ++sizes[static_cast<std::size_t>(f)];
    }
    const auto [lo, hi] = std::minmax_element(sizes.begin(), sizes.end());
    CHECK(*hi - *lo <= 1);
    CHECK(plan.fold_of == hwforest::make_fold_plan(10, 3, 99).fold_of);
    CHECK(plan.fold_of != hwforest::make_fold_plan(10, 3, 100).fold_of);

    CHECK(code_of([] { hwforest::make_fold_plan(5, 1, 0); }) == Errc::FoldCountTooSmall);
    CHECK(code_of([] { hwforest::make_fold_plan(5, 6, 0); }) == Errc::FoldCountTooSmall);
}

TEST_CASE("training input validation") {
    Dataset empty;
    empty.n_classes = 2;
    CHECK(code_of([&] { hwforest::train_forest(empty, ForestKind::random, 3, 0); }) ==
          Errc::EmptyDataset);

    const Dataset d = column_dataset({1.0, 2.0}, {0, 1}, 2);
    CHECK(code_of([&] { hwforest::train_forest(d, ForestKind::random, 0, 0); }) ==
          Errc::OutOfRange);

    const auto fm = hwforest::train_forest(d, ForestKind::random, 1, 0);
    CHECK(code_of([&] {
              hwforest::predict_distribution(fm, std::vector<double>{1.0, 2.0, 3.0});
          }) == Errc::DimensionMismatch);
}

TEST_CASE("quantization tables exist only for low-cardinality features") {
    Matrix m(300, 2);
    for (std::size_t i = 0; i < 300; ++i) {
        m.at(i, 0) = static_cast<double>(i % 5);
        m.at(i, 1) = static_cast<double>(i);
    }
    const auto quant = hwforest::quantize_features(ColMatrix(m));
    REQUIRE(quant.tables.size() == 2);
    CHECK(quant.tables[0] == std::vector<double>{0.0, 1.0, 2.0, 3.0, 4.0});
    CHECK(quant.tables[1].empty());
}

TEST_CASE("batch prediction matches per-row prediction") {
    testsupport::Rng rng(0xba7c);
    const Dataset d = testsupport::random_dataset(rng, 20, 3, 3);
    const auto fm = hwforest::train_forest(d, ForestKind::random, 4, 7);
    const Matrix batch = hwforest::predict_matrix(fm, d.features);
    REQUIRE(batch.rows() == 20);
    for (std::size_t i = 0; i < 20; ++i) {
        const auto one = hwforest::predict_distribution(fm, d.features.row(i), 3);
        CHECK(std::equal(one.begin(), one.end(), batch.row(i)));
    }
}

TEST_CASE("randomized forest probability simplex") {
    check_suite(testsupport::suite_forest_simplex());
}

TEST_CASE("randomized worker-count independence") {
    check_suite(testsupport::suite_forest_worker_independence());
}

TEST_CASE("randomized label blindness of random-threshold trees") {
    check_suite(testsupport::suite_random_threshold_label_blindness());
}

TEST_CASE("randomized split search against exhaustive enumeration") {
    check_suite(testsupport::suite_split_search_oracle());
}
