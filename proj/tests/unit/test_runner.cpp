#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "hwforest/cascade.hpp"
#include "hwforest/config.hpp"
#include "hwforest/dataset.hpp"
#include "hwforest/errors.hpp"
#include "hwforest/evalstats.hpp"
#include "hwforest/runner.hpp"
#include "support/generators.hpp"
#include "support/properties.hpp"

using hwforest::ConfigMap;
using hwforest::Dataset;
using hwforest::Errc;
using hwforest::RunSettings;
using hwforest::ScreeningKind;
using testsupport::code_of;

namespace {

void check_suite(const testsupport::SuiteResult& r) {
    INFO("suite '" << r.name << "' first failure: " << r.first_failure);
    CHECK(r.failures == 0);
    CHECK(r.cases > 0);
}

std::string write_text(const std::filesystem::path& path, const std::string& body) {
    std::ofstream out(path);
    out << body;
    return path.string();
}

/// Tiny csv training file plus the config lines that point a run at it.
struct TinyRun {
    std::filesystem::path dir;
    std::string train_csv;
    std::string test_csv;

    explicit TinyRun(const char* tag, std::uint64_t seed) : dir(testsupport::fresh_tmp_dir(tag)) {
        testsupport::Rng rng(0x5eed + seed);
        const Dataset d = testsupport::blob_dataset(rng, 80, 3, 2, 0.5);
        const auto [train, test] = hwforest::split(d, hwforest::SplitSpec{0.75, seed, true});
        train_csv = (dir / "train.csv").string();
        test_csv = (dir / "test.csv").string();
        hwforest::save_csv(train, train_csv);
        hwforest::save_csv(test, test_csv);
    }
    ~TinyRun() { std::filesystem::remove_all(dir); }

    std::string base_config() const {
        return "data.format = csv\n"
               "data.train = " + train_csv + "\n"
               "data.test = " + test_csv + "\n"
               "trees = 4\n"
               "folds = 2\n"
               "max_levels = 2\n"
               "out = " + (dir / "out").string() + "\n";
    }
};

} // namespace

TEST_CASE("label alignment remaps spellings into the model's space") {
    const std::vector<std::string> model_names{"a", "b", "c"};

    Dataset d;
    d.features = hwforest::Matrix(4, 1);
    d.labels = {0, 1, 0, 1};
    d.n_classes = 2;
    d.label_names = {"c", "a"};
    hwforest::align_labels(d, model_names, 3);
    CHECK(d.labels == std::vector<std::int32_t>{2, 0, 2, 0});
    CHECK(d.label_names == model_names);
    CHECK(d.n_classes == 3);

    Dataset unseen = d;
    unseen.label_names = {"a", "z"};
    unseen.labels = {0, 1};
    CHECK(code_of([&] { hwforest::align_labels(unseen, model_names, 3); }) ==
          Errc::OutOfRange);
}

TEST_CASE("label alignment parses bare class ids for unnamed models") {
    Dataset d;
    d.features = hwforest::Matrix(3, 1);
    d.labels = {0, 1, 1};
    d.n_classes = 2;
    d.label_names = {"1", "0"};
    hwforest::align_labels(d, {}, 3);
    CHECK(d.labels == std::vector<std::int32_t>{1, 0, 0});
    CHECK(d.label_names.empty());
    CHECK(d.n_classes == 3);

    for (const char* bad : {"7", "x", "1.5", "-1"}) {
        Dataset probe;
        probe.features = hwforest::Matrix(1, 1);
        probe.labels = {0};
        probe.n_classes = 1;
        probe.label_names = {bad};
        INFO("label spelling '" << bad << "'");
        CHECK(code_of([&] { hwforest::align_labels(probe, {}, 3); }) == Errc::OutOfRange);
    }

    // Bare integer labels adopt the model's class count, but only downward.
    Dataset bare;
    bare.features = hwforest::Matrix(2, 1);
    bare.labels = {0, 1};
    bare.n_classes = 2;
    hwforest::align_labels(bare, {}, 5);
    CHECK(bare.n_classes == 5);
    bare.n_classes = 7;
    CHECK(code_of([&] { hwforest::align_labels(bare, {}, 5); }) == Errc::OutOfRange);
    CHECK(code_of([&] { hwforest::align_labels(bare, {"a"}, 5); }) == Errc::OutOfRange);
}

TEST_CASE("preset defaults resolve and explicit keys override them") {
    const RunSettings paper = hwforest::resolve_settings(ConfigMap::from_string(""));
    CHECK(paper.preset == "paper");
    CHECK(paper.cascade.trees_per_forest == 50);
    CHECK(paper.cascade.cv_folds == 5);
    CHECK(paper.cascade.max_levels == 20);
    CHECK(paper.cascade.screening == ScreeningKind::window);
    CHECK(paper.cascade.binning_bins == 100);
    CHECK(paper.cascade.error_shrink == 2.0);
    CHECK(paper.cascade.validation_fraction == 0.2);
    REQUIRE(paper.cascade.grains.size() == 3);
    CHECK(paper.cascade.grains[0].window == 4);
    CHECK(paper.cascade.grains[1].window == 6);
    CHECK(paper.cascade.grains[2].window == 8);
    CHECK(paper.cascade.grains[0].n_trees_per_forest == 30);
    CHECK(paper.cascade.grains[0].patch_subsample == 1.0);
    CHECK(paper.out_dir == "runs/latest");

    const RunSettings desk =
        hwforest::resolve_settings(ConfigMap::from_string("preset = desk\n"));
    CHECK(desk.cascade.trees_per_forest == 30);
    CHECK(desk.cascade.cv_folds == 3);
    CHECK(desk.cascade.grains[0].n_trees_per_forest == 20);
    CHECK(desk.cascade.grains[0].patch_subsample == 0.25);

    const RunSettings mixed = hwforest::resolve_settings(ConfigMap::from_string(
        "preset = desk\n"
        "trees = 77\n"
        "grains = [2, 3]\n"
        "screening = binning\n"
        "scan.subsample = 0.5\n"
        "seed = 9\n"));
    CHECK(mixed.cascade.trees_per_forest == 77);
    REQUIRE(mixed.cascade.grains.size() == 2);
    CHECK(mixed.cascade.grains[0].window == 2);
    CHECK(mixed.cascade.grains[1].window == 3);
    CHECK(mixed.cascade.grains[0].patch_subsample == 0.5);
    CHECK(mixed.cascade.screening == ScreeningKind::binning);
    CHECK(mixed.cascade.seed == 9);
    CHECK(mixed.seed == 9);

    const auto prov = mixed.provenance();
    CHECK(prov.at("preset") == "desk");
    CHECK(prov.at("trees") == "77");
    CHECK(prov.at("screening") == "binning");
    CHECK(prov.at("grains") == "2,3");
}

TEST_CASE("settings resolution rejects invalid combinations") {
    auto resolve = [](const std::string& text) {
        return code_of([&] { hwforest::resolve_settings(ConfigMap::from_string(text)); });
    };
    CHECK(resolve("preset = verbose\n") == Errc::BadConfig);
    CHECK(resolve("screening = fastest\n") == Errc::BadConfig);
    CHECK(resolve("data.format = xml\n") == Errc::BadConfig);
    CHECK(resolve("subsample = 0\n") == Errc::BadConfig);
    CHECK(resolve("subsample = 1.5\n") == Errc::BadConfig);
    CHECK(resolve("scan.subsample = 0\n") == Errc::BadConfig);
    CHECK(resolve("data.format = idx\ndata.train_rows = 5\n") == Errc::BadConfig);
    CHECK(resolve("data.format = csv\ndata.train_rows = 5\ndata.test = t.csv\n") ==
          Errc::BadConfig);
}

TEST_CASE("stats command ranks a labeled accuracy table") {
    const auto dir = testsupport::fresh_tmp_dir("stats");
    const auto input = write_text(dir / "acc.csv",
                                  "dataset,alpha,beta\n"
                                  "d1,0.9,0.8\n"
                                  "d2,0.7,0.6\n"
                                  "d3,0.5,0.55\n");

    ConfigMap cfg;
    cfg.set("stats.input", input);
    cfg.set("out", (dir / "out").string());
    const auto out = hwforest::run_stats(cfg);

    CHECK(out.models == std::vector<std::string>{"alpha", "beta"});
    CHECK(out.datasets == std::vector<std::string>{"d1", "d2", "d3"});
    REQUIRE(out.ranks.mean_ranks.size() == 2);
    // alpha wins d1 and d2, loses d3: ranks (1,1,2) and (2,2,1).
    CHECK(out.ranks.mean_ranks[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(out.ranks.mean_ranks[1] == doctest::Approx(5.0 / 3.0).epsilon(1e-12));
    CHECK(out.ranks.n_datasets == 3);
    CHECK(out.friedman_statistic == hwforest::friedman(out.ranks));
    CHECK(out.q_alpha == hwforest::kQCritical010K7);
    CHECK(out.critical_difference ==
          hwforest::nemenyi_cd(2, 3, hwforest::kQCritical010K7));
    CHECK(std::filesystem::exists(out.report_file));
    CHECK(testsupport::slurp(out.report_file).find("mean_rank") != std::string::npos);

    std::filesystem::remove_all(dir);
}

TEST_CASE("stats command accepts bare numeric tables and custom q") {
    const auto dir = testsupport::fresh_tmp_dir("statsbare");
    const auto input = write_text(dir / "bare.csv", "0.9,0.8\n0.7,0.6\n0.5,0.55\n");

    ConfigMap cfg;
    cfg.set("stats.input", input);
    cfg.set("stats.q_alpha", "3.0");
    cfg.set("out", (dir / "out").string());
    const auto out = hwforest::run_stats(cfg);

    CHECK(out.models == std::vector<std::string>{"model1", "model2"});
    CHECK(out.datasets.size() == 3);
    CHECK(out.ranks.mean_ranks[0] == doctest::Approx(4.0 / 3.0).epsilon(1e-12));
    CHECK(out.q_alpha == 3.0);
    CHECK(out.critical_difference == hwforest::nemenyi_cd(2, 3, 3.0));

    std::filesystem::remove_all(dir);
}

TEST_CASE("stats command rejects unusable tables") {
    const auto dir = testsupport::fresh_tmp_dir("statsbad");

    ConfigMap missing;
    missing.set("out", (dir / "out").string());
    CHECK(code_of([&] { hwforest::run_stats(missing); }) == Errc::BadConfig);

    ConfigMap absent;
    absent.set("stats.input", (dir / "absent.csv").string());
    absent.set("out", (dir / "out").string());
    CHECK(code_of([&] { hwforest::run_stats(absent); }) == Errc::Io);

    ConfigMap ragged;
    ragged.set("stats.input", write_text(dir / "ragged.csv", "0.9,0.8\n0.7\n"));
    ragged.set("out", (dir / "out").string());
    CHECK(code_of([&] { hwforest::run_stats(ragged); }) == Errc::RaggedRow);

    ConfigMap alpha;
    alpha.set("stats.input",
              write_text(dir / "alpha.csv", "dataset,m1,m2\nd1,0.9,oops\nd2,0.7,0.6\n"));
    alpha.set("out", (dir / "out").string());
    CHECK(code_of([&] { hwforest::run_stats(alpha); }) == Errc::NonNumericCell);

    ConfigMap extra;
    extra.set("stats.input", write_text(dir / "ok.csv", "0.9,0.8\n0.7,0.6\n"));
    extra.set("out", (dir / "out").string());
    extra.set("statz.q", "1");
    CHECK(code_of([&] { hwforest::run_stats(extra); }) == Errc::BadConfig);

    std::filesystem::remove_all(dir);
}

TEST_CASE("train writes artifacts that eval reproduces") {
    const TinyRun run("trainer", 31);
    const ConfigMap cfg = ConfigMap::from_string(run.base_config() + "seed = 31\n");

    const auto trained = hwforest::run_train(cfg);
    CHECK(std::filesystem::exists(trained.model_file));
    CHECK(std::filesystem::exists(trained.report_file));
    CHECK(trained.resolved.at("trees") == "4");
    CHECK(!trained.model.levels.empty());

    // The reported accuracy is the model's accuracy over the loaded test set.
    RunSettings rs = hwforest::resolve_settings(cfg);
    const auto data = hwforest::load_data(rs);
    REQUIRE(data.test.has_value());
    const auto eval = hwforest::evaluate(trained.model, *data.test);
    CHECK(trained.report.accuracy == eval.accuracy);
    CHECK(trained.report.test_exit_counts == eval.exit_counts);

    ConfigMap eval_cfg = ConfigMap::from_string(run.base_config() + "seed = 31\n");
    eval_cfg.set("model", trained.model_file);
    eval_cfg.set("out", (run.dir / "eval_out").string());
    const auto scored = hwforest::run_eval(eval_cfg);
    CHECK(scored.report.accuracy == eval.accuracy);
    CHECK(std::filesystem::exists(scored.report_file));

    ConfigMap unknown = ConfigMap::from_string(run.base_config() + "treez = 9\n");
    CHECK(code_of([&] { hwforest::run_train(unknown); }) == Errc::BadConfig);

    ConfigMap gone = ConfigMap::from_string(run.base_config());
    gone.set("data.train", (run.dir / "absent.csv").string());
    CHECK(code_of([&] { hwforest::run_train(gone); }) == Errc::Io);
}

TEST_CASE("bench arms with identical configs tie exactly on accuracy") {
    const TinyRun run("bench", 37);
    const ConfigMap cfg = ConfigMap::from_string(run.base_config() +
                                                 "seed = 37\n"
                                                 "bench.folds = 3\n"
                                                 "bench.arms = base, mirror\n");

    const auto out = hwforest::run_bench(cfg);
    CHECK(out.folds == 3);
    REQUIRE(out.arms.size() == 2);
    CHECK(out.arms[0].name == "base");
    CHECK(out.arms[1].name == "mirror");
    CHECK(out.arms[0].fold_accuracy.size() == 3);
    CHECK(out.arms[0].fold_accuracy == out.arms[1].fold_accuracy);
    CHECK(out.arms[0].fold_retained == out.arms[1].fold_retained);

    REQUIRE(out.comparisons.size() == 1);
    const auto& cmp = out.comparisons[0];
    CHECK(cmp.arm == "mirror");
    CHECK(cmp.accuracy_delta == 0.0);
    CHECK(cmp.accuracy_zero_variance);
    CHECK(!cmp.accuracy_t.has_value());

    CHECK(std::filesystem::exists(out.summary_file));
    REQUIRE(out.arm_files.size() == 2);
    for (const auto& f : out.arm_files) CHECK(std::filesystem::exists(f));

    ConfigMap bad_arm = ConfigMap::from_string(run.base_config() +
                                               "bench.arms = base, other\n"
                                               "arm.other.speed = high\n");
    CHECK(code_of([&] { hwforest::run_bench(bad_arm); }) == Errc::BadConfig);

    ConfigMap lonely = ConfigMap::from_string(run.base_config() + "bench.arms = base\n");
    CHECK(code_of([&] { hwforest::run_bench(lonely); }) == Errc::BadConfig);
}

TEST_CASE("screening arms differ in retirement but not in totals") {
    const TinyRun run("arms", 41);
    const ConfigMap window_cfg =
        ConfigMap::from_string(run.base_config() + "seed = 41\nscreening = window\n");
    const ConfigMap none_cfg =
        ConfigMap::from_string(run.base_config() + "seed = 41\nscreening = none\n");

    const auto with_window = hwforest::run_train(window_cfg);
    const auto without = hwforest::run_train(none_cfg);

    for (const auto& level : without.model.levels) CHECK(level.n_retired == 0);
    std::size_t window_total = 0;
    for (const auto& level : with_window.model.levels)
        if (&level == &with_window.model.levels.front()) window_total = level.n_entering;
    CHECK(window_total == without.model.levels.front().n_entering);

    check_suite(testsupport::suite_run_reports_reproducible());
}
