#include "hwforest/runner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "hwforest/parallel.hpp"
#include "hwforest/report.hpp"
#include "hwforest/rng.hpp"
#include "hwforest/serialize.hpp"

namespace fs = std::filesystem;

namespace hwforest {

namespace {

/// Per-preset defaults; explicit config keys override each field.
struct PresetDefaults {
    std::size_t trees = 50;
    std::size_t folds = 5;
    std::size_t scan_trees = 30;
    double scan_subsample = 1.0;
    std::vector<std::uint64_t> grains{4, 6, 8};
};

PresetDefaults preset_defaults(const std::string& preset) {
    PresetDefaults d;
    if (preset == "paper") return d;
    if (preset == "desk") {
        d.trees = 30;
        d.folds = 3;
        d.scan_trees = 20;
        d.scan_subsample = 0.25;
        return d;
    }
    fail(Errc::BadConfig, "preset must be paper or desk, not '" + preset + "'");
}

std::string fmt(double v) { return nlohmann::json(v).dump(); }
std::string fmt(std::uint64_t v) { return std::to_string(v); }
std::string fmt_flag(bool v) { return v ? "on" : "off"; }

std::string screening_name(ScreeningKind k) {
    switch (k) {
        case ScreeningKind::window: return "window";
        case ScreeningKind::binning: return "binning";
        case ScreeningKind::none: return "none";
    }
    fail(Errc::BadConfig, "unrepresentable screening kind");
}

ScreeningKind parse_screening(const std::string& v) {
    if (v == "window") return ScreeningKind::window;
    if (v == "binning") return ScreeningKind::binning;
    if (v == "none") return ScreeningKind::none;
    fail(Errc::BadConfig, "screening must be window, binning, or none, not '" + v + "'");
}

bool parse_flag(const std::string& key, const std::string& v) {
    if (v == "on" || v == "true" || v == "1") return true;
    if (v == "off" || v == "false" || v == "0") return false;
    fail(Errc::BadConfig, "'" + key + "' must be on or off");
}

std::vector<std::string> split_list(const std::string& v) {
    std::vector<std::string> out;
    std::istringstream ss(v);
    std::string item;
    while (std::getline(ss, item, ',')) {
        const auto b = item.find_first_not_of(" \t");
        if (b == std::string::npos) continue;
        const auto e = item.find_last_not_of(" \t");
        out.push_back(item.substr(b, e - b + 1));
    }
    return out;
}

void require_file(const std::string& path) {
    if (!fs::exists(path)) fail(Errc::Io, "missing input file: " + path);
}

void check_fraction(const std::string& key, double v) {
    if (!(v > 0.0 && v <= 1.0))
        fail(Errc::BadConfig, "'" + key + "' must lie in (0, 1], got " + fmt(v));
}

std::string join_u64(const std::vector<std::uint64_t>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += std::to_string(v[i]);
    }
    return out;
}

bool parse_number(const std::string& cell, double& out) {
    if (cell.empty()) return false;
    char* end = nullptr;
    out = std::strtod(cell.c_str(), &end);
    return end != cell.c_str() && *end == '\0';
}

/// json.hpp renders non-finite numbers as null; reports spell them out.
nlohmann::ordered_json json_number(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

} // namespace

std::map<std::string, std::string> RunSettings::provenance() const {
    std::map<std::string, std::string> p;
    p["preset"] = preset;
    if (!data_format.empty()) p["data.format"] = data_format;
    if (!train_images.empty()) p["data.train_images"] = train_images;
    if (!train_labels.empty()) p["data.train_labels"] = train_labels;
    if (!test_images.empty()) p["data.test_images"] = test_images;
    if (!test_labels.empty()) p["data.test_labels"] = test_labels;
    if (!train_csv.empty()) p["data.train"] = train_csv;
    if (!test_csv.empty()) p["data.test"] = test_csv;
    if (data_format == "csv") p["data.label"] = label_column;
    if (head_train_rows > 0) p["data.train_rows"] = fmt(head_train_rows);
    for (const auto& [col, enc] : csv_options.encodings) p["encode." + col] = enc;
    p["subsample"] = fmt(train_subsample);
    p["test_subsample"] = fmt(test_subsample);
    p["seed"] = fmt(seed);
    p["threads"] = fmt(threads);
    p["out"] = out_dir;
    if (!model_path.empty()) p["model"] = model_path;

    std::vector<std::uint64_t> windows;
    for (const GrainConfig& g : cascade.grains) windows.push_back(g.window);
    p["grains"] = join_u64(windows);
    if (!cascade.grains.empty()) {
        const GrainConfig& g = cascade.grains.front();
        p["scan.stride"] = fmt(static_cast<std::uint64_t>(g.stride));
        p["scan.trees"] = fmt(static_cast<std::uint64_t>(g.n_trees_per_forest));
        p["scan.hash_screen"] = fmt_flag(g.hash_screen);
        p["scan.subsample"] = fmt(g.patch_subsample);
        p["scan.min_leaf"] = fmt(static_cast<std::uint64_t>(g.min_leaf));
    }
    p["forests.random"] = fmt(static_cast<std::uint64_t>(cascade.n_random_forests));
    p["forests.completely_random"] =
        fmt(static_cast<std::uint64_t>(cascade.n_completely_random_forests));
    p["trees"] = fmt(static_cast<std::uint64_t>(cascade.trees_per_forest));
    p["folds"] = fmt(static_cast<std::uint64_t>(cascade.cv_folds));
    p["max_levels"] = fmt(static_cast<std::uint64_t>(cascade.max_levels));
    p["screening"] = screening_name(cascade.screening);
    p["binning.bins"] = fmt(static_cast<std::uint64_t>(cascade.binning_bins));
    p["error_shrink"] = fmt(cascade.error_shrink);
    p["min_leaf"] = fmt(static_cast<std::uint64_t>(cascade.min_leaf));
    p["validation_fraction"] = fmt(cascade.validation_fraction);
    return p;
}

RunSettings resolve_settings(const ConfigMap& cfg) {
    RunSettings rs;
    rs.preset = cfg.get_string("preset", "paper");
    const PresetDefaults d = preset_defaults(rs.preset);

    rs.data_format = cfg.get_string("data.format", "");
    if (!rs.data_format.empty() && rs.data_format != "idx" && rs.data_format != "csv")
        fail(Errc::BadConfig, "data.format must be idx or csv, not '" + rs.data_format + "'");
    rs.train_images = cfg.get_string("data.train_images", "");
    rs.train_labels = cfg.get_string("data.train_labels", "");
    rs.test_images = cfg.get_string("data.test_images", "");
    rs.test_labels = cfg.get_string("data.test_labels", "");
    rs.train_csv = cfg.get_string("data.train", "");
    rs.test_csv = cfg.get_string("data.test", "");
    rs.label_column = cfg.get_string("data.label", "label");
    rs.head_train_rows = cfg.get_u64("data.train_rows", 0);
    if (rs.head_train_rows > 0 && rs.data_format != "csv")
        fail(Errc::BadConfig, "data.train_rows applies to csv data only");
    if (rs.head_train_rows > 0 && !rs.test_csv.empty())
        fail(Errc::BadConfig, "data.train_rows conflicts with data.test");
    rs.csv_options.encodings = cfg.with_prefix("encode.");

    rs.train_subsample = cfg.get_double("subsample", 1.0);
    rs.test_subsample = cfg.get_double("test_subsample", 1.0);
    check_fraction("subsample", rs.train_subsample);
    check_fraction("test_subsample", rs.test_subsample);

    CascadeConfig& cc = rs.cascade;
    cc.n_random_forests = cfg.get_u64("forests.random", 1);
    cc.n_completely_random_forests = cfg.get_u64("forests.completely_random", 1);
    cc.trees_per_forest = cfg.get_u64("trees", d.trees);
    cc.cv_folds = cfg.get_u64("folds", d.folds);
    cc.max_levels = cfg.get_u64("max_levels", 20);
    cc.screening = parse_screening(cfg.get_string("screening", "window"));
    cc.binning_bins = cfg.get_u64("binning.bins", 100);
    cc.error_shrink = cfg.get_double("error_shrink", 2.0);
    cc.min_leaf = cfg.get_u64("min_leaf", 1);
    cc.validation_fraction = cfg.get_double("validation_fraction", 0.2);

    GrainConfig grain;
    grain.stride = cfg.get_u64("scan.stride", 1);
    grain.n_trees_per_forest = cfg.get_u64("scan.trees", d.scan_trees);
    grain.hash_screen = cfg.get_bool("scan.hash_screen", true);
    grain.patch_subsample = cfg.get_double("scan.subsample", d.scan_subsample);
    grain.min_leaf = cfg.get_u64("scan.min_leaf", 1);
    check_fraction("scan.subsample", grain.patch_subsample);
    for (std::uint64_t w : cfg.get_u64_list("grains", d.grains)) {
        grain.window = w;
        cc.grains.push_back(grain);
    }

    rs.seed = cfg.get_u64("seed", 0);
    cc.seed = rs.seed;
    rs.threads = cfg.get_u64("threads", 0);
    rs.out_dir = cfg.get_string("out", "runs/latest");
    rs.model_path = cfg.get_string("model", "");
    return rs;
}

void align_labels(Dataset& d, const std::vector<std::string>& names, std::int32_t n_classes) {
    if (d.label_names.empty()) {
        if (!names.empty())
            fail(Errc::OutOfRange,
                 "eval data carries bare integer labels but the model was trained on named "
                 "labels");
        if (d.n_classes > n_classes)
            fail(Errc::OutOfRange, "eval data has more classes than the model");
        d.n_classes = n_classes;
        return;
    }
    std::vector<std::int32_t> remap(d.label_names.size());
    if (names.empty()) {
        for (std::size_t i = 0; i < d.label_names.size(); ++i) {
            double v = 0.0;
            if (!parse_number(d.label_names[i], v) || v != std::floor(v) || v < 0 ||
                v >= static_cast<double>(n_classes))
                fail(Errc::OutOfRange,
                     "label '" + d.label_names[i] + "' is not a class id of the model");
            remap[i] = static_cast<std::int32_t>(v);
        }
        d.label_names.clear();
    } else {
        std::unordered_map<std::string, std::int32_t> ids;
        for (std::size_t i = 0; i < names.size(); ++i)
            ids.emplace(names[i], static_cast<std::int32_t>(i));
        for (std::size_t i = 0; i < d.label_names.size(); ++i) {
            auto it = ids.find(d.label_names[i]);
            if (it == ids.end())
                fail(Errc::OutOfRange,
                     "label '" + d.label_names[i] + "' never appeared in the training data");
            remap[i] = it->second;
        }
        d.label_names = names;
    }
    for (std::int32_t& l : d.labels) l = remap[static_cast<std::size_t>(l)];
    d.n_classes = n_classes;
}

LoadedData load_data(const RunSettings& rs) {
    LoadedData out;
    if (rs.data_format == "idx") {
        if (rs.train_images.empty() || rs.train_labels.empty())
            fail(Errc::BadConfig, "idx data needs data.train_images and data.train_labels");
        if (rs.test_images.empty() != rs.test_labels.empty())
            fail(Errc::BadConfig, "idx test data needs both data.test_images and data.test_labels");
        require_file(rs.train_images);
        require_file(rs.train_labels);
        if (!rs.test_images.empty()) {
            require_file(rs.test_images);
            require_file(rs.test_labels);
        }
        out.train = load_idx(rs.train_images, rs.train_labels);
        if (!rs.test_images.empty()) {
            out.test = load_idx(rs.test_images, rs.test_labels);
            align_labels(*out.test, out.train.label_names, out.train.n_classes);
            out.train.n_classes = std::max(out.train.n_classes, out.test->n_classes);
            out.test->n_classes = out.train.n_classes;
        }
    } else if (rs.data_format == "csv") {
        if (rs.train_csv.empty()) fail(Errc::BadConfig, "csv data needs data.train");
        require_file(rs.train_csv);
        out.train = load_csv(rs.train_csv, rs.label_column, rs.csv_options);
        if (!rs.test_csv.empty()) {
            require_file(rs.test_csv);
            out.test = load_csv(rs.test_csv, rs.label_column, rs.csv_options);
            align_labels(*out.test, out.train.label_names, out.train.n_classes);
        } else if (rs.head_train_rows > 0) {
            const std::size_t n = out.train.n_instances();
            if (rs.head_train_rows >= n)
                fail(Errc::OutOfRange, "data.train_rows must leave at least one test row");
            std::vector<std::size_t> head(rs.head_train_rows);
            std::vector<std::size_t> tail(n - rs.head_train_rows);
            std::iota(head.begin(), head.end(), std::size_t{0});
            std::iota(tail.begin(), tail.end(), rs.head_train_rows);
            out.test = take(out.train, tail);
            out.train = take(out.train, head);
        }
    } else {
        fail(Errc::BadConfig, "data.format is required (idx or csv)");
    }

    if (out.test && out.test->n_features() != out.train.n_features())
        fail(Errc::DimensionMismatch, "train and test feature widths differ");
    if (rs.train_subsample < 1.0)
        out.train = subsample(out.train, rs.train_subsample, mix_seed(rs.seed, 0xda7a));
    if (out.test && rs.test_subsample < 1.0)
        *out.test = subsample(*out.test, rs.test_subsample, mix_seed(rs.seed, 0x7e57));
    return out;
}

TrainOutput run_train(const ConfigMap& cfg) {
    RunSettings rs = resolve_settings(cfg);
    cfg.reject_unconsumed();
    set_thread_limit(static_cast<unsigned>(rs.threads));

    LoadedData data = load_data(rs);
    fs::create_directories(rs.out_dir);

    TrainOutput out;
    if (data.test) {
        FitEvalResult r = fit_eval(data.train, *data.test, rs.cascade);
        out.model = std::move(r.model);
        out.report = std::move(r.report);
    } else {
        Stopwatch watch;
        SplitSpec vs;
        vs.train_fraction = 1.0 - rs.cascade.validation_fraction;
        vs.seed = mix_seed(rs.cascade.seed, 0x7a11);
        vs.stratified = true;
        auto [fit_train, validation] = split(data.train, vs);
        FitResult fitted = fit(fit_train, validation, rs.cascade);
        out.model = std::move(fitted.model);
        out.report = describe(out.model);
        out.report.validation_accuracy =
            fitted.validation_accuracy.empty() ? 0.0 : fitted.validation_accuracy.back();
        out.report.accuracy = out.report.validation_accuracy;
        out.report.wall_time_seconds = watch.seconds();
    }
    out.resolved = rs.provenance();
    out.model_file = rs.out_dir + "/model.bin";
    out.report_file = rs.out_dir + "/report.json";
    save_model(out.model, out.model_file);
    write_report(out.report, out.resolved, out.report_file);
    return out;
}

EvalOutput run_eval(const ConfigMap& cfg) {
    RunSettings rs = resolve_settings(cfg);
    cfg.reject_unconsumed();
    set_thread_limit(static_cast<unsigned>(rs.threads));
    if (rs.model_path.empty()) fail(Errc::BadConfig, "eval needs a model path (key `model`)");
    require_file(rs.model_path);

    const CascadeModel model = load_model(rs.model_path);
    LoadedData data = load_data(rs);
    Dataset& scored = data.test ? *data.test : data.train;
    align_labels(scored, model.label_names, model.n_classes);
    fs::create_directories(rs.out_dir);

    Stopwatch watch;
    EvalOutput out;
    out.report = describe(model);
    const TestEvaluation ev = evaluate(model, scored);
    out.report.accuracy = ev.accuracy;
    out.report.test_exit_counts = ev.exit_counts;
    out.report.wall_time_seconds = watch.seconds();
    out.report_file = rs.out_dir + "/report.json";
    write_report(out.report, rs.provenance(), out.report_file);
    return out;
}

BenchOutput run_bench(const ConfigMap& cfg) {
    RunSettings rs = resolve_settings(cfg);
    const std::uint64_t folds = cfg.get_u64("bench.folds", 5);
    const std::vector<std::string> arm_names =
        split_list(cfg.get_string("bench.arms", "hash-on,hash-off"));
    if (arm_names.size() < 2) fail(Errc::BadConfig, "bench.arms needs at least two arms");

    BenchOutput out;
    out.folds = folds;
    for (const std::string& name : arm_names) {
        BenchArm arm;
        arm.name = name;
        arm.cascade = rs.cascade;
        if (name == "hash-on" || name == "hash-off") {
            const bool on = name == "hash-on";
            for (GrainConfig& g : arm.cascade.grains) g.hash_screen = on;
        }
        for (const auto& [key, value] : cfg.with_prefix("arm." + name + ".")) {
            if (key == "hash_screen") {
                const bool on = parse_flag("arm." + name + ".hash_screen", value);
                for (GrainConfig& g : arm.cascade.grains) g.hash_screen = on;
            } else if (key == "screening") {
                arm.cascade.screening = parse_screening(value);
            } else if (key == "trees") {
                arm.cascade.trees_per_forest = std::strtoull(value.c_str(), nullptr, 10);
                if (arm.cascade.trees_per_forest == 0)
                    fail(Errc::BadConfig, "arm." + name + ".trees must be a positive integer");
            } else if (key == "scan.subsample") {
                double v = 0.0;
                if (!parse_number(value, v)) fail(Errc::BadConfig, "arm." + name + ".scan.subsample must be a number");
                check_fraction("arm." + name + ".scan.subsample", v);
                for (GrainConfig& g : arm.cascade.grains) g.patch_subsample = v;
            } else {
                fail(Errc::BadConfig, "unknown arm key 'arm." + name + "." + key + "'");
            }
        }
        out.arms.push_back(std::move(arm));
    }
    cfg.reject_unconsumed();
    set_thread_limit(static_cast<unsigned>(rs.threads));

    LoadedData data = load_data(rs);
    fs::create_directories(rs.out_dir);
    const Dataset& full = data.train;
    const FoldPlan plan = make_fold_plan(full.n_instances(), folds, mix_seed(rs.seed, 0xbe9c));

    for (std::size_t j = 0; j < folds; ++j) {
        std::vector<std::size_t> train_rows;
        std::vector<std::size_t> test_rows;
        for (std::size_t i = 0; i < full.n_instances(); ++i)
            (plan.fold_of[i] == static_cast<std::int32_t>(j) ? test_rows : train_rows).push_back(i);
        const Dataset fold_train = take(full, train_rows);
        const Dataset fold_test = take(full, test_rows);
        const std::uint64_t fold_seed = mix_seed(rs.seed, 0xa12 + j);
        for (BenchArm& arm : out.arms) {
            CascadeConfig cc = arm.cascade;
            cc.seed = fold_seed;
            const FitEvalResult r = fit_eval(fold_train, fold_test, cc);
            arm.fold_accuracy.push_back(r.report.accuracy);
            arm.fold_seconds.push_back(r.report.wall_time_seconds);
            std::size_t retained = 0;
            for (const GrainReport& g : r.report.grains) retained += g.retained;
            arm.fold_retained.push_back(retained);
        }
    }

    for (BenchArm& arm : out.arms) {
        arm.mean_accuracy = mean_of(arm.fold_accuracy);
        arm.mean_seconds = mean_of(arm.fold_seconds);
    }
    const BenchArm& base = out.arms.front();
    for (std::size_t a = 1; a < out.arms.size(); ++a) {
        const BenchArm& arm = out.arms[a];
        BenchComparison cmp;
        cmp.arm = arm.name;
        cmp.accuracy_delta = arm.mean_accuracy - base.mean_accuracy;
        cmp.seconds_delta = arm.mean_seconds - base.mean_seconds;
        PairedSample acc_diffs, sec_diffs;
        for (std::size_t j = 0; j < folds; ++j) {
            acc_diffs.diffs.push_back(arm.fold_accuracy[j] - base.fold_accuracy[j]);
            sec_diffs.diffs.push_back(arm.fold_seconds[j] - base.fold_seconds[j]);
        }
        try {
            cmp.accuracy_t = paired_t(acc_diffs);
        } catch (const Error& e) {
            if (e.code() != Errc::ZeroVariance) throw;
            cmp.accuracy_zero_variance = true;
        }
        try {
            cmp.seconds_t = paired_t(sec_diffs);
        } catch (const Error& e) {
            if (e.code() != Errc::ZeroVariance) throw;
            cmp.seconds_zero_variance = true;
        }
        out.comparisons.push_back(std::move(cmp));
    }

    for (const BenchArm& arm : out.arms) {
        nlohmann::ordered_json doc;
        doc["arm"] = arm.name;
        doc["folds"] = nlohmann::ordered_json::array();
        for (std::size_t j = 0; j < folds; ++j) {
            nlohmann::ordered_json row;
            row["fold"] = j + 1;
            row["accuracy"] = arm.fold_accuracy[j];
            row["wall_time_seconds"] = arm.fold_seconds[j];
            row["retained_locations"] = arm.fold_retained[j];
            doc["folds"].push_back(std::move(row));
        }
        doc["mean_accuracy"] = arm.mean_accuracy;
        doc["mean_wall_time_seconds"] = arm.mean_seconds;
        std::map<std::string, std::string> arm_resolved = rs.provenance();
        arm_resolved["screening"] = screening_name(arm.cascade.screening);
        arm_resolved["trees"] = fmt(static_cast<std::uint64_t>(arm.cascade.trees_per_forest));
        if (!arm.cascade.grains.empty()) {
            arm_resolved["scan.hash_screen"] = fmt_flag(arm.cascade.grains.front().hash_screen);
            arm_resolved["scan.subsample"] = fmt(arm.cascade.grains.front().patch_subsample);
        }
        doc["config"] = arm_resolved;
        const std::string path = rs.out_dir + "/bench_" + arm.name + ".json";
        write_text(path, doc.dump(2) + "\n");
        out.arm_files.push_back(path);
    }

    nlohmann::ordered_json summary;
    summary["folds"] = folds;
    summary["baseline"] = base.name;
    summary["arms"] = nlohmann::ordered_json::array();
    for (const BenchArm& arm : out.arms) {
        nlohmann::ordered_json row;
        row["name"] = arm.name;
        row["mean_accuracy"] = arm.mean_accuracy;
        row["mean_wall_time_seconds"] = arm.mean_seconds;
        summary["arms"].push_back(std::move(row));
    }
    summary["rows"] = nlohmann::ordered_json::array();
    for (const BenchComparison& cmp : out.comparisons) {
        nlohmann::ordered_json acc;
        acc["metric"] = "accuracy";
        acc["arm"] = cmp.arm;
        acc["delta"] = cmp.accuracy_delta;
        acc["paired_t"] =
            cmp.accuracy_t ? json_number(*cmp.accuracy_t) : nlohmann::ordered_json(nullptr);
        acc["zero_variance"] = cmp.accuracy_zero_variance;
        summary["rows"].push_back(std::move(acc));
        nlohmann::ordered_json sec;
        sec["metric"] = "wall_time_seconds";
        sec["arm"] = cmp.arm;
        sec["delta"] = cmp.seconds_delta;
        sec["paired_t"] =
            cmp.seconds_t ? json_number(*cmp.seconds_t) : nlohmann::ordered_json(nullptr);
        sec["zero_variance"] = cmp.seconds_zero_variance;
        summary["rows"].push_back(std::move(sec));
    }
    out.summary_file = rs.out_dir + "/bench_summary.json";
    write_text(out.summary_file, summary.dump(2) + "\n");
    return out;
}

StatsOutput run_stats(const ConfigMap& cfg) {
    const std::string input = cfg.get_string("stats.input", "");
    const double q_alpha = cfg.get_double("stats.q_alpha", kQCritical010K7);
    const std::string out_dir = cfg.get_string("out", "runs/latest");
    cfg.reject_unconsumed();
    if (input.empty()) fail(Errc::BadConfig, "stats needs an input csv (key stats.input)");
    require_file(input);

    std::ifstream in(input);
    if (!in) fail(Errc::Io, "cannot open " + input);
    std::vector<std::vector<std::string>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> cells;
        std::istringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) cells.push_back(cell);
        if (line.back() == ',') cells.push_back("");
        rows.push_back(std::move(cells));
    }
    if (rows.empty()) fail(Errc::EmptyDataset, input + " has no rows");
    for (const auto& r : rows)
        if (r.size() != rows[0].size()) fail(Errc::RaggedRow, input + " has ragged rows");

    StatsOutput out;
    out.q_alpha = q_alpha;
    double probe = 0.0;
    bool bare = true;
    for (const auto& r : rows)
        for (const auto& c : r) bare = bare && parse_number(c, probe);

    std::size_t first_data_row = 0;
    std::size_t first_model_col = 0;
    if (bare) {
        for (std::size_t c = 0; c < rows[0].size(); ++c)
            out.models.push_back("model" + std::to_string(c + 1));
        for (std::size_t r = 0; r < rows.size(); ++r)
            out.datasets.push_back("dataset" + std::to_string(r + 1));
    } else {
        first_data_row = 1;
        first_model_col = 1;
        if (rows.size() < 2 || rows[0].size() < 2)
            fail(Errc::DegenerateTable, input + " needs a header row and a dataset column");
        for (std::size_t c = 1; c < rows[0].size(); ++c) out.models.push_back(rows[0][c]);
        for (std::size_t r = 1; r < rows.size(); ++r) out.datasets.push_back(rows[r][0]);
    }

    Matrix acc(rows.size() - first_data_row, rows[0].size() - first_model_col);
    for (std::size_t r = 0; r < acc.rows(); ++r)
        for (std::size_t c = 0; c < acc.cols(); ++c) {
            const std::string& cell = rows[r + first_data_row][c + first_model_col];
            if (!parse_number(cell, acc.at(r, c)))
                fail(Errc::NonNumericCell, input + ": '" + cell + "' is not numeric");
        }

    out.ranks = rank_models(acc);
    out.friedman_statistic = friedman(out.ranks);
    out.critical_difference = nemenyi_cd(out.ranks.n_models(), out.ranks.n_datasets, q_alpha);

    nlohmann::ordered_json doc;
    doc["input"] = input;
    doc["n_datasets"] = out.ranks.n_datasets;
    doc["models"] = nlohmann::ordered_json::array();
    for (std::size_t m = 0; m < out.models.size(); ++m) {
        nlohmann::ordered_json row;
        row["name"] = out.models[m];
        row["mean_rank"] = out.ranks.mean_ranks[m];
        doc["models"].push_back(std::move(row));
    }
    doc["friedman"] = json_number(out.friedman_statistic);
    doc["q_alpha"] = q_alpha;
    doc["nemenyi_cd"] = out.critical_difference;
    fs::create_directories(out_dir);
    out.report_file = out_dir + "/stats.json";
    write_text(out.report_file, doc.dump(2) + "\n");
    return out;
}

} // namespace hwforest
