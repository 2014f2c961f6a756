#include <cstdio>
#include <exception>
#include <string>

#include <CLI11.hpp>

#include "hwforest/config.hpp"
#include "hwforest/errors.hpp"
#include "hwforest/runner.hpp"

namespace {

struct CommonFlags {
    std::string config;
    std::string seed, threads, out, screening, hash_screen, grains, subsample;
    CLI::Option* seed_o = nullptr;
    CLI::Option* threads_o = nullptr;
    CLI::Option* out_o = nullptr;
    CLI::Option* screening_o = nullptr;
    CLI::Option* hash_o = nullptr;
    CLI::Option* grains_o = nullptr;
    CLI::Option* sub_o = nullptr;
};

void attach(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--config", f.config, "key = value run configuration file");
    f.seed_o = cmd->add_option("--seed", f.seed, "master seed");
    f.threads_o = cmd->add_option("--threads", f.threads,
                                  "worker thread cap (0 = HWFOREST_THREADS or hardware)");
    f.out_o = cmd->add_option("--out", f.out, "output directory");
    f.screening_o = cmd->add_option("--screening", f.screening, "window, binning, or none")
                        ->check(CLI::IsMember({"window", "binning", "none"}));
    f.hash_o = cmd->add_option("--hash-screen", f.hash_screen, "location screening on or off")
                   ->check(CLI::IsMember({"on", "off"}));
    f.grains_o = cmd->add_option("--grains", f.grains, "scan window sizes, e.g. 4,6,8");
    f.sub_o = cmd->add_option("--subsample", f.subsample, "training subsample fraction");
}

hwforest::ConfigMap build_config(const CommonFlags& f) {
    hwforest::ConfigMap cfg;
    if (!f.config.empty()) cfg = hwforest::ConfigMap::from_file(f.config);
    auto apply = [&cfg](CLI::Option* o, const char* key, const std::string& v) {
        if (o != nullptr && o->count() > 0) cfg.set(key, v);
    };
    apply(f.seed_o, "seed", f.seed);
    apply(f.threads_o, "threads", f.threads);
    apply(f.out_o, "out", f.out);
    apply(f.screening_o, "screening", f.screening);
    apply(f.hash_o, "scan.hash_screen", f.hash_screen);
    apply(f.grains_o, "grains", f.grains);
    apply(f.sub_o, "subsample", f.subsample);
    return cfg;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"deep forest with hashing and window confidence screening"};
    app.require_subcommand(1);

    CommonFlags train_f, eval_f, bench_f;
    std::string eval_model;
    std::string stats_config, stats_input, stats_out;

    CLI::App* train = app.add_subcommand("train", "fit a model, write model.bin and report.json");
    attach(train, train_f);
    CLI::App* evalc = app.add_subcommand("eval", "score a saved model on a dataset");
    attach(evalc, eval_f);
    CLI::Option* model_o = evalc->add_option("--model", eval_model, "saved model file");
    CLI::App* bench = app.add_subcommand("bench", "paired k-fold comparison of config arms");
    attach(bench, bench_f);
    CLI::App* stats =
        app.add_subcommand("stats", "mean ranks, Friedman statistic, Nemenyi critical difference");
    stats->add_option("--config", stats_config, "key = value run configuration file");
    CLI::Option* input_o =
        stats->add_option("--input", stats_input, "per-dataset, per-model accuracy csv");
    CLI::Option* stats_out_o = stats->add_option("--out", stats_out, "output directory");

    CLI11_PARSE(app, argc, argv);

    try {
        if (train->parsed()) {
            const hwforest::ConfigMap cfg = build_config(train_f);
            const hwforest::TrainOutput out = hwforest::run_train(cfg);
            std::printf("accuracy %.4f over %zu levels\n", out.report.accuracy,
                        out.report.levels.size());
            std::printf("model  %s\nreport %s\n", out.model_file.c_str(), out.report_file.c_str());
        } else if (evalc->parsed()) {
            hwforest::ConfigMap cfg = build_config(eval_f);
            if (model_o->count() > 0) cfg.set("model", eval_model);
            const hwforest::EvalOutput out = hwforest::run_eval(cfg);
            std::printf("accuracy %.4f over %zu levels\n", out.report.accuracy,
                        out.report.levels.size());
            std::printf("report %s\n", out.report_file.c_str());
        } else if (bench->parsed()) {
            const hwforest::ConfigMap cfg = build_config(bench_f);
            const hwforest::BenchOutput out = hwforest::run_bench(cfg);
            for (const hwforest::BenchArm& arm : out.arms)
                std::printf("arm %-12s accuracy %.4f  time %.2fs\n", arm.name.c_str(),
                            arm.mean_accuracy, arm.mean_seconds);
            for (const hwforest::BenchComparison& cmp : out.comparisons) {
                std::printf("vs %-12s accuracy delta %+.4f  t %s\n", cmp.arm.c_str(),
                            cmp.accuracy_delta,
                            cmp.accuracy_zero_variance
                                ? "(zero variance)"
                                : std::to_string(*cmp.accuracy_t).c_str());
                std::printf("vs %-12s time delta     %+.2fs  t %s\n", cmp.arm.c_str(),
                            cmp.seconds_delta,
                            cmp.seconds_zero_variance
                                ? "(zero variance)"
                                : std::to_string(*cmp.seconds_t).c_str());
            }
            std::printf("summary %s\n", out.summary_file.c_str());
        } else if (stats->parsed()) {
            hwforest::ConfigMap cfg;
            if (!stats_config.empty()) cfg = hwforest::ConfigMap::from_file(stats_config);
            if (input_o->count() > 0) cfg.set("stats.input", stats_input);
            if (stats_out_o->count() > 0) cfg.set("out", stats_out);
            const hwforest::StatsOutput out = hwforest::run_stats(cfg);
            for (std::size_t m = 0; m < out.models.size(); ++m)
                std::printf("model %-24s mean rank %.4f\n", out.models[m].c_str(),
                            out.ranks.mean_ranks[m]);
            std::printf("friedman %.6g\n", out.friedman_statistic);
            std::printf("nemenyi_cd %.6g (q = %.6g, N = %zu)\n", out.critical_difference,
                        out.q_alpha, out.ranks.n_datasets);
            std::printf("report %s\n", out.report_file.c_str());
        }
    } catch (const hwforest::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
