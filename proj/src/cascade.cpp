#include "hwforest/cascade.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hwforest/evalstats.hpp"
#include "hwforest/parallel.hpp"
#include "hwforest/rng.hpp"

namespace hwforest {

namespace {

/// Confidence comparisons treat accuracy-derived TA values of exactly 1 as
/// "window must be perfect", keeping window_threshold's (0,1) domain.
double usable_ta(double ta) { return std::min(ta, 1.0 - 1e-12); }

std::vector<ForestKind> slot_kinds(const CascadeConfig& cfg) {
    std::vector<ForestKind> kinds;
    kinds.insert(kinds.end(), cfg.n_random_forests, ForestKind::random);
    kinds.insert(kinds.end(), cfg.n_completely_random_forests, ForestKind::completely_random);
    return kinds;
}

/// Mean of the per-slot distributions for one instance.
void averaged_row(const std::vector<CvForest>& slots, std::size_t row, double* out,
                  std::size_t k) {
    std::fill(out, out + k, 0.0);
    for (const CvForest& slot : slots)
        for (std::size_t c = 0; c < k; ++c) out[c] += slot.oof.at(row, c);
    for (std::size_t c = 0; c < k; ++c) out[c] /= static_cast<double>(slots.size());
}

struct LevelEval {
    ClassDistribution averaged;
    std::vector<ClassDistribution> per_slot;
};

/// Evaluates one level's slot forests on a feature vector.
LevelEval eval_level(const CascadeLevel& level, const double* x, std::size_t len,
                     std::size_t n_classes) {
    LevelEval ev;
    ev.per_slot.reserve(level.forests.size());
    ev.averaged.assign(n_classes, 0.0);
    for (const CvForest& slot : level.forests) {
        ev.per_slot.push_back(cv_predict(slot, x, len));
        for (std::size_t c = 0; c < n_classes; ++c) ev.averaged[c] += ev.per_slot.back()[c];
    }
    for (std::size_t c = 0; c < n_classes; ++c)
        ev.averaged[c] /= static_cast<double>(level.forests.size());
    return ev;
}

std::int32_t argmax_class(const ClassDistribution& dist) {
    return static_cast<std::int32_t>(std::max_element(dist.begin(), dist.end()) - dist.begin());
}

/// Incremental walker shared by fit-time validation scoring and predict:
/// holds the augmented feature vector with the base features in front and
/// the previous level's class vectors appended.
struct InstanceState {
    std::vector<double> features; // base ++ carry
    std::size_t base_width = 0;
    bool exited = false;
    ClassDistribution result;
    std::size_t exit_level = 0;

    void set_carry(const std::vector<ClassDistribution>& per_slot) {
        const std::size_t k = per_slot.empty() ? 0 : per_slot.front().size();
        features.resize(base_width + per_slot.size() * k);
        for (std::size_t s = 0; s < per_slot.size(); ++s)
            std::copy(per_slot[s].begin(), per_slot[s].end(),
                      features.begin() + base_width + s * k);
    }
};

} // namespace

FitResult fit(const Dataset& train, const Dataset& validation, const CascadeConfig& cfg) {
    if (train.n_instances() == 0) fail(Errc::EmptyTrainingSet, "no training instances");
    if (train.n_features() != validation.n_features() || train.n_classes != validation.n_classes)
        fail(Errc::DimensionMismatch, "train and validation disagree on layout");
    if (cfg.max_levels < 1) fail(Errc::OutOfRange, "max_levels must be >= 1");
    if (cfg.cv_folds < 2) fail(Errc::FoldCountTooSmall, "cascade needs cv_folds >= 2");
    if (cfg.slots() == 0) fail(Errc::BadConfig, "at least one forest per level");

    FitResult res;
    CascadeModel& model = res.model;
    model.n_classes = train.n_classes;
    model.raw_width = train.n_features();
    model.config = cfg;
    model.label_names = train.label_names;

    Matrix base_train;
    Matrix base_val;
    if (!cfg.grains.empty() && train.image_shape) {
        model.scan = fit_scan(train, cfg.grains, mix_seed(cfg.seed, 0x5ca2));
        base_train = transform(model.scan, train);
        base_val = transform(model.scan, validation);
    } else {
        base_train = train.features;
        base_val = validation.features;
    }
    model.base_width = base_train.cols();

    const std::size_t n = train.n_instances();
    const std::size_t v = validation.n_instances();
    const auto k = static_cast<std::size_t>(train.n_classes);
    const std::vector<ForestKind> kinds = slot_kinds(cfg);

    res.train_exit_level.assign(n, 0);

    std::vector<std::size_t> survivors(n);
    std::iota(survivors.begin(), survivors.end(), std::size_t{0});
    Matrix carry; // survivors x (slots * k), empty before level 1

    std::vector<InstanceState> val_states(v);
    for (std::size_t j = 0; j < v; ++j) {
        val_states[j].base_width = base_val.cols();
        val_states[j].features.assign(base_val.row(j), base_val.row(j) + base_val.cols());
    }
    std::size_t val_frozen_correct = 0;
    double prev_error = 1.0;

    for (std::size_t t = 1; t <= cfg.max_levels; ++t) {
        const std::size_t n_surv = survivors.size();
        const std::size_t width = base_train.cols() + carry.cols();

        Matrix X(n_surv, width);
        std::vector<std::int32_t> y(n_surv);
        for (std::size_t i = 0; i < n_surv; ++i) {
            const double* base_row = base_train.row(survivors[i]);
            std::copy(base_row, base_row + base_train.cols(), X.row(i));
            if (carry.cols() > 0)
                std::copy(carry.row(i), carry.row(i) + carry.cols(),
                          X.row(i) + base_train.cols());
            y[i] = train.labels[survivors[i]];
        }

        const ColMatrix CX(X);
        X = Matrix();
        const FeatureQuant quant = quantize_features(CX);
        const FoldPlan plan = make_fold_plan(n_surv, cfg.cv_folds, mix_seed(cfg.seed, 0x70 + t));
        std::vector<std::size_t> rows(n_surv);
        std::iota(rows.begin(), rows.end(), std::size_t{0});
        TreeOptions opts;
        opts.min_leaf = cfg.min_leaf;

        CascadeLevel level;
        level.n_entering = n_surv;
        level.forests.resize(kinds.size());
        for (std::size_t s = 0; s < kinds.size(); ++s)
            level.forests[s] =
                train_cv_forest(CX, y, train.n_classes, rows, kinds[s], cfg.trees_per_forest,
                                plan, mix_seed(cfg.seed, t * 64 + s), opts, &quant);

        // Screening records from the averaged out-of-fold distributions.
        std::vector<ConfidenceRecord> records;
        records.reserve(n_surv);
        std::vector<double> avg(k);
        std::vector<std::int32_t> oof_pred(n_surv);
        for (std::size_t i = 0; i < n_surv; ++i) {
            averaged_row(level.forests, i, avg.data(), k);
            records.push_back(make_record(i, avg.data(), k, y[i]));
            oof_pred[i] = records.back().predicted;
        }
        level.oof_accuracy = accuracy(oof_pred, y);
        level.ta = 1.0 - (1.0 - level.oof_accuracy) / cfg.error_shrink;

        ScreenPartition part;
        switch (cfg.screening) {
        case ScreeningKind::window:
            part = window_threshold(rank(records), usable_ta(level.ta));
            break;
        case ScreeningKind::binning:
            part = binning_threshold(rank(records),
                                     std::min(cfg.binning_bins, std::max<std::size_t>(n_surv, 1)),
                                     usable_ta(level.ta));
            break;
        case ScreeningKind::none:
            part.threshold = 1.0;
            for (std::size_t i = 0; i < n_surv; ++i) part.low.push_back(i);
            break;
        }
        level.wt = part.threshold;
        level.n_retired = part.high.size();

        // Candidate validation accuracy of the model ending at this level.
        std::vector<LevelEval> val_evals(v);
        std::size_t val_correct = val_frozen_correct;
        for (std::size_t j = 0; j < v; ++j) {
            if (val_states[j].exited) continue;
            val_evals[j] = eval_level(level, val_states[j].features.data(),
                                      val_states[j].features.size(), k);
            if (argmax_class(val_evals[j].averaged) == validation.labels[j]) ++val_correct;
        }
        const double val_acc =
            v == 0 ? 1.0 : static_cast<double>(val_correct) / static_cast<double>(v);
        const double err = 1.0 - val_acc;
        if (t > 1 && err > prev_error) break; // level trained, detected worse, discarded

        prev_error = err;
        res.validation_accuracy.push_back(val_acc);

        // Commit: retire the high-confidence instances at this level.
        for (std::size_t pos : part.high)
            res.train_exit_level[survivors[pos]] = static_cast<std::int32_t>(t);

        // Advance validation walkers.
        for (std::size_t j = 0; j < v; ++j) {
            InstanceState& st = val_states[j];
            if (st.exited) continue;
            const double conf = *std::max_element(val_evals[j].averaged.begin(),
                                                  val_evals[j].averaged.end());
            if (conf > level.wt) {
                st.exited = true;
                if (argmax_class(val_evals[j].averaged) == validation.labels[j])
                    ++val_frozen_correct;
            } else {
                st.set_carry(val_evals[j].per_slot);
            }
        }

        std::vector<std::size_t> low_sorted(part.low);
        std::sort(low_sorted.begin(), low_sorted.end());

        Matrix next_carry(low_sorted.size(), kinds.size() * k);
        std::vector<std::size_t> next_survivors(low_sorted.size());
        for (std::size_t i = 0; i < low_sorted.size(); ++i) {
            const std::size_t pos = low_sorted[i];
            next_survivors[i] = survivors[pos];
            for (std::size_t s = 0; s < kinds.size(); ++s)
                std::copy(level.forests[s].oof.row(pos), level.forests[s].oof.row(pos) + k,
                          next_carry.row(i) + s * k);
        }

        model.levels.push_back(std::move(level));
        survivors = std::move(next_survivors);
        carry = std::move(next_carry);
        if (survivors.empty() || survivors.size() < cfg.cv_folds) break;
    }

    // Whoever is still standing exits at the last committed level.
    const auto last = static_cast<std::int32_t>(model.levels.size());
    for (std::int32_t& lvl : res.train_exit_level)
        if (lvl == 0) lvl = last;
    return res;
}

TracedPrediction predict_traced(const CascadeModel& m, const double* x, std::size_t len) {
    if (len != m.raw_width) fail(Errc::DimensionMismatch, "input width differs from training");
    if (m.levels.empty()) fail(Errc::EmptyTrainingSet, "model holds no levels");
    const auto k = static_cast<std::size_t>(m.n_classes);

    InstanceState st;
    if (m.uses_scanning()) {
        Dataset one;
        one.features = Matrix(1, len);
        std::copy(x, x + len, one.features.row(0));
        one.labels = {0};
        one.n_classes = m.n_classes;
        one.image_shape = {m.scan.grains.front().image_height,
                           m.scan.grains.front().image_width};
        const Matrix base = transform(m.scan, one);
        st.features.assign(base.row(0), base.row(0) + base.cols());
    } else {
        st.features.assign(x, x + len);
    }
    st.base_width = m.base_width;

    TracedPrediction out;
    for (std::size_t t = 0; t < m.levels.size(); ++t) {
        const CascadeLevel& level = m.levels[t];
        LevelEval ev = eval_level(level, st.features.data(), st.features.size(), k);
        out.levels_evaluated = t + 1;
        const double conf = *std::max_element(ev.averaged.begin(), ev.averaged.end());
        if (t + 1 == m.levels.size() || conf > level.wt) {
            out.distribution = std::move(ev.averaged);
            out.exit_level = t + 1;
            return out;
        }
        st.set_carry(ev.per_slot);
    }
    fail(Errc::OutOfRange, "unreachable: cascade walk fell through");
}

ClassDistribution predict(const CascadeModel& m, const double* x, std::size_t len) {
    return predict_traced(m, x, len).distribution;
}

ClassDistribution predict(const CascadeModel& m, const std::vector<double>& x) {
    return predict(m, x.data(), x.size());
}

Matrix predict_matrix(const CascadeModel& m, const Dataset& d) {
    Matrix out(d.n_instances(), static_cast<std::size_t>(m.n_classes));
    parallel_for(d.n_instances(), [&](std::size_t i) {
        const ClassDistribution dist = predict(m, d.features.row(i), d.n_features());
        std::copy(dist.begin(), dist.end(), out.row(i));
    });
    return out;
}

std::vector<std::int32_t> predict_labels(const CascadeModel& m, const Dataset& d) {
    const Matrix probs = predict_matrix(m, d);
    std::vector<std::int32_t> labels(probs.rows());
    for (std::size_t i = 0; i < probs.rows(); ++i) {
        const double* row = probs.row(i);
        labels[i] =
            static_cast<std::int32_t>(std::max_element(row, row + probs.cols()) - row);
    }
    return labels;
}

EvalReport describe(const CascadeModel& m) {
    EvalReport rep;
    for (const CascadeLevel& level : m.levels)
        rep.levels.push_back(
            {level.wt, level.ta, level.n_entering, level.n_retired, level.oof_accuracy});
    for (const GrainModel& g : m.scan.grains)
        rep.grains.push_back({g.config.window, g.n_locations, g.retained_locations.size()});
    return rep;
}

TestEvaluation evaluate(const CascadeModel& m, const Dataset& test) {
    TestEvaluation ev;
    ev.exit_counts.assign(m.levels.size(), 0);
    ev.predicted.resize(test.n_instances());
    std::vector<std::size_t> exits(test.n_instances());
    parallel_for(test.n_instances(), [&](std::size_t i) {
        const TracedPrediction tp = predict_traced(m, test.features.row(i), test.n_features());
        ev.predicted[i] = argmax_class(tp.distribution);
        exits[i] = tp.exit_level;
    });
    for (std::size_t e : exits) ++ev.exit_counts[e - 1];
    ev.accuracy = test.n_instances() ? accuracy(ev.predicted, test.labels) : 0.0;
    return ev;
}

FitEvalResult fit_eval(const Dataset& train, const Dataset& test, const CascadeConfig& cfg) {
    Stopwatch watch;
    SplitSpec vs;
    vs.train_fraction = 1.0 - cfg.validation_fraction;
    vs.seed = mix_seed(cfg.seed, 0x7a11);
    vs.stratified = true;
    auto [fit_train, validation] = split(train, vs);

    FitResult fitted = fit(fit_train, validation, cfg);

    FitEvalResult out;
    out.report = describe(fitted.model);
    out.report.validation_accuracy = fitted.validation_accuracy.empty()
                                         ? 0.0
                                         : fitted.validation_accuracy.back();
    const TestEvaluation ev = evaluate(fitted.model, test);
    out.report.test_exit_counts = ev.exit_counts;
    out.report.accuracy = ev.accuracy;
    out.report.wall_time_seconds = watch.seconds();
    out.model = std::move(fitted.model);
    return out;
}

} // namespace hwforest
