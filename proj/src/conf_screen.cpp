#include "hwforest/conf_screen.hpp"

#include <algorithm>

namespace hwforest {

ConfidenceRecord make_record(std::size_t instance_id, const double* probs, std::size_t n_classes,
                             std::int32_t label) {
    if (n_classes == 0) fail(Errc::EmptyVector, "record with zero classes");
    ConfidenceRecord rec;
    rec.instance_id = instance_id;
    rec.distribution.assign(probs, probs + n_classes);
    rec.label = label;
    rec.predicted = 0;
    rec.confidence = probs[0];
    for (std::size_t c = 1; c < n_classes; ++c) {
        if (probs[c] > rec.confidence) {
            rec.confidence = probs[c];
            rec.predicted = static_cast<std::int32_t>(c);
        }
    }
    return rec;
}

std::vector<ConfidenceRecord> rank(std::vector<ConfidenceRecord> records) {
    std::sort(records.begin(), records.end(), [](const ConfidenceRecord& a, const ConfidenceRecord& b) {
        if (a.confidence != b.confidence) return a.confidence > b.confidence;
        return a.instance_id < b.instance_id;
    });
    return records;
}

double window_accuracy(const std::vector<ConfidenceRecord>& ranked, std::size_t u, std::size_t l) {
    if (u < 1 || u > l || l > ranked.size()) fail(Errc::InvalidBounds, "window outside ranked list");
    std::size_t hits = 0;
    for (std::size_t i = u; i <= l; ++i)
        if (ranked[i - 1].predicted == ranked[i - 1].label) ++hits;
    return static_cast<double>(hits) / static_cast<double>(l - u + 1);
}

ScreenPartition window_threshold(const std::vector<ConfidenceRecord>& ranked, double ta,
                                 std::vector<WindowStep>* trace) {
    if (!(ta > 0.0 && ta < 1.0)) fail(Errc::OutOfRange, "target accuracy outside (0, 1)");
    const std::size_t m = ranked.size();
    if (m < 2) return partition(ranked, 1.0);

    std::size_t c = m / 2;
    std::size_t u = 1;
    std::size_t l = c;
    for (;;) {
        const double acc = window_accuracy(ranked, u, l);
        const bool passed = acc >= ta;
        if (trace) trace->push_back({c, u, l, acc, passed});
        if (passed) {
            if (l == m) return partition(ranked, kAllPassThreshold);
            ++u;
            ++l;
        } else {
            if (c <= 2) return partition(ranked, ranked[u - 1].confidence);
            c /= 2;
            l = u + c - 1;
        }
    }
}

ScreenPartition binning_threshold(const std::vector<ConfidenceRecord>& ranked, std::size_t k,
                                  double ta) {
    if (!(ta > 0.0 && ta < 1.0)) fail(Errc::OutOfRange, "target accuracy outside (0, 1)");
    const std::size_t m = ranked.size();
    if (k == 0 || k > m) fail(Errc::BinCountExceedsInstances, "bin count outside [1, m]");

    const std::size_t base = m / k;
    for (std::size_t t = 1; t <= k; ++t) {
        const std::size_t lo = (t - 1) * base + 1;
        const std::size_t hi = (t == k) ? m : t * base;
        if (window_accuracy(ranked, lo, hi) < ta) {
            // Bin t is the first failure; threshold at the last instance of
            // bin t-1. t == 1 leaves no certified bin: everything is low.
            if (t == 1) return partition(ranked, ranked[0].confidence);
            return partition(ranked, ranked[(t - 1) * base - 1].confidence);
        }
    }
    return partition(ranked, kAllPassThreshold);
}

ScreenPartition partition(const std::vector<ConfidenceRecord>& ranked, double wt) {
    ScreenPartition part;
    part.threshold = wt;
    for (const ConfidenceRecord& rec : ranked) {
        if (rec.confidence > wt)
            part.high.push_back(rec.instance_id);
        else
            part.low.push_back(rec.instance_id);
    }
    return part;
}

} // namespace hwforest
