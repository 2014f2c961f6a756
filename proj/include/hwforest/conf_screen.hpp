#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "hwforest/errors.hpp"

namespace hwforest {

/// One training instance's screening view: its class distribution summary
/// plus the true label. predicted is the argmax (lowest index on ties) and
/// confidence the corresponding maximum probability.
struct ConfidenceRecord {
    std::size_t instance_id = 0;
    std::vector<double> distribution;
    double confidence = 0.0;
    std::int32_t predicted = 0;
    std::int32_t label = 0;
};

ConfidenceRecord make_record(std::size_t instance_id, const double* probs, std::size_t n_classes,
                             std::int32_t label);

/// Threshold plus the resulting split. Instances with confidence strictly
/// above threshold are "high" (retire now); the rest are "low" (continue).
/// threshold == kAllPassThreshold marks the everything-retires case.
struct ScreenPartition {
    double threshold = 0.0;
    std::vector<std::size_t> high;
    std::vector<std::size_t> low;
};

/// Sentinel below any real confidence: every instance clears it.
inline constexpr double kAllPassThreshold = -1.0;

/// One probe of the sliding window, for trace inspection.
struct WindowStep {
    std::size_t c = 0;
    std::size_t u = 0;
    std::size_t l = 0;
    double accuracy = 0.0;
    bool passed = false;
};

/// Sorts by descending confidence, ties by ascending instance_id.
std::vector<ConfidenceRecord> rank(std::vector<ConfidenceRecord> records);

/// Fraction of correct predictions over ranks [u, l], 1-based inclusive.
double window_accuracy(const std::vector<ConfidenceRecord>& ranked, std::size_t u, std::size_t l);

/// Self-adaptive threshold search over the ranked list.
///
/// The window starts at size c = floor(m/2) anchored at rank 1. While its
/// accuracy stays >= ta it slides forward one rank at a time; reaching the
/// end this way certifies every instance (all-pass sentinel). On a failure
/// the window halves in place (l = u + c - 1); failing at c <= 2 fixes the
/// threshold at the confidence of the window's first instance. Fewer than
/// 2 instances: every instance is low (threshold 1.0).
ScreenPartition window_threshold(const std::vector<ConfidenceRecord>& ranked, double ta,
                                 std::vector<WindowStep>* trace = nullptr);

/// Binning baseline: k rank-order bins (the last absorbs any remainder);
/// the threshold sits at the last instance of the bin preceding the first
/// bin whose accuracy drops below ta. No such bin: all-pass. First bin
/// already below ta: every instance is low.
ScreenPartition binning_threshold(const std::vector<ConfidenceRecord>& ranked, std::size_t k,
                                  double ta);

/// Splits on an explicit threshold: confidence > wt goes high, <= wt low.
ScreenPartition partition(const std::vector<ConfidenceRecord>& ranked, double wt);

} // namespace hwforest
