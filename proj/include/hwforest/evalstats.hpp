#pragma once

#include <chrono>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "hwforest/errors.hpp"
#include "hwforest/matrix.hpp"

namespace hwforest {

/// Per-fold differences D_1..D_k between two paired runs.
struct PairedSample {
    std::vector<double> diffs;
};

/// Mean rank per model over n_datasets benchmark datasets.
/// Rank 1 is the best model; each mean rank lies in [1, n_models].
struct RankTable {
    std::vector<double> mean_ranks;
    std::size_t n_datasets = 0;

    std::size_t n_models() const noexcept { return mean_ranks.size(); }
};

/// Tabulated critical values for the two hypothesis tests in the
/// evaluation protocol. No general distribution code on purpose.
inline constexpr double kTCritical005Df4 = 2.132;
inline constexpr double kQCritical010K7 = 2.693;

/// |sqrt(k) * mean / sd| with the sample (k-1) standard deviation.
/// Throws ZeroVariance when all diffs are equal (or fewer than 2 diffs).
double paired_t(const PairedSample& s);

/// Iman-Davenport F form of the Friedman statistic:
///   tau = 12*N*(sum r_i^2 - k*(k+1)^2/4) / (k*(k+1))
///   F   = (N-1)*tau / (N*(k-1) - tau)
/// Throws DegenerateTable when N < 2, k < 2, or a mean rank falls
/// outside [1, k]. Perfectly consistent rankings drive the denominator
/// to zero and the statistic to +infinity; that is the literal value of
/// the formula and is returned as such.
double friedman(const RankTable& rt);

/// Nemenyi critical difference: q_alpha * sqrt(k*(k+1) / (6*N)).
double nemenyi_cd(std::size_t k, std::size_t n_datasets, double q_alpha);

/// Fraction of exact matches. Throws LengthMismatch / EmptyVector.
double accuracy(const std::vector<std::int32_t>& predictions,
                const std::vector<std::int32_t>& labels);

/// Ranks models per dataset from a n_datasets x n_models accuracy matrix
/// (higher accuracy -> better -> lower rank; ties get the average of the
/// ranks they span) and returns the column means.
RankTable rank_models(const Matrix& accuracies);

/// Monotonic wall-clock stopwatch for report timings.
class Stopwatch {
public:
    Stopwatch() : start_(std::chrono::steady_clock::now()) {}
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    }

private:
    std::chrono::steady_clock::time_point start_;
};

} // namespace hwforest
