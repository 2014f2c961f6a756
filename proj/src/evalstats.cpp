#include "hwforest/evalstats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace hwforest {

double paired_t(const PairedSample& s) {
    const std::size_t k = s.diffs.size();
    if (k < 2) fail(Errc::ZeroVariance, "paired t-statistic needs at least 2 differences");

    double mean = 0.0;
    for (double d : s.diffs) mean += d;
    mean /= static_cast<double>(k);

    double ss = 0.0;
    for (double d : s.diffs) ss += (d - mean) * (d - mean);
    const double sd = std::sqrt(ss / static_cast<double>(k - 1));
    if (sd == 0.0) fail(Errc::ZeroVariance, "all paired differences are equal");
    return std::fabs(std::sqrt(static_cast<double>(k)) * mean / sd);
}

double friedman(const RankTable& rt) {
    const double n = static_cast<double>(rt.n_datasets);
    const double k = static_cast<double>(rt.n_models());
    if (rt.n_datasets < 2 || rt.n_models() < 2)
        fail(Errc::DegenerateTable, "friedman needs N >= 2 datasets and k >= 2 models");
    for (double r : rt.mean_ranks)
        if (!(r >= 1.0 && r <= k)) fail(Errc::DegenerateTable, "mean rank outside [1, k]");

    double sum_sq = 0.0;
    for (double r : rt.mean_ranks) sum_sq += r * r;
    const double tau = 12.0 * n * (sum_sq - k * (k + 1.0) * (k + 1.0) / 4.0) / (k * (k + 1.0));
    return (n - 1.0) * tau / (n * (k - 1.0) - tau);
}

double nemenyi_cd(std::size_t k, std::size_t n_datasets, double q_alpha) {
    const double kk = static_cast<double>(k);
    const double nn = static_cast<double>(n_datasets);
    return q_alpha * std::sqrt(kk * (kk + 1.0) / (6.0 * nn));
}

double accuracy(const std::vector<std::int32_t>& predictions,
                const std::vector<std::int32_t>& labels) {
    if (predictions.size() != labels.size())
        fail(Errc::LengthMismatch, "predictions and labels differ in length");
    if (predictions.empty()) fail(Errc::EmptyVector, "accuracy over zero instances");
    std::size_t hits = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i)
        if (predictions[i] == labels[i]) ++hits;
    return static_cast<double>(hits) / static_cast<double>(predictions.size());
}

RankTable rank_models(const Matrix& accuracies) {
    const std::size_t n = accuracies.rows();
    const std::size_t k = accuracies.cols();
    if (n == 0 || k == 0) fail(Errc::DegenerateTable, "empty accuracy table");

    RankTable rt;
    rt.n_datasets = n;
    rt.mean_ranks.assign(k, 0.0);

    std::vector<std::size_t> order(k);
    for (std::size_t row = 0; row < n; ++row) {
        const double* acc = accuracies.row(row);
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::stable_sort(order.begin(), order.end(),
                         [acc](std::size_t a, std::size_t b) { return acc[a] > acc[b]; });
        // Average tied ranks over each run of equal accuracies.
        std::size_t i = 0;
        while (i < k) {
            std::size_t j = i;
            while (j + 1 < k && acc[order[j + 1]] == acc[order[i]]) ++j;
            const double avg_rank = (static_cast<double>(i + 1) + static_cast<double>(j + 1)) / 2.0;
            for (std::size_t t = i; t <= j; ++t) rt.mean_ranks[order[t]] += avg_rank;
            i = j + 1;
        }
    }
    for (double& r : rt.mean_ranks) r /= static_cast<double>(n);
    return rt;
}

} // namespace hwforest
