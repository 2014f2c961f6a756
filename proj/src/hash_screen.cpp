#include "hwforest/hash_screen.hpp"

#include <algorithm>
#include <numeric>

namespace hwforest {

bool HashThresholdResult::kept(std::size_t location) const {
    return std::binary_search(keep.begin(), keep.end(), location);
}

HashSignature signature(const double* v, std::size_t len) {
    if (len == 0) fail(Errc::EmptyVector, "signature of an empty vector");
    double mean = 0.0;
    for (std::size_t j = 0; j < len; ++j) mean += v[j];
    mean /= static_cast<double>(len);

    HashSignature sig;
    sig.bits.resize(len);
    for (std::size_t j = 0; j < len; ++j) sig.bits[j] = v[j] > mean ? 1 : 0;
    return sig;
}

HashSignature signature(const std::vector<double>& v) { return signature(v.data(), v.size()); }

double fold_bit_mean(double ones_fraction) {
    if (!(ones_fraction >= 0.0 && ones_fraction <= 1.0))
        fail(Errc::OutOfRange, "bit mean outside [0, 1]");
    return ones_fraction < 0.5 ? ones_fraction : 1.0 - ones_fraction;
}

double group_distance(const LocationGroup& g) {
    if (g.folded.empty()) return 0.0;
    double sum = 0.0;
    for (double f : g.folded) sum += f;
    return sum / static_cast<double>(g.folded.size());
}

std::size_t n_of(unsigned g, const std::vector<double>& e, double total) {
    if (!(total > 0.0)) fail(Errc::ZeroTotalMass, "all group distances are zero");
    const double target = total * static_cast<double>(g) / 100.0;
    double prefix = 0.0;
    for (std::size_t m = 0; m < e.size(); ++m) {
        prefix += e[m];
        if (prefix >= target) return m + 1;
    }
    // Floating-point shortfall at g = 100; the full prefix is the total by
    // construction.
    return e.size();
}

std::vector<LocationGroup> location_groups(const PatchSet& ps) {
    std::vector<std::uint32_t> one_counts(ps.n_locations * ps.patch_len, 0);
    for (std::size_t i = 0; i < ps.n_instances; ++i) {
        for (std::size_t r = 0; r < ps.n_locations; ++r) {
            HashSignature sig = signature(ps.patch(i, r), ps.patch_len);
            std::uint32_t* counts = one_counts.data() + r * ps.patch_len;
            for (std::size_t j = 0; j < ps.patch_len; ++j) counts[j] += sig.bits[j];
        }
    }

    std::vector<LocationGroup> groups(ps.n_locations);
    for (std::size_t r = 0; r < ps.n_locations; ++r) {
        LocationGroup& g = groups[r];
        g.location = r;
        g.bit_means.resize(ps.patch_len);
        g.folded.resize(ps.patch_len);
        const std::uint32_t* counts = one_counts.data() + r * ps.patch_len;
        for (std::size_t j = 0; j < ps.patch_len; ++j) {
            g.bit_means[j] = static_cast<double>(counts[j]) / static_cast<double>(ps.n_instances);
            g.folded[j] = fold_bit_mean(g.bit_means[j]);
        }
        g.distance = group_distance(g);
    }
    return groups;
}

HashThresholdResult hashing_threshold(const std::vector<LocationGroup>& groups) {
    if (groups.empty()) fail(Errc::EmptyDataset, "no location groups");
    const std::size_t r = groups.size();

    HashThresholdResult res;
    res.order.resize(r);
    std::iota(res.order.begin(), res.order.end(), std::size_t{0});
    std::stable_sort(res.order.begin(), res.order.end(), [&](std::size_t a, std::size_t b) {
        return groups[a].distance > groups[b].distance;
    });

    std::vector<double> e(r);
    for (std::size_t i = 0; i < r; ++i) e[i] = groups[res.order[i]].distance;
    res.total_mass = 0.0;
    for (double d : e) res.total_mass += d;

    auto keep_all = [&] {
        res.p = 0;
        res.ht = 0.0;
        res.keep.resize(r);
        std::iota(res.keep.begin(), res.keep.end(), std::size_t{0});
        return res;
    };
    if (!(res.total_mass > 0.0)) return keep_all();

    for (unsigned g = 1; g <= 100; ++g)
        res.n_table[g - 1] = static_cast<std::uint32_t>(n_of(g, e, res.total_mass));

    const double step_limit = static_cast<double>(r) / 50.0;
    for (unsigned u = 100; u >= 2; --u) {
        const double diff = static_cast<double>(res.n_table[u - 1]) - static_cast<double>(res.n_table[u - 2]);
        if (diff <= step_limit) {
            res.p = static_cast<int>(u);
            res.ht = e[res.n_table[u - 1] - 1];
            for (std::size_t loc = 0; loc < r; ++loc)
                if (groups[loc].distance >= res.ht) res.keep.push_back(loc);
            return res;
        }
    }
    return keep_all();
}

std::pair<HashThresholdResult, PatchSet> screen(const PatchSet& ps) {
    HashThresholdResult res = hashing_threshold(location_groups(ps));

    PatchSet out;
    out.n_instances = ps.n_instances;
    out.n_locations = res.keep.size();
    out.patch_len = ps.patch_len;
    out.values.resize(out.n_instances * out.n_locations * out.patch_len);
    for (std::size_t i = 0; i < ps.n_instances; ++i) {
        for (std::size_t k = 0; k < res.keep.size(); ++k) {
            const double* src = ps.patch(i, res.keep[k]);
            std::copy(src, src + ps.patch_len, out.patch(i, k));
        }
    }
    return {std::move(res), std::move(out)};
}

} // namespace hwforest
