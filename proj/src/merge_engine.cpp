#include "cosci/merge_engine.hpp"

#include "cosci/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <queue>
#include <string>

namespace cosci {

namespace {

constexpr std::size_t kNone = static_cast<std::size_t>(-1);

struct GapEntry {
    double distance;
    std::size_t left;
    std::uint32_t left_version;
    std::uint32_t right_version;
};

struct GapAfter {
    bool operator()(const GapEntry& a, const GapEntry& b) const noexcept {
        if (a.distance != b.distance) return a.distance > b.distance;
        return a.left > b.left;
    }
};

}  // namespace

SortedFeature sort_feature(std::span<const double> values) {
    if (values.size() < 2) {
        throw InputError("feature needs at least 2 observations, got " + std::to_string(values.size()));
    }
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (!std::isfinite(values[i])) {
            throw InputError("non-finite value at observation " + std::to_string(i));
        }
    }

    SortedFeature out;
    out.original_indices.resize(values.size());
    std::iota(out.original_indices.begin(), out.original_indices.end(), std::size_t{0});
    std::stable_sort(out.original_indices.begin(), out.original_indices.end(),
                     [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    out.values.reserve(values.size());
    for (std::size_t idx : out.original_indices) out.values.push_back(values[idx]);
    return out;
}

double merge_size(std::size_t left_size, std::size_t right_size, std::size_t n) {
    if (n == 0 || left_size == 0 || right_size == 0 || left_size + right_size > n) {
        throw InputError("merge sizes (" + std::to_string(left_size) + ", " + std::to_string(right_size) +
                         ") invalid for n = " + std::to_string(n));
    }
    // mass >= 0.5  <=>  2 * (left + right) >= n, evaluated in integers
    if (2 * (left_size + right_size) < n) return 0.0;
    return static_cast<double>(std::min(left_size, right_size)) / static_cast<double>(n);
}

MergeTrace merge_path(const SortedFeature& feature) {
    const std::vector<double>& x = feature.values;
    const std::size_t n = x.size();
    if (n < 2) throw InputError("merge_path needs n >= 2");

    // Clusters are contiguous runs of sorted positions, identified by their first position.
    std::vector<double> centroid(x);
    std::vector<std::size_t> size(n, 1);
    std::vector<std::size_t> next(n), prev(n);
    std::vector<std::uint32_t> version(n, 0);
    for (std::size_t i = 0; i < n; ++i) {
        next[i] = i + 1 < n ? i + 1 : kNone;
        prev[i] = i > 0 ? i - 1 : kNone;
    }

    auto gap = [&](std::size_t left) {
        const std::size_t right = next[left];
        return (centroid[right] - centroid[left]) / static_cast<double>(size[left] + size[right]);
    };

    std::vector<GapEntry> storage;
    storage.reserve(2 * n);
    std::priority_queue<GapEntry, std::vector<GapEntry>, GapAfter> heap(GapAfter{}, std::move(storage));
    for (std::size_t i = 0; i + 1 < n; ++i) heap.push({gap(i), i, 0, 0});

    MergeTrace trace;
    trace.n = n;
    trace.events.reserve(n - 1);

    while (trace.events.size() + 1 < n) {
        const GapEntry top = heap.top();
        heap.pop();
        const std::size_t left = top.left;
        const std::size_t right = next[left];
        // stale: the left cluster was absorbed or either side changed since the push
        if (right == kNone || version[left] != top.left_version || version[right] != top.right_version ||
            size[left] == 0) {
            continue;
        }

        const std::size_t sl = size[left];
        const std::size_t sr = size[right];
        const double cl = centroid[left];
        const double cr = centroid[right];

        MergeEvent event;
        event.step = trace.events.size() + 1;
        event.left_begin = left;
        event.left_size = sl;
        event.right_size = sr;
        event.distance = top.distance;
        event.mass_after = static_cast<double>(sl + sr) / static_cast<double>(n);
        event.alpha = merge_size(sl, sr, n);
        event.midpoint = 0.5 * (x[left + sl - 1] + x[right]);
        trace.events.push_back(event);

        double merged = cl;
        if (cl != cr) {
            merged = (static_cast<double>(sl) * cl + static_cast<double>(sr) * cr) / static_cast<double>(sl + sr);
            merged = std::clamp(merged, cl, cr);
        }
        centroid[left] = merged;
        size[left] = sl + sr;
        size[right] = 0;
        ++version[left];
        ++version[right];
        next[left] = next[right];
        if (next[right] != kNone) prev[next[right]] = left;

        if (next[left] != kNone) heap.push({gap(left), left, version[left], version[next[left]]});
        if (prev[left] != kNone) {
            const std::size_t p = prev[left];
            heap.push({gap(p), p, version[p], version[left]});
        }
    }
    return trace;
}

FeatureScore clustering_score(const MergeTrace& trace) {
    if (trace.events.empty()) throw InputError("clustering_score: empty merge trace");
    FeatureScore out;
    for (const MergeEvent& e : trace.events) out.score = std::max(out.score, e.alpha);
    return out;
}

double empirical_quantile(std::span<const double> sorted, double prob) {
    if (sorted.empty()) throw InputError("empirical_quantile: empty sample");
    const double h = static_cast<double>(sorted.size() - 1) * prob;
    const auto lo = static_cast<std::size_t>(std::floor(h));
    if (lo + 1 >= sorted.size()) return sorted.back();
    const double frac = h - static_cast<double>(lo);
    if (frac == 0.0) return sorted[lo];
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double restricted_score(const MergeTrace& trace, const SortedFeature& feature, double tau) {
    if (!(tau >= 0.0 && tau < 0.5)) throw InputError("restricted_score: tau must lie in [0, 0.5)");
    if (feature.size() != trace.n) throw InputError("restricted_score: trace and feature sizes differ");
    const double lower = empirical_quantile(feature.values, tau);
    const double upper = empirical_quantile(feature.values, 1.0 - tau);
    double best = 0.0;
    for (const MergeEvent& e : trace.events) {
        if (e.midpoint >= lower && e.midpoint <= upper) best = std::max(best, e.alpha);
    }
    return best;
}

FeatureScore score_feature(std::span<const double> values, std::optional<double> tau) {
    const SortedFeature sorted = sort_feature(values);
    const MergeTrace trace = merge_path(sorted);
    FeatureScore score = clustering_score(trace);
    if (tau) {
        score.tau = *tau;
        score.restricted_score = restricted_score(trace, sorted, *tau);
    }
    return score;
}

}  // namespace cosci
