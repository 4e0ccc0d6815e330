#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace cosci {

/// One feature's observations in ascending order, plus the permutation back
/// to input order (values[k] == input[original_indices[k]]).
struct SortedFeature {
    std::vector<double> values;
    std::vector<std::size_t> original_indices;

    std::size_t size() const noexcept { return values.size(); }
};

/// A single fusion of two adjacent clusters along the solution path.
struct MergeEvent {
    std::size_t step = 0;        ///< 1-based position in the trace
    std::size_t left_begin = 0;  ///< sorted position of the left cluster's first member
    std::size_t left_size = 0;
    std::size_t right_size = 0;
    double distance = 0.0;    ///< weighted centroid gap (c_right - c_left) / (s_left + s_right)
    double mass_after = 0.0;  ///< (left_size + right_size) / n
    double alpha = 0.0;       ///< merge size; zero unless mass_after >= 0.5
    double midpoint = 0.0;    ///< halfway between the left cluster's max and the right cluster's min
};

/// Full merge history of one feature: exactly n - 1 events.
struct MergeTrace {
    std::size_t n = 0;
    std::vector<MergeEvent> events;
};

struct FeatureScore {
    double score = 0.0;
    std::optional<double> restricted_score;
    std::optional<double> tau;
};

/// Sorts a feature ascending. Throws InputError for n < 2 or non-finite values.
SortedFeature sort_feature(std::span<const double> values);

/// n^-1 * min(left, right) when the merged cluster holds at least half the
/// sample, else 0. The half-sample comparison is inclusive.
double merge_size(std::size_t left_size, std::size_t right_size, std::size_t n);

/// Traces every merge of the univariate fusion-penalized clustering path.
///
/// Starting from n singletons, the adjacent pair with the smallest weighted
/// centroid gap is merged until one cluster remains. Gaps live in a min-heap
/// keyed by (distance, left position); entries made stale by a merge are
/// skipped on pop. Exact ties go to the pair with the smallest left position.
MergeTrace merge_path(const SortedFeature& feature);

/// Largest merge size over the trace. Throws InputError on an empty trace.
FeatureScore clustering_score(const MergeTrace& trace);

/// Largest merge size among events whose midpoint lies in the empirical
/// quantile band [q(tau), q(1 - tau)]; 0 when no event qualifies.
/// Quantiles use linear interpolation between order statistics.
double restricted_score(const MergeTrace& trace, const SortedFeature& feature, double tau);

/// Empirical quantile of sorted data, linear interpolation between order statistics.
double empirical_quantile(std::span<const double> sorted, double prob);

/// Convenience: sort, trace and score one raw feature column. When tau is
/// given the restricted score is filled in as well.
FeatureScore score_feature(std::span<const double> values, std::optional<double> tau = std::nullopt);

}  // namespace cosci
