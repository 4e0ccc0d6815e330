#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cosci {

struct ConfusionCounts {
    std::size_t false_negatives = 0;
    std::size_t false_positives = 0;
    std::size_t true_positives = 0;
    std::size_t true_negatives = 0;
};

/// Counts against the true signal set; indices are 0-based and must be < p.
ConfusionCounts confusion_counts(std::span<const std::size_t> selected, std::span<const std::size_t> truth,
                                 std::size_t p);

/// Rand index from the pair-count contingency table.
double rand_index(std::span<const int> a, std::span<const int> b);

/// Classification error rate, 1 - Rand index.
double cer(std::span<const int> a, std::span<const int> b);

/// Mean CER of one predicted labeling against each signal's labeling.
double per_signal_cer(std::span<const int> predicted, const std::vector<std::vector<int>>& truth_per_signal);

struct KMeansResult {
    std::vector<int> labels;
    double within_ss = 0.0;
    std::size_t iterations = 0;
};

/// Lloyd iterations from k-means++ seeds, best of `restarts` runs.
/// X is n x k (rows are observations).
KMeansResult kmeans_lloyd(const Eigen::MatrixXd& X, std::size_t clusters, std::size_t restarts, std::uint64_t seed,
                          std::size_t threads = 1);

}  // namespace cosci
