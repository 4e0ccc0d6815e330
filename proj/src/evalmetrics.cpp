#include "cosci/evalmetrics.hpp"

#include "cosci/error.hpp"
#include "cosci/parallel.hpp"
#include "cosci/rng.hpp"

#include <algorithm>
#include <cassert>
#include <limits>
#include <map>
#include <string>

namespace cosci {

ConfusionCounts confusion_counts(std::span<const std::size_t> selected, std::span<const std::size_t> truth,
                                 std::size_t p) {
    std::vector<char> is_selected(p, 0), is_signal(p, 0);
    for (std::size_t j : selected) {
        if (j >= p) throw InputError("selected index " + std::to_string(j) + " out of range");
        is_selected[j] = 1;
    }
    for (std::size_t j : truth) {
        if (j >= p) throw InputError("signal index " + std::to_string(j) + " out of range");
        is_signal[j] = 1;
    }
    ConfusionCounts c;
    for (std::size_t j = 0; j < p; ++j) {
        if (is_signal[j]) {
            is_selected[j] ? ++c.true_positives : ++c.false_negatives;
        } else {
            is_selected[j] ? ++c.false_positives : ++c.true_negatives;
        }
    }
    return c;
}

namespace {

double pairs_of(double count) { return count * (count - 1.0) / 2.0; }

std::vector<std::size_t> compact_labels(std::span<const int> labels, std::size_t& distinct) {
    std::map<int, std::size_t> ids;
    std::vector<std::size_t> out(labels.size());
    for (std::size_t i = 0; i < labels.size(); ++i) {
        out[i] = ids.emplace(labels[i], ids.size()).first->second;
    }
    distinct = ids.size();
    return out;
}

}  // namespace

namespace {

struct PairCounts {
    double total = 0.0;
    double disagree = 0.0;  ///< pairs together in exactly one labeling
};

PairCounts pair_counts(std::span<const int> a, std::span<const int> b) {
    if (a.size() != b.size()) throw InputError("labelings differ in length");
    const std::size_t n = a.size();
    if (n < 2) throw InputError("Rand index needs at least 2 observations");
    std::size_t ka = 0, kb = 0;
    const std::vector<std::size_t> la = compact_labels(a, ka);
    const std::vector<std::size_t> lb = compact_labels(b, kb);

    std::vector<double> table(ka * kb, 0.0), rows(ka, 0.0), cols(kb, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        table[la[i] * kb + lb[i]] += 1.0;
        rows[la[i]] += 1.0;
        cols[lb[i]] += 1.0;
    }
    double both = 0.0, same_a = 0.0, same_b = 0.0;
    for (double c : table) both += pairs_of(c);
    for (double c : rows) same_a += pairs_of(c);
    for (double c : cols) same_b += pairs_of(c);
    // all counts are integers well below 2^53, so these sums are exact
    return {pairs_of(static_cast<double>(n)), same_a + same_b - 2.0 * both};
}

}  // namespace

double rand_index(std::span<const int> a, std::span<const int> b) {
    const PairCounts c = pair_counts(a, b);
    return (c.total - c.disagree) / c.total;
}

double cer(std::span<const int> a, std::span<const int> b) {
    const PairCounts c = pair_counts(a, b);
    return c.disagree / c.total;
}

double per_signal_cer(std::span<const int> predicted, const std::vector<std::vector<int>>& truth_per_signal) {
    if (truth_per_signal.empty()) throw InputError("per-signal CER needs at least one signal labeling");
    double sum = 0.0;
    for (const auto& truth : truth_per_signal) sum += cer(predicted, truth);
    return sum / static_cast<double>(truth_per_signal.size());
}

namespace {

KMeansResult lloyd_once(const Eigen::MatrixXd& X, std::size_t k, Engine& engine) {
    const Eigen::Index n = X.rows();
    const auto kk = static_cast<Eigen::Index>(k);
    Eigen::MatrixXd centers(kk, X.cols());

    // k-means++ seeding
    std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
    Eigen::Index first = std::min<Eigen::Index>(n - 1, static_cast<Eigen::Index>(uniform_open(engine) * static_cast<double>(n)));
    centers.row(0) = X.row(first);
    for (Eigen::Index c = 1; c < kk; ++c) {
        double total = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            auto& d = d2[static_cast<std::size_t>(i)];
            d = std::min(d, (X.row(i) - centers.row(c - 1)).squaredNorm());
            total += d;
        }
        Eigen::Index pick = n - 1;
        if (total > 0.0) {
            double target = uniform_open(engine) * total;
            for (Eigen::Index i = 0; i < n; ++i) {
                target -= d2[static_cast<std::size_t>(i)];
                if (target <= 0.0) {
                    pick = i;
                    break;
                }
            }
        } else {
            pick = c;  // every point coincides with a center already
        }
        centers.row(c) = X.row(pick);
    }

    KMeansResult out;
    out.labels.assign(static_cast<std::size_t>(n), 0);
    double previous = std::numeric_limits<double>::infinity();
    for (std::size_t it = 1; it <= 100; ++it) {
        double wss = 0.0;
        for (Eigen::Index i = 0; i < n; ++i) {
            Eigen::Index best = 0;
            double best_d = std::numeric_limits<double>::infinity();
            for (Eigen::Index c = 0; c < kk; ++c) {
                const double d = (X.row(i) - centers.row(c)).squaredNorm();
                if (d < best_d) {
                    best_d = d;
                    best = c;
                }
            }
            out.labels[static_cast<std::size_t>(i)] = static_cast<int>(best);
            wss += best_d;
        }
        assert(wss <= previous * (1.0 + 1e-12) + 1e-300);
        out.iterations = it;
        out.within_ss = wss;

        Eigen::MatrixXd sums = Eigen::MatrixXd::Zero(kk, X.cols());
        std::vector<double> counts(k, 0.0);
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto c = static_cast<Eigen::Index>(out.labels[static_cast<std::size_t>(i)]);
            sums.row(c) += X.row(i);
            counts[static_cast<std::size_t>(c)] += 1.0;
        }
        for (Eigen::Index c = 0; c < kk; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0.0) centers.row(c) = sums.row(c) / counts[static_cast<std::size_t>(c)];
        }
        if (previous < std::numeric_limits<double>::infinity() &&
            (previous - wss) <= 1e-8 * std::max(previous, std::numeric_limits<double>::min())) {
            break;
        }
        previous = wss;
    }
    return out;
}

}  // namespace

KMeansResult kmeans_lloyd(const Eigen::MatrixXd& X, std::size_t clusters, std::size_t restarts, std::uint64_t seed,
                          std::size_t threads) {
    if (clusters < 1) throw InputError("k-means needs at least one cluster");
    if (clusters > static_cast<std::size_t>(X.rows())) throw InputError("k-means: more clusters than observations");
    if (X.cols() < 1) throw InputError("k-means needs at least one feature");
    restarts = std::max<std::size_t>(1, restarts);

    std::vector<KMeansResult> runs(restarts);
    parallel_for(restarts, threads, [&](std::size_t r) {
        Engine engine = make_stream(seed, r);
        runs[r] = lloyd_once(X, clusters, engine);
    });
    std::size_t best = 0;
    for (std::size_t r = 1; r < restarts; ++r) {
        if (runs[r].within_ss < runs[best].within_ss) best = r;
    }
    return std::move(runs[best]);
}

}  // namespace cosci
