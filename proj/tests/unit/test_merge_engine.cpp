#include "cosci/error.hpp"
#include "cosci/merge_engine.hpp"
#include "cosci/rng.hpp"
#include "oracles/path_oracle.hpp"

#include <doctest.h>

#include <algorithm>
#include <random>

using namespace cosci;

namespace {

std::vector<double> alphas_of(const MergeTrace& t) {
    std::vector<double> out;
    for (const auto& e : t.events) out.push_back(e.alpha);
    return out;
}

/// Partition (smallest-member labels over original indices) after `merges` events.
std::vector<std::size_t> partition_after(const SortedFeature& f, const MergeTrace& t, std::size_t merges) {
    const std::size_t n = f.size();
    std::vector<std::size_t> block(n);
    for (std::size_t i = 0; i < n; ++i) block[i] = i;
    for (std::size_t k = 0; k < merges; ++k) {
        const auto& e = t.events[k];
        for (std::size_t i = e.left_begin; i < e.left_begin + e.left_size + e.right_size; ++i) block[i] = e.left_begin;
    }
    std::vector<std::size_t> smallest(n, n);
    for (std::size_t i = 0; i < n; ++i) smallest[block[i]] = std::min(smallest[block[i]], f.original_indices[i]);
    std::vector<std::size_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) labels[f.original_indices[i]] = smallest[block[i]];
    return labels;
}

}  // namespace

TEST_CASE("sort_feature orders values and keeps the permutation") {
    const std::vector<double> x{3, 1, 2};
    const SortedFeature f = sort_feature(x);
    CHECK(f.values == std::vector<double>{1, 2, 3});
    CHECK(f.original_indices == std::vector<std::size_t>{1, 2, 0});
    CHECK(sort_feature(std::vector<double>{0, 0, 0}).values == std::vector<double>{0, 0, 0});

    Engine e = make_stream(11, 0);
    std::normal_distribution<double> g;
    std::vector<double> big(1000);
    for (double& v : big) v = g(e);
    const SortedFeature fb = sort_feature(big);
    std::vector<double> ref = big;
    std::sort(ref.begin(), ref.end());
    CHECK(fb.values == ref);
    for (std::size_t k = 0; k < big.size(); ++k) CHECK(big[fb.original_indices[k]] == fb.values[k]);
}

TEST_CASE("sort_feature rejects short or non-finite input") {
    CHECK_THROWS_AS(sort_feature(std::vector<double>{1.0}), InputError);
    CHECK_THROWS_AS(sort_feature(std::vector<double>{1.0, std::nan("")}), InputError);
    CHECK_THROWS_AS(sort_feature(std::vector<double>{1.0, HUGE_VAL}), InputError);
}

TEST_CASE("merge_size follows the half-mass rule") {
    CHECK(merge_size(3, 2, 10) == doctest::Approx(0.2));
    CHECK(merge_size(1, 1, 10) == 0.0);
    CHECK(merge_size(5, 5, 10) == 0.5);
    CHECK(merge_size(2, 3, 11) == 0.0);  // mass 5/11 < 0.5
    CHECK_THROWS_AS(merge_size(6, 5, 10), InputError);
    CHECK_THROWS_AS(merge_size(0, 5, 10), InputError);
}

TEST_CASE("merge_path on two tight pairs") {
    const SortedFeature f = sort_feature(std::vector<double>{0, 1, 10, 11});
    const MergeTrace t = merge_path(f);
    REQUIRE(t.events.size() == 3);
    CHECK(t.events[0].left_begin == 0);
    CHECK(t.events[0].alpha == 0.25);
    CHECK(t.events[0].mass_after == 0.5);
    CHECK(t.events[1].left_begin == 2);
    CHECK(t.events[1].alpha == 0.25);
    CHECK(t.events[2].alpha == 0.5);
    CHECK(t.events[2].mass_after == 1.0);
    CHECK(t.events[2].midpoint == 5.5);
    for (std::size_t k = 0; k < 3; ++k) CHECK(t.events[k].step == k + 1);
    CHECK(clustering_score(t).score == 0.5);
}

TEST_CASE("merge_path with two observations") {
    const MergeTrace t = merge_path(sort_feature(std::vector<double>{0, 1}));
    REQUIRE(t.events.size() == 1);
    CHECK(t.events[0].alpha == 0.5);
    CHECK(t.events[0].mass_after == 1.0);
}

TEST_CASE("merge_path breaks exact ties toward the smallest position") {
    // equal gaps everywhere: the leftmost pair merges first
    const MergeTrace t = merge_path(sort_feature(std::vector<double>{0, 1, 2, 3}));
    CHECK(t.events[0].left_begin == 0);
    // duplicates merge at distance zero before anything else
    const MergeTrace d = merge_path(sort_feature(std::vector<double>{5, 0, 5, 9, 5}));
    CHECK(d.events[0].distance == 0.0);
    CHECK(d.events[1].distance == 0.0);
    CHECK(d.events[0].left_begin == 1);
}

TEST_CASE("merge_path matches the fusion oracle on small random inputs") {
    Engine e = make_stream(5, 0);
    for (int rep = 0; rep < 20; ++rep) {
        const std::size_t n = 3 + static_cast<std::size_t>(uniform_open(e) * 4);
        std::vector<double> x(n);
        for (double& v : x) v = rep % 2 ? std::floor(uniform_open(e) * 6) : uniform_open(e) * 10 - 5;
        const SortedFeature f = sort_feature(x);
        const MergeTrace t = merge_path(f);
        for (const auto& [blocks, labels] : oracle::fusion_partitions(x)) {
            CHECK(partition_after(f, t, n - blocks) == labels);
        }
    }
}

TEST_CASE("trace invariants") {
    Engine e = make_stream(6, 0);
    std::normal_distribution<double> g;
    std::vector<double> x(500);
    for (double& v : x) v = g(e);
    const SortedFeature f = sort_feature(x);
    const MergeTrace t = merge_path(f);
    REQUIRE(t.events.size() == x.size() - 1);
    std::size_t clusters = x.size();
    for (const auto& ev : t.events) {
        CHECK(ev.mass_after == static_cast<double>(ev.left_size + ev.right_size) / 500.0);
        CHECK(ev.alpha == merge_size(ev.left_size, ev.right_size, 500));
        --clusters;
    }
    CHECK(clusters == 1);
    CHECK(t.events.back().mass_after == 1.0);
    // merge distances along the path never decrease
    for (std::size_t k = 1; k < t.events.size(); ++k) CHECK(t.events[k].distance >= t.events[k - 1].distance);
}

TEST_CASE("clustering_score takes the largest merge size") {
    MergeTrace t;
    t.n = 4;
    for (double a : {0.25, 0.25, 0.5}) t.events.push_back({t.events.size() + 1, 0, 1, 1, 0.0, 0.5, a, 0.0});
    CHECK(clustering_score(t).score == 0.5);
    MergeTrace u;
    u.n = 100;
    for (double a : {0.0, 0.0, 0.01}) u.events.push_back({u.events.size() + 1, 0, 1, 1, 0.0, 0.5, a, 0.0});
    CHECK(clustering_score(u).score == 0.01);
    CHECK_THROWS_AS(clustering_score(MergeTrace{}), InputError);
}

TEST_CASE("well separated equal mixture scores near one half") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Engine e = make_stream(seed, 99);
        std::normal_distribution<double> g;
        std::vector<double> x(1000);
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = g(e) + (uniform_open(e) < 0.5 ? -4.0 : 4.0);
        const double s = score_feature(x).score;
        CHECK(s >= 0.45);
        CHECK(s <= 0.5);
    }
}

TEST_CASE("restricted score") {
    const std::vector<double> x{0, 1, 10, 11};
    const SortedFeature f = sort_feature(x);
    const MergeTrace t = merge_path(f);
    CHECK(restricted_score(t, f, 0.0) == clustering_score(t).score);
    CHECK(restricted_score(t, f, 0.05) == 0.5);
    CHECK_THROWS_AS(restricted_score(t, f, 0.5), InputError);

    // hand-built trace: the only passing merge has its midpoint at the sample maximum
    const SortedFeature fy = sort_feature(std::vector<double>{0, 1, 2, 3, 4, 5, 6, 7, 8, 9});
    MergeTrace ty;
    ty.n = 10;
    for (std::size_t k = 0; k < 9; ++k) ty.events.push_back({k + 1, 0, 1, 1, 0.0, 0.2, 0.0, 0.5 + static_cast<double>(k)});
    ty.events.back().alpha = 0.3;
    ty.events.back().midpoint = 9.0;
    CHECK(clustering_score(ty).score == 0.3);
    CHECK(restricted_score(ty, fy, 0.1) == 0.0);

    const FeatureScore s = score_feature(x, 0.1);
    REQUIRE(s.restricted_score);
    CHECK(*s.restricted_score <= s.score);
    CHECK(*s.tau == 0.1);
}

TEST_CASE("empirical quantile interpolates linearly") {
    const std::vector<double> v{1, 2, 3, 4};
    CHECK(empirical_quantile(v, 0.0) == 1.0);
    CHECK(empirical_quantile(v, 1.0) == 4.0);
    CHECK(empirical_quantile(v, 0.5) == 2.5);
}

TEST_CASE("affine maps and negation keep the score") {
    Engine e = make_stream(7, 0);
    std::normal_distribution<double> g;
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<double> x(300);
        for (double& v : x) v = g(e) * (rep + 1) + (uniform_open(e) < 0.3 ? 3.0 : 0.0);
        const double s = score_feature(x).score;
        std::vector<double> y(x.size()), z(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) {
            y[i] = 3.0 * x[i] + 7.0;
            z[i] = -x[i];
        }
        CHECK(score_feature(y).score == s);
        CHECK(score_feature(z).score == s);
    }
}
