#pragma once

// Literal, unoptimized evaluations of the selection and agreement formulas.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <optional>
#include <vector>

namespace oracle {

struct TwoStage {
    std::size_t k_s = 0;
    std::size_t k_d = 0;
    std::vector<std::size_t> selected;
    std::optional<double> alpha0_hat;
    double delta_p = 0.0;
};

/// Every partial sum is recomputed from scratch for every j.
inline TwoStage two_stage_direct(const std::vector<double>& T, double pi0, const std::vector<double>& S) {
    const std::size_t p = T.size();
    TwoStage out;
    out.delta_p = std::min(static_cast<double>(p), 1.0 / std::log(static_cast<double>(p)));
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return T[a] < T[b]; });
    auto Ts = [&](std::size_t i) { return T[order[i - 1]]; };  // 1-based order statistic

    const double bound = static_cast<double>(p) * (1.0 - pi0) * out.delta_p;
    out.k_s = 0;
    for (std::size_t j = 1; j <= p && out.k_s == 0; ++j) {
        double tail = 0.0;
        for (std::size_t i = p; i >= j; --i) tail += 1.0 - Ts(i);
        if (tail <= bound) out.k_s = j;
    }
    if (out.k_s == 0) out.k_s = p;

    for (std::size_t j = 1; j <= out.k_s; ++j) {
        double sum = 0.0;
        for (std::size_t i = 1; i <= j; ++i) sum += Ts(i);
        if (sum / static_cast<double>(j) <= out.delta_p) out.k_d = j;
    }

    if (out.k_d > 0) {
        for (std::size_t j = 0; j < p; ++j) {
            const bool stage1 = T[j] <= Ts(out.k_s);
            if (stage1 && T[j] <= Ts(out.k_d)) out.selected.push_back(j);
        }
        double lowest = S[out.selected.front()];
        for (std::size_t j : out.selected) lowest = std::min(lowest, S[j]);
        out.alpha0_hat = lowest;
    }
    return out;
}

/// Rand index by enumerating all pairs.
inline double rand_index_pairs(const std::vector<int>& a, const std::vector<int>& b) {
    const std::size_t n = a.size();
    std::size_t agree = 0, total = 0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            ++total;
            if ((a[i] == a[j]) == (b[i] == b[j])) ++agree;
        }
    }
    return static_cast<double>(agree) / static_cast<double>(total);
}

}  // namespace oracle
