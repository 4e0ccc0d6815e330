#include "cosci/interactions.hpp"

#include "cosci/error.hpp"
#include "cosci/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <string>

namespace cosci {

DirectionGrid direction_grid(std::size_t m) {
    if (m < 2) throw InputError("direction grid needs m >= 2");
    DirectionGrid grid;
    grid.m = m;
    grid.angles.resize(m);
    grid.directions.resize(m);
    const double pi = std::numbers::pi;
    for (std::size_t k = 0; k < m; ++k) grid.angles[k] = pi * static_cast<double>(k) / static_cast<double>(m);

    auto snap = [](double v) { return std::abs(v) < 1e-15 ? 0.0 : v; };
    if (m % 2 != 0) {
        for (std::size_t k = 0; k < m; ++k) {
            grid.directions[k] = {snap(std::cos(grid.angles[k])), snap(std::sin(grid.angles[k]))};
        }
        return grid;
    }

    // First quadrant: indices 0..h with h = m / 2 at pi / 2. Angles above pi / 4
    // are reflections of those below, so swapping coordinates maps the grid onto itself.
    const std::size_t h = m / 2;
    for (std::size_t k = 0; 2 * k < h; ++k) {
        grid.directions[k] = {snap(std::cos(grid.angles[k])), snap(std::sin(grid.angles[k]))};
        grid.directions[h - k] = {grid.directions[k][1], grid.directions[k][0]};
    }
    if (h % 2 == 0) grid.directions[h / 2] = {std::sqrt(0.5), std::sqrt(0.5)};
    // Second quadrant: angle pi / 2 + phi is (-sin phi, cos phi).
    for (std::size_t k = h + 1; k < m; ++k) {
        const auto& base = grid.directions[k - h];
        grid.directions[k] = {-base[1], base[0]};
    }
    return grid;
}

DirectionGrid circle_grid(std::size_t points) {
    if (points < 3) throw InputError("circle grid needs at least 3 points, got " + std::to_string(points));
    return direction_grid(points % 2 == 0 ? points / 2 : points);
}

std::vector<double> standardize(std::span<const double> x) {
    const std::size_t n = x.size();
    if (n < 2) throw InputError("standardize needs at least 2 observations");
    double mean = 0.0;
    for (double v : x) mean += v;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double v : x) ss += (v - mean) * (v - mean);
    const double sd = std::sqrt(ss / static_cast<double>(n - 1));
    if (!(sd > 0.0) || !std::isfinite(sd)) throw InputError("cannot standardize a zero-variance column");
    std::vector<double> z(n);
    for (std::size_t i = 0; i < n; ++i) z[i] = (x[i] - mean) / sd;
    return z;
}

std::vector<double> projection_scores(std::span<const double> zi, std::span<const double> zj,
                                      const DirectionGrid& grid) {
    if (zi.size() != zj.size()) throw InputError("pair columns differ in length");
    std::vector<double> scores(grid.m);
    std::vector<double> proj(zi.size());
    for (std::size_t k = 0; k < grid.m; ++k) {
        const auto& u = grid.directions[k];
        for (std::size_t r = 0; r < zi.size(); ++r) proj[r] = u[0] * zi[r] + u[1] * zj[r];
        scores[k] = score_feature(proj).score;
    }
    return scores;
}

namespace {

PairScore best_direction(std::span<const double> zi, std::span<const double> zj, const DirectionGrid& grid) {
    const std::vector<double> scores = projection_scores(zi, zj, grid);
    PairScore out;
    out.j = 1;
    out.direction = static_cast<std::size_t>(std::max_element(scores.begin(), scores.end()) - scores.begin());
    out.score = scores[out.direction];
    out.u_star = grid.directions[out.direction];
    return out;
}

}  // namespace

PairScore pair_score(std::span<const double> xi, std::span<const double> xj, const DirectionGrid& grid) {
    if (xi.size() != xj.size()) throw InputError("pair columns differ in length");
    if (xi.size() < 2) throw InputError("pair score needs at least 2 observations");
    const std::vector<double> zi = standardize(xi);
    const std::vector<double> zj = standardize(xj);
    return best_direction(zi, zj, grid);
}

std::vector<PairScore> all_pair_scores(const DatasetMatrix& X, const DirectionGrid& grid, std::size_t threads) {
    const std::size_t p = X.p();
    std::vector<std::vector<double>> z(p);
    parallel_for(p, threads, [&](std::size_t j) { z[j] = standardize(X.column(j)); });

    std::vector<PairScore> pairs;
    pairs.reserve(p * (p - 1) / 2);
    for (std::size_t i = 0; i < p; ++i) {
        for (std::size_t j = i + 1; j < p; ++j) pairs.push_back({i, j, 0.0, {1.0, 0.0}, 0});
    }
    parallel_for(pairs.size(), threads, [&](std::size_t k) {
        PairScore best = best_direction(z[pairs[k].i], z[pairs[k].j], grid);
        best.i = pairs[k].i;
        best.j = pairs[k].j;
        pairs[k] = best;
    });
    return pairs;
}

std::vector<std::size_t> combine_pair_screen(std::span<const FeatureScore> marginal,
                                             std::span<const PairScore> pairs, double alpha0, double dominance) {
    if (!(alpha0 > 0.0 && alpha0 <= 0.5)) throw InputError("alpha0 must lie in (0, 0.5]");
    std::set<std::size_t> chosen;
    for (std::size_t j = 0; j < marginal.size(); ++j) {
        if (marginal[j].score >= alpha0) chosen.insert(j);
    }
    for (const PairScore& pair : pairs) {
        if (pair.score < alpha0) continue;
        const double ui = std::abs(pair.u_star[0]);
        const double uj = std::abs(pair.u_star[1]);
        if (ui >= dominance) {
            chosen.insert(pair.i);
        } else if (uj >= dominance) {
            chosen.insert(pair.j);
        } else {
            chosen.insert(pair.i);
            chosen.insert(pair.j);
        }
    }
    return {chosen.begin(), chosen.end()};
}

std::vector<std::size_t> pairwise_screen(const DatasetMatrix& X, double alpha0, std::size_t m, std::size_t threads) {
    if (X.p() == 0) throw InputError("pairwise screen needs at least one feature");
    std::vector<FeatureScore> marginal(X.p());
    parallel_for(X.p(), threads, [&](std::size_t j) { marginal[j] = score_feature(X.column(j)); });
    if (X.p() < 2) return combine_pair_screen(marginal, {}, alpha0);
    const DirectionGrid grid = circle_grid(m);
    const std::vector<PairScore> pairs = all_pair_scores(X, grid, threads);
    return combine_pair_screen(marginal, pairs, alpha0);
}

}  // namespace cosci
