#pragma once

#include "cosci/merge_engine.hpp"
#include "cosci/simgen.hpp"

#include <array>
#include <cstddef>
#include <span>
#include <vector>

namespace cosci {

/// m unit directions at angles pi (k - 1) / m, k = 1..m (half circle).
struct DirectionGrid {
    std::size_t m = 0;
    std::vector<double> angles;
    std::vector<std::array<double, 2>> directions;
};

struct PairScore {
    std::size_t i = 0;
    std::size_t j = 0;
    double score = 0.0;
    std::array<double, 2> u_star{1.0, 0.0};
    std::size_t direction = 0;  ///< index of u_star in the grid
};

/// For even m the grid is closed under swapping coordinates (up to sign),
/// bit for bit. Throws InputError for m < 2.
DirectionGrid direction_grid(std::size_t m);

/// Distinct projection lines of m equally spaced points on the unit circle.
/// u and -u score alike, so an even m yields direction_grid(m / 2) and an
/// odd m yields direction_grid(m). Throws InputError for m < 3.
DirectionGrid circle_grid(std::size_t points);

/// (x - mean) / sd with the sample sd. Throws InputError for a constant column.
std::vector<double> standardize(std::span<const double> x);

/// Clustering score of every grid projection of two standardized columns.
std::vector<double> projection_scores(std::span<const double> zi, std::span<const double> zj,
                                      const DirectionGrid& grid);

/// Best projection score of the pair; the first maximizing direction wins.
/// Columns are standardized first. The returned indices are 0 and 1.
PairScore pair_score(std::span<const double> xi, std::span<const double> xj, const DirectionGrid& grid);

/// All p (p - 1) / 2 pair scores in lexicographic (i, j) order.
std::vector<PairScore> all_pair_scores(const DatasetMatrix& X, const DirectionGrid& grid, std::size_t threads);

/// Marginal screen united with the thresholded pair rule: a passing pair adds
/// both features unless one direction component reaches `dominance`, in
/// which case only that feature is added.
std::vector<std::size_t> combine_pair_screen(std::span<const FeatureScore> marginal,
                                             std::span<const PairScore> pairs, double alpha0,
                                             double dominance = 0.95);

/// Scores, pairs and rule in one call; `m` counts points on the unit circle.
std::vector<std::size_t> pairwise_screen(const DatasetMatrix& X, double alpha0, std::size_t m, std::size_t threads);

}  // namespace cosci
