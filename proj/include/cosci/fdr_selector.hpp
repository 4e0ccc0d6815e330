#pragma once

#include "cosci/merge_engine.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace cosci {

/// psi_j = 2 S_j together with a stable ascending ordering.
struct PsiStats {
    std::vector<double> psi;
    std::vector<std::size_t> order;

    std::size_t size() const noexcept { return psi.size(); }
};

/// Empirical null: Beta(beta_a, beta_b) density with mixing proportion pi0,
/// fitted to the lowest values of psi up to `cutoff`.
struct NullModel {
    double pi0 = 1.0;
    double beta_a = 1.0;
    double beta_b = 1.0;
    double truncation_q = 0.9;
    double cutoff = 1.0;
    std::size_t truncated_count = 0;  ///< size of the fitted lower set
    double pi0_unclamped = 1.0;
    std::size_t iterations = 0;

    double pdf(double psi) const;
};

/// Lindsey estimate of the marginal psi density on a histogram over [0, 1].
struct MixtureDensity {
    std::vector<double> bin_edges;
    std::vector<double> bin_centers;
    std::vector<double> fitted_density;
    std::vector<double> counts;
    int basis_degree = 0;

    /// Riemann sum of the fitted density over the bins.
    double integral() const;
    /// Piecewise-linear between bin centers, constant beyond the outer centers.
    double evaluate(double psi) const;
};

struct SelectionResult {
    std::vector<double> T;
    std::size_t k_s = 0;
    std::size_t k_d = 0;
    std::vector<std::size_t> selected;  ///< 0-based, ascending
    std::optional<double> alpha0_hat;
    double delta_p = 0.0;
};

PsiStats compute_psi(std::span<const FeatureScore> scores);

/// Builds PsiStats from raw psi values in [0, 1].
PsiStats make_psi(std::vector<double> psi);

/// Floor applied to pi0 when none is given: 0.9 at q = 0.9, otherwise none.
double default_pi0_floor(double truncation_q);

/// Truncated-sample maximum likelihood fit of the Beta null.
/// pi0_floor <= 0 disables the floor. Throws InputError for too few values
/// below the cutoff and FitError for a degenerate set or non-convergence.
NullModel fit_empirical_null(const PsiStats& psi, double truncation_q, double pi0_floor);
NullModel fit_empirical_null(const PsiStats& psi, double truncation_q);

/// Poisson regression of histogram counts on a Legendre basis in the bin
/// centers. degree = 0 is automatic: the degree in [2, 10] with the smallest
/// BIC once there are at least 10 values per bin, degree 5 below that.
MixtureDensity lindsey_density(const PsiStats& psi, std::size_t bins = 60, int degree = 0);

/// T_j = pi0 f0(psi_j) / f(psi_j), clamped to [0, 1]; 1 where f vanishes.
std::vector<double> local_fdr(const NullModel& null, const MixtureDensity& mix, const PsiStats& psi);

/// min{p, 1 / ln p}.
double two_stage_delta(std::size_t p);

/// Two-stage (missed-discovery, then false-positive) selection on local fdr values.
SelectionResult two_stage_select(std::span<const double> T, double pi0_hat, std::span<const FeatureScore> scores);

struct DataDrivenConfig {
    std::size_t bins = 60;
    int degree = 0;
    std::optional<double> pi0_floor;  ///< default_pi0_floor(q) when unset
};

struct DataDrivenResult {
    PsiStats psi;
    NullModel null;
    MixtureDensity mixture;
    SelectionResult selection;
};

/// psi -> Beta null -> Lindsey density -> local fdr -> two-stage selection.
DataDrivenResult data_driven_alpha(std::span<const FeatureScore> scores, double truncation_q,
                                   const DataDrivenConfig& config = {});

}  // namespace cosci
