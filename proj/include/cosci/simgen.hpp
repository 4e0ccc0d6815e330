#pragma once

#include "cosci/distributions.hpp"

#include <Eigen/Dense>

#include <array>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace cosci {

/// Ground-truth clustering of one signal feature: which mode each observation came from.
struct SignalLabels {
    std::size_t feature = 0;   ///< 0-based column index
    std::size_t clusters = 0;  ///< number of distinct modes along this coordinate
    std::vector<int> labels;   ///< length n, values in [0, clusters)
};

/// n x p observations stored column by column, with optional simulation truth.
struct DatasetMatrix {
    std::size_t n = 0;
    std::vector<std::vector<double>> columns;
    std::vector<std::string> names;
    std::vector<std::size_t> signal_set;  ///< 0-based, ascending
    std::vector<SignalLabels> labels;
    std::uint64_t seed = 0;
    std::vector<std::string> notes;

    std::size_t p() const noexcept { return columns.size(); }
    std::span<const double> column(std::size_t j) const { return columns.at(j); }
    const SignalLabels* labels_for(std::size_t feature) const;
};

enum class CopulaKind { gaussian, student_t };

struct CopulaSpec {
    CopulaKind kind = CopulaKind::gaussian;
    Eigen::MatrixXd correlation;
    double dof = 2.0;  ///< t copula only

    /// k x k matrix with 1 on the diagonal and `rho` elsewhere.
    static Eigen::MatrixXd equicorrelation(std::size_t k, double rho);
};

/// Square-root factor L with L L^T = correlation. Throws InputError when the
/// matrix is not symmetric, lacks a unit diagonal, or is not positive semi-definite.
Eigen::MatrixXd correlation_factor(const Eigen::MatrixXd& correlation);

/// n x k copula uniforms (row i = observation i) from an existing engine.
Eigen::MatrixXd sample_copula_uniforms(const CopulaSpec& spec, std::size_t n, Engine& engine);

/// Draws n observations whose dependence is the given copula and whose
/// marginals are the given laws. Returns k columns of length n.
std::vector<std::vector<double>> sample_copula(const CopulaSpec& spec, std::span<const DistributionSpec> marginals,
                                               std::size_t n, std::uint64_t seed);

enum class DesignKind { I, II, III, IV, V, corr_V, calib };

struct Design {
    DesignKind kind = DesignKind::I;
    DistributionSpec calib_family = DistributionSpec::gaussian();  ///< used by calib only

    /// Accepts "I".."V", "corr_V" and "calib:<family>" (see parse_noise_family).
    static Design parse(const std::string& text);
    std::string name() const;
};

/// Generates one replicate of a simulation design with ground truth attached.
/// Identical (design, n, seed) always yield bit-identical matrices.
DatasetMatrix sample_experiment(const Design& design, std::size_t n, std::uint64_t seed);

/// Bivariate normal draw with mean `mean` and covariance factor `chol` (lower triangular).
std::array<double, 2> draw_bivariate(Engine& engine, const std::array<double, 2>& mean,
                                     const Eigen::Matrix2d& chol);

}  // namespace cosci
