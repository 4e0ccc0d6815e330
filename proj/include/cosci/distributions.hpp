#pragma once

#include "cosci/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace cosci {

enum class DistKind { gaussian, student_t, cauchy, exponential, laplace, lognormal, beta, gev, triangular, mixture };

/// A univariate law used for noise columns, signal mixtures and copula marginals.
///
/// Parameter layout by kind:
///   gaussian(mean, sd)           student_t(dof)            cauchy(location, scale)
///   exponential(rate)            laplace(location, scale)  lognormal(meanlog, sdlog)
///   beta(a, b)                   gev(shape, location, scale)
///   triangular(lower, mode, upper)
/// Mixtures carry weighted components instead of params.
struct DistributionSpec {
    DistKind kind = DistKind::gaussian;
    std::vector<double> params{0.0, 1.0};
    std::vector<std::pair<double, DistributionSpec>> components;

    static DistributionSpec gaussian(double mean = 0.0, double sd = 1.0);
    static DistributionSpec student_t(double dof);
    static DistributionSpec cauchy(double location = 0.0, double scale = 1.0);
    static DistributionSpec exponential(double rate = 1.0);
    static DistributionSpec laplace(double location = 0.0, double scale = 1.0);
    static DistributionSpec lognormal(double meanlog, double sdlog);
    static DistributionSpec beta(double a, double b);
    static DistributionSpec gev(double shape, double location = 0.0, double scale = 1.0);
    static DistributionSpec triangular(double lower, double mode, double upper);
    static DistributionSpec mixture(std::vector<std::pair<double, DistributionSpec>> components);

    /// Throws InputError when parameters are out of range.
    void validate() const;

    double cdf(double x) const;
    double quantile(double u) const;
    double pdf(double x) const;

    /// One draw; for mixtures `component` receives the chosen component index.
    double draw(Engine& engine, int* component = nullptr) const;

    std::string describe() const;
};

/// Parses the short names used on the command line, e.g. "gaussian", "t1",
/// "t5", "cauchy", "exp", "laplace", "gev", "beta13", "triangle".
DistributionSpec parse_noise_family(const std::string& name);

struct Draws {
    std::vector<double> values;
    std::vector<int> components;  ///< per-draw mixture component; empty for plain laws
};

/// n i.i.d. draws from a dedicated stream of `seed`.
Draws sample_distribution(const DistributionSpec& spec, std::size_t n, std::uint64_t seed,
                          std::uint64_t stream = 0);

/// n i.i.d. draws from an existing engine.
Draws sample_distribution(const DistributionSpec& spec, std::size_t n, Engine& engine);

}  // namespace cosci
