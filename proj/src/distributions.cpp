#include "cosci/distributions.hpp"

#include "cosci/error.hpp"

#include <boost/math/distributions/beta.hpp>
#include <boost/math/distributions/cauchy.hpp>
#include <boost/math/distributions/exponential.hpp>
#include <boost/math/distributions/laplace.hpp>
#include <boost/math/distributions/lognormal.hpp>
#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/distributions/triangular.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace cosci {

namespace bm = boost::math;

namespace {

std::size_t expected_params(DistKind kind) {
    switch (kind) {
        case DistKind::student_t:
        case DistKind::exponential:
            return 1;
        case DistKind::gev:
        case DistKind::triangular:
            return 3;
        case DistKind::mixture:
            return 0;
        default:
            return 2;
    }
}

const char* kind_name(DistKind kind) {
    switch (kind) {
        case DistKind::gaussian: return "gaussian";
        case DistKind::student_t: return "student_t";
        case DistKind::cauchy: return "cauchy";
        case DistKind::exponential: return "exponential";
        case DistKind::laplace: return "laplace";
        case DistKind::lognormal: return "lognormal";
        case DistKind::beta: return "beta";
        case DistKind::gev: return "gev";
        case DistKind::triangular: return "triangular";
        case DistKind::mixture: return "mixture";
    }
    return "unknown";
}

DistributionSpec make(DistKind kind, std::vector<double> params) {
    DistributionSpec spec;
    spec.kind = kind;
    spec.params = std::move(params);
    spec.validate();
    return spec;
}

double standard_normal(Engine& engine) { return std::normal_distribution<double>(0.0, 1.0)(engine); }

}  // namespace

DistributionSpec DistributionSpec::gaussian(double mean, double sd) { return make(DistKind::gaussian, {mean, sd}); }
DistributionSpec DistributionSpec::student_t(double dof) { return make(DistKind::student_t, {dof}); }
DistributionSpec DistributionSpec::cauchy(double location, double scale) {
    return make(DistKind::cauchy, {location, scale});
}
DistributionSpec DistributionSpec::exponential(double rate) { return make(DistKind::exponential, {rate}); }
DistributionSpec DistributionSpec::laplace(double location, double scale) {
    return make(DistKind::laplace, {location, scale});
}
DistributionSpec DistributionSpec::lognormal(double meanlog, double sdlog) {
    return make(DistKind::lognormal, {meanlog, sdlog});
}
DistributionSpec DistributionSpec::beta(double a, double b) { return make(DistKind::beta, {a, b}); }
DistributionSpec DistributionSpec::gev(double shape, double location, double scale) {
    return make(DistKind::gev, {shape, location, scale});
}
DistributionSpec DistributionSpec::triangular(double lower, double mode, double upper) {
    return make(DistKind::triangular, {lower, mode, upper});
}
DistributionSpec DistributionSpec::mixture(std::vector<std::pair<double, DistributionSpec>> components) {
    DistributionSpec spec;
    spec.kind = DistKind::mixture;
    spec.params.clear();
    spec.components = std::move(components);
    spec.validate();
    return spec;
}

void DistributionSpec::validate() const {
    if (kind == DistKind::mixture) {
        if (components.empty()) throw InputError("mixture needs at least one component");
        double total = 0.0;
        for (const auto& [w, c] : components) {
            if (!(w > 0.0)) throw InputError("mixture weights must be positive");
            c.validate();
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-12) throw InputError("mixture weights must sum to 1");
        return;
    }
    if (params.size() != expected_params(kind)) {
        throw InputError(std::string(kind_name(kind)) + ": wrong parameter count");
    }
    for (double v : params) {
        if (!std::isfinite(v)) throw InputError(std::string(kind_name(kind)) + ": non-finite parameter");
    }
    auto positive = [&](std::size_t i, const char* what) {
        if (!(params[i] > 0.0)) throw InputError(std::string(kind_name(kind)) + ": " + what + " must be positive");
    };
    switch (kind) {
        case DistKind::gaussian:
        case DistKind::cauchy:
        case DistKind::laplace:
        case DistKind::lognormal:
            positive(1, "scale");
            break;
        case DistKind::student_t:
            positive(0, "degrees of freedom");
            break;
        case DistKind::exponential:
            positive(0, "rate");
            break;
        case DistKind::beta:
            positive(0, "shape a");
            positive(1, "shape b");
            break;
        case DistKind::gev:
            positive(2, "scale");
            break;
        case DistKind::triangular:
            if (!(params[0] < params[2] && params[0] <= params[1] && params[1] <= params[2])) {
                throw InputError("triangular: need lower <= mode <= upper and lower < upper");
            }
            break;
        case DistKind::mixture:
            break;
    }
}

double DistributionSpec::cdf(double x) const {
    switch (kind) {
        case DistKind::gaussian: return bm::cdf(bm::normal(params[0], params[1]), x);
        case DistKind::student_t: return bm::cdf(bm::students_t(params[0]), x);
        case DistKind::cauchy: return bm::cdf(bm::cauchy(params[0], params[1]), x);
        case DistKind::exponential: return x <= 0.0 ? 0.0 : bm::cdf(bm::exponential(params[0]), x);
        case DistKind::laplace: return bm::cdf(bm::laplace(params[0], params[1]), x);
        case DistKind::lognormal: return x <= 0.0 ? 0.0 : bm::cdf(bm::lognormal(params[0], params[1]), x);
        case DistKind::beta:
            if (x <= 0.0) return 0.0;
            if (x >= 1.0) return 1.0;
            return bm::cdf(bm::beta_distribution<>(params[0], params[1]), x);
        case DistKind::gev: {
            const double z = (x - params[1]) / params[2];
            const double xi = params[0];
            if (xi == 0.0) return std::exp(-std::exp(-z));
            const double t = 1.0 + xi * z;
            if (t <= 0.0) return xi > 0.0 ? 0.0 : 1.0;
            return std::exp(-std::pow(t, -1.0 / xi));
        }
        case DistKind::triangular:
            if (x <= params[0]) return 0.0;
            if (x >= params[2]) return 1.0;
            return bm::cdf(bm::triangular(params[0], params[1], params[2]), x);
        case DistKind::mixture: {
            double total = 0.0;
            for (const auto& [w, c] : components) total += w * c.cdf(x);
            return std::clamp(total, 0.0, 1.0);
        }
    }
    return 0.0;
}

double DistributionSpec::pdf(double x) const {
    switch (kind) {
        case DistKind::gaussian: return bm::pdf(bm::normal(params[0], params[1]), x);
        case DistKind::student_t: return bm::pdf(bm::students_t(params[0]), x);
        case DistKind::cauchy: return bm::pdf(bm::cauchy(params[0], params[1]), x);
        case DistKind::exponential: return x < 0.0 ? 0.0 : bm::pdf(bm::exponential(params[0]), x);
        case DistKind::laplace: return bm::pdf(bm::laplace(params[0], params[1]), x);
        case DistKind::lognormal: return x <= 0.0 ? 0.0 : bm::pdf(bm::lognormal(params[0], params[1]), x);
        case DistKind::beta:
            if (x < 0.0 || x > 1.0) return 0.0;
            return bm::pdf(bm::beta_distribution<>(params[0], params[1]), x);
        case DistKind::gev: {
            const double z = (x - params[1]) / params[2];
            const double xi = params[0];
            if (xi == 0.0) return std::exp(-z - std::exp(-z)) / params[2];
            const double t = 1.0 + xi * z;
            if (t <= 0.0) return 0.0;
            return std::pow(t, -1.0 / xi - 1.0) * std::exp(-std::pow(t, -1.0 / xi)) / params[2];
        }
        case DistKind::triangular:
            if (x < params[0] || x > params[2]) return 0.0;
            return bm::pdf(bm::triangular(params[0], params[1], params[2]), x);
        case DistKind::mixture: {
            double total = 0.0;
            for (const auto& [w, c] : components) total += w * c.pdf(x);
            return total;
        }
    }
    return 0.0;
}

double DistributionSpec::quantile(double u) const {
    if (!(u > 0.0 && u < 1.0)) throw InputError("quantile: probability must lie in (0, 1)");
    switch (kind) {
        case DistKind::gaussian: return bm::quantile(bm::normal(params[0], params[1]), u);
        case DistKind::student_t: return bm::quantile(bm::students_t(params[0]), u);
        case DistKind::cauchy: return bm::quantile(bm::cauchy(params[0], params[1]), u);
        case DistKind::exponential: return bm::quantile(bm::exponential(params[0]), u);
        case DistKind::laplace: return bm::quantile(bm::laplace(params[0], params[1]), u);
        case DistKind::lognormal: return bm::quantile(bm::lognormal(params[0], params[1]), u);
        case DistKind::beta: return bm::quantile(bm::beta_distribution<>(params[0], params[1]), u);
        case DistKind::gev: {
            const double xi = params[0];
            const double w = -std::log(u);
            const double z = xi == 0.0 ? -std::log(w) : (std::pow(w, -xi) - 1.0) / xi;
            return params[1] + params[2] * z;
        }
        case DistKind::triangular: return bm::quantile(bm::triangular(params[0], params[1], params[2]), u);
        case DistKind::mixture: {
            // the mixture quantile is bracketed by the component quantiles at the same level
            double lo = components.front().second.quantile(u);
            double hi = lo;
            for (const auto& [w, c] : components) {
                const double q = c.quantile(u);
                lo = std::min(lo, q);
                hi = std::max(hi, q);
            }
            for (int iter = 0; iter < 200 && hi - lo > 1e-15 * std::max(1.0, std::abs(lo) + std::abs(hi)); ++iter) {
                const double mid = 0.5 * (lo + hi);
                if (cdf(mid) < u) {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            return 0.5 * (lo + hi);
        }
    }
    return 0.0;
}

double DistributionSpec::draw(Engine& engine, int* component) const {
    switch (kind) {
        case DistKind::gaussian: return params[0] + params[1] * standard_normal(engine);
        case DistKind::student_t: return std::student_t_distribution<double>(params[0])(engine);
        case DistKind::cauchy:
            return params[0] + params[1] * std::tan(std::numbers::pi * (uniform_open(engine) - 0.5));
        case DistKind::exponential: return -std::log(uniform_open(engine)) / params[0];
        case DistKind::laplace: {
            const double e1 = -std::log(uniform_open(engine));
            const double e2 = -std::log(uniform_open(engine));
            return params[0] + params[1] * (e1 - e2);
        }
        case DistKind::lognormal: return std::exp(params[0] + params[1] * standard_normal(engine));
        case DistKind::beta: {
            const double g1 = std::gamma_distribution<double>(params[0], 1.0)(engine);
            const double g2 = std::gamma_distribution<double>(params[1], 1.0)(engine);
            return g1 / (g1 + g2);
        }
        case DistKind::gev:
        case DistKind::triangular: return quantile(uniform_open(engine));
        case DistKind::mixture: {
            const double u = uniform_open(engine);
            double cumulative = 0.0;
            std::size_t pick = components.size() - 1;
            for (std::size_t i = 0; i < components.size(); ++i) {
                cumulative += components[i].first;
                if (u < cumulative) {
                    pick = i;
                    break;
                }
            }
            if (component != nullptr) *component = static_cast<int>(pick);
            return components[pick].second.draw(engine);
        }
    }
    return 0.0;
}

std::string DistributionSpec::describe() const {
    std::ostringstream os;
    os << kind_name(kind) << '(';
    if (kind == DistKind::mixture) {
        for (std::size_t i = 0; i < components.size(); ++i) {
            if (i) os << " + ";
            os << components[i].first << '*' << components[i].second.describe();
        }
    } else {
        for (std::size_t i = 0; i < params.size(); ++i) {
            if (i) os << ", ";
            os << params[i];
        }
    }
    os << ')';
    return os.str();
}

DistributionSpec parse_noise_family(const std::string& name) {
    if (name == "gaussian" || name == "normal") return DistributionSpec::gaussian();
    if (name == "cauchy") return DistributionSpec::cauchy();
    if (name == "exp" || name == "exponential") return DistributionSpec::exponential(1.0);
    if (name == "laplace") return DistributionSpec::laplace(0.0, 1.0);
    if (name == "gev") return DistributionSpec::gev(0.8);
    if (name == "beta13") return DistributionSpec::beta(1.0, 3.0);
    if (name == "triangle" || name == "triangular") return DistributionSpec::triangular(0.0, 0.8, 1.0);
    if (name.size() > 1 && name[0] == 't') {
        try {
            std::size_t used = 0;
            const double dof = std::stod(name.substr(1), &used);
            if (used == name.size() - 1) return DistributionSpec::student_t(dof);
        } catch (const std::exception&) {
        }
    }
    throw InputError("unknown noise family '" + name + "'");
}

Draws sample_distribution(const DistributionSpec& spec, std::size_t n, Engine& engine) {
    spec.validate();
    Draws out;
    out.values.resize(n);
    const bool mixed = spec.kind == DistKind::mixture;
    if (mixed) out.components.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.values[i] = spec.draw(engine, mixed ? &out.components[i] : nullptr);
    }
    return out;
}

Draws sample_distribution(const DistributionSpec& spec, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
    Engine engine = make_stream(seed, stream);
    return sample_distribution(spec, n, engine);
}

}  // namespace cosci
