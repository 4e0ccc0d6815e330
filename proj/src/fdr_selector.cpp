#include "cosci/fdr_selector.hpp"

#include "cosci/error.hpp"

#include <Eigen/Dense>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <limits>
#include <mutex>
#include <numeric>
#include <string>

namespace cosci {

namespace {

constexpr double kPsiEps = 1e-12;
constexpr std::size_t kMinTruncated = 10;
constexpr int kSmallSampleDegree = 5;

double clamp_psi(double v) { return std::clamp(v, kPsiEps, 1.0 - kPsiEps); }

double log_beta_fn(double a, double b) {
    return boost::math::lgamma(a) + boost::math::lgamma(b) - boost::math::lgamma(a + b);
}

double beta_log_pdf(double x, double a, double b) {
    const double c = clamp_psi(x);
    return (a - 1.0) * std::log(c) + (b - 1.0) * std::log1p(-c) - log_beta_fn(a, b);
}

struct TruncatedSample {
    double sum_log = 0.0;
    double sum_log1m = 0.0;
    double count = 0.0;
    double cutoff = 1.0;
};

/// Negative profile log-likelihood over (log a, log b).
double null_objective(const gsl_vector* x, void* params) {
    const auto* s = static_cast<const TruncatedSample*>(params);
    const double la = gsl_vector_get(x, 0);
    const double lb = gsl_vector_get(x, 1);
    constexpr double kBad = 1e300;
    if (!(std::abs(la) <= 12.0 && std::abs(lb) <= 12.0)) return kBad;
    const double a = std::exp(la);
    const double b = std::exp(lb);
    double h = 0.0;
    try {
        h = boost::math::ibeta(a, b, s->cutoff);
    } catch (const std::exception&) {
        return kBad;
    }
    if (!(h > 0.0)) return kBad;
    const double ll = (a - 1.0) * s->sum_log + (b - 1.0) * s->sum_log1m - s->count * log_beta_fn(a, b) -
                      s->count * std::log(h);
    return std::isfinite(ll) ? -ll : kBad;
}

struct SimplexOutcome {
    double log_a = 0.0;
    double log_b = 0.0;
    double value = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
};

SimplexOutcome run_simplex(TruncatedSample& sample, double log_a, double log_b, double step) {
    gsl_multimin_function fn{&null_objective, 2, &sample};
    gsl_vector* x = gsl_vector_alloc(2);
    gsl_vector* steps = gsl_vector_alloc(2);
    gsl_vector_set(x, 0, log_a);
    gsl_vector_set(x, 1, log_b);
    gsl_vector_set_all(steps, step);
    gsl_multimin_fminimizer* m = gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2);
    gsl_multimin_fminimizer_set(m, &fn, x, steps);

    SimplexOutcome out;
    // ibeta rounding makes the surface ragged below ~1e-8 in log scale
    for (std::size_t it = 1; it <= 5000; ++it) {
        if (gsl_multimin_fminimizer_iterate(m) != GSL_SUCCESS) {
            out.converged = gsl_multimin_fminimizer_size(m) < 1e-5;
            break;
        }
        out.iterations = it;
        if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(m), 1e-7) == GSL_SUCCESS) {
            out.converged = true;
            break;
        }
    }
    out.log_a = gsl_vector_get(m->x, 0);
    out.log_b = gsl_vector_get(m->x, 1);
    out.value = m->fval;
    gsl_multimin_fminimizer_free(m);
    gsl_vector_free(steps);
    gsl_vector_free(x);
    return out;
}

std::vector<double> legendre_row(double t, int degree) {
    std::vector<double> row(static_cast<std::size_t>(degree) + 1);
    row[0] = 1.0;
    if (degree >= 1) row[1] = t;
    for (int k = 2; k <= degree; ++k) {
        const auto kk = static_cast<std::size_t>(k);
        row[kk] = ((2.0 * k - 1.0) * t * row[kk - 1] - (k - 1.0) * row[kk - 2]) / k;
    }
    return row;
}

struct PoissonFit {
    Eigen::VectorXd mu;
    double log_likelihood = 0.0;
    bool converged = false;
};

double poisson_deviance(const Eigen::VectorXd& y, const Eigen::VectorXd& mu) {
    double dev = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        if (y[i] > 0.0) dev += y[i] * std::log(y[i] / mu[i]);
        dev -= y[i] - mu[i];
    }
    return 2.0 * dev;
}

PoissonFit poisson_irls(const Eigen::MatrixXd& X, const Eigen::VectorXd& y) {
    PoissonFit fit;
    Eigen::VectorXd mu = (y.array() + 0.1).matrix();
    Eigen::VectorXd eta = mu.array().log().matrix();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(X.cols());
    double dev = poisson_deviance(y, mu);
    bool have_beta = false;

    for (int it = 0; it < 200; ++it) {
        const Eigen::VectorXd z = eta + ((y - mu).array() / mu.array()).matrix();
        const Eigen::MatrixXd xtw = X.transpose() * mu.asDiagonal();
        const Eigen::LDLT<Eigen::MatrixXd> ldlt(xtw * X);
        if (ldlt.info() != Eigen::Success) return fit;
        Eigen::VectorXd next = ldlt.solve(xtw * z);
        if (!next.allFinite()) return fit;

        // step halving keeps the deviance from increasing
        double next_dev = std::numeric_limits<double>::infinity();
        Eigen::VectorXd next_eta, next_mu;
        for (int half = 0; half < 30; ++half) {
            next_eta = X * next;
            next_mu = next_eta.array().exp().matrix();
            if (next_mu.allFinite() && (next_mu.array() > 0.0).all()) {
                next_dev = poisson_deviance(y, next_mu);
                if (std::isfinite(next_dev) && (!have_beta || next_dev <= dev + 1e-12 * std::abs(dev))) break;
            }
            if (!have_beta) break;
            next = 0.5 * (next + beta);
            next_dev = std::numeric_limits<double>::infinity();
        }
        if (!std::isfinite(next_dev)) return fit;

        const double change = std::abs(next_dev - dev) / (std::abs(next_dev) + 0.1);
        beta = next;
        eta = next_eta;
        mu = next_mu;
        dev = next_dev;
        if (have_beta && change < 1e-10) {
            fit.converged = true;
            break;
        }
        have_beta = true;
    }
    if (!fit.converged) return fit;

    fit.mu = mu;
    double ll = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        ll += y[i] * std::log(mu[i]) - mu[i] - boost::math::lgamma(y[i] + 1.0);
    }
    fit.log_likelihood = ll;
    return fit;
}

}  // namespace

double NullModel::pdf(double psi) const { return std::exp(beta_log_pdf(psi, beta_a, beta_b)); }

double MixtureDensity::integral() const {
    double sum = 0.0;
    for (std::size_t b = 0; b < fitted_density.size(); ++b) sum += fitted_density[b] * (bin_edges[b + 1] - bin_edges[b]);
    return sum;
}

double MixtureDensity::evaluate(double psi) const {
    if (bin_centers.empty()) return 0.0;
    if (psi <= bin_centers.front()) return fitted_density.front();
    if (psi >= bin_centers.back()) return fitted_density.back();
    const auto it = std::upper_bound(bin_centers.begin(), bin_centers.end(), psi);
    const auto hi = static_cast<std::size_t>(it - bin_centers.begin());
    const std::size_t lo = hi - 1;
    const double w = (psi - bin_centers[lo]) / (bin_centers[hi] - bin_centers[lo]);
    return fitted_density[lo] + w * (fitted_density[hi] - fitted_density[lo]);
}

PsiStats make_psi(std::vector<double> psi) {
    if (psi.size() < 2) throw InputError("psi needs at least 2 features");
    for (double v : psi) {
        if (!(v >= 0.0 && v <= 1.0)) throw InputError("psi values must lie in [0, 1]");
    }
    PsiStats out;
    out.psi = std::move(psi);
    out.order.resize(out.psi.size());
    std::iota(out.order.begin(), out.order.end(), std::size_t{0});
    std::stable_sort(out.order.begin(), out.order.end(),
                     [&](std::size_t a, std::size_t b) { return out.psi[a] < out.psi[b]; });
    return out;
}

PsiStats compute_psi(std::span<const FeatureScore> scores) {
    std::vector<double> psi;
    psi.reserve(scores.size());
    for (const FeatureScore& s : scores) psi.push_back(2.0 * s.score);
    return make_psi(std::move(psi));
}

double default_pi0_floor(double truncation_q) { return truncation_q == 0.9 ? 0.9 : 0.0; }

NullModel fit_empirical_null(const PsiStats& psi, double truncation_q) {
    return fit_empirical_null(psi, truncation_q, default_pi0_floor(truncation_q));
}

NullModel fit_empirical_null(const PsiStats& psi, double truncation_q, double pi0_floor) {
    if (!(truncation_q >= 0.5 && truncation_q < 1.0)) throw InputError("truncation q must lie in [0.5, 1)");
    if (pi0_floor > 1.0) throw InputError("pi0 floor must not exceed 1");
    const std::size_t p = psi.size();
    const auto k = static_cast<std::size_t>(std::floor(truncation_q * static_cast<double>(p)));
    if (k < kMinTruncated) {
        throw InputError("empirical null needs at least " + std::to_string(kMinTruncated) +
                         " values below the cutoff, got " + std::to_string(k));
    }

    TruncatedSample sample;
    sample.count = static_cast<double>(k);
    double mean = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
        const double v = clamp_psi(psi.psi[psi.order[r]]);
        sample.sum_log += std::log(v);
        sample.sum_log1m += std::log1p(-v);
        mean += v;
    }
    const double lowest = psi.psi[psi.order.front()];
    const double cutoff = psi.psi[psi.order[k - 1]];
    if (lowest == cutoff) throw FitError("empirical null", "all values below the cutoff are equal");
    sample.cutoff = clamp_psi(cutoff);

    // method-of-moments start on the truncated set
    mean /= sample.count;
    double var = 0.0;
    for (std::size_t r = 0; r < k; ++r) {
        const double d = clamp_psi(psi.psi[psi.order[r]]) - mean;
        var += d * d;
    }
    var /= sample.count - 1.0;
    double a0 = 1.0, b0 = 1.0;
    const double common = mean * (1.0 - mean) / var - 1.0;
    if (var > 0.0 && common > 0.0) {
        a0 = std::clamp(mean * common, 1e-3, 1e4);
        b0 = std::clamp((1.0 - mean) * common, 1e-3, 1e4);
    }

    // GSL aborts on errors by default; failures are reported through return codes instead
    static std::once_flag handler_off;
    std::call_once(handler_off, [] { gsl_set_error_handler_off(); });
    SimplexOutcome first = run_simplex(sample, std::log(a0), std::log(b0), 0.5);
    SimplexOutcome polished = first.converged ? run_simplex(sample, first.log_a, first.log_b, 0.05) : first;

    if (!first.converged || !polished.converged || !(polished.value < 1e299)) {
        throw FitError("empirical null", "Beta likelihood maximization did not converge (a = " +
                                             std::to_string(std::exp(polished.log_a)) +
                                             ", b = " + std::to_string(std::exp(polished.log_b)) + ", " +
                                             std::to_string(first.iterations + polished.iterations) + " iterations)");
    }

    NullModel null;
    null.beta_a = std::exp(polished.log_a);
    null.beta_b = std::exp(polished.log_b);
    null.truncation_q = truncation_q;
    null.cutoff = cutoff;
    null.truncated_count = k;
    null.iterations = first.iterations + polished.iterations;
    const double h = boost::math::ibeta(null.beta_a, null.beta_b, sample.cutoff);
    null.pi0_unclamped = static_cast<double>(k) / (static_cast<double>(p) * h);
    null.pi0 = std::min(1.0, null.pi0_unclamped);
    if (pi0_floor > 0.0) null.pi0 = std::max(null.pi0, pi0_floor);
    return null;
}

MixtureDensity lindsey_density(const PsiStats& psi, std::size_t bins, int degree) {
    if (bins < 20) throw InputError("Lindsey density needs at least 20 bins");
    if (degree != 0 && (degree < 2 || static_cast<std::size_t>(degree) >= bins)) {
        throw InputError("Lindsey basis degree must be 0 (automatic) or in [2, bins)");
    }
    if (psi.size() == 0) throw InputError("Lindsey density: empty histogram");

    MixtureDensity out;
    const double width = 1.0 / static_cast<double>(bins);
    out.bin_edges.resize(bins + 1);
    out.bin_centers.resize(bins);
    out.counts.assign(bins, 0.0);
    for (std::size_t b = 0; b <= bins; ++b) out.bin_edges[b] = static_cast<double>(b) * width;
    out.bin_edges.back() = 1.0;
    for (std::size_t b = 0; b < bins; ++b) out.bin_centers[b] = 0.5 * (out.bin_edges[b] + out.bin_edges[b + 1]);
    for (double v : psi.psi) {
        const auto b = std::min(bins - 1, static_cast<std::size_t>(std::floor(v * static_cast<double>(bins))));
        out.counts[b] += 1.0;
    }
    const double total = static_cast<double>(psi.size());
    const auto nonempty = static_cast<int>(std::count_if(out.counts.begin(), out.counts.end(), [](double c) { return c > 0.0; }));

    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(out.counts.data(), static_cast<Eigen::Index>(bins));
    auto design = [&](int d) {
        Eigen::MatrixXd X(static_cast<Eigen::Index>(bins), d + 1);
        for (std::size_t b = 0; b < bins; ++b) {
            const std::vector<double> row = legendre_row(2.0 * out.bin_centers[b] - 1.0, d);
            for (int c = 0; c <= d; ++c) X(static_cast<Eigen::Index>(b), c) = row[static_cast<std::size_t>(c)];
        }
        return X;
    };

    // too few values for BIC to tell structure from histogram noise
    if (degree == 0 && psi.size() < 10 * bins && nonempty > 2) degree = std::min(kSmallSampleDegree, nonempty - 1);

    PoissonFit best;
    int best_degree = -1;
    if (degree != 0) {
        best = poisson_irls(design(degree), y);
        if (!best.converged) {
            throw FitError("lindsey density", "Poisson regression did not converge at degree " + std::to_string(degree));
        }
        best_degree = degree;
    } else {
        const int cap = std::max(0, std::min(10, nonempty - 1));
        double best_bic = std::numeric_limits<double>::infinity();
        for (int d = std::min(2, cap); d <= cap; ++d) {
            PoissonFit fit = poisson_irls(design(d), y);
            if (!fit.converged) continue;
            const double bic = -2.0 * fit.log_likelihood + std::log(total) * (d + 1);
            if (bic < best_bic) {
                best_bic = bic;
                best = std::move(fit);
                best_degree = d;
            }
        }
        if (best_degree < 0) throw FitError("lindsey density", "Poisson regression did not converge at any degree");
    }

    out.basis_degree = best_degree;
    out.fitted_density.resize(bins);
    for (std::size_t b = 0; b < bins; ++b) out.fitted_density[b] = best.mu[static_cast<Eigen::Index>(b)] / (total * width);
    const double mass = out.integral();
    for (double& f : out.fitted_density) f = std::max(f / mass, DBL_MIN);
    return out;
}

std::vector<double> local_fdr(const NullModel& null, const MixtureDensity& mix, const PsiStats& psi) {
    std::vector<double> T(psi.size());
    for (std::size_t j = 0; j < psi.size(); ++j) {
        const double f = mix.evaluate(psi.psi[j]);
        const double t = null.pi0 * null.pdf(psi.psi[j]) / f;
        T[j] = (f > 0.0 && std::isfinite(t)) ? std::clamp(t, 0.0, 1.0) : 1.0;
    }
    return T;
}

double two_stage_delta(std::size_t p) {
    if (p < 2) throw InputError("two-stage selection needs p >= 2");
    return std::min(static_cast<double>(p), 1.0 / std::log(static_cast<double>(p)));
}

SelectionResult two_stage_select(std::span<const double> T, double pi0_hat, std::span<const FeatureScore> scores) {
    const std::size_t p = T.size();
    if (p < 3) throw InputError("two-stage selection needs p >= 3");
    if (scores.size() != p) throw InputError("two-stage selection: T and scores differ in length");
    for (double t : T) {
        if (!(t >= 0.0 && t <= 1.0)) throw InputError("local fdr values must lie in [0, 1]");
    }

    SelectionResult out;
    out.T.assign(T.begin(), T.end());
    out.delta_p = two_stage_delta(p);
    std::vector<std::size_t> order(p);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return T[a] < T[b]; });

    // Stage 1: smallest j whose upper tail sum of (1 - T) stays within the bound.
    const double bound = static_cast<double>(p) * (1.0 - pi0_hat) * out.delta_p;
    out.k_s = p;
    double tail = 0.0;
    for (std::size_t j = p; j >= 1; --j) {
        tail += 1.0 - T[order[j - 1]];
        if (tail > bound) break;
        out.k_s = j;
    }

    // Stage 2: largest j <= k_s whose running mean of T stays within delta_p.
    double prefix = 0.0;
    for (std::size_t j = 1; j <= out.k_s; ++j) {
        prefix += T[order[j - 1]];
        if (prefix / static_cast<double>(j) <= out.delta_p) out.k_d = j;
    }

    if (out.k_d > 0) {
        const double cut = T[order[out.k_d - 1]];
        for (std::size_t j = 0; j < p; ++j) {
            if (T[j] <= cut) out.selected.push_back(j);
        }
        double lowest = scores[out.selected.front()].score;
        for (std::size_t j : out.selected) lowest = std::min(lowest, scores[j].score);
        out.alpha0_hat = lowest;
    }
    return out;
}

DataDrivenResult data_driven_alpha(std::span<const FeatureScore> scores, double truncation_q,
                                   const DataDrivenConfig& config) {
    DataDrivenResult out;
    out.psi = compute_psi(scores);
    const double floor = config.pi0_floor.value_or(default_pi0_floor(truncation_q));
    try {
        out.null = fit_empirical_null(out.psi, truncation_q, floor);
    } catch (const InputError& e) {
        throw FitError("empirical null", e.what());
    }
    try {
        out.mixture = lindsey_density(out.psi, config.bins, config.degree);
    } catch (const InputError& e) {
        throw FitError("lindsey density", e.what());
    }
    const std::vector<double> T = local_fdr(out.null, out.mixture, out.psi);
    out.selection = two_stage_select(T, out.null.pi0, scores);
    return out;
}

}  // namespace cosci
