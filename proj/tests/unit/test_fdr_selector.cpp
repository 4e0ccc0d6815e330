#include "cosci/distributions.hpp"
#include "cosci/error.hpp"
#include "cosci/fdr_selector.hpp"
#include "cosci/pipeline.hpp"
#include "oracles/direct_formulas.hpp"

#include <doctest.h>

#include <boost/math/distributions/beta.hpp>

#include <cmath>

using namespace cosci;

namespace {

std::vector<FeatureScore> as_scores(const std::vector<double>& s) {
    std::vector<FeatureScore> out;
    for (double v : s) out.push_back({v, std::nullopt, std::nullopt});
    return out;
}

std::vector<double> beta_draws(double a, double b, std::size_t n, std::uint64_t seed) {
    return sample_distribution(DistributionSpec::beta(a, b), n, seed, 0).values;
}

}  // namespace

TEST_CASE("compute_psi doubles scores and sorts stably") {
    const PsiStats p = compute_psi(as_scores({0.5, 0.25}));
    CHECK(p.psi == std::vector<double>{1.0, 0.5});
    CHECK(p.order == std::vector<std::size_t>{1, 0});
    const PsiStats q = compute_psi(as_scores({0.1, 0.1, 0.1}));
    CHECK(q.order == std::vector<std::size_t>{0, 1, 2});
    for (double v : q.psi) CHECK(v == 0.2);
}

TEST_CASE("empirical null recovers a clean Beta(1, 9)") {
    const PsiStats psi = make_psi(beta_draws(1, 9, 2000, 17));
    const NullModel null = fit_empirical_null(psi, 0.9);
    CHECK(null.beta_a == doctest::Approx(1.0).epsilon(0.2));
    CHECK(null.beta_b >= 7.0);
    CHECK(null.beta_b <= 11.0);
    CHECK(null.pi0 >= 0.9);
    CHECK(null.pi0 <= 1.0);
    CHECK(null.truncated_count == 1800);
}

TEST_CASE("empirical null with contamination above the cutoff") {
    std::vector<double> v = beta_draws(1, 9, 1800, 18);
    Engine e = make_stream(18, 1);
    for (int i = 0; i < 200; ++i) v.push_back(0.9 + 0.01 * uniform_open(e));
    const NullModel null = fit_empirical_null(make_psi(v), 0.9, 0.0);
    CHECK(null.pi0 >= 0.85);
    CHECK(null.pi0 <= 0.95);
}

TEST_CASE("empirical null errors") {
    CHECK_THROWS_AS(fit_empirical_null(make_psi(std::vector<double>(100, 0.2)), 0.9), FitError);
    CHECK_THROWS_AS(fit_empirical_null(make_psi(beta_draws(1, 9, 8, 1)), 0.9), InputError);
    CHECK_THROWS_AS(fit_empirical_null(make_psi(beta_draws(1, 9, 100, 1)), 0.4), InputError);
}

TEST_CASE("default pi0 floor") {
    CHECK(default_pi0_floor(0.9) == 0.9);
    CHECK(default_pi0_floor(0.7) == 0.0);
}

TEST_CASE("Lindsey density on uniform data") {
    const PsiStats psi = make_psi(sample_distribution(DistributionSpec::beta(1, 1), 100000, 5, 0).values);
    const MixtureDensity mix = lindsey_density(psi);
    CHECK(mix.integral() == doctest::Approx(1.0).epsilon(0.02));
    for (std::size_t b = 1; b + 1 < mix.fitted_density.size(); ++b) CHECK(std::abs(mix.fitted_density[b] - 1.0) <= 0.05);
}

TEST_CASE("Lindsey density on Beta(2, 5) data") {
    const PsiStats psi = make_psi(beta_draws(2, 5, 100000, 6));
    const MixtureDensity mix = lindsey_density(psi);
    const boost::math::beta_distribution<> truth(2, 5);
    double worst = 0.0;
    for (double x = 0.05; x <= 0.95 + 1e-12; x += 0.005) worst = std::max(worst, std::abs(mix.evaluate(x) - boost::math::pdf(truth, x)));
    CHECK(worst <= 0.1);
    for (double f : mix.fitted_density) CHECK(f > 0.0);
}

TEST_CASE("Lindsey density with a fixed degree and bad arguments") {
    const PsiStats psi = make_psi(beta_draws(2, 5, 5000, 7));
    CHECK(lindsey_density(psi, 60, 5).basis_degree == 5);
    CHECK_THROWS_AS(lindsey_density(psi, 10, 5), InputError);
    CHECK_THROWS_AS(lindsey_density(psi, 60, 1), InputError);
}

TEST_CASE("automatic Lindsey degree falls back to 5 below 10 values per bin") {
    CHECK(lindsey_density(make_psi(beta_draws(2, 5, 50, 8))).basis_degree == 5);
    CHECK(lindsey_density(make_psi(beta_draws(2, 5, 599, 8))).basis_degree == 5);
    const int big = lindsey_density(make_psi(beta_draws(2, 5, 600, 8))).basis_degree;
    CHECK(big >= 2);
    CHECK(big <= 10);
}

TEST_CASE("MixtureDensity evaluation interpolates and extrapolates flat") {
    MixtureDensity mix;
    mix.bin_edges = {0.0, 0.5, 1.0};
    mix.bin_centers = {0.25, 0.75};
    mix.fitted_density = {1.0, 3.0};
    CHECK(mix.evaluate(0.1) == 1.0);
    CHECK(mix.evaluate(0.9) == 3.0);
    CHECK(mix.evaluate(0.5) == 2.0);
    CHECK(mix.integral() == 2.0);
}

TEST_CASE("local fdr ratios and clamping") {
    NullModel null;
    null.pi0 = 0.9;
    null.beta_a = 1.0;
    null.beta_b = 1.0;  // f0 = 1
    MixtureDensity mix;
    mix.bin_edges = {0.0, 0.5, 1.0};
    mix.bin_centers = {0.25, 0.75};
    mix.fitted_density = {0.9, 3.6};
    const PsiStats psi = make_psi({0.1, 0.8, 0.95});
    const std::vector<double> T = local_fdr(null, mix, psi);
    CHECK(T[0] == doctest::Approx(1.0));
    CHECK(T[1] == doctest::Approx(0.25));
    CHECK(T[2] == doctest::Approx(0.25));

    mix.fitted_density = {0.1, 0.1};
    for (double t : local_fdr(null, mix, psi)) CHECK(t == 1.0);
}

TEST_CASE("local fdr separates signal from null") {
    std::vector<double> v = beta_draws(1, 9, 1800, 21);
    Engine e = make_stream(21, 1);
    for (int i = 0; i < 200; ++i) v.push_back(0.85 + 0.1 * uniform_open(e));
    const PsiStats psi = make_psi(v);
    const NullModel null = fit_empirical_null(psi, 0.9);
    const std::vector<double> T = local_fdr(null, lindsey_density(psi), psi);
    double signal = 0.0, noise = 0.0;
    for (std::size_t j = 0; j < v.size(); ++j) (j >= 1800 ? signal : noise) += T[j];
    CHECK(signal / 200.0 < noise / 1800.0);
}

TEST_CASE("two-stage selection worked example") {
    const std::vector<double> T{0.9, 0.01, 0.95, 0.2, 0.05};
    const auto scores = as_scores({0.1, 0.4, 0.05, 0.3, 0.35});
    const SelectionResult r = two_stage_select(T, 0.8, scores);
    CHECK(r.delta_p == doctest::Approx(1.0 / std::log(5.0)));
    CHECK(r.k_s == 4);
    CHECK(r.k_d == 4);
    CHECK(r.selected == std::vector<std::size_t>{0, 1, 3, 4});
    REQUIRE(r.alpha0_hat);
    CHECK(*r.alpha0_hat == 0.1);
}

TEST_CASE("two-stage selection edge cases") {
    const auto scores = as_scores({0.1, 0.2, 0.3, 0.4});
    const SelectionResult ones = two_stage_select(std::vector<double>(4, 1.0), 0.9, scores);
    CHECK(ones.k_s == 1);
    CHECK(ones.k_d == 0);
    CHECK(ones.selected.empty());
    CHECK_FALSE(ones.alpha0_hat);

    const SelectionResult zeros = two_stage_select(std::vector<double>(4, 0.0), 0.9, scores);
    CHECK(zeros.k_d == zeros.k_s);
    CHECK(zeros.selected.size() == zeros.k_s);
    CHECK_THROWS_AS(two_stage_select(std::vector<double>{0.1, 0.2}, 0.9, as_scores({0.1, 0.2})), InputError);
}

TEST_CASE("two-stage selection agrees with the literal formulas and ignores relabeling") {
    Engine e = make_stream(31, 0);
    for (int rep = 0; rep < 100; ++rep) {
        const std::size_t p = 3 + static_cast<std::size_t>(uniform_open(e) * 300);
        std::vector<double> T(p), S(p);
        for (std::size_t j = 0; j < p; ++j) {
            T[j] = std::round(uniform_open(e) * 20) / 20 * (rep % 3 == 0 ? uniform_open(e) : 1.0);
            S[j] = 0.5 * uniform_open(e);
        }
        const double pi0 = 0.5 + 0.5 * uniform_open(e);
        const SelectionResult r = two_stage_select(T, pi0, as_scores(S));
        const oracle::TwoStage o = oracle::two_stage_direct(T, pi0, S);
        CHECK(r.k_s == o.k_s);
        CHECK(r.k_d == o.k_d);
        CHECK(r.selected == o.selected);
        CHECK(r.alpha0_hat == o.alpha0_hat);

        // reversing the feature order maps the selection accordingly
        std::vector<double> Tr(T.rbegin(), T.rend()), Sr(S.rbegin(), S.rend());
        const SelectionResult rr = two_stage_select(Tr, pi0, as_scores(Sr));
        CHECK(rr.k_s == r.k_s);
        CHECK(rr.selected.size() == r.selected.size());
        CHECK(rr.alpha0_hat == r.alpha0_hat);
    }
}

TEST_CASE("data-driven selection on pure noise") {
    // The fitted Beta null has a lighter right tail than the noise scores, so
    // roughly a tenth of pure-noise features survive, in line with the large
    // false-positive counts the method produces on big noise sets.
    std::vector<FeatureScore> scores(500);
    for (std::size_t j = 0; j < scores.size(); ++j) {
        scores[j] = score_feature(sample_distribution(DistributionSpec::gaussian(), 2000, 77, j).values);
    }
    const DataDrivenResult r = data_driven_alpha(scores, 0.9);
    CHECK(r.null.pi0 >= 0.9);
    CHECK(r.selection.selected.size() <= 100);
    for (double t : r.selection.T) {
        CHECK(t >= 0.0);
        CHECK(t <= 1.0);
    }
    // the selected features are exactly the largest scores
    double min_selected = 1.0, max_rest = 0.0;
    std::vector<bool> in(scores.size(), false);
    for (std::size_t j : r.selection.selected) in[j] = true;
    for (std::size_t j = 0; j < scores.size(); ++j) {
        if (in[j]) min_selected = std::min(min_selected, scores[j].score);
        else max_rest = std::max(max_rest, scores[j].score);
    }
    if (!r.selection.selected.empty()) CHECK(min_selected >= max_rest);
}
