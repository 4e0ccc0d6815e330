#include "cosci/error.hpp"
#include "cosci/merge_engine.hpp"
#include "cosci/simgen.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numbers>

using namespace cosci;

namespace {

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
}

double corr(const std::vector<double>& a, const std::vector<double>& b) {
    const double ma = mean_of(a), mb = mean_of(b);
    double sab = 0, saa = 0, sbb = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        sab += (a[i] - ma) * (b[i] - mb);
        saa += (a[i] - ma) * (a[i] - ma);
        sbb += (b[i] - mb) * (b[i] - mb);
    }
    return sab / std::sqrt(saa * sbb);
}

double kendall_tau(const std::vector<double>& a, const std::vector<double>& b, std::size_t limit) {
    const std::size_t n = std::min(limit, a.size());
    double concordant = 0.0, total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double s = (a[i] - a[j]) * (b[i] - b[j]);
            concordant += s > 0 ? 1.0 : (s < 0 ? -1.0 : 0.0);
            total += 1.0;
        }
    }
    return concordant / total;
}

}  // namespace

TEST_CASE("gaussian draws have the right moments") {
    const auto v = sample_distribution(DistributionSpec::gaussian(), 100000, 1).values;
    const double m = mean_of(v);
    double var = 0.0;
    for (double x : v) var += (x - m) * (x - m);
    var /= static_cast<double>(v.size() - 1);
    CHECK(std::abs(m) <= 0.02);
    CHECK(std::abs(var - 1.0) <= 0.03);
}

TEST_CASE("mixtures keep support and weights") {
    const auto mix = DistributionSpec::mixture({{0.5, DistributionSpec::beta(4, 6)}, {0.5, DistributionSpec::beta(7, 3)}});
    const Draws d = sample_distribution(mix, 20000, 2);
    for (double x : d.values) {
        CHECK(x >= 0.0);
        CHECK(x <= 1.0);
    }
    const double share = static_cast<double>(std::count(d.components.begin(), d.components.end(), 1)) / 20000.0;
    CHECK(std::abs(share - 0.5) <= 3.0 * std::sqrt(0.25 / 20000.0));
}

TEST_CASE("distribution parameters are validated") {
    CHECK_THROWS_AS(DistributionSpec::beta(-1, 2).validate(), InputError);
    CHECK_THROWS_AS(DistributionSpec::triangular(0, 2, 1).validate(), InputError);
    CHECK_THROWS_AS(DistributionSpec::mixture({{0.3, DistributionSpec::gaussian()}}).validate(), InputError);
    CHECK_THROWS_AS(parse_noise_family("nope"), InputError);
    CHECK(parse_noise_family("t5").kind == DistKind::student_t);
    CHECK(parse_noise_family("gev").params[0] == 0.8);
}

TEST_CASE("quantile inverts the cdf") {
    for (const auto& spec : {DistributionSpec::gaussian(1, 2), DistributionSpec::laplace(0, 1.5), DistributionSpec::gev(0.8),
                             DistributionSpec::triangular(0, 0.8, 1), DistributionSpec::lognormal(0.2, 0.35),
                             DistributionSpec::mixture({{0.5, DistributionSpec::lognormal(0.2, 0.35)}, {0.5, DistributionSpec::gaussian(4, 0.5)}})}) {
        for (double u : {0.01, 0.3, 0.5, 0.9, 0.999}) CHECK(spec.cdf(spec.quantile(u)) == doctest::Approx(u).epsilon(1e-8));
    }
}

TEST_CASE("experiment I layout and component correlations") {
    const DatasetMatrix X = sample_experiment(Design::parse("I"), 4000, 3);
    CHECK(X.n == 4000);
    CHECK(X.p() == 50);
    CHECK(X.signal_set == std::vector<std::size_t>{0, 1, 2, 3, 4});
    REQUIRE(X.labels_for(3));
    REQUIRE(X.labels_for(4));

    // recover the four components from the two label vectors
    std::vector<double> a[4], b[4];
    for (std::size_t i = 0; i < X.n; ++i) {
        const int comp = 2 * X.labels_for(3)->labels[i] + X.labels_for(4)->labels[i];
        a[comp].push_back(X.columns[3][i]);
        b[comp].push_back(X.columns[4][i]);
    }
    CHECK(corr(a[0], b[0]) == doctest::Approx(-0.85).epsilon(0.05));
    CHECK(corr(a[1], b[1]) == doctest::Approx(0.85).epsilon(0.05));
    CHECK(corr(a[2], b[2]) == doctest::Approx(0.85).epsilon(0.05));
    CHECK(corr(a[3], b[3]) == doctest::Approx(-0.85).epsilon(0.05));
}

TEST_CASE("experiment sizes") {
    CHECK(sample_experiment(Design::parse("II"), 50, 1).p() == 100);
    const DatasetMatrix III = sample_experiment(Design::parse("III"), 20, 1);
    CHECK(III.p() == 5000);
    CHECK(III.signal_set.size() == 7);
    const DatasetMatrix IV = sample_experiment(Design::parse("IV"), 10, 1);
    CHECK(IV.p() == 25000);
    CHECK(IV.signal_set == std::vector<std::size_t>{0, 1, 2, 3, 4, 5, 6, 7, 8});
    const DatasetMatrix V = sample_experiment(Design::parse("V"), 100, 1);
    CHECK(V.p() == 25);
    CHECK(V.signal_set.size() == 4);
    const DatasetMatrix C = sample_experiment(Design::parse("corr_V"), 100, 1);
    CHECK(C.p() == 25);
    CHECK(C.signal_set == std::vector<std::size_t>{0, 1, 2, 3});
    const DatasetMatrix G = sample_experiment(Design::parse("calib:exp"), 100, 1);
    CHECK(G.p() == 1);
    CHECK(G.signal_set.empty());
    CHECK_THROWS_AS(Design::parse("VI"), InputError);
}

TEST_CASE("experiments are reproducible") {
    for (const char* name : {"I", "V", "corr_V"}) {
        const DatasetMatrix a = sample_experiment(Design::parse(name), 300, 9);
        const DatasetMatrix b = sample_experiment(Design::parse(name), 300, 9);
        CHECK(a.columns == b.columns);
        CHECK(sample_experiment(Design::parse(name), 300, 10).columns != a.columns);
    }
}

TEST_CASE("mixture labels follow the weights") {
    const DatasetMatrix X = sample_experiment(Design::parse("II"), 5000, 4);
    const SignalLabels* l = X.labels_for(5);
    REQUIRE(l);
    CHECK(l->clusters == 3);
    const double weights[3] = {0.3, 0.3, 0.4};
    for (int c = 0; c < 3; ++c) {
        const double share = static_cast<double>(std::count(l->labels.begin(), l->labels.end(), c)) / 5000.0;
        CHECK(std::abs(share - weights[c]) <= 3.0 * std::sqrt(weights[c] * (1 - weights[c]) / 5000.0));
    }
}

TEST_CASE("independent columns are uncorrelated") {
    const DatasetMatrix X = sample_experiment(Design::parse("I"), 5000, 5);
    for (std::size_t j = 5; j < 15; ++j) CHECK(std::abs(corr(X.columns[j], X.columns[j + 1])) <= 4.0 / std::sqrt(5000.0));
}

TEST_CASE("experiment V pair is jointly but not marginally bimodal") {
    const DatasetMatrix X = sample_experiment(Design::parse("V"), 2000, 6);
    CHECK(score_feature(X.columns[0]).score < 0.15);
    CHECK(score_feature(X.columns[1]).score < 0.15);
}

TEST_CASE("copulas") {
    const std::size_t n = 10000;
    std::vector<DistributionSpec> normals(3, DistributionSpec::gaussian());

    const auto indep = sample_copula({CopulaKind::gaussian, Eigen::MatrixXd::Identity(3, 3), 2}, normals, n, 1);
    CHECK(std::abs(corr(indep[0], indep[1])) <= 3.0 / std::sqrt(double(n)));

    const auto gauss = sample_copula({CopulaKind::gaussian, CopulaSpec::equicorrelation(3, 0.9), 2}, normals, n, 2);
    CHECK(std::abs(corr(gauss[0], gauss[2]) - 0.9) <= 0.03);

    const auto t = sample_copula({CopulaKind::student_t, CopulaSpec::equicorrelation(3, 0.8), 2}, normals, n, 3);
    CHECK(std::abs(kendall_tau(t[0], t[1], 3000) - 2.0 / std::numbers::pi * std::asin(0.8)) <= 0.05);

    Eigen::MatrixXd bad = Eigen::MatrixXd::Identity(3, 3);
    bad(0, 1) = bad(1, 0) = 1.5;
    CHECK_THROWS_AS(correlation_factor(bad), InputError);
    bad(0, 1) = 0.2;
    CHECK_THROWS_AS(correlation_factor(bad), InputError);  // not symmetric
}

TEST_CASE("correlated design couples noise with signal") {
    const DatasetMatrix X = sample_experiment(Design::parse("corr_V"), 2000, 7);
    CHECK(corr(X.columns[4], X.columns[5]) > 0.8);
    CHECK(std::abs(corr(X.columns[4], X.columns[20])) < 0.1);
    CHECK(corr(X.columns[14], X.columns[15]) > 0.5);
}
