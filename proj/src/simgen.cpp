#include "cosci/simgen.hpp"

#include "cosci/error.hpp"

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace cosci {

namespace bm = boost::math;

const SignalLabels* DatasetMatrix::labels_for(std::size_t feature) const {
    for (const SignalLabels& l : labels) {
        if (l.feature == feature) return &l;
    }
    return nullptr;
}

Eigen::MatrixXd CopulaSpec::equicorrelation(std::size_t k, double rho) {
    Eigen::MatrixXd r = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k), rho);
    r.diagonal().setOnes();
    return r;
}

Eigen::MatrixXd correlation_factor(const Eigen::MatrixXd& correlation) {
    const Eigen::Index k = correlation.rows();
    if (k == 0 || correlation.cols() != k) throw InputError("correlation matrix must be square and non-empty");
    if (!correlation.allFinite()) throw InputError("correlation matrix has non-finite entries");
    if ((correlation - correlation.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw InputError("correlation matrix is not symmetric");
    }
    if ((correlation.diagonal().array() - 1.0).abs().maxCoeff() > 1e-12) {
        throw InputError("correlation matrix must have a unit diagonal");
    }
    Eigen::LLT<Eigen::MatrixXd> llt(correlation);
    if (llt.info() == Eigen::Success) return llt.matrixL();

    // semi-definite case: symmetric square root from the eigendecomposition
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(correlation);
    if (eig.info() != Eigen::Success || eig.eigenvalues().minCoeff() < -1e-10) {
        throw InputError("correlation matrix is not positive semi-definite");
    }
    const Eigen::VectorXd root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    return eig.eigenvectors() * root.asDiagonal();
}

Eigen::MatrixXd sample_copula_uniforms(const CopulaSpec& spec, std::size_t n, Engine& engine) {
    const Eigen::MatrixXd factor = correlation_factor(spec.correlation);
    if (spec.kind == CopulaKind::student_t && !(spec.dof > 0.0)) {
        throw InputError("t copula needs positive degrees of freedom");
    }
    const Eigen::Index k = factor.rows();
    constexpr double lowest = 0x1.0p-60;
    constexpr double highest = 1.0 - 0x1.0p-53;

    const bm::normal normal;
    const bm::students_t student(spec.kind == CopulaKind::student_t ? spec.dof : 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::chi_squared_distribution<double> chi2(spec.kind == CopulaKind::student_t ? spec.dof : 1.0);

    Eigen::MatrixXd u(static_cast<Eigen::Index>(n), k);
    Eigen::VectorXd eps(k);
    for (std::size_t i = 0; i < n; ++i) {
        for (Eigen::Index c = 0; c < k; ++c) eps[c] = gauss(engine);
        Eigen::VectorXd z = factor * eps;
        if (spec.kind == CopulaKind::student_t) {
            const double scale = std::sqrt(spec.dof / chi2(engine));
            for (Eigen::Index c = 0; c < k; ++c) u(static_cast<Eigen::Index>(i), c) = bm::cdf(student, z[c] * scale);
        } else {
            for (Eigen::Index c = 0; c < k; ++c) u(static_cast<Eigen::Index>(i), c) = bm::cdf(normal, z[c]);
        }
    }
    return u.cwiseMax(lowest).cwiseMin(highest);
}

std::vector<std::vector<double>> sample_copula(const CopulaSpec& spec, std::span<const DistributionSpec> marginals,
                                               std::size_t n, std::uint64_t seed) {
    if (static_cast<Eigen::Index>(marginals.size()) != spec.correlation.rows()) {
        throw InputError("sample_copula: marginal count does not match the correlation dimension");
    }
    for (const DistributionSpec& m : marginals) m.validate();
    Engine engine = make_stream(seed, 0);
    const Eigen::MatrixXd u = sample_copula_uniforms(spec, n, engine);
    std::vector<std::vector<double>> out(marginals.size(), std::vector<double>(n));
    for (std::size_t c = 0; c < marginals.size(); ++c) {
        for (std::size_t i = 0; i < n; ++i) {
            out[c][i] = marginals[c].quantile(u(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)));
        }
    }
    return out;
}

std::array<double, 2> draw_bivariate(Engine& engine, const std::array<double, 2>& mean, const Eigen::Matrix2d& chol) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double z1 = gauss(engine);
    const double z2 = gauss(engine);
    return {mean[0] + chol(0, 0) * z1, mean[1] + chol(1, 0) * z1 + chol(1, 1) * z2};
}

Design Design::parse(const std::string& text) {
    Design d;
    if (text == "I") d.kind = DesignKind::I;
    else if (text == "II") d.kind = DesignKind::II;
    else if (text == "III") d.kind = DesignKind::III;
    else if (text == "IV") d.kind = DesignKind::IV;
    else if (text == "V") d.kind = DesignKind::V;
    else if (text == "corr_V") d.kind = DesignKind::corr_V;
    else if (text.rfind("calib:", 0) == 0) {
        d.kind = DesignKind::calib;
        d.calib_family = parse_noise_family(text.substr(6));
    } else {
        throw InputError("unknown design '" + text + "'");
    }
    return d;
}

std::string Design::name() const {
    switch (kind) {
        case DesignKind::I: return "I";
        case DesignKind::II: return "II";
        case DesignKind::III: return "III";
        case DesignKind::IV: return "IV";
        case DesignKind::V: return "V";
        case DesignKind::corr_V: return "corr_V";
        case DesignKind::calib: return "calib:" + calib_family.describe();
    }
    return "?";
}

namespace {

using Mix = std::vector<std::pair<double, DistributionSpec>>;

DistributionSpec beta_mixture() {
    return DistributionSpec::mixture(Mix{{0.5, DistributionSpec::beta(4, 6)}, {0.5, DistributionSpec::beta(7, 3)}});
}

DistributionSpec lognormal_gaussian_mixture() {
    return DistributionSpec::mixture(
        Mix{{0.5, DistributionSpec::lognormal(0.2, 0.35)}, {0.5, DistributionSpec::gaussian(4.0, 0.5)}});
}

DistributionSpec laplace_pair_mixture() {
    return DistributionSpec::mixture(
        Mix{{0.5, DistributionSpec::laplace(3.0, 1.5)}, {0.5, DistributionSpec::laplace(5.0, 1.5)}});
}

DistributionSpec gaussian_trimodal() {
    return DistributionSpec::mixture(Mix{{0.3, DistributionSpec::gaussian(-2.5, 1.0)},
                                         {0.3, DistributionSpec::gaussian(0.0, 1.0)},
                                         {0.4, DistributionSpec::gaussian(2.5, 1.0)}});
}

DistributionSpec gaussian_close_pair() {
    return DistributionSpec::mixture(
        Mix{{0.5, DistributionSpec::gaussian(-1.1, 1.0)}, {0.5, DistributionSpec::gaussian(1.1, 1.0)}});
}

DistributionSpec laplace_trimodal() {
    return DistributionSpec::mixture(Mix{{0.3, DistributionSpec::laplace(-3.0, 1.0)},
                                         {0.35, DistributionSpec::laplace(0.0, 1.0)},
                                         {0.35, DistributionSpec::laplace(3.0, 1.0)}});
}

DistributionSpec beta_trimodal() {
    return DistributionSpec::mixture(Mix{{0.3, DistributionSpec::beta(8, 2)},
                                         {0.35, DistributionSpec::beta(5, 5)},
                                         {0.35, DistributionSpec::beta(2, 8)}});
}

class Builder {
  public:
    Builder(DatasetMatrix& m, std::size_t n, std::uint64_t seed) : m_(m), n_(n), seed_(seed) {
        m_.n = n;
        m_.seed = seed;
    }

    std::size_t next_index() const { return m_.columns.size(); }

    void push(std::vector<double> values) {
        m_.names.push_back("X" + std::to_string(m_.columns.size() + 1));
        m_.columns.push_back(std::move(values));
    }

    void signal(std::size_t feature, std::size_t clusters, std::vector<int> labels) {
        m_.signal_set.push_back(feature);
        m_.labels.push_back({feature, clusters, std::move(labels)});
    }

    /// Univariate mixture signal drawn from the stream of its own column.
    void mixture_signal(const DistributionSpec& spec) {
        const std::size_t j = next_index();
        Draws d = sample_distribution(spec, n_, seed_, j);
        push(std::move(d.values));
        signal(j, spec.components.size(), std::move(d.components));
    }

    void noise(const DistributionSpec& spec, std::size_t count) {
        for (std::size_t c = 0; c < count; ++c) {
            const std::size_t j = next_index();
            push(sample_distribution(spec, n_, seed_, j).values);
        }
    }

    /// (X4, X5) block: four equally weighted bivariate normals.
    void four_corner_pair() {
        const std::size_t j = next_index();
        Engine engine = make_stream(seed_, j);
        Eigen::Matrix2d neg, pos;
        neg << 1.0, -0.85, -0.85, 1.0;
        pos << 1.0, 0.85, 0.85, 1.0;
        const Eigen::Matrix2d chol_neg = neg.llt().matrixL();
        const Eigen::Matrix2d chol_pos = pos.llt().matrixL();
        const std::array<std::array<double, 2>, 4> means{{{0.0, 0.0}, {0.0, -4.0}, {4.0, 0.0}, {4.0, -4.0}}};

        std::vector<double> a(n_), b(n_);
        std::vector<int> la(n_), lb(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            const int comp = std::min(3, static_cast<int>(uniform_open(engine) * 4.0));
            const Eigen::Matrix2d& chol = (comp == 0 || comp == 3) ? chol_neg : chol_pos;
            const auto v = draw_bivariate(engine, means[static_cast<std::size_t>(comp)], chol);
            a[i] = v[0];
            b[i] = v[1];
            la[i] = comp >= 2 ? 1 : 0;
            lb[i] = (comp == 1 || comp == 3) ? 1 : 0;
        }
        push(std::move(a));
        push(std::move(b));
        signal(j, 2, std::move(la));
        signal(j + 1, 2, std::move(lb));
    }

    /// (X1, X2) of the interaction designs: 0.5 N(mu, S) + 0.5 N(-mu, S), mu = (0.9, -0.9), corr 0.9.
    void joint_pair() {
        const std::size_t j = next_index();
        Engine engine = make_stream(seed_, j);
        Eigen::Matrix2d sigma;
        sigma << 1.0, 0.9, 0.9, 1.0;
        const Eigen::Matrix2d chol = sigma.llt().matrixL();
        std::vector<double> a(n_), b(n_);
        std::vector<int> labels(n_);
        for (std::size_t i = 0; i < n_; ++i) {
            const int comp = uniform_open(engine) < 0.5 ? 0 : 1;
            const double sign = comp == 0 ? 1.0 : -1.0;
            const auto v = draw_bivariate(engine, {0.9 * sign, -0.9 * sign}, chol);
            a[i] = v[0];
            b[i] = v[1];
            labels[i] = comp;
        }
        push(std::move(a));
        push(std::move(b));
        signal(j, 2, labels);
        signal(j + 1, 2, std::move(labels));
    }

    void note(std::string text) { m_.notes.push_back(std::move(text)); }

    std::size_t n() const { return n_; }
    std::uint64_t seed() const { return seed_; }
    DatasetMatrix& matrix() { return m_; }

  private:
    DatasetMatrix& m_;
    std::size_t n_;
    std::uint64_t seed_;
};

void experiment_one_signals(Builder& b) {
    b.mixture_signal(beta_mixture());
    b.mixture_signal(lognormal_gaussian_mixture());
    b.mixture_signal(laplace_pair_mixture());
    b.four_corner_pair();
}

/// Splits `total` noise columns by fractions, rounding each block down and
/// giving the remainder to the Gaussian block.
struct NoiseBlock {
    DistributionSpec spec;
    double fraction;  ///< negative marks the Gaussian remainder block
    std::string label;
};

void noise_blocks(Builder& b, std::size_t total, const std::vector<NoiseBlock>& blocks) {
    std::vector<std::size_t> counts(blocks.size(), 0);
    std::size_t assigned = 0;
    std::size_t remainder_block = 0;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        if (blocks[i].fraction < 0.0) {
            remainder_block = i;
            continue;
        }
        counts[i] = static_cast<std::size_t>(std::floor(blocks[i].fraction * static_cast<double>(total)));
        assigned += counts[i];
    }
    counts[remainder_block] = total - assigned;
    for (std::size_t i = 0; i < blocks.size(); ++i) {
        const std::size_t first = b.next_index() + 1;
        b.noise(blocks[i].spec, counts[i]);
        b.note("noise " + blocks[i].label + ": " + std::to_string(counts[i]) + " columns X" +
               std::to_string(first) + "..X" + std::to_string(first + counts[i] - 1));
    }
}

int most_likely_component(const DistributionSpec& mix, double x) {
    int best = 0;
    double best_weight = -1.0;
    for (std::size_t c = 0; c < mix.components.size(); ++c) {
        const double w = mix.components[c].first * mix.components[c].second.pdf(x);
        if (w > best_weight) {
            best_weight = w;
            best = static_cast<int>(c);
        }
    }
    return best;
}

void correlated_interaction_design(Builder& b) {
    const std::size_t n = b.n();
    DatasetMatrix& m = b.matrix();
    m.columns.assign(25, std::vector<double>(n));
    m.names.clear();
    for (std::size_t j = 0; j < 25; ++j) m.names.push_back("X" + std::to_string(j + 1));

    // Block A: (X1, X2) and X5..X14 under a Gaussian copula, off-diagonal 0.9.
    // The copula drives the within-component noise of (X1, X2), whose
    // component covariance already has correlation 0.9.
    {
        Engine engine = make_stream(b.seed(), 0);
        CopulaSpec spec{CopulaKind::gaussian, CopulaSpec::equicorrelation(12, 0.9), 2.0};
        const Eigen::MatrixXd factor = correlation_factor(spec.correlation);
        std::normal_distribution<double> gauss(0.0, 1.0);
        std::vector<int> labels(n);
        Eigen::VectorXd eps(12);
        for (std::size_t i = 0; i < n; ++i) {
            const int comp = uniform_open(engine) < 0.5 ? 0 : 1;
            const double sign = comp == 0 ? 1.0 : -1.0;
            for (Eigen::Index c = 0; c < 12; ++c) eps[c] = gauss(engine);
            const Eigen::VectorXd z = factor * eps;
            m.columns[0][i] = 0.9 * sign + z[0];
            m.columns[1][i] = -0.9 * sign + z[1];
            for (std::size_t c = 2; c < 12; ++c) m.columns[c + 2][i] = z[static_cast<Eigen::Index>(c)];
            labels[i] = comp;
        }
        m.signal_set = {0, 1};
        m.labels.push_back({0, 2, labels});
        m.labels.push_back({1, 2, std::move(labels)});
    }

    // Block B: X3, X4 and X15..X25 under a t copula with 2 dof, off-diagonal 0.8.
    {
        Engine engine = make_stream(b.seed(), 2);
        CopulaSpec spec{CopulaKind::student_t, CopulaSpec::equicorrelation(13, 0.8), 2.0};
        const Eigen::MatrixXd u = sample_copula_uniforms(spec, n, engine);
        const DistributionSpec x3 = beta_mixture();
        const DistributionSpec x4 = lognormal_gaussian_mixture();
        const DistributionSpec noise = DistributionSpec::gaussian();
        std::vector<int> l3(n), l4(n);
        for (std::size_t i = 0; i < n; ++i) {
            const auto row = static_cast<Eigen::Index>(i);
            m.columns[2][i] = x3.quantile(u(row, 0));
            m.columns[3][i] = x4.quantile(u(row, 1));
            l3[i] = most_likely_component(x3, m.columns[2][i]);
            l4[i] = most_likely_component(x4, m.columns[3][i]);
            for (std::size_t c = 2; c < 13; ++c) m.columns[c + 12][i] = noise.quantile(u(row, static_cast<Eigen::Index>(c)));
        }
        m.signal_set = {0, 1, 2, 3};
        m.labels.push_back({2, 2, std::move(l3)});
        m.labels.push_back({3, 2, std::move(l4)});
    }
    b.note("Gaussian copula (rho 0.9) couples X1, X2 with X5..X14; t copula (2 dof, rho 0.8) couples X3, X4 with X15..X25");
    b.note("labels of X3, X4 are the most probable mixture component at each value");
}

}  // namespace

DatasetMatrix sample_experiment(const Design& design, std::size_t n, std::uint64_t seed) {
    if (n < 2) throw InputError("sample_experiment: n must be at least 2");
    DatasetMatrix m;
    Builder b(m, n, seed);
    const DistributionSpec gaussian = DistributionSpec::gaussian();
    const DistributionSpec t5 = DistributionSpec::student_t(5.0);
    const DistributionSpec exp1 = DistributionSpec::exponential(1.0);
    const DistributionSpec cauchy = DistributionSpec::cauchy();

    switch (design.kind) {
        case DesignKind::I:
            experiment_one_signals(b);
            b.noise(gaussian, 45);
            b.note("noise gaussian: 45 columns X6..X50");
            break;
        case DesignKind::II:
            experiment_one_signals(b);
            b.mixture_signal(gaussian_trimodal());
            noise_blocks(b, 94, {{gaussian, 0.5, "gaussian"}, {t5, -1.0, "t5"}});
            break;
        case DesignKind::III:
            experiment_one_signals(b);
            b.mixture_signal(gaussian_trimodal());
            b.mixture_signal(gaussian_close_pair());
            noise_blocks(b, 5000 - 7, {{exp1, 0.4, "exp1"}, {gaussian, -1.0, "gaussian"}, {t5, 0.3, "t5"}});
            break;
        case DesignKind::IV:
            experiment_one_signals(b);
            b.mixture_signal(gaussian_trimodal());
            b.mixture_signal(gaussian_close_pair());
            b.mixture_signal(laplace_trimodal());
            b.mixture_signal(beta_trimodal());
            noise_blocks(b, 25000 - 9,
                         {{cauchy, 0.28, "cauchy"}, {gaussian, -1.0, "gaussian"}, {t5, 0.24, "t5"},
                          {exp1, 0.24, "exp1"}});
            break;
        case DesignKind::V:
            b.joint_pair();
            b.mixture_signal(beta_mixture());
            b.mixture_signal(lognormal_gaussian_mixture());
            b.noise(gaussian, 21);
            b.note("noise gaussian: 21 columns X5..X25");
            break;
        case DesignKind::corr_V:
            correlated_interaction_design(b);
            break;
        case DesignKind::calib:
            b.noise(design.calib_family, 1);
            b.note("calibration column: " + design.calib_family.describe());
            break;
    }
    return m;
}

}  // namespace cosci
