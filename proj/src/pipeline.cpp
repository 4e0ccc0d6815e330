#include "cosci/pipeline.hpp"

#include "cosci/csv_io.hpp"
#include "cosci/error.hpp"
#include "cosci/evalmetrics.hpp"
#include "cosci/interactions.hpp"
#include "cosci/parallel.hpp"

#include <json.hpp>

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

namespace cosci {

std::vector<FeatureScore> score_matrix(const DatasetMatrix& X, std::optional<double> tau, std::size_t threads) {
    std::vector<FeatureScore> scores(X.p());
    parallel_for(X.p(), threads, [&](std::size_t j) {
        try {
            scores[j] = score_feature(X.column(j), tau);
        } catch (const InputError& e) {
            const std::string name = j < X.names.size() ? X.names[j] : std::to_string(j + 1);
            throw InputError("feature '" + name + "': " + e.what());
        }
    });
    return scores;
}

namespace {

double threshold_for(const RunConfig& config, std::size_t n, ScoreReport& report) {
    if (config.threshold.mode == ThresholdMode::simulated) {
        ThresholdSpec spec = config.threshold;
        report.calibration = detection_table(n, spec, config.seed, config.threads);
        return calibrate_threshold(n, spec, config.seed, config.threads);
    }
    return config.threshold.alpha0;
}

}  // namespace

ScoreReport analyze(const DatasetMatrix& X, const RunConfig& config) {
    const auto start = std::chrono::steady_clock::now();
    if (X.p() == 0) throw InputError("matrix has no features");
    config.threshold.validate();

    ScoreReport report;
    report.n = X.n;
    report.p = X.p();
    const std::vector<FeatureScore> scores = score_matrix(X, config.tau, config.threads);

    std::vector<double> T;
    if (config.command == Command::select) {
        switch (config.threshold.mode) {
            case ThresholdMode::fixed:
            case ThresholdMode::simulated: {
                const double alpha0 = threshold_for(config, X.n, report);
                report.mode = config.threshold.mode == ThresholdMode::fixed ? "fixed" : "simulated";
                report.alpha0_used = alpha0;
                report.selected = screen_fixed(scores, alpha0).selected;
                break;
            }
            case ThresholdMode::data_driven: {
                DataDrivenConfig dd;
                dd.bins = config.bins;
                dd.degree = config.degree;
                const DataDrivenResult result = data_driven_alpha(scores, config.truncation_q, dd);
                report.mode = "data-driven";
                report.selected = result.selection.selected;
                report.k_s = result.selection.k_s;
                report.k_d = result.selection.k_d;
                report.alpha0_hat = result.selection.alpha0_hat;
                report.alpha0_used = result.selection.alpha0_hat;
                report.delta_p = result.selection.delta_p;
                report.null = result.null;
                report.lindsey_degree = result.mixture.basis_degree;
                T = result.selection.T;
                break;
            }
        }
    } else if (config.command == Command::pairs) {
        if (config.threshold.mode == ThresholdMode::data_driven) {
            throw InputError("pairs supports fixed and simulated thresholds");
        }
        const double alpha0 = threshold_for(config, X.n, report);
        report.mode = config.threshold.mode == ThresholdMode::fixed ? "pairs-fixed" : "pairs-simulated";
        report.alpha0_used = alpha0;
        std::vector<PairScore> pairs;
        if (X.p() >= 2) pairs = all_pair_scores(X, circle_grid(config.m), config.threads);
        report.selected = combine_pair_screen(scores, pairs, alpha0);
    }

    report.records.resize(X.p());
    for (std::size_t j = 0; j < X.p(); ++j) {
        FeatureRecord& r = report.records[j];
        r.index = j + 1;
        r.name = j < X.names.size() ? X.names[j] : "f" + std::to_string(j + 1);
        r.score = scores[j].score;
        r.restricted_score = scores[j].restricted_score;
        r.psi = 2.0 * scores[j].score;
        if (!T.empty()) r.T = T[j];
    }
    for (std::size_t j : report.selected) report.records[j].selected = true;
    report.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return report;
}

ScoreReport run_pipeline(const RunConfig& config) {
    if (config.input_path.empty()) throw InputError("an input path is required");
    const DatasetMatrix X = ingest_matrix(config.input_path, config.has_header, config.transpose);
    ScoreReport report = analyze(X, config);
    if (!config.output_path.empty()) write_report(report, config.output_path);
    return report;
}

std::string report_csv(const ScoreReport& report) {
    std::ostringstream out;
    out << "index,name,score,restricted_score,psi,T,selected\n";
    for (const FeatureRecord& r : report.records) {
        out << r.index << ',' << r.name << ',' << format_double(r.score) << ','
            << (r.restricted_score ? format_double(*r.restricted_score) : "") << ',' << format_double(r.psi) << ','
            << (r.T ? format_double(*r.T) : "") << ',' << (r.selected ? 1 : 0) << '\n';
    }
    return out.str();
}

std::string report_json(const ScoreReport& report, bool include_wall_time) {
    nlohmann::ordered_json j;
    j["n"] = report.n;
    j["p"] = report.p;
    j["mode"] = report.mode;
    j["alpha0_used"] = report.alpha0_used ? nlohmann::ordered_json(*report.alpha0_used) : nullptr;
    std::vector<std::size_t> selected;
    for (std::size_t s : report.selected) selected.push_back(s + 1);
    j["selected"] = selected;
    j["selected_count"] = selected.size();
    if (report.k_s) j["k_s"] = *report.k_s;
    if (report.k_d) j["k_d"] = *report.k_d;
    if (report.mode == "data-driven") {
        j["alpha0_hat"] = report.alpha0_hat ? nlohmann::ordered_json(*report.alpha0_hat) : nullptr;
    }
    if (report.delta_p) j["delta_p"] = *report.delta_p;
    if (report.null) {
        j["null"] = {{"pi0", report.null->pi0},
                     {"beta_a", report.null->beta_a},
                     {"beta_b", report.null->beta_b},
                     {"truncation_q", report.null->truncation_q},
                     {"cutoff", report.null->cutoff}};
    }
    if (report.lindsey_degree) j["lindsey_degree"] = *report.lindsey_degree;
    if (!report.calibration.empty()) {
        auto& table = j["calibration"] = nlohmann::ordered_json::array();
        for (const DetectionRow& row : report.calibration) {
            table.push_back({{"alpha", row.alpha}, {"detections", row.detections}, {"reps", row.reps},
                             {"fraction", row.fraction()}});
        }
    }
    if (include_wall_time) j["wall_seconds"] = report.wall_seconds;
    return j.dump(2) + "\n";
}

void write_report(const ScoreReport& report, const std::string& path) {
    // render both documents before touching the filesystem
    const std::string csv = report_csv(report);
    const std::string json = report_json(report);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write '" + path + "'");
    out << csv;
    std::ofstream side(path + ".json", std::ios::binary);
    if (!side) throw InputError("cannot write '" + path + ".json'");
    side << json;
    if (!out || !side) throw InputError("writing the report failed");
}

std::uint64_t replicate_seed(std::uint64_t seed, std::size_t r) {
    Engine engine = make_stream(seed, 0x7265700000000000ull + r);
    return engine();
}

namespace {

struct RepOutcome {
    std::vector<ConfusionCounts> counts;  ///< one per metrics row
    std::vector<double> cer;
    bool failed = false;
};

double predicted_cer(const DatasetMatrix& X, std::span<const std::size_t> selected, std::size_t restarts,
                     std::uint64_t seed) {
    std::vector<std::vector<int>> truths;
    std::map<std::size_t, std::vector<int>> by_k;
    double sum = 0.0;
    for (std::size_t s : X.signal_set) {
        const SignalLabels* truth = X.labels_for(s);
        if (truth == nullptr) continue;
        auto it = by_k.find(truth->clusters);
        if (it == by_k.end()) {
            std::vector<int> predicted(X.n, 0);
            if (!selected.empty() && truth->clusters <= X.n) {
                Eigen::MatrixXd data(static_cast<Eigen::Index>(X.n), static_cast<Eigen::Index>(selected.size()));
                for (std::size_t c = 0; c < selected.size(); ++c) {
                    const auto& col = X.columns[selected[c]];
                    for (std::size_t i = 0; i < X.n; ++i) data(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = col[i];
                }
                predicted = kmeans_lloyd(data, truth->clusters, restarts, seed).labels;
            }
            it = by_k.emplace(truth->clusters, std::move(predicted)).first;
        }
        truths.push_back(truth->labels);
        sum += cer(it->second, truth->labels);
    }
    if (truths.empty()) throw InputError("design has no labeled signal features");
    return sum / static_cast<double>(truths.size());
}

void summarize(const std::vector<RepOutcome>& reps, std::size_t row, MetricsRow& out) {
    const double r = static_cast<double>(reps.size());
    auto mean_se = [&](auto get, double& mean, double& se) {
        mean = 0.0;
        for (const RepOutcome& o : reps) mean += get(o);
        mean /= r;
        double ss = 0.0;
        for (const RepOutcome& o : reps) ss += (get(o) - mean) * (get(o) - mean);
        se = reps.size() > 1 ? std::sqrt(ss / (r - 1.0) / r) : 0.0;
    };
    out.reps = reps.size();
    mean_se([&](const RepOutcome& o) { return static_cast<double>(o.counts[row].false_negatives); }, out.avg_fn, out.se_fn);
    mean_se([&](const RepOutcome& o) { return static_cast<double>(o.counts[row].false_positives); }, out.avg_fp, out.se_fp);
    if (!reps.front().cer.empty()) {
        double m = 0.0, s = 0.0;
        mean_se([&](const RepOutcome& o) { return o.cer[row]; }, m, s);
        out.avg_cer = m;
        out.se_cer = s;
    }
    for (const RepOutcome& o : reps) out.fit_failures += o.failed ? 1 : 0;
}

}  // namespace

std::vector<MetricsRow> run_experiment(const ExperimentConfig& config) {
    if (config.reps == 0) throw InputError("experiment needs at least one replicate");
    std::vector<MetricsRow> rows;
    std::vector<double> alphas;
    switch (config.mode) {
        case ThresholdMode::fixed:
            if (config.alpha0s.empty()) throw InputError("fixed mode needs at least one alpha0");
            for (double a : config.alpha0s) {
                if (!(a > 0.0 && a <= 0.5)) throw InputError("alpha0 must lie in (0, 0.5]");
                alphas.push_back(a);
                std::ostringstream label;
                label << "alpha0=" << format_double(a);
                MetricsRow row;
                row.label = label.str();
                row.alpha0 = a;
                rows.push_back(row);
            }
            break;
        case ThresholdMode::simulated: {
            const double a = calibrate_threshold(config.n, config.calibration, config.seed, config.threads);
            alphas.push_back(a);
            MetricsRow row;
            row.label = "simulated";
            row.alpha0 = a;
            rows.push_back(row);
            break;
        }
        case ThresholdMode::data_driven:
            rows.emplace_back().label = "data-driven";
            break;
    }

    std::vector<RepOutcome> outcomes(config.reps);
    parallel_for(config.reps, config.threads, [&](std::size_t r) {
        const std::uint64_t rep_seed = replicate_seed(config.seed, r);
        const DatasetMatrix X = sample_experiment(config.design, config.n, rep_seed);
        const std::vector<FeatureScore> marginal = score_matrix(X, std::nullopt, 1);
        std::vector<PairScore> pairs;
        if (config.pairs && X.p() >= 2) pairs = all_pair_scores(X, circle_grid(config.m), 1);

        std::vector<std::vector<std::size_t>> selections;
        RepOutcome& out = outcomes[r];
        if (config.mode == ThresholdMode::data_driven) {
            std::vector<FeatureScore> pooled = marginal;
            for (const PairScore& ps : pairs) pooled.push_back({ps.score, std::nullopt, std::nullopt});
            try {
                const DataDrivenResult dd = data_driven_alpha(pooled, config.truncation_q, config.data_driven);
                const auto& sel = dd.selection;
                if (!sel.alpha0_hat) {
                    selections.emplace_back();
                } else if (config.pairs) {
                    selections.push_back(combine_pair_screen(marginal, pairs, *sel.alpha0_hat));
                } else {
                    selections.push_back(sel.selected);
                }
            } catch (const FitError&) {
                out.failed = true;
                selections.emplace_back();
            }
        } else {
            for (double a : alphas) {
                selections.push_back(config.pairs ? combine_pair_screen(marginal, pairs, a)
                                                  : screen_fixed(marginal, a).selected);
            }
        }
        for (const auto& sel : selections) {
            out.counts.push_back(confusion_counts(sel, X.signal_set, X.p()));
            if (config.compute_cer) out.cer.push_back(predicted_cer(X, sel, config.kmeans_restarts, rep_seed));
        }
    });

    for (std::size_t k = 0; k < rows.size(); ++k) summarize(outcomes, k, rows[k]);
    return rows;
}

std::string metrics_csv(const std::vector<MetricsRow>& rows) {
    std::ostringstream out;
    out << "threshold,alpha0,reps,avg_fn,se_fn,avg_fp,se_fp,avg_cer,se_cer,fit_failures\n";
    for (const MetricsRow& r : rows) {
        out << r.label << ',' << (r.alpha0 ? format_double(*r.alpha0) : "") << ',' << r.reps << ','
            << format_double(r.avg_fn) << ',' << format_double(r.se_fn) << ',' << format_double(r.avg_fp) << ','
            << format_double(r.se_fp) << ',' << (r.avg_cer ? format_double(*r.avg_cer) : "") << ','
            << (r.se_cer ? format_double(*r.se_cer) : "") << ',' << r.fit_failures << '\n';
    }
    return out.str();
}

}  // namespace cosci
