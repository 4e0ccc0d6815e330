// Command-line front end: score, select, calibrate, pairs, simulate, eval.

#include "cosci/csv_io.hpp"
#include "cosci/error.hpp"
#include "cosci/parallel.hpp"
#include "cosci/pipeline.hpp"
#include "cosci/screening.hpp"
#include "cosci/simgen.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <map>

namespace {

constexpr int kExitInput = 2;
constexpr int kExitFit = 3;
constexpr int kExitCalibration = 4;

struct Options {
    cosci::RunConfig run;
    std::string mode = "fixed";
    std::string family = "gaussian";
    std::vector<double> grid = cosci::ThresholdSpec::default_grid();
    std::vector<double> alphas;
    std::size_t reps = 200;
    double tolerance = 0.01;
    std::size_t n = 1000;
    std::string design = "I";
    bool pairs = false;
    bool cer = false;
};

void add_io(CLI::App* cmd, Options& o, bool with_output_required = false) {
    cmd->add_option("--input", o.run.input_path, "CSV input (rows are observations)")->required();
    auto* out = cmd->add_option("--output", o.run.output_path, "CSV report path; the JSON summary goes to <path>.json");
    if (with_output_required) out->required();
    cmd->add_flag("--header", o.run.has_header, "first row holds feature names");
    cmd->add_flag("--transpose", o.run.transpose, "rows are features instead of observations");
}

void add_threads(CLI::App* cmd, Options& o) {
    cmd->add_option("--threads", o.run.threads, "worker threads (default: COSCI_THREADS or CPU count)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--seed", o.run.seed, "master random seed");
}

void add_threshold(CLI::App* cmd, Options& o) {
    cmd->add_option("--mode", o.mode, "threshold mode")->check(CLI::IsMember({"fixed", "simulated", "data-driven"}));
    cmd->add_option("--alpha0", o.run.threshold.alpha0, "fixed threshold");
    cmd->add_option("--q", o.run.truncation_q, "truncation quantile of the empirical null");
    cmd->add_option("--bins", o.run.bins, "histogram bins of the Lindsey density");
    cmd->add_option("--degree", o.run.degree, "Lindsey basis degree (0 = automatic)");
    cmd->add_option("--family", o.family, "noise family for simulated calibration");
    cmd->add_option("--reps", o.reps, "calibration replicates");
    cmd->add_option("--tolerance", o.tolerance, "largest acceptable detection fraction");
    cmd->add_option("--grid", o.grid, "calibration grid")->delimiter(',');
}

cosci::ThresholdMode parse_mode(const std::string& mode) {
    if (mode == "simulated") return cosci::ThresholdMode::simulated;
    if (mode == "data-driven") return cosci::ThresholdMode::data_driven;
    return cosci::ThresholdMode::fixed;
}

void finish_threshold(Options& o) {
    o.run.threshold.mode = parse_mode(o.mode);
    o.run.threshold.noise_family = cosci::parse_noise_family(o.family);
    o.run.threshold.grid = o.grid;
    o.run.threshold.reps = o.reps;
    o.run.threshold.detect_tolerance = o.tolerance;
}

void emit_report(const cosci::ScoreReport& report, const cosci::RunConfig& run) {
    if (run.output_path.empty()) {
        std::cout << cosci::report_csv(report);
    } else {
        std::cerr << "selected " << report.selected.size() << " of " << report.p << " features; report written to "
                  << run.output_path << "\n";
    }
}

int run_calibrate(Options& o) {
    finish_threshold(o);
    o.run.threshold.mode = cosci::ThresholdMode::simulated;
    const std::vector<cosci::DetectionRow> table = cosci::detection_table(o.n, o.run.threshold, o.run.seed, o.run.threads);
    std::ostringstream csv;
    csv << "alpha,detections,reps,fraction\n";
    for (const auto& row : table) {
        csv << cosci::format_double(row.alpha) << ',' << row.detections << ',' << row.reps << ','
            << cosci::format_double(row.fraction()) << '\n';
    }
    if (o.run.output_path.empty()) {
        std::cout << csv.str();
    } else {
        std::ofstream(o.run.output_path) << csv.str();
    }
    const double alpha = cosci::calibrate_threshold(o.n, o.run.threshold, o.run.seed, o.run.threads);
    std::cerr << "calibrated alpha0 = " << cosci::format_double(alpha) << "\n";
    return 0;
}

int run_simulate(Options& o) {
    const cosci::Design design = cosci::Design::parse(o.design);
    const cosci::DatasetMatrix X = cosci::sample_experiment(design, o.n, o.run.seed);
    cosci::write_matrix_csv(o.run.output_path, X);

    nlohmann::ordered_json truth;
    truth["design"] = design.name();
    truth["n"] = X.n;
    truth["p"] = X.p();
    truth["seed"] = X.seed;
    std::vector<std::size_t> signal;
    for (std::size_t s : X.signal_set) signal.push_back(s + 1);
    truth["signal_set"] = signal;
    truth["notes"] = X.notes;
    for (const auto& l : X.labels) {
        truth["labels"][X.names[l.feature]] = {{"clusters", l.clusters}, {"labels", l.labels}};
    }
    std::ofstream(o.run.output_path + ".truth.json") << truth.dump(2) << "\n";
    std::cerr << "wrote " << X.n << " x " << X.p() << " matrix to " << o.run.output_path << "\n";
    return 0;
}

int run_eval(Options& o) {
    finish_threshold(o);
    cosci::ExperimentConfig cfg;
    cfg.design = cosci::Design::parse(o.design);
    cfg.n = o.n;
    cfg.reps = o.reps;
    cfg.mode = o.run.threshold.mode;
    cfg.alpha0s = o.alphas.empty() ? std::vector<double>{o.run.threshold.alpha0} : o.alphas;
    cfg.truncation_q = o.run.truncation_q;
    cfg.data_driven.bins = o.run.bins;
    cfg.data_driven.degree = o.run.degree;
    cfg.calibration = o.run.threshold;
    cfg.calibration.reps = 200;
    cfg.pairs = o.pairs;
    cfg.m = o.run.m;
    cfg.compute_cer = o.cer;
    cfg.seed = o.run.seed;
    cfg.threads = o.run.threads;
    const std::string table = cosci::metrics_csv(cosci::run_experiment(cfg));
    if (o.run.output_path.empty()) {
        std::cout << table;
    } else {
        std::ofstream(o.run.output_path) << table;
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Feature screening for clustering by fusion-path merge sizes"};
    app.require_subcommand(1);
    Options o;
    o.run.threads = cosci::default_thread_count();

    auto* score = app.add_subcommand("score", "score every feature");
    add_io(score, o);
    add_threads(score, o);
    score->add_option("--tau", o.run.tau, "also report the quantile-restricted score")->check(CLI::Range(0.0, 0.4999999));

    auto* select = app.add_subcommand("select", "score and select features");
    add_io(select, o);
    add_threads(select, o);
    add_threshold(select, o);
    select->add_option("--tau", o.run.tau, "also report the quantile-restricted score")->check(CLI::Range(0.0, 0.4999999));

    auto* pairs = app.add_subcommand("pairs", "marginal plus pairwise projection screen");
    add_io(pairs, o);
    add_threads(pairs, o);
    add_threshold(pairs, o);
    pairs->add_option("--m", o.run.m, "grid points on the unit circle")->check(CLI::Range(3, 100000));

    auto* calibrate = app.add_subcommand("calibrate", "simulate the detection table for pure noise");
    calibrate->add_option("--n", o.n, "sample size")->required();
    calibrate->add_option("--output", o.run.output_path, "CSV path for the detection table");
    add_threads(calibrate, o);
    add_threshold(calibrate, o);

    auto* simulate = app.add_subcommand("simulate", "write one replicate of a simulation design");
    simulate->add_option("--design", o.design, "I, II, III, IV, V, corr_V or calib:<family>")->required();
    simulate->add_option("--n", o.n, "sample size");
    simulate->add_option("--output", o.run.output_path, "CSV path")->required();
    simulate->add_option("--seed", o.run.seed, "random seed");

    auto* eval = app.add_subcommand("eval", "repeat a design and report FN / FP");
    eval->add_option("--design", o.design, "I, II, III, IV, V, corr_V or calib:<family>")->required();
    eval->add_option("--n", o.n, "sample size");
    eval->add_option("--output", o.run.output_path, "CSV path for the metrics table");
    add_threads(eval, o);
    add_threshold(eval, o);
    eval->add_option("--alphas", o.alphas, "fixed thresholds to evaluate")->delimiter(',');
    eval->add_option("--m", o.run.m, "grid points on the unit circle")->check(CLI::Range(3, 100000));
    eval->add_flag("--pairs", o.pairs, "add the pairwise projection screen");
    eval->add_flag("--cer", o.cer, "also report the per-signal k-means CER");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitInput;
    }

    try {
        if (*calibrate) return run_calibrate(o);
        if (*simulate) return run_simulate(o);
        if (*eval) {
            if (eval->count("--reps") == 0) o.reps = 50;
            return run_eval(o);
        }
        o.run.command = *score ? cosci::Command::score : *select ? cosci::Command::select : cosci::Command::pairs;
        if (!*score) finish_threshold(o);
        const cosci::ScoreReport report = cosci::run_pipeline(o.run);
        emit_report(report, o.run);
        return 0;
    } catch (const cosci::CalibrationFailed& e) {
        std::cerr << "calibration failed: " << e.what() << "\n";
        return kExitCalibration;
    } catch (const cosci::FitError& e) {
        std::cerr << "fit error [" << e.stage() << "]: " << e.what() << "\n";
        return kExitFit;
    } catch (const cosci::InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kExitInput;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
