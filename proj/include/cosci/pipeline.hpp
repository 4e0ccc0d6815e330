#pragma once

#include "cosci/fdr_selector.hpp"
#include "cosci/merge_engine.hpp"
#include "cosci/screening.hpp"
#include "cosci/simgen.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace cosci {

enum class Command { score, select, calibrate, pairs, simulate, eval };

struct RunConfig {
    Command command = Command::score;
    std::string input_path;
    std::string output_path;
    ThresholdSpec threshold;
    double truncation_q = 0.9;
    std::size_t bins = 60;
    int degree = 0;
    std::size_t m = 20;  ///< pair grid points on the unit circle
    std::optional<double> tau;
    std::size_t threads = 1;
    std::uint64_t seed = 1;
    bool transpose = false;
    bool has_header = false;
};

struct FeatureRecord {
    std::size_t index = 0;  ///< 1-based
    std::string name;
    double score = 0.0;
    std::optional<double> restricted_score;
    double psi = 0.0;
    std::optional<double> T;
    bool selected = false;
};

struct ScoreReport {
    std::vector<FeatureRecord> records;
    std::size_t n = 0;
    std::size_t p = 0;
    std::string mode = "none";
    std::optional<double> alpha0_used;
    std::vector<std::size_t> selected;  ///< 0-based
    std::optional<std::size_t> k_s;
    std::optional<std::size_t> k_d;
    std::optional<double> alpha0_hat;
    std::optional<double> delta_p;
    std::optional<NullModel> null;
    std::optional<int> lindsey_degree;
    std::vector<DetectionRow> calibration;
    double wall_seconds = 0.0;
};

/// Clustering score of every column; results do not depend on `threads`.
std::vector<FeatureScore> score_matrix(const DatasetMatrix& X, std::optional<double> tau, std::size_t threads);

/// Scores the matrix and applies the configured command (score, select or pairs).
ScoreReport analyze(const DatasetMatrix& X, const RunConfig& config);

/// Ingests config.input_path, analyzes it and writes the report when an
/// output path is set. Nothing is written if any stage fails.
ScoreReport run_pipeline(const RunConfig& config);

std::string report_csv(const ScoreReport& report);
std::string report_json(const ScoreReport& report, bool include_wall_time = true);

/// Writes the CSV records to `path` and the JSON summary to `path` + ".json".
void write_report(const ScoreReport& report, const std::string& path);

struct ExperimentConfig {
    Design design;
    std::size_t n = 1000;
    std::size_t reps = 50;
    ThresholdMode mode = ThresholdMode::fixed;
    std::vector<double> alpha0s{0.2};  ///< fixed mode evaluates every value
    double truncation_q = 0.9;
    DataDrivenConfig data_driven;
    ThresholdSpec calibration;  ///< simulated mode
    bool pairs = false;
    std::size_t m = 20;  ///< pair grid points on the unit circle
    bool compute_cer = false;
    std::size_t kmeans_restarts = 10;
    std::uint64_t seed = 1;
    std::size_t threads = 1;
};

struct MetricsRow {
    std::string label;
    std::optional<double> alpha0;
    std::size_t reps = 0;
    double avg_fn = 0.0;
    double se_fn = 0.0;
    double avg_fp = 0.0;
    double se_fp = 0.0;
    std::optional<double> avg_cer;
    std::optional<double> se_cer;
    std::size_t fit_failures = 0;  ///< replicates whose fit failed; they count as empty selections
};

/// Seed of replicate r derived from the master seed.
std::uint64_t replicate_seed(std::uint64_t seed, std::size_t r);

/// Regenerates the design `reps` times and reports average FN / FP (and CER
/// when requested) with standard errors, one row per threshold.
std::vector<MetricsRow> run_experiment(const ExperimentConfig& config);

std::string metrics_csv(const std::vector<MetricsRow>& rows);

}  // namespace cosci
