#pragma once

#include "cosci/distributions.hpp"
#include "cosci/error.hpp"
#include "cosci/merge_engine.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace cosci {

enum class ThresholdMode { fixed, simulated, data_driven };

struct ThresholdSpec {
    ThresholdMode mode = ThresholdMode::fixed;
    double alpha0 = 0.2;
    DistributionSpec noise_family = DistributionSpec::gaussian();
    std::vector<double> grid = default_grid();
    std::size_t reps = 200;
    double detect_tolerance = 0.01;

    static std::vector<double> default_grid() { return {0.01, 0.02, 0.05, 0.1, 0.15, 0.2, 0.25}; }

    /// Throws InputError for a malformed grid, alpha0 or tolerance.
    void validate() const;
};

struct ScreenResult {
    std::vector<std::size_t> selected;  ///< 0-based, ascending
    double alpha0_used = 0.0;
    std::vector<FeatureScore> scores;
};

/// Keeps every feature with S_j >= alpha0.
ScreenResult screen_fixed(std::span<const FeatureScore> scores, double alpha0);

/// Detection frequency of one grid value over the calibration replicates.
struct DetectionRow {
    double alpha = 0.0;
    std::size_t detections = 0;
    std::size_t reps = 0;

    double fraction() const noexcept { return reps == 0 ? 0.0 : static_cast<double>(detections) / static_cast<double>(reps); }
};

/// Raised when no grid value keeps the detection fraction within tolerance.
class CalibrationFailed : public Error {
  public:
    CalibrationFailed(const std::string& what, std::vector<DetectionRow> table)
      : Error(what), table_(std::move(table)) {}

    const std::vector<DetectionRow>& table() const noexcept { return table_; }

  private:
    std::vector<DetectionRow> table_;
};

/// Scores of `reps` pure-noise samples of size n, one per replicate stream.
std::vector<double> noise_scores(const DistributionSpec& family, std::size_t n, std::size_t reps,
                                 std::uint64_t seed, std::size_t threads);

/// For every grid value, how many noise replicates reach S >= alpha.
std::vector<DetectionRow> detection_table(std::size_t n, const ThresholdSpec& spec, std::uint64_t seed,
                                          std::size_t threads);

/// Smallest grid value whose detection fraction is at most the tolerance.
/// Throws CalibrationFailed (carrying the table) when none qualifies.
double calibrate_threshold(std::size_t n, const ThresholdSpec& spec, std::uint64_t seed, std::size_t threads);

}  // namespace cosci
