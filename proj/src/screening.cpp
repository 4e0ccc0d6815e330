#include "cosci/screening.hpp"

#include "cosci/parallel.hpp"

#include <cmath>
#include <sstream>

namespace cosci {

void ThresholdSpec::validate() const {
    if (mode == ThresholdMode::fixed && !(alpha0 > 0.0 && alpha0 <= 0.5)) {
        throw InputError("alpha0 must lie in (0, 0.5]");
    }
    if (mode == ThresholdMode::simulated) {
        if (grid.empty()) throw InputError("calibration grid is empty");
        for (std::size_t i = 0; i < grid.size(); ++i) {
            if (!(grid[i] > 0.0 && grid[i] <= 0.5)) throw InputError("calibration grid values must lie in (0, 0.5]");
            if (i > 0 && !(grid[i] > grid[i - 1])) throw InputError("calibration grid must be strictly increasing");
        }
        if (!(detect_tolerance >= 0.0 && detect_tolerance < 1.0)) {
            throw InputError("detection tolerance must lie in [0, 1)");
        }
        noise_family.validate();
    }
}

ScreenResult screen_fixed(std::span<const FeatureScore> scores, double alpha0) {
    if (!(alpha0 > 0.0 && alpha0 <= 0.5)) throw InputError("alpha0 must lie in (0, 0.5]");
    ScreenResult out;
    out.alpha0_used = alpha0;
    out.scores.assign(scores.begin(), scores.end());
    for (std::size_t j = 0; j < scores.size(); ++j) {
        if (scores[j].score >= alpha0) out.selected.push_back(j);
    }
    return out;
}

std::vector<double> noise_scores(const DistributionSpec& family, std::size_t n, std::size_t reps,
                                 std::uint64_t seed, std::size_t threads) {
    family.validate();
    std::vector<double> scores(reps);
    parallel_for(reps, threads, [&](std::size_t r) {
        const Draws draws = sample_distribution(family, n, seed, r);
        scores[r] = score_feature(draws.values).score;
    });
    return scores;
}

std::vector<DetectionRow> detection_table(std::size_t n, const ThresholdSpec& spec, std::uint64_t seed,
                                          std::size_t threads) {
    if (n < 2) throw InputError("calibration needs n >= 2");
    if (spec.reps == 0) throw InputError("calibration needs at least one replicate");
    const std::vector<double> scores = noise_scores(spec.noise_family, n, spec.reps, seed, threads);
    std::vector<DetectionRow> table;
    table.reserve(spec.grid.size());
    for (double alpha : spec.grid) {
        DetectionRow row{alpha, 0, spec.reps};
        for (double s : scores) {
            if (s >= alpha) ++row.detections;
        }
        table.push_back(row);
    }
    return table;
}

double calibrate_threshold(std::size_t n, const ThresholdSpec& spec, std::uint64_t seed, std::size_t threads) {
    ThresholdSpec checked = spec;
    checked.mode = ThresholdMode::simulated;
    checked.validate();
    if (spec.reps < 50) throw InputError("calibration needs at least 50 replicates");

    std::vector<DetectionRow> table = detection_table(n, checked, seed, threads);
    for (const DetectionRow& row : table) {
        if (row.fraction() <= spec.detect_tolerance) return row.alpha;
    }
    std::ostringstream msg;
    msg << "no grid value reaches detection fraction <= " << spec.detect_tolerance << " at n = " << n << " (";
    for (std::size_t i = 0; i < table.size(); ++i) {
        msg << (i ? ", " : "") << table[i].alpha << ": " << table[i].fraction();
    }
    msg << ")";
    throw CalibrationFailed(msg.str(), std::move(table));
}

}  // namespace cosci
