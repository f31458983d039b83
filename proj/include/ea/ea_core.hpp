#pragma once

#include <array>
#include <optional>
#include <utility>
#include <vector>

#include "ea/ea_ctrv.hpp"
#include "ea/ea_cv.hpp"
#include "ea/motion.hpp"

namespace ea {

/// The four motion combinations, in the fixed reporting order.
inline constexpr std::array<std::pair<MotionModel, MotionModel>, 4> kModelCombos = {{
    {MotionModel::CV, MotionModel::CV},
    {MotionModel::CV, MotionModel::CTRV},
    {MotionModel::CTRV, MotionModel::CV},
    {MotionModel::CTRV, MotionModel::CTRV},
}};

const char* model_combo_name(std::size_t index);

struct EaConfig {
    double horizon = 7.0;  // s
    int stations = 64;
    NumericEaParams numeric;
};

struct EaResult {
    std::array<std::optional<double>, 4> per_model;  // order of kModelCombos
    std::optional<double> mean;   // arithmetic mean over defined components
    bool already_colliding = false;
    bool any_undefined = false;
    double elapsed_s = 0.0;
    Vec2 cv_vector{0.0, 0.0};     // CV-CV optimal relative acceleration
};

/// Four-model evasive acceleration for one frame.
EaResult ea(const RoadUserState& a, const RoadUserState& b, const EaConfig& config);

struct BruteGrid {
    int n_dirs = 360;
    double dm = 0.01;   // m/s^2
    double dt = 0.01;   // s
    double a_max = 100.0;
};

/// Exhaustive direction x magnitude scan with sampled-time overlap checks.
/// Deliberately simple; the independent oracle for the analytic and numeric
/// solvers. Returns a_max when no magnitude within the bound avoids collision.
double ea_bruteforce(const RoadUserState& a, const RoadUserState& b, MotionModel model_a,
                     MotionModel model_b, double horizon, const BruteGrid& grid);

struct BenchmarkReport {
    double mean_ms;
    double p95_ms;
};

/// Wall-clock statistics of the full four-model ea over the given frames.
BenchmarkReport benchmark(const std::vector<std::pair<RoadUserState, RoadUserState>>& frames,
                          const EaConfig& config);

}  // namespace ea
