#pragma once

#include <optional>
#include <vector>

#include "ea/geometry.hpp"
#include "ea/motion.hpp"

namespace ea {

inline constexpr double kPi = 3.14159265358979323846;

struct RefineLevel {
    double half_window_rad;
    double step_rad;
};

struct NumericEaParams {
    double dt = 0.05;       // s
    double a_max = 100.0;   // m/s^2
    double coarse_step_rad = 5.0 * kPi / 180.0;
    std::vector<RefineLevel> refine_levels = {{5.0 * kPi / 180.0, 0.5 * kPi / 180.0},
                                              {0.5 * kPi / 180.0, 0.05 * kPi / 180.0}};
    void validate() const;
};

struct MagnitudeInterval {
    double lo;
    double hi;
};

struct DirectionalScan {
    double phi;
    std::optional<double> magnitude;               // directional minimum m(phi); nullopt beyond a_max
    std::vector<MagnitudeInterval> collision_union;  // sorted, disjoint
};

/// Smallest magnitude m so that translating user a's predicted centers by
/// 0.5*m*u(phi)*s^2 (orientation evolution kept) is overlap-free on the
/// discrete grid s = dt..horizon. Throws std::domain_error when the states
/// already overlap at s = 0.
DirectionalScan directional_min(const RoadUserState& a, const RoadUserState& b,
                                MotionModel model_a, MotionModel model_b, double phi,
                                double horizon, const NumericEaParams& params);

struct NumericEaResult {
    std::optional<double> ea;   // nullopt when every direction exhausts a_max
    double phi_star = 0.0;
    Vec2 vector{0.0, 0.0};      // ea * u(phi_star)
    bool already_colliding = false;
    std::vector<double> level_minima;  // best defined magnitude after coarse + each refinement
};

/// Coarse-to-fine directional evaluation of the numeric EA. The directional
/// grid is anchored at the relative-velocity angle so results are equivariant
/// under global rotation and user swap.
NumericEaResult ea_numeric(const RoadUserState& a, const RoadUserState& b, MotionModel model_a,
                           MotionModel model_b, double horizon, const NumericEaParams& params);

}  // namespace ea
