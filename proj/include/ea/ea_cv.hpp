#pragma once

#include <optional>
#include <span>
#include <vector>

#include "ea/geometry.hpp"
#include "ea/motion.hpp"

namespace ea {

/// Radial-tangential frame for the CV-CV analytic solver: origin at the
/// current relative position, radial axis along the relative velocity.
struct RtFrame {
    Vec2 origin;           // p_A - p_B
    Vec2 radial_axis;      // unit, along v_rel
    Vec2 tangential_axis;  // radial rotated +90 degrees
    double v_r;            // |v_rel| > 0

    /// nullopt when the relative speed is at or below eps (degenerate frame).
    static std::optional<RtFrame> from_states(const RoadUserState& a, const RoadUserState& b,
                                              double eps = 1e-6);

    /// Frame coordinates (radial, tangential) of a relative-space point.
    Vec2 to_frame(Vec2 relative_point) const {
        const Vec2 d = relative_point - origin;
        return {d.dot(radial_axis), d.dot(tangential_axis)};
    }
};

/// Radial station that must either never be reached or be passed with
/// tangential clearance d_t on the evasion side. d_t == 0 marks a station
/// with no tangential escape: the radial plateau applies for every a_t.
struct StepBarrier {
    double d_r;  // m, > 0
    double d_t;  // m, >= 0
};

/// Lower boundary on the braking component a_r as a function of the
/// tangential component a_t >= 0 for one barrier.
double barrier_boundary(const StepBarrier& barrier, double v_r, double a_t);

/// Barriers for one evasion mode from the collision set expressed in frame
/// coordinates (x radial, y tangential, origin at the current relative
/// position). Stations: `stations` uniform radii over the set's reachable
/// radial extent, every polygon vertex radius, and the radii where the
/// unperturbed path enters/leaves the set. Stations whose mode-side
/// silhouette is negative impose nothing on this mode and are omitted.
std::vector<StepBarrier> build_step_barriers(const ConvexPolygon& c_frame, const RtFrame& frame,
                                             Side mode, double horizon, int stations);

struct EvasionSolution {
    double value;         // m/s^2, = |(a_radial, a_tangential)|
    double a_radial;      // braking component (positive opposes the relative velocity)
    double a_tangential;  // >= 0, toward the mode's evasion side
    Side mode;
};

/// Minimum-norm acceleration on or above the barrier envelope, by finite
/// candidate evaluation (radial point, per-curve minima, pairwise boundary
/// intersections, envelope zero crossing).
EvasionSolution ea_mode(std::span<const StepBarrier> barriers, double v_r, Side mode = Side::Up);

struct CvEaResult {
    double ea;                 // m/s^2; NaN when already colliding
    Vec2 vector;               // relative-space acceleration, world axes
    Side mode;                 // winning mode (Up on ties and when ea == 0)
    bool already_colliding;
    bool predicted_collision;  // unperturbed relative path meets the collision set
};

/// Exact CV-CV evasive acceleration. Returns 0 when the unperturbed relative
/// segment misses the collision set over [0, horizon]; flags current overlap.
CvEaResult ea_cv_value(const RoadUserState& a, const RoadUserState& b, double horizon,
                       int stations);

}  // namespace ea
