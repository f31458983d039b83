#pragma once

#include <string>
#include <vector>

#include "ea/geometry.hpp"

namespace ea {

inline constexpr double kYawRateEps = 1e-6;  // rad/s; below this CTRV falls back to CV

enum class RoadUserClass { Car, Truck, Bus, Cyclist, Motorcycle, Pedestrian, Other };

std::string to_string(RoadUserClass c);
RoadUserClass road_user_class_from_string(const std::string& s);

/// Instantaneous kinematic and footprint state of one road user.
struct RoadUserState {
    Vec2 position;
    double speed = 0.0;       // m/s, >= 0
    double heading = 0.0;     // rad, ccw from +x
    double yaw_rate = 0.0;    // rad/s
    double length = 4.5;      // m
    double width = 1.8;       // m
    RoadUserClass class_label = RoadUserClass::Car;
    double timestamp = 0.0;   // s

    Vec2 velocity() const { return speed * heading_dir(heading); }
    Obb footprint() const { return Obb(position, heading, length, width); }
};

enum class MotionModel { CV, CTRV };

struct Pose {
    Vec2 position;
    double heading = 0.0;
};

/// Extrapolate the state s seconds ahead. CV: straight line, heading held.
/// CTRV: constant-speed circular arc; |yaw_rate| < kYawRateEps degrades to CV.
Pose extrapolate(const RoadUserState& state, MotionModel model, double s);

struct RelativeSample {
    double s;
    Vec2 relative;  // pose_a.position - pose_b.position
    Pose pose_a;
    Pose pose_b;
};

/// Samples at s = 0, dt, 2dt, ..., horizon (horizon always included).
std::vector<RelativeSample> relative_trajectory(const RoadUserState& a, const RoadUserState& b,
                                                MotionModel model_a, MotionModel model_b,
                                                double horizon, double dt);

}  // namespace ea
