#include "ea/motion.hpp"

#include <cmath>
#include <stdexcept>

namespace ea {

std::string to_string(RoadUserClass c) {
    switch (c) {
        case RoadUserClass::Car: return "car";
        case RoadUserClass::Truck: return "truck";
        case RoadUserClass::Bus: return "bus";
        case RoadUserClass::Cyclist: return "cyclist";
        case RoadUserClass::Motorcycle: return "motorcycle";
        case RoadUserClass::Pedestrian: return "pedestrian";
        case RoadUserClass::Other: return "other";
    }
    return "other";
}

RoadUserClass road_user_class_from_string(const std::string& s) {
    std::string t;
    t.reserve(s.size());
    for (char ch : s) t.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    if (t == "car" || t == "vehicle") return RoadUserClass::Car;
    if (t == "truck" || t == "truck_bus" || t == "van") return RoadUserClass::Truck;
    if (t == "bus") return RoadUserClass::Bus;
    if (t == "cyclist" || t == "bicycle" || t == "bike") return RoadUserClass::Cyclist;
    if (t == "motorcycle" || t == "motorcyclist" || t == "moped") return RoadUserClass::Motorcycle;
    if (t == "pedestrian" || t == "ped" || t == "person") return RoadUserClass::Pedestrian;
    return RoadUserClass::Other;
}

Pose extrapolate(const RoadUserState& state, MotionModel model, double s) {
    if (s < 0.0) throw std::invalid_argument("extrapolate: s must be >= 0");
    const double th = state.heading;
    if (model == MotionModel::CV || std::abs(state.yaw_rate) < kYawRateEps) {
        return {state.position + state.speed * s * heading_dir(th), th};
    }
    const double w = state.yaw_rate;
    const double r = state.speed / w;
    const Vec2 offset{r * (std::sin(th + w * s) - std::sin(th)),
                      r * (std::cos(th) - std::cos(th + w * s))};
    return {state.position + offset, th + w * s};
}

std::vector<RelativeSample> relative_trajectory(const RoadUserState& a, const RoadUserState& b,
                                                MotionModel model_a, MotionModel model_b,
                                                double horizon, double dt) {
    if (!(horizon > 0.0) || !(dt > 0.0))
        throw std::invalid_argument("relative_trajectory: horizon and dt must be positive");
    std::vector<RelativeSample> out;
    const auto n = static_cast<std::size_t>(std::floor(horizon / dt + 1e-9));
    out.reserve(n + 2);
    for (std::size_t k = 0; k <= n; ++k) {
        const double s = static_cast<double>(k) * dt;
        const Pose pa = extrapolate(a, model_a, s);
        const Pose pb = extrapolate(b, model_b, s);
        out.push_back({s, pa.position - pb.position, pa, pb});
    }
    if (out.back().s < horizon - 1e-9) {
        const Pose pa = extrapolate(a, model_a, horizon);
        const Pose pb = extrapolate(b, model_b, horizon);
        out.push_back({horizon, pa.position - pb.position, pa, pb});
    }
    return out;
}

}  // namespace ea
