#pragma once

#include <array>
#include <string>

#include "ea/ea_core.hpp"
#include "ea/motion.hpp"

namespace ea {

enum class MetricId { EA, TTC, DRAC, TTC2D, ACT, DRAC2D, MEI, BBOX_DIST };

inline constexpr std::size_t kMetricCount = 8;
inline constexpr std::array<MetricId, kMetricCount> kAllMetrics = {
    MetricId::EA,  MetricId::TTC,    MetricId::DRAC, MetricId::TTC2D,
    MetricId::ACT, MetricId::DRAC2D, MetricId::MEI,  MetricId::BBOX_DIST};

const char* to_string(MetricId id);
MetricId metric_from_string(const std::string& name);
inline std::size_t metric_index(MetricId id) { return static_cast<std::size_t>(id); }

/// Oriented risk scores are capped so they stay finite for the threshold and
/// calibration machinery (contact frames would otherwise produce 1/0).
inline constexpr double kRiskCap = 1e9;

struct RiskSample {
    double raw = 0.0;    // metric-native units
    double risk = 0.0;   // oriented score, higher = riskier
    bool defined = false;
};

struct TtcDrac {
    double ttc;   // s, +inf when not closing
    double drac;  // m/s^2
};

/// Classical 1-D time-to-collision and required deceleration on the
/// bounding-box gap, with the closing speed from the CV relative motion.
TtcDrac ttc_drac(const RoadUserState& a, const RoadUserState& b);

/// First time in (0, horizon] at which the CV-extrapolated footprints
/// overlap; grid scan plus bisection refined to 1e-4 s; +inf when none.
double ttc2d(const RoadUserState& a, const RoadUserState& b, double horizon);

/// Footprint gap over the closing rate measured along the nearest-point
/// line; +inf when not closing.
double act(const RoadUserState& a, const RoadUserState& b);

/// Minimum constant deceleration along a's own velocity direction (braking
/// to a stop, no reversal) avoiding footprint overlap over the horizon;
/// 0 when no overlap is predicted, +inf when no deceleration avoids it.
double drac2d(const RoadUserState& a, const RoadUserState& b, double horizon);

/// Modified emergency index: required relative deceleration along the
/// nearest-point line, c^2 / (2 g) with c the gap closing rate on that line.
double mei(const RoadUserState& a, const RoadUserState& b);

/// Uniform "higher = riskier" orientation. EA/DRAC/DRAC2D/MEI: identity;
/// TTC/TTC2D/ACT: reciprocal with inf -> 0; BBOX_DIST: negation.
double risk_orient(MetricId id, double raw);

struct FrameMetrics {
    std::array<RiskSample, kMetricCount> samples;
    EaResult ea_detail;
};

/// All eight metrics (raw + oriented) for one frame.
FrameMetrics compute_frame_metrics(const RoadUserState& a, const RoadUserState& b,
                                   const EaConfig& config);

}  // namespace ea
