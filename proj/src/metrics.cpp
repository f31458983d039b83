#include "ea/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ea {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

RoadUserState cv_shifted(const RoadUserState& s, double dt) {
    RoadUserState out = s;
    out.position = s.position + s.speed * dt * heading_dir(s.heading);
    return out;
}

double gap_at(const RoadUserState& a, const RoadUserState& b, double dt) {
    return obb_distance(cv_shifted(a, dt).footprint(), cv_shifted(b, dt).footprint());
}

bool cv_overlap_at(const RoadUserState& a, const RoadUserState& b, double s) {
    return obb_overlap(cv_shifted(a, s).footprint(), cv_shifted(b, s).footprint());
}

}  // namespace

const char* to_string(MetricId id) {
    switch (id) {
        case MetricId::EA: return "EA";
        case MetricId::TTC: return "TTC";
        case MetricId::DRAC: return "DRAC";
        case MetricId::TTC2D: return "TTC2D";
        case MetricId::ACT: return "ACT";
        case MetricId::DRAC2D: return "DRAC2D";
        case MetricId::MEI: return "MEI";
        case MetricId::BBOX_DIST: return "BBOX_DIST";
    }
    return "EA";
}

MetricId metric_from_string(const std::string& name) {
    for (MetricId id : kAllMetrics)
        if (name == to_string(id)) return id;
    throw std::invalid_argument("unknown metric id: " + name);
}

TtcDrac ttc_drac(const RoadUserState& a, const RoadUserState& b) {
    const double g = obb_distance(a.footprint(), b.footprint());
    if (g <= 0.0) return {0.0, kInf};
    // Closing speed from the CV relative motion, symmetric difference.
    const double tau = 1e-4;
    const double c = (gap_at(a, b, -tau) - gap_at(a, b, tau)) / (2.0 * tau);
    if (c <= 1e-12) return {kInf, 0.0};
    return {g / c, c * c / (2.0 * g)};
}

double ttc2d(const RoadUserState& a, const RoadUserState& b, double horizon) {
    if (obb_overlap(a.footprint(), b.footprint())) return 0.0;
    const double dt = 0.05;
    double prev = 0.0;
    const auto n = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
    for (std::size_t k = 1; k <= n; ++k) {
        const double s = std::min(static_cast<double>(k) * dt, horizon);
        if (cv_overlap_at(a, b, s)) {
            double lo = prev, hi = s;
            while (hi - lo > 1e-5) {
                const double mid = 0.5 * (lo + hi);
                if (cv_overlap_at(a, b, mid))
                    hi = mid;
                else
                    lo = mid;
            }
            return hi;
        }
        prev = s;
    }
    return kInf;
}

double act(const RoadUserState& a, const RoadUserState& b) {
    const ClosestPoints cp = obb_closest_points(a.footprint(), b.footprint());
    if (cp.distance <= 0.0) return 0.0;
    const Vec2 u = (cp.on_b - cp.on_a) * (1.0 / cp.distance);
    const double c = (a.velocity() - b.velocity()).dot(u);
    if (c <= 1e-12) return kInf;
    return cp.distance / c;
}

double drac2d(const RoadUserState& a, const RoadUserState& b, double horizon) {
    if (obb_overlap(a.footprint(), b.footprint())) return kInf;
    const double dt = 0.05;
    const auto n = static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
    const Vec2 ua = heading_dir(a.heading);

    auto overlap_with_decel = [&](double d) {
        for (std::size_t k = 1; k <= n; ++k) {
            const double s = std::min(static_cast<double>(k) * dt, horizon);
            double travel;
            if (d <= 1e-12) {
                travel = a.speed * s;
            } else {
                const double stop_time = a.speed / d;
                travel = (s < stop_time) ? a.speed * s - 0.5 * d * s * s
                                         : a.speed * a.speed / (2.0 * d);
            }
            const Obb oa{a.position + travel * ua, a.heading, a.length, a.width};
            const Obb ob{b.position + b.speed * s * heading_dir(b.heading), b.heading, b.length,
                         b.width};
            if (obb_overlap(oa, ob)) return true;
        }
        return false;
    };

    if (!overlap_with_decel(0.0)) return 0.0;
    double hi = 1.0;
    int guard = 0;
    while (overlap_with_decel(hi)) {
        hi *= 2.0;
        if (++guard > 14) return kInf;  // even extreme braking collides
    }
    double lo = hi * 0.5;
    if (hi <= 1.0) lo = 0.0;
    for (int it = 0; it < 60 && hi - lo > 1e-6; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (overlap_with_decel(mid))
            lo = mid;
        else
            hi = mid;
    }
    return hi;
}

double mei(const RoadUserState& a, const RoadUserState& b) {
    const ClosestPoints cp = obb_closest_points(a.footprint(), b.footprint());
    if (cp.distance <= 0.0) return kInf;
    const Vec2 u = (cp.on_b - cp.on_a) * (1.0 / cp.distance);
    const double c = (a.velocity() - b.velocity()).dot(u);
    if (c <= 1e-12) return 0.0;
    return c * c / (2.0 * cp.distance);
}

double risk_orient(MetricId id, double raw) {
    switch (id) {
        case MetricId::EA:
        case MetricId::DRAC:
        case MetricId::DRAC2D:
        case MetricId::MEI:
            return std::min(raw, kRiskCap);
        case MetricId::TTC:
        case MetricId::TTC2D:
        case MetricId::ACT:
            if (std::isinf(raw)) return 0.0;
            if (raw <= 1.0 / kRiskCap) return kRiskCap;
            return 1.0 / raw;
        case MetricId::BBOX_DIST:
            return -raw;
    }
    return raw;
}

FrameMetrics compute_frame_metrics(const RoadUserState& a, const RoadUserState& b,
                                   const EaConfig& config) {
    FrameMetrics out;
    out.ea_detail = ea(a, b, config);

    auto set = [&](MetricId id, double raw, bool defined = true) {
        RiskSample& s = out.samples[metric_index(id)];
        s.raw = raw;
        s.defined = defined;
        s.risk = defined ? risk_orient(id, raw) : std::numeric_limits<double>::quiet_NaN();
    };

    if (out.ea_detail.mean)
        set(MetricId::EA, *out.ea_detail.mean);
    else
        set(MetricId::EA, std::numeric_limits<double>::quiet_NaN(), false);

    const TtcDrac td = ttc_drac(a, b);
    set(MetricId::TTC, td.ttc);
    set(MetricId::DRAC, td.drac);
    set(MetricId::TTC2D, ttc2d(a, b, config.horizon));
    set(MetricId::ACT, act(a, b));
    set(MetricId::DRAC2D, drac2d(a, b, config.horizon));
    set(MetricId::MEI, mei(a, b));
    set(MetricId::BBOX_DIST, obb_distance(a.footprint(), b.footprint()));
    return out;
}

}  // namespace ea
