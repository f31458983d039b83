#include "ea/synth.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <stdexcept>

namespace ea {

namespace {

// Straight-line agent with an optional scripted braking phase (stops, never
// reverses) and fixed heading.
struct Agent {
    Vec2 start;
    double heading = 0.0;
    double speed = 0.0;
    double brake_time = std::numeric_limits<double>::infinity();
    double decel = 0.0;
    double length = 4.5;
    double width = 1.8;
    RoadUserClass cls = RoadUserClass::Car;

    double travel(double t) const {
        if (t <= brake_time || decel <= 0.0) return speed * t;
        const double tb = t - brake_time;
        const double stop = speed / decel;
        const double post = (tb < stop) ? speed * tb - 0.5 * decel * tb * tb
                                        : speed * speed / (2.0 * decel);
        return speed * brake_time + post;
    }

    double speed_at(double t) const {
        if (t <= brake_time || decel <= 0.0) return speed;
        return std::max(speed - decel * (t - brake_time), 0.0);
    }

    RoadUserState state_at(double t) const {
        RoadUserState s;
        s.timestamp = t;
        s.position = start + travel(t) * heading_dir(heading);
        s.speed = speed_at(t);
        s.heading = heading;
        s.yaw_rate = 0.0;
        s.length = length;
        s.width = width;
        s.class_label = cls;
        return s;
    }
};

Track sample_track(const Agent& agent, const std::string& id, double rate_hz, double t_end) {
    Track tr;
    tr.track_id = id;
    tr.class_label = agent.cls;
    tr.rate_hz = rate_hz;
    const auto n = static_cast<std::size_t>(std::floor(t_end * rate_hz + 1e-9));
    tr.frames.reserve(n + 1);
    for (std::size_t k = 0; k <= n; ++k) tr.frames.push_back(agent.state_at(k / rate_hz));
    return tr;
}

std::optional<double> first_overlap_time(const Agent& a, const Agent& b, double t_end) {
    double prev = 0.0;
    if (obb_overlap(a.state_at(0.0).footprint(), b.state_at(0.0).footprint())) return 0.0;
    for (double t = 0.01; t <= t_end + 1e-9; t += 0.01) {
        if (obb_overlap(a.state_at(t).footprint(), b.state_at(t).footprint())) {
            double lo = prev, hi = t;
            while (hi - lo > 1e-6) {
                const double mid = 0.5 * (lo + hi);
                if (obb_overlap(a.state_at(mid).footprint(), b.state_at(mid).footprint()))
                    hi = mid;
                else
                    lo = mid;
            }
            return hi;
        }
        prev = t;
    }
    return std::nullopt;
}

}  // namespace

GeneratedScenario generate(const ScenarioSpec& spec) {
    std::mt19937_64 rng(spec.seed);
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);

    const double va = std::max(0.5, spec.speed_a * (1.0 + 0.05 * jitter(rng)));
    const double vb = std::max(0.3, spec.speed_b * (1.0 + 0.05 * jitter(rng)));
    const double t_c = spec.lead_in_s;

    Agent a, b;
    a.speed = va;
    b.speed = vb;

    switch (spec.template_id) {
        case ScenarioTemplate::HeadOn: {
            a.heading = 0.0;
            b.heading = kPi;
            a.start = {0.0, 0.0};
            const double center_gap = spec.gap + 0.5 * (a.length + b.length);
            b.start = {center_gap, 0.0};
            if (spec.outcome == ScenarioOutcome::Benign) {
                b.start.y = std::max(spec.lateral_offset, b.width + a.width);
            } else if (spec.outcome == ScenarioOutcome::Resolved) {
                // both stop with a margin before contact
                const double t_imp = spec.gap / (va + vb);
                const double tb = std::max(0.3 * t_imp, t_imp - 2.0);
                a.brake_time = tb;
                b.brake_time = tb;
                // distance each may still travel after tb: half the gap minus margin
                const double avail_a = 0.5 * (spec.gap - 2.0) - va * tb;
                const double avail_b = 0.5 * (spec.gap - 2.0) - vb * tb;
                a.decel = (avail_a > 0.3) ? va * va / (2.0 * avail_a) : va / 0.2;
                b.decel = (avail_b > 0.3) ? vb * vb / (2.0 * avail_b) : vb / 0.2;
            }
            break;
        }
        case ScenarioTemplate::Crossing:
        case ScenarioTemplate::Merging:
        case ScenarioTemplate::PedestrianCrossing: {
            double angle = spec.crossing_angle;
            if (spec.template_id == ScenarioTemplate::Merging) angle = spec.crossing_angle * 0.35;
            a.heading = 0.0;
            b.heading = angle;
            if (spec.template_id == ScenarioTemplate::PedestrianCrossing) {
                b.length = 0.6;
                b.width = 0.6;
                b.cls = RoadUserClass::Pedestrian;
            }
            const double aim_jitter =
                (spec.outcome == ScenarioOutcome::ForcedCrash) ? 0.25 * jitter(rng) : 0.0;
            double arrive_b = t_c;
            if (spec.outcome == ScenarioOutcome::Benign)
                arrive_b = t_c + 2.5 + (a.length + b.length) / std::min(va, vb);
            a.start = Vec2{aim_jitter, 0.0} - va * t_c * heading_dir(a.heading);
            b.start = Vec2{0.0, 0.0} - vb * arrive_b * heading_dir(b.heading);
            if (spec.outcome == ScenarioOutcome::Resolved) {
                // a yields: stop short of the crossing zone
                const double zone = 0.5 * a.length + 0.5 * std::max(b.length, b.width) + 1.0;
                const double tb = std::max(0.5, t_c - 2.5);
                const double avail = va * t_c - zone - va * tb;
                a.brake_time = tb;
                a.decel = (avail > 0.3) ? va * va / (2.0 * avail) : va / 0.2;
            }
            break;
        }
        case ScenarioTemplate::ParallelBenign: {
            a.heading = 0.0;
            b.heading = 0.0;
            a.start = {0.0, 0.0};
            b.start = {-8.0 + 2.0 * jitter(rng), std::max(spec.lateral_offset, 3.0)};
            break;
        }
    }

    GeneratedScenario out;
    const double scan_end = t_c + spec.post_s + 3.0;
    if (spec.outcome == ScenarioOutcome::ForcedCrash) {
        out.impact_time = first_overlap_time(a, b, scan_end);
        if (!out.impact_time)
            throw std::logic_error("generate: forced-crash template failed to collide");
    }
    const double t_end = spec.outcome == ScenarioOutcome::ForcedCrash
                             ? *out.impact_time + spec.post_s
                             : t_c + 3.0;
    out.track_a = sample_track(a, spec.id_a, spec.rate_hz, t_end);
    out.track_b = sample_track(b, spec.id_b, spec.rate_hz, t_end);
    return out;
}

}  // namespace ea
