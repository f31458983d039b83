#include "ea/ea_ctrv.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ea {

namespace {

constexpr double kNudge = 1e-9;

struct ScanFrame {
    double two_over_s2;
    std::array<Vec2, 4> axes;
    std::array<double, 2> half_a;  // a's projection half-widths on its own axes
    std::array<double, 4> delta;   // b center proj - a center proj, per axis
    std::array<double, 4> wsum;    // summed projection half-widths, per axis
};

struct ScanContext {
    std::vector<ScanFrame> frames;
    bool baseline_overlap = false;  // any grid time with overlapping footprints
};

double obb_extent_on(double half_len, double half_wid, Vec2 axis_long, Vec2 axis) {
    const Vec2 axis_lat = axis_long.perp();
    return half_len * std::abs(axis.dot(axis_long)) + half_wid * std::abs(axis.dot(axis_lat));
}

ScanContext build_scan_context(const RoadUserState& a, const RoadUserState& b,
                               MotionModel model_a, MotionModel model_b, double horizon,
                               double dt) {
    ScanContext ctx;
    const auto n = static_cast<std::size_t>(std::llround(horizon / dt));
    ctx.frames.reserve(n);
    for (std::size_t k = 1; k <= n; ++k) {
        const double s = static_cast<double>(k) * dt;
        const Pose pa = extrapolate(a, model_a, s);
        const Pose pb = extrapolate(b, model_b, s);
        ScanFrame f;
        f.two_over_s2 = 2.0 / (s * s);
        const Vec2 ua = heading_dir(pa.heading);
        const Vec2 ub = heading_dir(pb.heading);
        f.axes = {ua, ua.perp(), ub, ub.perp()};
        bool overlap = true;
        for (int i = 0; i < 4; ++i) {
            const Vec2 axis = f.axes[i];
            f.delta[i] = (pb.position - pa.position).dot(axis);
            f.wsum[i] = obb_extent_on(0.5 * a.length, 0.5 * a.width, ua, axis) +
                        obb_extent_on(0.5 * b.length, 0.5 * b.width, ub, axis);
            if (std::abs(f.delta[i]) > f.wsum[i]) overlap = false;
        }
        ctx.baseline_overlap |= overlap;
        ctx.frames.push_back(f);
    }
    return ctx;
}

DirectionalScan scan_direction(const ScanContext& ctx, double phi, double a_max) {
    const Vec2 u = heading_dir(phi);
    std::vector<MagnitudeInterval> intervals;
    intervals.reserve(ctx.frames.size());
    for (const ScanFrame& f : ctx.frames) {
        double lo = -std::numeric_limits<double>::infinity();
        double hi = std::numeric_limits<double>::infinity();
        bool empty = false;
        for (int i = 0; i < 4 && !empty; ++i) {
            const double d = u.dot(f.axes[i]);
            if (std::abs(d) < 1e-12) {
                if (std::abs(f.delta[i]) > f.wsum[i]) empty = true;
                continue;
            }
            double t0 = (f.delta[i] - f.wsum[i]) / d;
            double t1 = (f.delta[i] + f.wsum[i]) / d;
            if (t0 > t1) std::swap(t0, t1);
            lo = std::max(lo, t0);
            hi = std::min(hi, t1);
            if (lo > hi) empty = true;
        }
        if (empty || !std::isfinite(lo) || !std::isfinite(hi)) continue;
        intervals.push_back({lo * f.two_over_s2, hi * f.two_over_s2});
    }
    std::sort(intervals.begin(), intervals.end(),
              [](const MagnitudeInterval& a, const MagnitudeInterval& b) { return a.lo < b.lo; });
    std::vector<MagnitudeInterval> merged;
    merged.reserve(intervals.size());
    for (const MagnitudeInterval& iv : intervals) {
        if (!merged.empty() && iv.lo <= merged.back().hi + 1e-12)
            merged.back().hi = std::max(merged.back().hi, iv.hi);
        else
            merged.push_back(iv);
    }
    DirectionalScan out{phi, 0.0, std::move(merged)};
    for (const MagnitudeInterval& iv : out.collision_union) {
        if (iv.lo <= 1e-12 && iv.hi >= -1e-12) {
            const double m = iv.hi + kNudge;
            out.magnitude = (m > a_max) ? std::optional<double>{} : std::optional<double>{m};
            return out;
        }
    }
    return out;  // 0 outside the union: no intervention needed along this ray
}

}  // namespace

void NumericEaParams::validate() const {
    if (!(dt > 0.0)) throw std::invalid_argument("NumericEaParams: dt must be > 0");
    if (!(a_max > 0.0)) throw std::invalid_argument("NumericEaParams: a_max must be > 0");
    if (!(coarse_step_rad > 0.0))
        throw std::invalid_argument("NumericEaParams: coarse step must be > 0");
    double prev = coarse_step_rad;
    for (const RefineLevel& l : refine_levels) {
        if (!(l.step_rad > 0.0) || !(l.half_window_rad > 0.0) || l.step_rad >= prev)
            throw std::invalid_argument("NumericEaParams: refine steps must decrease");
        prev = l.step_rad;
    }
}

DirectionalScan directional_min(const RoadUserState& a, const RoadUserState& b,
                                MotionModel model_a, MotionModel model_b, double phi,
                                double horizon, const NumericEaParams& params) {
    params.validate();
    if (obb_overlap(a.footprint(), b.footprint()))
        throw std::domain_error("directional_min: states already colliding at s = 0");
    const ScanContext ctx = build_scan_context(a, b, model_a, model_b, horizon, params.dt);
    return scan_direction(ctx, phi, params.a_max);
}

NumericEaResult ea_numeric(const RoadUserState& a, const RoadUserState& b, MotionModel model_a,
                           MotionModel model_b, double horizon, const NumericEaParams& params) {
    params.validate();
    NumericEaResult out;
    if (obb_overlap(a.footprint(), b.footprint())) {
        out.already_colliding = true;
        return out;
    }
    const Vec2 v_rel = a.velocity() - b.velocity();
    const double phi0 = (v_rel.norm() > 1e-12) ? std::atan2(v_rel.y, v_rel.x) : 0.0;
    out.phi_star = phi0;

    const ScanContext ctx = build_scan_context(a, b, model_a, model_b, horizon, params.dt);
    if (!ctx.baseline_overlap) {
        out.ea = 0.0;
        return out;
    }

    bool have = false;
    double best_m = std::numeric_limits<double>::infinity();
    double best_phi = phi0;
    auto probe = [&](double phi) -> std::optional<double> {
        const DirectionalScan d = scan_direction(ctx, phi, params.a_max);
        if (d.magnitude && (!have || *d.magnitude < best_m)) {
            have = true;
            best_m = *d.magnitude;
            best_phi = phi;
        }
        return d.magnitude;
    };

    const int n_coarse = std::max(1, static_cast<int>(std::llround(2.0 * kPi / params.coarse_step_rad)));
    std::vector<double> coarse_m(n_coarse, std::numeric_limits<double>::infinity());
    for (int k = 0; k < n_coarse; ++k) {
        const auto m = probe(phi0 + k * params.coarse_step_rad);
        if (m) coarse_m[k] = *m;
    }
    if (!have) return out;  // every direction exhausted the bound
    out.level_minima.push_back(best_m);

    // refinement seeds: every coarse local minimum near the best value, so
    // secondary valleys are not lost to the coarse sampling
    struct Seed {
        double phi;
        double m;
    };
    std::vector<Seed> seeds;
    const double admit = best_m * 1.15 + 0.30;
    for (int k = 0; k < n_coarse; ++k) {
        if (!(coarse_m[k] <= admit)) continue;
        const double prev = coarse_m[(k + n_coarse - 1) % n_coarse];
        const double next = coarse_m[(k + 1) % n_coarse];
        if (coarse_m[k] <= prev && coarse_m[k] <= next)
            seeds.push_back({phi0 + k * params.coarse_step_rad, coarse_m[k]});
    }
    std::sort(seeds.begin(), seeds.end(), [](const Seed& a, const Seed& b) { return a.m < b.m; });
    if (seeds.size() > 10) seeds.resize(10);
    if (seeds.empty()) seeds.push_back({best_phi, best_m});

    for (const RefineLevel& level : params.refine_levels) {
        const int n = static_cast<int>(std::llround(level.half_window_rad / level.step_rad));
        for (Seed& seed : seeds) {
            const double center = seed.phi;
            for (int k = -n; k <= n; ++k) {
                const double phi = center + k * level.step_rad;
                const auto m = probe(phi);
                if (m && *m < seed.m) {
                    seed.m = *m;
                    seed.phi = phi;
                }
            }
        }
        out.level_minima.push_back(best_m);
    }

    // Final selection on a nested finer grid (dt/20 nests the dt/4 and the
    // 0.005 s verification grids). The dt-grid surface undershoots between
    // samples and its argmin can sit in the wrong valley, so every seed is
    // re-evaluated on the fine grid and the best one refined angularly there.
    const ScanContext fine =
        build_scan_context(a, b, model_a, model_b, horizon, params.dt / 20.0);
    bool fine_have = false;
    double fine_m = std::numeric_limits<double>::infinity();
    double fine_phi = best_phi;
    auto fine_probe = [&](double phi) {
        const DirectionalScan d = scan_direction(fine, phi, params.a_max);
        if (d.magnitude && (!fine_have || *d.magnitude < fine_m)) {
            fine_have = true;
            fine_m = *d.magnitude;
            fine_phi = phi;
        }
    };
    fine_probe(best_phi);
    for (const Seed& seed : seeds) fine_probe(seed.phi);
    constexpr double kDeg = kPi / 180.0;
    for (const auto& [half_deg, step_deg] :
         {std::pair{5.0, 1.0}, std::pair{1.0, 0.2}, std::pair{0.2, 0.05}}) {
        const double center = fine_phi;
        const int n = static_cast<int>(std::llround(half_deg / step_deg));
        for (int k = -n; k <= n; ++k) {
            if (k == 0) continue;
            fine_probe(center + k * step_deg * kDeg);
        }
    }
    if (!fine_have) return out;  // bound exhausted at the fine grid
    out.ea = fine_m;
    out.phi_star = fine_phi;
    out.vector = fine_m * heading_dir(fine_phi);
    return out;
}

}  // namespace ea
