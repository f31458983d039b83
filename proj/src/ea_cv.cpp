#include "ea/ea_cv.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <tuple>

namespace ea {

namespace {

constexpr double kFeasSlack = 1e-9;   // feasibility slack for candidate checks, m/s^2
constexpr double kNudge = 1e-9;       // strict-feasibility nudge on returned magnitudes
constexpr double kTinyClearance = 1e-12;

struct Candidate {
    double a_r;
    double a_t;
};

double plateau(const StepBarrier& b, double v_r) { return v_r * v_r / (2.0 * b.d_r); }

double branch_a_t(const StepBarrier& b, double v_r) {
    return b.d_t * v_r * v_r / (2.0 * b.d_r * b.d_r);
}

// a_t at which the curved branch reaches a_r = 0 (equals 4 * branch_a_t).
double zero_a_t(const StepBarrier& b, double v_r) {
    return 2.0 * v_r * v_r * b.d_t / (b.d_r * b.d_r);
}

bool feasible(std::span<const StepBarrier> barriers, double v_r, const Candidate& c) {
    if (c.a_t < -kFeasSlack) return false;
    const double a_t = std::max(c.a_t, 0.0);
    for (const StepBarrier& b : barriers)
        if (c.a_r < barrier_boundary(b, v_r, a_t) - kFeasSlack) return false;
    return true;
}

// Dominated barriers have pointwise lower boundaries and never shape the
// envelope. Walls (d_t == 0) act as infinite-clearance demands.
std::vector<StepBarrier> prune_dominated(std::span<const StepBarrier> barriers) {
    std::vector<StepBarrier> kept;
    kept.reserve(barriers.size());
    for (std::size_t i = 0; i < barriers.size(); ++i) {
        const StepBarrier& bi = barriers[i];
        const double ti = bi.d_t > 0.0 ? bi.d_t : std::numeric_limits<double>::infinity();
        bool dominated = false;
        for (std::size_t j = 0; j < barriers.size() && !dominated; ++j) {
            if (j == i) continue;
            const StepBarrier& bj = barriers[j];
            const double tj = bj.d_t > 0.0 ? bj.d_t : std::numeric_limits<double>::infinity();
            if (bj.d_r < bi.d_r && tj >= ti) dominated = true;
            if (bj.d_r == bi.d_r && tj > ti) dominated = true;
            if (bj.d_r == bi.d_r && tj == ti && j < i) dominated = true;  // duplicate
        }
        if (!dominated) kept.push_back(bi);
    }
    return kept;
}

// Minimum-norm point on barrier i's curved branch, a_t in [branch, zero].
Candidate curve_min_norm(const StepBarrier& b, double v_r) {
    const double lo0 = branch_a_t(b, v_r);
    const double hi0 = zero_a_t(b, v_r);
    auto f = [&](double a_t) {
        const double bc = barrier_boundary(b, v_r, a_t);
        return bc * bc + a_t * a_t;
    };
    // The norm is not unimodal over the whole branch: bracket the global
    // minimum with a coarse scan, then golden-section inside the bracket.
    constexpr int kScan = 64;
    int best_k = 0;
    double best_f = std::numeric_limits<double>::infinity();
    for (int k = 0; k <= kScan; ++k) {
        const double a_t = lo0 + (hi0 - lo0) * k / kScan;
        const double v = f(a_t);
        if (v < best_f) {
            best_f = v;
            best_k = k;
        }
    }
    double lo = lo0 + (hi0 - lo0) * std::max(0, best_k - 1) / kScan;
    double hi = lo0 + (hi0 - lo0) * std::min(kScan, best_k + 1) / kScan;
    const double gr = 0.5 * (std::sqrt(5.0) - 1.0);
    double x1 = hi - gr * (hi - lo);
    double x2 = lo + gr * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    // relative width floor: an absolute tolerance stalls when the branch
    // spans many orders of magnitude (near-origin stations)
    while (hi - lo > 1e-11 * std::max(1.0, hi)) {
        if (f1 < f2) {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - gr * (hi - lo);
            f1 = f(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + gr * (hi - lo);
            f2 = f(x2);
        }
    }
    const double a_t = 0.5 * (lo + hi);
    return {barrier_boundary(b, v_r, a_t), a_t};
}

}  // namespace

std::optional<RtFrame> RtFrame::from_states(const RoadUserState& a, const RoadUserState& b,
                                            double eps) {
    const Vec2 v_rel = a.velocity() - b.velocity();
    const double v_r = v_rel.norm();
    if (v_r <= eps) return std::nullopt;
    const Vec2 radial = v_rel * (1.0 / v_r);
    return RtFrame{a.position - b.position, radial, radial.perp(), v_r};
}

double barrier_boundary(const StepBarrier& barrier, double v_r, double a_t) {
    if (!(barrier.d_r > 0.0)) throw std::invalid_argument("barrier_boundary: d_r must be > 0");
    if (a_t < 0.0) throw std::invalid_argument("barrier_boundary: a_t must be >= 0");
    const double a_star_r = v_r * v_r / (2.0 * barrier.d_r);
    if (barrier.d_t <= 0.0) return a_star_r;  // no tangential escape past this station
    const double a_star_t = barrier.d_t * v_r * v_r / (2.0 * barrier.d_r * barrier.d_r);
    if (a_t < a_star_t) return a_star_r;
    return v_r * std::sqrt(2.0 * a_t / barrier.d_t) - (barrier.d_r / barrier.d_t) * a_t;
}

std::vector<StepBarrier> build_step_barriers(const ConvexPolygon& c_frame, const RtFrame& frame,
                                             Side mode, double horizon, int stations) {
    if (stations < 2) throw std::invalid_argument("build_step_barriers: stations must be >= 2");
    if (frame.v_r <= 1e-6)
        throw std::domain_error("build_step_barriers: degenerate relative speed");

    const double reach = frame.v_r * horizon;
    // Millimeter floor: a station essentially at the origin is crossed at
    // s ~ 0 and the first-crossing formulation degenerates there.
    const double lo = std::max(c_frame.min_x(), 1e-3);
    const double hi = std::min(c_frame.max_x(), reach);
    if (!(hi > 0.0) || lo > hi) return {};

    std::vector<double> radii;
    radii.reserve(static_cast<std::size_t>(stations) + c_frame.size() + 3);
    for (int k = 0; k < stations; ++k)
        radii.push_back(lo + (hi - lo) * k / (stations - 1));
    for (const Vec2& v : c_frame.vertices())
        if (v.x >= lo && v.x <= hi) radii.push_back(v.x);
    // Radii where the unperturbed path crosses the set: silhouettes change
    // sign there, so the radial stop requirement is pinned exactly.
    if (auto clip = line_polygon_clip(c_frame, {0.0, 0.0}, {1.0, 0.0}, 0.0, reach)) {
        for (double r : {clip->first, clip->second, 0.5 * (clip->first + clip->second)}) {
            if (r >= lo && r <= hi) radii.push_back(r);
        }
    }
    std::sort(radii.begin(), radii.end());
    radii.erase(std::unique(radii.begin(), radii.end(),
                            [](double a, double b) { return std::abs(a - b) < 1e-12; }),
                radii.end());

    std::vector<StepBarrier> barriers;
    barriers.reserve(radii.size());
    for (double r : radii) {
        const auto sil = polygon_silhouette(c_frame, r, mode);
        if (!sil) continue;
        const double clearance = (mode == Side::Up) ? *sil : -*sil;
        if (clearance < -kTinyClearance) continue;  // slice on the safe side of the path
        barriers.push_back({r, std::max(clearance, kTinyClearance)});
    }
    return barriers;
}

EvasionSolution ea_mode(std::span<const StepBarrier> barriers, double v_r, Side mode) {
    if (barriers.empty()) throw std::invalid_argument("ea_mode: barriers must be nonempty");
    if (!(v_r > 0.0)) throw std::invalid_argument("ea_mode: v_r must be > 0");

    const std::vector<StepBarrier> pruned = prune_dominated(barriers);

    std::vector<Candidate> candidates;
    candidates.reserve(8 + 4 * pruned.size() + pruned.size() * pruned.size());

    double plateau_max = 0.0;
    bool wall_present = false;
    for (const StepBarrier& b : pruned) {
        plateau_max = std::max(plateau_max, plateau(b, v_r));
        wall_present |= !(b.d_t > 0.0);
    }
    if (plateau_max <= 0.0) return {0.0, 0.0, 0.0, mode};
    candidates.push_back({plateau_max, 0.0});

    double envelope_zero = 0.0;
    for (const StepBarrier& b : pruned) {
        if (!(b.d_t > 0.0)) continue;
        candidates.push_back(curve_min_norm(b, v_r));
        candidates.push_back({plateau(b, v_r), branch_a_t(b, v_r)});
        envelope_zero = std::max(envelope_zero, zero_a_t(b, v_r));
    }
    if (!wall_present && envelope_zero > 0.0) candidates.push_back({0.0, envelope_zero});

    // Pairwise boundary intersections. With x = sqrt(a_t) each curved branch
    // is alpha*x - beta*x^2, so intersections are roots of quadratics in x.
    for (std::size_t i = 0; i < pruned.size(); ++i) {
        const StepBarrier& bi = pruned[i];
        if (!(bi.d_t > 0.0)) continue;
        const double ai = v_r * std::sqrt(2.0 / bi.d_t);
        const double gi = bi.d_r / bi.d_t;
        const double lo_i = branch_a_t(bi, v_r), hi_i = zero_a_t(bi, v_r);
        for (std::size_t j = 0; j < pruned.size(); ++j) {
            if (i == j) continue;
            const StepBarrier& bj = pruned[j];
            if (bj.d_t > 0.0 && j > i) {
                // curve_i == curve_j
                const double aj = v_r * std::sqrt(2.0 / bj.d_t);
                const double gj = bj.d_r / bj.d_t;
                if (std::abs(gi - gj) > 1e-15) {
                    const double x = (ai - aj) / (gi - gj);
                    if (x > 0.0) {
                        const double a_t = x * x;
                        if (a_t >= lo_i && a_t <= hi_i && a_t >= branch_a_t(bj, v_r) &&
                            a_t <= zero_a_t(bj, v_r))
                            candidates.push_back({barrier_boundary(bi, v_r, a_t), a_t});
                    }
                }
            }
            // curve_i == plateau_j (walls have an all-a_t plateau)
            const double pj = plateau(bj, v_r);
            const double plateau_end =
                bj.d_t > 0.0 ? branch_a_t(bj, v_r) : std::numeric_limits<double>::infinity();
            const double disc = ai * ai - 4.0 * gi * pj;
            if (disc >= 0.0) {
                const double sq = std::sqrt(disc);
                for (double x : {(ai - sq) / (2.0 * gi), (ai + sq) / (2.0 * gi)}) {
                    if (x <= 0.0) continue;
                    const double a_t = x * x;
                    if (a_t >= lo_i && a_t <= hi_i && a_t <= plateau_end)
                        candidates.push_back({pj, a_t});
                }
            }
        }
    }

    const Candidate* best = nullptr;
    double best_norm2 = std::numeric_limits<double>::infinity();
    for (const Candidate& c : candidates) {
        if (!feasible(barriers, v_r, c)) continue;
        const double a_r = std::max(c.a_r, 0.0);  // norm never improves below a_r = 0
        const double n2 = a_r * a_r + c.a_t * c.a_t;
        if (n2 < best_norm2 - 1e-15 ||
            (std::abs(n2 - best_norm2) <= 1e-15 && best && c.a_t < best->a_t)) {
            best_norm2 = n2;
            best = &c;
        }
    }
    // The radial candidate is always feasible, so best is set.
    const double a_r = std::max(best->a_r, 0.0);
    const double a_t = std::max(best->a_t, 0.0);
    return {std::sqrt(a_r * a_r + a_t * a_t), a_r, a_t, mode};
}

namespace {

// Exact minimal feasible magnitude along a fixed braking-half direction:
// feasibility is monotone in magnitude there, and magnitude 0 collides
// whenever the unperturbed path meets the set, so bisection converges to the
// directional boundary.
std::optional<double> exact_directional_min(const ConvexPolygon& c, Vec2 p0, Vec2 v_rel,
                                            double horizon, Vec2 u, double feasible_hi) {
    if (parabola_hits_polygon(c, p0, v_rel, feasible_hi * u, horizon)) return std::nullopt;
    double lo = 0.0, hi = feasible_hi;
    for (int it = 0; it < 80 && hi - lo > 1e-9; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (parabola_hits_polygon(c, p0, v_rel, mid * u, horizon))
            lo = mid;
        else
            hi = mid;
    }
    return hi + kNudge;
}

// Refine the candidate optimum over directions in the braking half-plane.
// The barrier construction is exact on straddling slices but convexifies
// one-sided ones, which can leave the candidate a few percent high; a short
// exact angular sweep removes that residue.
std::pair<double, Vec2> polish_cv(const ConvexPolygon& c, Vec2 p0, Vec2 v_rel, double horizon,
                                  double best_m, Vec2 best_vec) {
    const Vec2 brake = -v_rel.normalized();
    double best_angle = std::atan2(best_vec.y, best_vec.x);
    const double brake_angle = std::atan2(brake.y, brake.x);

    auto try_direction = [&](double angle) {
        const double probe = best_m - 1e-4;
        if (probe <= 0.0) return;
        const Vec2 u = heading_dir(angle);
        if (parabola_hits_polygon(c, p0, v_rel, probe * u, horizon)) return;
        if (const auto m = exact_directional_min(c, p0, v_rel, horizon, u, probe)) {
            if (*m < best_m) {
                best_m = *m;
                best_vec = *m * u;
                best_angle = angle;
            }
        }
    };

    constexpr double kDeg = 3.14159265358979323846 / 180.0;
    for (double off = -90.0; off <= 90.0; off += 2.0) try_direction(brake_angle + off * kDeg);
    for (double off = -2.0; off <= 2.0; off += 0.2) try_direction(best_angle + off * kDeg);
    for (double off = -0.2; off <= 0.2; off += 0.02) try_direction(best_angle + off * kDeg);
    return {best_m, best_vec};
}

// Inflate the magnitude along a fixed direction until the exact parabolic
// relative trajectory clears the collision set. Feasibility is monotone in
// magnitude for directions with a nonnegative braking component.
std::optional<std::pair<double, Vec2>> repair_cv(const ConvexPolygon& c, Vec2 p0, Vec2 v_rel,
                                                 double horizon, Vec2 vec) {
    double m = vec.norm();
    if (m <= 0.0) return std::nullopt;
    const Vec2 u = vec * (1.0 / m);
    m += kNudge;
    if (!parabola_hits_polygon(c, p0, v_rel, m * u, horizon)) return std::make_pair(m, m * u);
    double hi = std::max(2.0 * m, m + 0.1);
    int guard = 0;
    while (parabola_hits_polygon(c, p0, v_rel, hi * u, horizon)) {
        hi = 2.0 * hi + 0.1;
        if (++guard > 60) return std::nullopt;
    }
    double lo = m;
    for (int it = 0; it < 100 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (parabola_hits_polygon(c, p0, v_rel, mid * u, horizon))
            lo = mid;
        else
            hi = mid;
    }
    const double out = hi + kNudge;
    return std::make_pair(out, out * u);
}

}  // namespace

CvEaResult ea_cv_value(const RoadUserState& a, const RoadUserState& b, double horizon,
                       int stations) {
    if (!(horizon > 0.0)) throw std::invalid_argument("ea_cv_value: horizon must be > 0");

    if (obb_overlap(a.footprint(), b.footprint()))
        return {std::numeric_limits<double>::quiet_NaN(), {0.0, 0.0}, Side::Up, true, true};

    const auto frame = RtFrame::from_states(a, b);
    if (!frame) return {0.0, {0.0, 0.0}, Side::Up, false, false};

    const ConvexPolygon c = minkowski_collision_set(a.footprint(), b.footprint());
    const Vec2 p0 = frame->origin;
    const Vec2 v_rel = frame->v_r * frame->radial_axis;
    if (!line_polygon_clip(c, p0, v_rel, 0.0, horizon))
        return {0.0, {0.0, 0.0}, Side::Up, false, false};

    std::vector<Vec2> frame_verts;
    frame_verts.reserve(c.size());
    for (const Vec2& q : c.vertices()) frame_verts.push_back(frame->to_frame(q));
    const ConvexPolygon c_frame{std::move(frame_verts)};

    double best_m = std::numeric_limits<double>::infinity();
    Vec2 best_vec{0.0, 0.0};
    Side best_mode = Side::Up;
    for (Side mode : {Side::Up, Side::Down}) {
        const auto barriers = build_step_barriers(c_frame, *frame, mode, horizon, stations);
        if (barriers.empty()) continue;
        const EvasionSolution sol = ea_mode(barriers, frame->v_r, mode);
        // near-origin tail stations can blow one mode up; the other mode
        // always stays physical, so such a candidate never wins
        if (sol.value > 1e6) continue;
        const double t_sign = (mode == Side::Up) ? 1.0 : -1.0;
        const Vec2 vec = -sol.a_radial * frame->radial_axis +
                         t_sign * sol.a_tangential * frame->tangential_axis;
        const auto repaired = repair_cv(c, p0, v_rel, horizon, vec);
        if (!repaired) continue;
        if (repaired->first < best_m - 1e-15) {
            best_m = repaired->first;
            best_vec = repaired->second;
            best_mode = mode;
        }
    }

    if (!std::isfinite(best_m)) {
        // Grazing contact: the path only touches the set. Any hairline
        // braking resolves it; quantify via the repair bisection.
        const auto repaired = repair_cv(c, p0, v_rel, horizon, -kNudge * frame->radial_axis);
        if (repaired) return {repaired->first, repaired->second, Side::Up, false, true};
        return {0.0, {0.0, 0.0}, Side::Up, false, true};
    }
    std::tie(best_m, best_vec) = polish_cv(c, p0, v_rel, horizon, best_m, best_vec);
    if (best_vec.dot(frame->tangential_axis) < 0.0) best_mode = Side::Down;
    else if (best_vec.dot(frame->tangential_axis) > 0.0) best_mode = Side::Up;
    return {best_m, best_vec, best_mode, false, true};
}

}  // namespace ea
