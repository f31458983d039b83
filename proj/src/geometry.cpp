#include "ea/geometry.hpp"

#include <algorithm>
#include <array>
#include <limits>
#include <stdexcept>

namespace ea {

namespace {

// Perpendicular distance of p from the line through a toward unit direction u,
// signed positive to the left.
double left_distance(Vec2 p, Vec2 a, Vec2 u) { return u.cross(p - a); }


struct SegWitness {
    double dist;
    Vec2 pa;
    Vec2 pb;
};

SegWitness seg_seg_closest(Vec2 p1, Vec2 p2, Vec2 q1, Vec2 q2) {
    // Closest points between two segments via clamped parametric solve.
    const Vec2 d1 = p2 - p1;
    const Vec2 d2 = q2 - q1;
    const Vec2 r = p1 - q1;
    const double a = d1.norm2();
    const double e = d2.norm2();
    const double f = d2.dot(r);
    double s = 0.0, t = 0.0;
    if (a <= 1e-30 && e <= 1e-30) {
        // both degenerate
    } else if (a <= 1e-30) {
        t = std::clamp(f / e, 0.0, 1.0);
    } else {
        const double c = d1.dot(r);
        if (e <= 1e-30) {
            s = std::clamp(-c / a, 0.0, 1.0);
        } else {
            const double b = d1.dot(d2);
            const double denom = a * e - b * b;
            if (denom > 1e-30)
                s = std::clamp((b * f - c * e) / denom, 0.0, 1.0);
            t = (b * s + f) / e;
            if (t < 0.0) {
                t = 0.0;
                s = std::clamp(-c / a, 0.0, 1.0);
            } else if (t > 1.0) {
                t = 1.0;
                s = std::clamp((b - c) / a, 0.0, 1.0);
            }
        }
    }
    const Vec2 cp1 = p1 + s * d1;
    const Vec2 cp2 = q1 + t * d2;
    return {(cp1 - cp2).norm(), cp1, cp2};
}

std::array<Vec2, 4> obb_corner_array(const Obb& o) {
    const Vec2 u = o.axis_long() * o.half_length();
    const Vec2 v = o.axis_lat() * o.half_width();
    return {o.center + u + v, o.center - u + v, o.center - u - v, o.center + u - v};
}

// Projection half-width of the box on unit axis.
double obb_extent_on(const Obb& o, Vec2 axis) {
    return o.half_length() * std::abs(axis.dot(o.axis_long())) +
           o.half_width() * std::abs(axis.dot(o.axis_lat()));
}

}  // namespace

Obb::Obb(Vec2 c, double h, double len, double wid)
    : center(c), heading(h), length(len), width(wid) {
    if (!(len > 0.0) || !(wid > 0.0) || !std::isfinite(h) || !std::isfinite(c.x) ||
        !std::isfinite(c.y) || !std::isfinite(len) || !std::isfinite(wid))
        throw std::invalid_argument("Obb: length and width must be positive and finite");
}

ConvexPolygon::ConvexPolygon(std::vector<Vec2> vertices) {
    if (vertices.size() < 3) throw std::invalid_argument("ConvexPolygon: need >= 3 vertices");
    for (const Vec2& v : vertices)
        if (!std::isfinite(v.x) || !std::isfinite(v.y))
            throw std::invalid_argument("ConvexPolygon: non-finite vertex");
    // Hull normalization: enforces ccw order, drops duplicates and collinear vertices.
    verts_ = convex_hull(std::move(vertices));
    if (verts_.size() < 3)
        throw std::invalid_argument("ConvexPolygon: degenerate after collinear merge");
}

bool ConvexPolygon::contains(Vec2 p, double eps) const {
    for (std::size_t i = 0; i < verts_.size(); ++i) {
        const Vec2 a = verts_[i];
        const Vec2 b = verts_[(i + 1) % verts_.size()];
        const Vec2 u = (b - a).normalized();
        if (left_distance(p, a, u) < -eps) return false;
    }
    return true;
}

double ConvexPolygon::min_x() const {
    double m = verts_[0].x;
    for (const Vec2& v : verts_) m = std::min(m, v.x);
    return m;
}

double ConvexPolygon::max_x() const {
    double m = verts_[0].x;
    for (const Vec2& v : verts_) m = std::max(m, v.x);
    return m;
}

std::vector<Vec2> convex_hull(std::vector<Vec2> pts) {
    std::sort(pts.begin(), pts.end(), [](Vec2 a, Vec2 b) {
        return a.x < b.x || (a.x == b.x && a.y < b.y);
    });
    pts.erase(std::unique(pts.begin(), pts.end(),
                          [](Vec2 a, Vec2 b) { return a.x == b.x && a.y == b.y; }),
              pts.end());
    if (pts.size() < 3) return pts;
    std::vector<Vec2> hull(2 * pts.size());
    std::size_t k = 0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        while (k >= 2 && (hull[k - 1] - hull[k - 2]).cross(pts[i] - hull[k - 2]) <= 0) --k;
        hull[k++] = pts[i];
    }
    const std::size_t lower = k + 1;
    for (std::size_t i = pts.size() - 1; i-- > 0;) {
        while (k >= lower && (hull[k - 1] - hull[k - 2]).cross(pts[i] - hull[k - 2]) <= 0) --k;
        hull[k++] = pts[i];
    }
    hull.resize(k - 1);
    return hull;
}

ConvexPolygon obb_corners(const Obb& obb) {
    const auto c = obb_corner_array(obb);
    return ConvexPolygon(std::vector<Vec2>(c.begin(), c.end()));
}

bool obb_overlap(const Obb& a, const Obb& b) {
    const std::array<Vec2, 4> axes = {a.axis_long(), a.axis_lat(), b.axis_long(), b.axis_lat()};
    const Vec2 d = b.center - a.center;
    for (const Vec2& axis : axes) {
        const double gap = std::abs(d.dot(axis)) - (obb_extent_on(a, axis) + obb_extent_on(b, axis));
        if (gap > 0.0) return false;
    }
    return true;
}

double obb_distance(const Obb& a, const Obb& b) { return obb_closest_points(a, b).distance; }

ClosestPoints obb_closest_points(const Obb& a, const Obb& b) {
    if (obb_overlap(a, b)) return {0.0, a.center, b.center};
    const auto ca = obb_corner_array(a);
    const auto cb = obb_corner_array(b);
    SegWitness best{std::numeric_limits<double>::infinity(), {}, {}};
    for (int i = 0; i < 4; ++i) {
        for (int j = 0; j < 4; ++j) {
            const SegWitness w = seg_seg_closest(ca[i], ca[(i + 1) % 4], cb[j], cb[(j + 1) % 4]);
            if (w.dist < best.dist) best = w;
        }
    }
    return {best.dist, best.pa, best.pb};
}

ConvexPolygon minkowski_collision_set(const Obb& a, const Obb& b) {
    // OBBs are centrally symmetric, so reflecting a's footprint through its
    // center is a no-op: C = (b - center_b) (+) (a - center_a).
    const auto ca = obb_corner_array(a);
    const auto cb = obb_corner_array(b);
    std::vector<Vec2> sums;
    sums.reserve(16);
    for (const Vec2& p : ca)
        for (const Vec2& q : cb) sums.push_back((p - a.center) + (q - b.center));
    return ConvexPolygon(convex_hull(std::move(sums)));
}

std::optional<std::pair<double, double>> translation_overlap_interval(const Obb& moving,
                                                                      const Obb& fixed,
                                                                      Vec2 dir) {
    const std::array<Vec2, 4> axes = {moving.axis_long(), moving.axis_lat(), fixed.axis_long(),
                                      fixed.axis_lat()};
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();
    for (const Vec2& axis : axes) {
        const double delta = fixed.center.dot(axis) - moving.center.dot(axis);
        const double w = obb_extent_on(moving, axis) + obb_extent_on(fixed, axis);
        const double d = dir.dot(axis);
        if (std::abs(d) < 1e-12) {
            if (std::abs(delta) > w) return std::nullopt;
            continue;
        }
        double m0 = (delta - w) / d;
        double m1 = (delta + w) / d;
        if (m0 > m1) std::swap(m0, m1);
        lo = std::max(lo, m0);
        hi = std::min(hi, m1);
        if (lo > hi) return std::nullopt;
    }
    if (!std::isfinite(lo) || !std::isfinite(hi)) return std::nullopt;
    return std::make_pair(lo, hi);
}

std::optional<double> polygon_silhouette(const ConvexPolygon& c, double station, Side side) {
    const auto& vs = c.vertices();
    const double lo = c.min_x(), hi = c.max_x();
    if (station < lo - kGeomEps || station > hi + kGeomEps) return std::nullopt;
    const double x = std::clamp(station, lo, hi);
    bool found = false;
    double best = 0.0;
    auto consider = [&](double y) {
        if (!found) {
            best = y;
            found = true;
        } else {
            best = (side == Side::Up) ? std::max(best, y) : std::min(best, y);
        }
    };
    for (std::size_t i = 0; i < vs.size(); ++i) {
        const Vec2 a = vs[i];
        const Vec2 b = vs[(i + 1) % vs.size()];
        const double xmin = std::min(a.x, b.x), xmax = std::max(a.x, b.x);
        if (x < xmin || x > xmax) continue;
        if (xmax - xmin < 1e-12) {
            consider(a.y);
            consider(b.y);
        } else {
            const double t = (x - a.x) / (b.x - a.x);
            consider(a.y + t * (b.y - a.y));
        }
    }
    if (!found) return std::nullopt;
    return best;
}

std::optional<std::pair<double, double>> line_polygon_clip(const ConvexPolygon& c, Vec2 p, Vec2 d,
                                                           double t_lo, double t_hi) {
    double lo = t_lo, hi = t_hi;
    const auto& vs = c.vertices();
    for (std::size_t i = 0; i < vs.size(); ++i) {
        const Vec2 a = vs[i];
        const Vec2 b = vs[(i + 1) % vs.size()];
        const Vec2 n = (b - a).perp().normalized();  // inward unit normal (ccw)
        const double f0 = n.dot(p - a) + kGeomEps;   // inside: f0 + t*fd >= 0
        const double fd = n.dot(d);
        if (std::abs(fd) < 1e-15) {
            if (f0 < 0.0) return std::nullopt;
            continue;
        }
        const double t = -f0 / fd;
        if (fd > 0.0)
            lo = std::max(lo, t);
        else
            hi = std::min(hi, t);
        if (lo > hi) return std::nullopt;
    }
    return std::make_pair(lo, hi);
}

bool segment_hits_polygon(const ConvexPolygon& c, Vec2 p0, Vec2 p1) {
    return line_polygon_clip(c, p0, p1 - p0, 0.0, 1.0).has_value();
}

bool parabola_hits_polygon(const ConvexPolygon& c, Vec2 p0, Vec2 v, Vec2 a, double s_max) {
    // Inside iff q_e(s) >= 0 for every edge, with q_e quadratic in s.
    const auto& vs = c.vertices();
    const std::size_t n = vs.size();
    std::vector<std::array<double, 3>> q(n);  // c0 + c1 s + c2 s^2
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2 va = vs[i];
        const Vec2 vb = vs[(i + 1) % n];
        const Vec2 nrm = (vb - va).perp().normalized();
        q[i] = {nrm.dot(p0 - va), nrm.dot(v), 0.5 * nrm.dot(a)};
    }
    std::vector<double> pts = {0.0, s_max};
    for (const auto& e : q) {
        const double c2 = e[2], c1 = e[1], c0 = e[0];
        if (c2 == 0.0) {
            if (std::abs(c1) > 1e-15) pts.push_back(-c0 / c1);
            continue;
        }
        const double disc = c1 * c1 - 4.0 * c2 * c0;
        if (disc < 0.0) continue;
        const double sq = std::sqrt(disc);
        if (sq == 0.0) {
            pts.push_back(-c1 / (2.0 * c2));
        } else {
            // stable form: the naive (-c1 +/- sq) / (2 c2) cancels
            // catastrophically when |c2| is tiny and loses the finite root
            const double qq = -0.5 * (c1 + std::copysign(sq, c1 == 0.0 ? 1.0 : c1));
            pts.push_back(qq / c2);
            pts.push_back(c0 / qq);
        }
    }
    std::sort(pts.begin(), pts.end());
    auto inside_at = [&](double s) {
        if (s < 0.0 || s > s_max) return false;
        for (const auto& e : q)
            if (e[0] + s * (e[1] + s * e[2]) < -kGeomEps) return false;
        return true;
    };
    for (std::size_t i = 0; i < pts.size(); ++i) {
        if (inside_at(pts[i])) return true;
        if (i + 1 < pts.size() && inside_at(0.5 * (pts[i] + pts[i + 1]))) return true;
    }
    return false;
}

}  // namespace ea
