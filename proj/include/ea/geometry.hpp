#pragma once

#include <cmath>
#include <optional>
#include <utility>
#include <vector>

namespace ea {

/// Absolute endpoint tolerance for geometric comparisons, meters.
inline constexpr double kGeomEps = 1e-9;

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    constexpr Vec2() = default;
    constexpr Vec2(double px, double py) : x(px), y(py) {}

    constexpr Vec2 operator+(Vec2 r) const { return {x + r.x, y + r.y}; }
    constexpr Vec2 operator-(Vec2 r) const { return {x - r.x, y - r.y}; }
    constexpr Vec2 operator*(double s) const { return {x * s, y * s}; }
    constexpr Vec2 operator-() const { return {-x, -y}; }
    Vec2& operator+=(Vec2 r) { x += r.x; y += r.y; return *this; }
    Vec2& operator-=(Vec2 r) { x -= r.x; y -= r.y; return *this; }

    constexpr double dot(Vec2 r) const { return x * r.x + y * r.y; }
    constexpr double cross(Vec2 r) const { return x * r.y - y * r.x; }
    double norm() const { return std::hypot(x, y); }
    constexpr double norm2() const { return x * x + y * y; }
    /// Rotated +90 degrees (counter-clockwise).
    constexpr Vec2 perp() const { return {-y, x}; }
    Vec2 normalized(double eps = 1e-15) const {
        const double n = norm();
        return n <= eps ? Vec2{0.0, 0.0} : Vec2{x / n, y / n};
    }
    Vec2 rotated(double angle) const {
        const double c = std::cos(angle), s = std::sin(angle);
        return {c * x - s * y, s * x + c * y};
    }
};

inline constexpr Vec2 operator*(double s, Vec2 v) { return {v.x * s, v.y * s}; }

inline Vec2 heading_dir(double heading) { return {std::cos(heading), std::sin(heading)}; }

/// Oriented bounding box: center, heading (ccw from +x), length along heading, width across.
struct Obb {
    Vec2 center;
    double heading;
    double length;
    double width;

    Obb(Vec2 c, double h, double len, double wid);

    double half_length() const { return 0.5 * length; }
    double half_width() const { return 0.5 * width; }
    Vec2 axis_long() const { return heading_dir(heading); }
    Vec2 axis_lat() const { return heading_dir(heading).perp(); }
};

/// Strictly convex polygon, counter-clockwise vertices, collinear vertices merged.
class ConvexPolygon {
public:
    explicit ConvexPolygon(std::vector<Vec2> vertices);

    const std::vector<Vec2>& vertices() const { return verts_; }
    std::size_t size() const { return verts_.size(); }

    /// Closed-set membership with absolute boundary tolerance (meters).
    bool contains(Vec2 p, double eps = kGeomEps) const;

    double min_x() const;
    double max_x() const;

private:
    std::vector<Vec2> verts_;
};

enum class Side { Up, Down };

/// Andrew monotone chain; returns ccw hull of the point set.
std::vector<Vec2> convex_hull(std::vector<Vec2> points);

ConvexPolygon obb_corners(const Obb& obb);

/// Separating Axis Theorem on the 4 candidate axes; touching counts as overlap.
bool obb_overlap(const Obb& a, const Obb& b);

/// 0 if overlapping, else minimum distance between the two boundaries.
double obb_distance(const Obb& a, const Obb& b);

struct ClosestPoints {
    double distance;
    Vec2 on_a;
    Vec2 on_b;
};
ClosestPoints obb_closest_points(const Obb& a, const Obb& b);

/// Collision set in relative-position space: p_A - p_B is a member iff the
/// footprints at those centers (with the boxes' fixed headings) overlap.
ConvexPolygon minkowski_collision_set(const Obb& a, const Obb& b);

/// Set of translation magnitudes m along `dir` (unit) for which `moving`
/// shifted by m*dir overlaps `fixed`; closed interval or empty.
std::optional<std::pair<double, double>> translation_overlap_interval(const Obb& moving,
                                                                      const Obb& fixed,
                                                                      Vec2 dir);

/// Tangential extent of the polygon's cross-section at coordinate x = station
/// (polygon already expressed in the frame: x radial, y tangential).
/// Side::Up -> max y, Side::Down -> min y; nullopt when the polygon does not
/// reach that station.
std::optional<double> polygon_silhouette(const ConvexPolygon& c, double station, Side side);

/// Parameter interval [t0, t1] of p + t*d inside the polygon (closed),
/// clamped to [t_lo, t_hi]; nullopt when the line misses it.
std::optional<std::pair<double, double>> line_polygon_clip(const ConvexPolygon& c, Vec2 p,
                                                           Vec2 d, double t_lo, double t_hi);

bool segment_hits_polygon(const ConvexPolygon& c, Vec2 p0, Vec2 p1);

/// Exact test whether p0 + v*s + 0.5*a*s^2 enters the polygon for s in [0, s_max].
/// Per-edge quadratics in s; no time sampling.
bool parabola_hits_polygon(const ConvexPolygon& c, Vec2 p0, Vec2 v, Vec2 a, double s_max);

}  // namespace ea
