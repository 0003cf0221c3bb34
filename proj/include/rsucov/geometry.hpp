#ifndef RSUCOV_GEOMETRY_HPP
#define RSUCOV_GEOMETRY_HPP

#include <cmath>
#include <vector>

namespace rsucov {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2() = default;
    Vec2(double x_, double y_) : x(x_), y(y_) {}

    Vec2 operator+(const Vec2& o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(const Vec2& o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    bool operator==(const Vec2& o) const { return x == o.x && y == o.y; }

    double dot(const Vec2& o) const { return x * o.x + y * o.y; }
    double cross(const Vec2& o) const { return x * o.y - y * o.x; }
    double norm() const { return std::hypot(x, y); }
};

struct Vec3 {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    Vec3() = default;
    Vec3(double x_, double y_, double z_) : x(x_), y(y_), z(z_) {}

    Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
    Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
    Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
    bool operator==(const Vec3& o) const { return x == o.x && y == o.y && z == o.z; }

    double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
    double norm() const { return std::sqrt(x * x + y * y + z * z); }
    Vec2 xy() const { return {x, y}; }
};

// Geometric tolerance for segment/polygon predicates (meters).
inline constexpr double kGeomEps = 1e-9;

using Polygon = std::vector<Vec2>;

double polygon_signed_area(const Polygon& poly);
bool polygon_is_simple(const Polygon& poly);

// Strict interior test (boundary points count as outside).
bool point_in_polygon(const Polygon& poly, const Vec2& p);

// Intersection of open segment (a,b) with open segment (c,d); touching
// endpoints within kGeomEps do not count.
bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

// True iff the open segment (a,b) passes through the polygon interior.
bool segment_crosses_polygon(const Polygon& poly, const Vec2& a, const Vec2& b);

// Parameter intervals t in (0,1) where point a+(b-a)*t lies strictly inside
// the polygon. Intervals are sorted and disjoint.
std::vector<std::pair<double, double>>
segment_polygon_intervals(const Polygon& poly, const Vec2& a, const Vec2& b);

// Indices of convex vertices (interior angle < 180 deg) of a simple polygon,
// in original order.
std::vector<std::size_t> convex_corner_indices(const Polygon& poly);

// Corner point pushed outward along the exterior bisector by `offset` meters.
Vec2 offset_corner(const Polygon& poly, std::size_t idx, double offset);

double distance_point_segment(const Vec2& p, const Vec2& a, const Vec2& b);

} // namespace rsucov

#endif
