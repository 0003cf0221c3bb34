#include "rsucov/geometry.hpp"

#include <algorithm>

namespace rsucov {

double polygon_signed_area(const Polygon& poly)
{
    double a = 0.0;
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = poly[i];
        const Vec2& q = poly[(i + 1) % n];
        a += p.cross(q);
    }
    return 0.5 * a;
}

namespace {

// Orientation of c relative to segment a->b: >0 left, <0 right, 0 collinear.
double orient(const Vec2& a, const Vec2& b, const Vec2& c)
{
    return (b - a).cross(c - a);
}

bool on_segment(const Vec2& a, const Vec2& b, const Vec2& p)
{
    if (std::abs(orient(a, b, p)) > kGeomEps * (b - a).norm())
        return false;
    return p.x >= std::min(a.x, b.x) - kGeomEps && p.x <= std::max(a.x, b.x) + kGeomEps &&
           p.y >= std::min(a.y, b.y) - kGeomEps && p.y <= std::max(a.y, b.y) + kGeomEps;
}

} // namespace

bool polygon_is_simple(const Polygon& poly)
{
    const std::size_t n = poly.size();
    if (n < 3)
        return false;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& a = poly[i];
        const Vec2& b = poly[(i + 1) % n];
        for (std::size_t j = i + 1; j < n; ++j) {
            // Skip adjacent edges (they share a vertex).
            if (j == i || (j + 1) % n == i || (i + 1) % n == j)
                continue;
            const Vec2& c = poly[j];
            const Vec2& d = poly[(j + 1) % n];
            double o1 = orient(a, b, c);
            double o2 = orient(a, b, d);
            double o3 = orient(c, d, a);
            double o4 = orient(c, d, b);
            if (((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)))
                return false;
            if (on_segment(a, b, c) || on_segment(a, b, d) ||
                on_segment(c, d, a) || on_segment(c, d, b))
                return false;
        }
    }
    return true;
}

bool point_in_polygon(const Polygon& poly, const Vec2& p)
{
    const std::size_t n = poly.size();
    bool inside = false;
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
        const Vec2& a = poly[j];
        const Vec2& b = poly[i];
        if (on_segment(a, b, p))
            return false; // boundary counts as outside
        if ((b.y > p.y) != (a.y > p.y)) {
            double t = (p.y - b.y) / (a.y - b.y);
            double xi = b.x + t * (a.x - b.x);
            if (p.x < xi)
                inside = !inside;
        }
    }
    return inside;
}

bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d)
{
    Vec2 r = b - a;
    Vec2 s = d - c;
    double denom = r.cross(s);
    Vec2 qp = c - a;
    if (std::abs(denom) < kGeomEps) {
        // Parallel; overlap only matters if collinear.
        if (std::abs(qp.cross(r)) > kGeomEps * std::max(1.0, r.norm()))
            return false;
        double rr = r.dot(r);
        if (rr < kGeomEps)
            return false;
        double t0 = qp.dot(r) / rr;
        double t1 = (d - a).dot(r) / rr;
        if (t0 > t1)
            std::swap(t0, t1);
        double lo = std::max(t0, 0.0);
        double hi = std::min(t1, 1.0);
        // Require genuine interior overlap, not a touching endpoint.
        return hi - lo > kGeomEps;
    }
    double t = qp.cross(s) / denom;
    double u = qp.cross(r) / denom;
    double tol_t = kGeomEps / std::max(1.0, r.norm());
    double tol_u = kGeomEps / std::max(1.0, s.norm());
    return t > tol_t && t < 1.0 - tol_t && u > tol_u && u < 1.0 - tol_u;
}

bool segment_crosses_polygon(const Polygon& poly, const Vec2& a, const Vec2& b)
{
    const std::size_t n = poly.size();
    for (std::size_t i = 0; i < n; ++i) {
        if (segments_intersect(a, b, poly[i], poly[(i + 1) % n]))
            return true;
    }
    // Fully inside (no edge crossing): test the midpoint.
    return point_in_polygon(poly, (a + b) * 0.5);
}

std::vector<std::pair<double, double>>
segment_polygon_intervals(const Polygon& poly, const Vec2& a, const Vec2& b)
{
    const std::size_t n = poly.size();
    Vec2 r = b - a;
    double len = r.norm();
    std::vector<std::pair<double, double>> out;
    if (len < kGeomEps)
        return out;

    std::vector<double> ts;
    ts.push_back(0.0);
    ts.push_back(1.0);
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& c = poly[i];
        const Vec2& d = poly[(i + 1) % n];
        Vec2 s = d - c;
        double denom = r.cross(s);
        if (std::abs(denom) < kGeomEps)
            continue;
        double t = (c - a).cross(s) / denom;
        double u = (c - a).cross(r) / denom;
        if (t > 0.0 && t < 1.0 && u >= -kGeomEps && u <= 1.0 + kGeomEps)
            ts.push_back(t);
    }
    std::sort(ts.begin(), ts.end());

    for (std::size_t i = 0; i + 1 < ts.size(); ++i) {
        double t0 = ts[i];
        double t1 = ts[i + 1];
        if (t1 - t0 < kGeomEps / std::max(1.0, len))
            continue;
        double tm = 0.5 * (t0 + t1);
        if (point_in_polygon(poly, a + r * tm)) {
            if (!out.empty() && std::abs(out.back().second - t0) < 1e-12)
                out.back().second = t1;
            else
                out.emplace_back(t0, t1);
        }
    }
    return out;
}

std::vector<std::size_t> convex_corner_indices(const Polygon& poly)
{
    const std::size_t n = poly.size();
    std::vector<std::size_t> out;
    double area = polygon_signed_area(poly);
    double ccw = area >= 0 ? 1.0 : -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        const Vec2& prev = poly[(i + n - 1) % n];
        const Vec2& cur = poly[i];
        const Vec2& next = poly[(i + 1) % n];
        if (ccw * (cur - prev).cross(next - cur) > kGeomEps)
            out.push_back(i);
    }
    return out;
}

Vec2 offset_corner(const Polygon& poly, std::size_t idx, double offset)
{
    const std::size_t n = poly.size();
    const Vec2& prev = poly[(idx + n - 1) % n];
    const Vec2& cur = poly[idx];
    const Vec2& next = poly[(idx + 1) % n];
    double ccw = polygon_signed_area(poly) >= 0 ? 1.0 : -1.0;

    Vec2 e1 = cur - prev;
    Vec2 e2 = next - cur;
    double n1 = e1.norm();
    double n2 = e2.norm();
    if (n1 < kGeomEps || n2 < kGeomEps)
        return cur;
    // Outward normals of the two incident edges.
    Vec2 o1 = Vec2{e1.y, -e1.x} * (ccw / n1);
    Vec2 o2 = Vec2{e2.y, -e2.x} * (ccw / n2);
    Vec2 bis = o1 + o2;
    double bn = bis.norm();
    if (bn < kGeomEps)
        return cur + o1 * offset;
    return cur + bis * (offset / bn);
}

double distance_point_segment(const Vec2& p, const Vec2& a, const Vec2& b)
{
    Vec2 ab = b - a;
    double den = ab.dot(ab);
    if (den < kGeomEps)
        return (p - a).norm();
    double t = std::clamp((p - a).dot(ab) / den, 0.0, 1.0);
    return (p - (a + ab * t)).norm();
}

} // namespace rsucov
