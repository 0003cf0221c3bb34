#include "rsucov/scene.hpp"

#include <algorithm>
#include <cmath>

#include "rsucov/errors.hpp"

namespace rsucov {

const char* to_string(ObstacleKind k)
{
    switch (k) {
    case ObstacleKind::BUILDING: return "BUILDING";
    case ObstacleKind::NOISE_BARRIER: return "NOISE_BARRIER";
    case ObstacleKind::VEGETATION: return "VEGETATION";
    case ObstacleKind::VEHICLE: return "VEHICLE";
    case ObstacleKind::OTHER: return "OTHER";
    }
    return "OTHER";
}

ObstacleKind obstacle_kind_from_string(const std::string& s)
{
    if (s == "BUILDING") return ObstacleKind::BUILDING;
    if (s == "NOISE_BARRIER") return ObstacleKind::NOISE_BARRIER;
    if (s == "VEGETATION") return ObstacleKind::VEGETATION;
    if (s == "VEHICLE") return ObstacleKind::VEHICLE;
    if (s == "OTHER") return ObstacleKind::OTHER;
    throw ParseError("unknown obstacle kind '" + s + "'");
}

bool default_hard_blocker(ObstacleKind k)
{
    return k == ObstacleKind::BUILDING || k == ObstacleKind::NOISE_BARRIER;
}

const char* to_string(VisibilityClass c)
{
    switch (c) {
    case VisibilityClass::LOS: return "LOS";
    case VisibilityClass::OLOS: return "OLOS";
    case VisibilityClass::NLOS: return "NLOS";
    }
    return "NLOS";
}

TerrainGrid::TerrainGrid(Vec2 origin, double cell_size_m,
                         std::vector<std::vector<double>> heights)
    : origin_(origin), cell_size_(cell_size_m), heights_(std::move(heights))
{
    if (cell_size_ <= 0.0)
        throw DomainError("terrain cell_size must be > 0");
    if (heights_.empty() || heights_.front().empty())
        throw DomainError("terrain heights must be non-empty");
    const std::size_t c = heights_.front().size();
    for (const auto& row : heights_)
        if (row.size() != c)
            throw DomainError("terrain heights must be rectangular");
}

double TerrainGrid::height_at(const Vec2& p) const
{
    double fx = (p.x - origin_.x) / cell_size_;
    double fy = (p.y - origin_.y) / cell_size_;
    const double max_x = static_cast<double>(cols() - 1);
    const double max_y = static_cast<double>(rows() - 1);
    if (fx < -1e-9 || fy < -1e-9 || fx > max_x + 1e-9 || fy > max_y + 1e-9)
        throw OutOfTerrainBounds("point outside terrain hull");
    fx = std::clamp(fx, 0.0, max_x);
    fy = std::clamp(fy, 0.0, max_y);

    if (rows() == 1 && cols() == 1)
        return heights_[0][0];
    if (rows() == 1) {
        std::size_t j = std::min(static_cast<std::size_t>(fx), cols() - 2);
        double u = fx - static_cast<double>(j);
        return heights_[0][j] * (1 - u) + heights_[0][j + 1] * u;
    }
    if (cols() == 1) {
        std::size_t i = std::min(static_cast<std::size_t>(fy), rows() - 2);
        double v = fy - static_cast<double>(i);
        return heights_[i][0] * (1 - v) + heights_[i + 1][0] * v;
    }
    std::size_t i = std::min(static_cast<std::size_t>(fy), rows() - 2);
    std::size_t j = std::min(static_cast<std::size_t>(fx), cols() - 2);
    double u = fx - static_cast<double>(j);
    double v = fy - static_cast<double>(i);
    double h00 = heights_[i][j];
    double h01 = heights_[i][j + 1];
    double h10 = heights_[i + 1][j];
    double h11 = heights_[i + 1][j + 1];
    return h00 * (1 - u) * (1 - v) + h01 * u * (1 - v) + h10 * (1 - u) * v + h11 * u * v;
}

Scene::Scene(std::optional<TerrainGrid> terrain, std::vector<Obstacle> obstacles,
             std::map<std::string, Material> materials)
    : terrain_(std::move(terrain)), obstacles_(std::move(obstacles)),
      materials_(std::move(materials))
{
    for (const auto& [name, m] : materials_) {
        if (m.relative_permittivity < 1.0)
            throw DomainError("material '" + name + "': relative_permittivity must be >= 1");
        if (m.reflection_loss_db < 0.0)
            throw DomainError("material '" + name + "': reflection_loss_db must be >= 0");
    }
    for (const auto& ob : obstacles_) {
        if (ob.footprint.size() < 3)
            throw DomainError("obstacle footprint needs >= 3 vertices");
        if (!polygon_is_simple(ob.footprint))
            throw DomainError("obstacle footprint must be a simple polygon");
        if (std::abs(polygon_signed_area(ob.footprint)) < kGeomEps)
            throw DomainError("obstacle footprint has zero area");
        if (!(ob.top_height_m > ob.base_height_m) || ob.base_height_m < 0.0)
            throw DomainError("obstacle requires top_height > base_height >= 0");
        if (materials_.find(ob.material) == materials_.end())
            throw DomainError("obstacle references unknown material '" + ob.material + "'");
    }
}

const Material& Scene::material_of(const Obstacle& ob) const
{
    return materials_.at(ob.material);
}

double Scene::terrain_height_at(const Vec2& p) const
{
    if (!terrain_)
        return 0.0;
    return terrain_->height_at(p);
}

namespace {

// Terrain lookup for blocking tests; points outside the hull fall back to
// the nearest in-hull value via clamping.
double terrain_clamped(const TerrainGrid& t, Vec2 p)
{
    double max_x = t.origin().x + t.cell_size() * static_cast<double>(t.cols() - 1);
    double max_y = t.origin().y + t.cell_size() * static_cast<double>(t.rows() - 1);
    p.x = std::clamp(p.x, t.origin().x, max_x);
    p.y = std::clamp(p.y, t.origin().y, max_y);
    return t.height_at(p);
}

} // namespace

bool Scene::obstacle_blocks(const Obstacle& ob, const Vec3& a, const Vec3& b) const
{
    auto intervals = segment_polygon_intervals(ob.footprint, a.xy(), b.xy());
    if (intervals.empty())
        return false;
    const double dz = b.z - a.z;
    const double len2d = (b.xy() - a.xy()).norm();

    for (auto [t0, t1] : intervals) {
        if (!terrain_) {
            double z0 = a.z + dz * t0;
            double z1 = a.z + dz * t1;
            double zmin = std::min(z0, z1);
            double zmax = std::max(z0, z1);
            if (zmin < ob.top_height_m - kGeomEps && zmax > ob.base_height_m + kGeomEps)
                return true;
            continue;
        }
        // Terrain present: base/top follow the ground, so sample the interval.
        double step_t = terrain_->cell_size() * 0.5 / std::max(len2d, 1e-6);
        int n = std::max(2, static_cast<int>(std::ceil((t1 - t0) / step_t)) + 1);
        for (int k = 0; k <= n; ++k) {
            double t = t0 + (t1 - t0) * static_cast<double>(k) / n;
            Vec2 p = a.xy() + (b.xy() - a.xy()) * t;
            double ground = terrain_clamped(*terrain_, p);
            double z = a.z + dz * t;
            if (z < ground + ob.top_height_m - kGeomEps &&
                z > ground + ob.base_height_m + kGeomEps)
                return true;
        }
    }
    return false;
}

bool Scene::terrain_blocks(const Vec3& a, const Vec3& b) const
{
    if (!terrain_) {
        // Flat zero elevation: blocked only if the segment dips below z = 0.
        return std::min(a.z, b.z) < -kGeomEps;
    }
    double len2d = (b.xy() - a.xy()).norm();
    double step = terrain_->cell_size() * 0.5;
    int n = std::max(2, static_cast<int>(std::ceil(len2d / step)));
    for (int k = 1; k < n; ++k) {
        double t = static_cast<double>(k) / n;
        Vec2 p = a.xy() + (b.xy() - a.xy()) * t;
        double z = a.z + (b.z - a.z) * t;
        if (z < terrain_clamped(*terrain_, p) - kGeomEps)
            return true;
    }
    return false;
}

bool Scene::segment_blocked_3d(const Vec3& a, const Vec3& b, bool hard_only) const
{
    if (terrain_blocks(a, b))
        return true;
    for (const auto& ob : obstacles_) {
        if (hard_only && !ob.hard_blocker)
            continue;
        if (obstacle_blocks(ob, a, b))
            return true;
    }
    return false;
}

VisibilityClass Scene::classify_visibility(const Vec3& tx, const Vec3& rx) const
{
    if (!segment_blocked_3d(tx, rx, /*hard_only=*/false))
        return VisibilityClass::LOS;
    for (const auto& ob : obstacles_) {
        if (!ob.hard_blocker)
            continue;
        if (segment_crosses_polygon(ob.footprint, tx.xy(), rx.xy()))
            return VisibilityClass::NLOS;
    }
    return VisibilityClass::OLOS;
}

} // namespace rsucov
