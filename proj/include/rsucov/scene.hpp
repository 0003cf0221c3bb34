#ifndef RSUCOV_SCENE_HPP
#define RSUCOV_SCENE_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rsucov/geometry.hpp"

namespace rsucov {

struct Material {
    std::string name;
    double relative_permittivity = 1.0;
    double reflection_loss_db = 0.0;
};

enum class ObstacleKind { BUILDING, NOISE_BARRIER, VEGETATION, VEHICLE, OTHER };

const char* to_string(ObstacleKind k);
ObstacleKind obstacle_kind_from_string(const std::string& s);

// Default blocking behaviour per kind; configurable per obstacle.
bool default_hard_blocker(ObstacleKind k);

struct Obstacle {
    Polygon footprint;           // planar map coordinates, meters
    double base_height_m = 0.0;  // above local terrain
    double top_height_m = 0.0;   // above local terrain
    std::string material;        // catalog key
    ObstacleKind kind = ObstacleKind::OTHER;
    bool hard_blocker = true;
};

class TerrainGrid {
public:
    TerrainGrid(Vec2 origin, double cell_size_m,
                std::vector<std::vector<double>> heights);

    // Bilinear interpolation; throws OutOfTerrainBounds outside the hull.
    double height_at(const Vec2& p) const;

    const Vec2& origin() const { return origin_; }
    double cell_size() const { return cell_size_; }
    std::size_t rows() const { return heights_.size(); }
    std::size_t cols() const { return heights_.front().size(); }

private:
    Vec2 origin_;
    double cell_size_;
    std::vector<std::vector<double>> heights_; // [row][col], row along +y
};

enum class VisibilityClass { LOS, OLOS, NLOS };

const char* to_string(VisibilityClass c);

// Immutable 2.5D environment: height field plus extruded, material-tagged
// footprints. All queries are pure.
class Scene {
public:
    Scene(std::optional<TerrainGrid> terrain, std::vector<Obstacle> obstacles,
          std::map<std::string, Material> materials);

    // Ground elevation under p; 0 everywhere when no terrain is present.
    double terrain_height_at(const Vec2& p) const;

    // True iff the open segment (a,b) intersects an obstacle volume or dips
    // below the terrain surface. With hard_only, soft obstacles are ignored.
    bool segment_blocked_3d(const Vec3& a, const Vec3& b, bool hard_only) const;

    VisibilityClass classify_visibility(const Vec3& tx, const Vec3& rx) const;

    const std::vector<Obstacle>& obstacles() const { return obstacles_; }
    const std::map<std::string, Material>& materials() const { return materials_; }
    const std::optional<TerrainGrid>& terrain() const { return terrain_; }
    const Material& material_of(const Obstacle& ob) const;

private:
    bool obstacle_blocks(const Obstacle& ob, const Vec3& a, const Vec3& b) const;
    bool terrain_blocks(const Vec3& a, const Vec3& b) const;

    std::optional<TerrainGrid> terrain_;
    std::vector<Obstacle> obstacles_;
    std::map<std::string, Material> materials_;
};

} // namespace rsucov

#endif
