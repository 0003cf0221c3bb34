#ifndef RSUCOV_IO_HPP
#define RSUCOV_IO_HPP

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "rsucov/calibration.hpp"
#include "rsucov/coverage.hpp"
#include "rsucov/scene.hpp"

namespace rsucov {

// Local tangent-plane origin for projecting lat/lon logs into the scene frame.
struct GeoOrigin {
    double lat_deg = 0.0;
    double lon_deg = 0.0;
};

Vec2 project_to_local(const GeoOrigin& origin, double lat_deg, double lon_deg);

struct ProjectConfig {
    std::filesystem::path scene_path;
    std::vector<TxSite> tx_sites;
    RadioConfig rx_radio;
    PathLossParams path_loss;
    double cw_weight = 1.0;
    std::optional<std::filesystem::path> calibration_record_path;
    std::optional<Region> region;
    std::vector<Vec2> trajectory;
    double cell_size_m = 5.0;
    std::optional<GeoOrigin> geo_origin;
    std::filesystem::path output_dir;
};

Scene load_scene(const std::filesystem::path& path);
ProjectConfig load_config(const std::filesystem::path& path);

struct MeasurementLog {
    std::vector<MeasurementSample> samples;
    std::size_t rejected_rows = 0; // malformed rows are an error, this counts
                                   // rows skipped for documented reasons only
};

std::vector<MeasurementSample> load_measurement_log(const std::filesystem::path& path,
                                                    const std::optional<GeoOrigin>& origin);
std::vector<ModuleSweepRow> load_sweep_log(const std::filesystem::path& path);

PatternCut load_pattern_cut(const std::filesystem::path& path);

struct CalibrationRecord {
    CwCalibration cw;
    std::optional<ModuleCalibration> module;
    std::optional<PathLossParams> fitted_params;
};

void save_calibration_record(const std::filesystem::path& path, const CalibrationRecord& rec);
CalibrationRecord load_calibration_record(const std::filesystem::path& path);

void export_grid_csv(const std::filesystem::path& path, const CoverageGrid& grid);
void export_grid_geojson(const std::filesystem::path& path, const CoverageGrid& grid);
void export_trajectory_csv(const std::filesystem::path& path,
                           const std::vector<TrajectoryRecord>& records);

// Plain-text metrics table: rows RMSE/SD/bias, columns all/LOS/OLOS/NLOS.
std::string format_metrics_report(const FitMetrics& metrics);

// Deterministic numeric formatting shared by all exports.
std::string format_double(double v);

} // namespace rsucov

#endif
