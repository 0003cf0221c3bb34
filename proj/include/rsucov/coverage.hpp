#ifndef RSUCOV_COVERAGE_HPP
#define RSUCOV_COVERAGE_HPP

#include <atomic>
#include <functional>
#include <optional>
#include <vector>

#include "rsucov/calibration.hpp"
#include "rsucov/propagation.hpp"

namespace rsucov {

struct CoverageCell {
    double x_m = 0.0;
    double y_m = 0.0;
    std::optional<double> p_r_dbm; // fully calibrated; absent when no path
    VisibilityClass visibility = VisibilityClass::NLOS;
    double distance_m = 0.0; // straight-line to tx
    bool covered = false;
    std::optional<PathLossBreakdown> breakdown;
};

struct CoverageGrid {
    Vec2 origin;
    double cell_size_m = 5.0;
    std::size_t nx = 0;
    std::size_t ny = 0;
    std::vector<CoverageCell> cells; // row-major, y outer

    const CoverageCell& at(std::size_t ix, std::size_t iy) const
    {
        return cells[iy * nx + ix];
    }
};

struct Region {
    Vec2 min;
    Vec2 max;
};

struct TrajectoryRecord {
    Vec2 position;
    double chainage_m = 0.0; // along-path distance from the first point
    double distance_to_tx_m = 0.0;
    VisibilityClass visibility = VisibilityClass::NLOS;
    std::optional<double> p_r_dbm; // fully calibrated
    std::optional<PathLossBreakdown> breakdown;
    bool covered = false;
};

struct CoverageReport {
    double covered_fraction = 0.0;
    std::optional<double> boundary_distance_m;
    std::vector<std::size_t> undersupplied_cells;
    double threshold_dbm = 0.0;
    double contiguous_coverage_m = 0.0; // trajectory reports only
    double max_gap_m = 0.0;             // trajectory reports only
};

struct Calibrations {
    CwCalibration cw;        // offset 0 when uncalibrated
    ModuleCalibration module; // offset 0 when uncalibrated
};

// True iff the calibrated level clears the sensitivity threshold shifted by
// the module offset (strict inequality).
bool check_coverage(double p_sim_cal_module_dbm, const RadioConfig& rx,
                    const ModuleCalibration& module_cal);

// Rasterized received power over a region; deterministic and independent of
// thread count. progress, when set, receives the completed-cell count.
CoverageGrid simulate_grid(const Scene& scene, const TxSite& tx, const RadioConfig& rx,
                           const PathLossParams& params, const Calibrations& cals,
                           const Region& region, double cell_size_m, int threads = 1,
                           std::atomic<std::size_t>* progress = nullptr);

std::vector<TrajectoryRecord>
simulate_trajectory(const Scene& scene, const TxSite& tx, const RadioConfig& rx,
                    const PathLossParams& params, const Calibrations& cals,
                    const std::vector<Vec2>& points);

// Along-path distance of the first uncovered record; absent when all covered.
std::optional<double>
coverage_boundary_distance(const std::vector<TrajectoryRecord>& records);

CoverageReport report_from_grid(const CoverageGrid& grid, const RadioConfig& rx,
                                const ModuleCalibration& module_cal);

CoverageReport report_from_trajectory(const std::vector<TrajectoryRecord>& records,
                                      const RadioConfig& rx,
                                      const ModuleCalibration& module_cal);

} // namespace rsucov

#endif
