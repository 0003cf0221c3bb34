#include "rsucov/coverage.hpp"

#include <algorithm>
#include <cmath>
#include <thread>

#include "rsucov/errors.hpp"

namespace rsucov {

bool check_coverage(double p_sim_cal_module_dbm, const RadioConfig& rx,
                    const ModuleCalibration& module_cal)
{
    return p_sim_cal_module_dbm > rx.sensitivity_dbm + module_cal.offset_db;
}

namespace {

CoverageCell evaluate_cell(const Scene& scene, const TxSite& tx,
                           const DominantPathSolver& solver, const RadioConfig& rx,
                           const PathLossParams& params, const Calibrations& cals,
                           const Vec2& pos)
{
    CoverageCell cell;
    cell.x_m = pos.x;
    cell.y_m = pos.y;
    cell.distance_m = (pos - tx.position).norm();
    try {
        ReceivedPower rp = received_power(scene, tx, solver, pos, rx, params);
        double p = apply_module_calibration(
            apply_cw_calibration(rp.power_dbm, cals.cw), cals.module);
        cell.p_r_dbm = p;
        cell.visibility = rp.path.visibility;
        cell.breakdown = rp.breakdown;
        cell.covered = check_coverage(p, rx, cals.module);
    } catch (const NoPathFound&) {
        cell.covered = false; // planning needs the hole, not an abort
    } catch (const DomainError&) {
        cell.covered = false; // e.g. cell coincides with the tx position
    }
    return cell;
}

} // namespace

CoverageGrid simulate_grid(const Scene& scene, const TxSite& tx, const RadioConfig& rx,
                           const PathLossParams& params, const Calibrations& cals,
                           const Region& region, double cell_size_m, int threads,
                           std::atomic<std::size_t>* progress)
{
    if (cell_size_m <= 0.0)
        throw DomainError("simulate_grid: cell_size must be > 0");
    if (region.max.x < region.min.x || region.max.y < region.min.y)
        throw DomainError("simulate_grid: empty region");

    CoverageGrid grid;
    grid.origin = region.min;
    grid.cell_size_m = cell_size_m;
    grid.nx = static_cast<std::size_t>(std::floor((region.max.x - region.min.x) / cell_size_m)) + 1;
    grid.ny = static_cast<std::size_t>(std::floor((region.max.y - region.min.y) / cell_size_m)) + 1;
    grid.cells.resize(grid.nx * grid.ny);

    Vec3 tx3{tx.position.x, tx.position.y,
             scene.terrain_height_at(tx.position) + tx.config.antenna_height_m};
    DominantPathSolver solver(scene, tx3, params, tx.config.frequency_hz);
    solver.prepare(rx.antenna_height_m);

    auto run_rows = [&](std::size_t row_begin, std::size_t row_end) {
        for (std::size_t iy = row_begin; iy < row_end; ++iy) {
            for (std::size_t ix = 0; ix < grid.nx; ++ix) {
                Vec2 pos{grid.origin.x + cell_size_m * static_cast<double>(ix),
                         grid.origin.y + cell_size_m * static_cast<double>(iy)};
                grid.cells[iy * grid.nx + ix] =
                    evaluate_cell(scene, tx, solver, rx, params, cals, pos);
                if (progress)
                    progress->fetch_add(1, std::memory_order_relaxed);
            }
        }
    };

    int n = std::max(1, threads);
    if (n == 1 || grid.ny < 2) {
        run_rows(0, grid.ny);
    } else {
        std::vector<std::thread> pool;
        std::size_t per = (grid.ny + static_cast<std::size_t>(n) - 1) / static_cast<std::size_t>(n);
        for (int t = 0; t < n; ++t) {
            std::size_t b = static_cast<std::size_t>(t) * per;
            std::size_t e = std::min(grid.ny, b + per);
            if (b >= e)
                break;
            pool.emplace_back(run_rows, b, e);
        }
        for (auto& th : pool)
            th.join();
    }
    return grid;
}

std::vector<TrajectoryRecord>
simulate_trajectory(const Scene& scene, const TxSite& tx, const RadioConfig& rx,
                    const PathLossParams& params, const Calibrations& cals,
                    const std::vector<Vec2>& points)
{
    if (points.empty())
        throw EmptyInput("simulate_trajectory: no points");

    Vec3 tx3{tx.position.x, tx.position.y,
             scene.terrain_height_at(tx.position) + tx.config.antenna_height_m};
    DominantPathSolver solver(scene, tx3, params, tx.config.frequency_hz);
    solver.prepare(rx.antenna_height_m);

    std::vector<TrajectoryRecord> out;
    out.reserve(points.size());
    double chain = 0.0;
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (i > 0)
            chain += (points[i] - points[i - 1]).norm();
        TrajectoryRecord rec;
        rec.position = points[i];
        rec.chainage_m = chain;
        rec.distance_to_tx_m = (points[i] - tx.position).norm();
        try {
            ReceivedPower rp = received_power(scene, tx, solver, points[i], rx, params);
            double p = apply_module_calibration(
                apply_cw_calibration(rp.power_dbm, cals.cw), cals.module);
            rec.p_r_dbm = p;
            rec.visibility = rp.path.visibility;
            rec.breakdown = rp.breakdown;
            rec.covered = check_coverage(p, rx, cals.module);
        } catch (const NoPathFound&) {
            rec.covered = false;
        }
        out.push_back(std::move(rec));
    }
    return out;
}

std::optional<double>
coverage_boundary_distance(const std::vector<TrajectoryRecord>& records)
{
    if (records.empty())
        throw EmptyInput("coverage_boundary_distance: no records");
    for (const auto& r : records)
        if (!r.covered)
            return r.chainage_m;
    return std::nullopt;
}

CoverageReport report_from_grid(const CoverageGrid& grid, const RadioConfig& rx,
                                const ModuleCalibration& module_cal)
{
    CoverageReport rep;
    rep.threshold_dbm = rx.sensitivity_dbm + module_cal.offset_db;
    std::size_t covered = 0;
    for (std::size_t i = 0; i < grid.cells.size(); ++i) {
        if (grid.cells[i].covered)
            ++covered;
        else
            rep.undersupplied_cells.push_back(i);
    }
    rep.covered_fraction =
        grid.cells.empty() ? 0.0 : static_cast<double>(covered) / static_cast<double>(grid.cells.size());
    return rep;
}

CoverageReport report_from_trajectory(const std::vector<TrajectoryRecord>& records,
                                      const RadioConfig& rx,
                                      const ModuleCalibration& module_cal)
{
    CoverageReport rep;
    rep.threshold_dbm = rx.sensitivity_dbm + module_cal.offset_db;
    if (records.empty())
        throw EmptyInput("report_from_trajectory: no records");

    std::size_t covered = 0;
    double run_start = -1.0;
    double gap_start = -1.0;
    double best_run = 0.0;
    double best_gap = 0.0;
    for (std::size_t i = 0; i < records.size(); ++i) {
        const auto& r = records[i];
        if (r.covered) {
            ++covered;
            if (run_start < 0.0)
                run_start = r.chainage_m;
            if (gap_start >= 0.0) {
                best_gap = std::max(best_gap, r.chainage_m - gap_start);
                gap_start = -1.0;
            }
            best_run = std::max(best_run, r.chainage_m - run_start);
        } else {
            rep.undersupplied_cells.push_back(i);
            if (gap_start < 0.0)
                gap_start = r.chainage_m;
            if (run_start >= 0.0) {
                best_run = std::max(best_run, r.chainage_m - run_start);
                run_start = -1.0;
            }
            best_gap = std::max(best_gap, records.back().chainage_m - gap_start);
        }
    }
    rep.covered_fraction = static_cast<double>(covered) / static_cast<double>(records.size());
    rep.boundary_distance_m = coverage_boundary_distance(records);
    rep.contiguous_coverage_m = best_run;
    rep.max_gap_m = best_gap;
    return rep;
}

} // namespace rsucov
