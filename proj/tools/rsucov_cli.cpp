#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "rsucov/errors.hpp"
#include "rsucov/io.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace rsucov;

namespace {

// Exit codes: 0 success, 2 input, 3 geometry, 4 numeric, 5 output lock.
enum ExitCode { kOk = 0, kInputError = 2, kGeometryError = 3, kNumericError = 4, kLockError = 5 };

void emit_error(const std::string& code, const std::string& message,
                const std::string& path = "")
{
    json j = {{"code", code}, {"message", message}};
    if (!path.empty())
        j["path"] = path;
    std::cerr << j.dump() << "\n";
}

class OutputLock {
public:
    explicit OutputLock(const fs::path& dir) : lock_(dir / ".rsucov.lock")
    {
        fs::create_directories(dir);
        if (fs::exists(lock_))
            throw Error("output directory is locked by another run: " + lock_.string());
        std::ofstream out(lock_);
        out << "locked\n";
    }
    ~OutputLock()
    {
        std::error_code ec;
        fs::remove(lock_, ec);
    }

private:
    fs::path lock_;
};

struct CommonOpts {
    std::string config_path;
    std::string out_dir; // overrides config output_dir when set
    int threads = 1;
    double cell_size = 0.0; // overrides config when > 0
    unsigned seed = 0;      // reserved for synthetic-data helpers
};

struct LoadedProject {
    ProjectConfig cfg;
    Scene scene;
};

LoadedProject load_project(const CommonOpts& opts)
{
    ProjectConfig cfg = load_config(opts.config_path);
    if (!opts.out_dir.empty())
        cfg.output_dir = opts.out_dir;
    if (opts.cell_size > 0.0)
        cfg.cell_size_m = opts.cell_size;
    if (!fs::exists(cfg.scene_path))
        throw ParseError("scene file not found: " + cfg.scene_path.string());
    Scene scene = load_scene(cfg.scene_path);
    return {std::move(cfg), std::move(scene)};
}

Calibrations load_calibrations(const ProjectConfig& cfg, PathLossParams& params)
{
    Calibrations cals;
    if (cfg.calibration_record_path) {
        CalibrationRecord rec = load_calibration_record(*cfg.calibration_record_path);
        cals.cw = rec.cw;
        if (rec.module)
            cals.module = *rec.module;
        if (rec.fitted_params)
            params = *rec.fitted_params;
    }
    return cals;
}

// Receiver sample height above local terrain for ingested positions.
void place_samples(const Scene& scene, const RadioConfig& rx,
                   std::vector<MeasurementSample>& samples)
{
    for (auto& s : samples)
        s.position.z = scene.terrain_height_at(s.position.xy()) + rx.antenna_height_m;
}

int cmd_simulate(const CommonOpts& opts)
{
    LoadedProject proj = load_project(opts);
    ProjectConfig& cfg = proj.cfg;
    PathLossParams params = cfg.path_loss;
    Calibrations cals = load_calibrations(cfg, params);
    const TxSite& tx = cfg.tx_sites.front();

    OutputLock lock(cfg.output_dir);
    if (cfg.region) {
        CoverageGrid grid = simulate_grid(proj.scene, tx, cfg.rx_radio, params, cals,
                                          *cfg.region, cfg.cell_size_m, opts.threads);
        export_grid_csv(cfg.output_dir / "grid.csv", grid);
        export_grid_geojson(cfg.output_dir / "grid.geojson", grid);
        CoverageReport rep = report_from_grid(grid, cfg.rx_radio, cals.module);
        std::cout << "grid: " << grid.nx << "x" << grid.ny
                  << " cells, covered_fraction=" << format_double(rep.covered_fraction) << "\n";
    }
    if (!cfg.trajectory.empty()) {
        auto records =
            simulate_trajectory(proj.scene, tx, cfg.rx_radio, params, cals, cfg.trajectory);
        export_trajectory_csv(cfg.output_dir / "trajectory.csv", records);
        CoverageReport rep = report_from_trajectory(records, cfg.rx_radio, cals.module);
        std::cout << "trajectory: " << records.size() << " points, boundary="
                  << (rep.boundary_distance_m ? format_double(*rep.boundary_distance_m) + " m"
                                              : std::string("none"))
                  << "\n";
    }
    if (!cfg.region && cfg.trajectory.empty())
        throw ParseError("config defines neither a region nor a trajectory");
    return kOk;
}

int cmd_calibrate(const CommonOpts& opts, const std::string& cw_log_path,
                  const std::string& sweep_log_path, bool fit, double fit_min,
                  double fit_max, double fit_step, bool per_class)
{
    LoadedProject proj = load_project(opts);
    ProjectConfig& cfg = proj.cfg;
    const TxSite& tx = cfg.tx_sites.front();

    auto samples = load_measurement_log(cw_log_path, cfg.geo_origin);
    std::erase_if(samples, [](const MeasurementSample& s) { return s.kind != SampleKind::CW; });
    if (samples.empty())
        throw EmptyInput("no CW samples in log: " + cw_log_path);
    place_samples(proj.scene, cfg.rx_radio, samples);

    PathLossParams params = cfg.path_loss;
    if (fit) {
        std::vector<double> grid;
        for (double e = fit_min; e <= fit_max + 1e-9; e += fit_step)
            grid.push_back(e);
        params = fit_exponents(proj.scene, tx, cfg.rx_radio, samples, cfg.path_loss, grid);
    }

    Vec3 tx3{tx.position.x, tx.position.y,
             proj.scene.terrain_height_at(tx.position) + tx.config.antenna_height_m};
    auto pl_pairs = [&](const PathLossParams& p) {
        std::vector<PlPair> pairs;
        std::vector<ResidualSample> residuals;
        for (const auto& s : samples) {
            double meas = measured_path_loss_db(proj.scene, tx, cfg.rx_radio, s, p);
            DominantPath path = find_dominant_path(proj.scene, tx3, s.position, p,
                                                   tx.config.frequency_hz);
            double sim = dpm_pl(path, p, tx.config.frequency_hz).total_db;
            pairs.push_back({meas, sim, path.visibility});
            residuals.push_back({sim, meas, path.visibility});
        }
        return std::make_pair(pairs, residuals);
    };

    auto [before_pairs, before_res] = pl_pairs(cfg.path_loss);
    FitMetrics before = evaluate_metrics(before_res);
    auto [pairs, res] = pl_pairs(params);
    CwCalibration cw = cw_offset(pairs, cfg.cw_weight, per_class);

    std::vector<ResidualSample> after_res;
    for (const auto& p : pairs)
        after_res.push_back({p.pl_simulated_db - cw.offset_db, p.pl_measured_db, p.visibility});
    FitMetrics after = evaluate_metrics(after_res);

    CalibrationRecord rec;
    rec.cw = cw;
    if (fit)
        rec.fitted_params = params;
    if (!sweep_log_path.empty()) {
        auto rows = load_sweep_log(sweep_log_path);
        rec.module = module_offset(rows);
    }

    OutputLock lock(cfg.output_dir);
    save_calibration_record(cfg.output_dir / "calibration.json", rec);
    std::ofstream report(cfg.output_dir / "calibration_report.txt");
    report << "CW samples: " << samples.size() << ", weight W=" << format_double(cw.weight)
           << ", offset=" << format_double(cw.offset_db) << " dB\n";
    if (rec.module)
        report << "module offset: " << format_double(rec.module->offset_db) << " dB over "
               << rec.module->rows_used << " rows\n";
    report << "\nbefore calibration (default parameters):\n" << format_metrics_report(before);
    report << "\nafter calibration:\n" << format_metrics_report(after);
    std::cout << "cw offset: " << format_double(cw.offset_db) << " dB ("
              << samples.size() << " samples)\n";
    if (rec.module)
        std::cout << "module offset: " << format_double(rec.module->offset_db) << " dB\n";
    return kOk;
}

int cmd_evaluate(const CommonOpts& opts, const std::string& record_path,
                 const std::string& service_log_path)
{
    LoadedProject proj = load_project(opts);
    ProjectConfig& cfg = proj.cfg;
    const TxSite& tx = cfg.tx_sites.front();

    CalibrationRecord rec = load_calibration_record(record_path);
    PathLossParams params = rec.fitted_params.value_or(cfg.path_loss);
    ModuleCalibration module = rec.module.value_or(ModuleCalibration{});

    auto samples = load_measurement_log(service_log_path, cfg.geo_origin);
    std::erase_if(samples,
                  [](const MeasurementSample& s) { return s.kind != SampleKind::SERVICE; });
    if (samples.empty())
        throw EmptyInput("no SERVICE samples in log: " + service_log_path);
    place_samples(proj.scene, cfg.rx_radio, samples);

    std::vector<ResidualSample> residuals;
    for (const auto& s : samples) {
        ReceivedPower rp = received_power(proj.scene, tx, s.position.xy(), cfg.rx_radio, params);
        // Predicted module RSSI at the recorded source power.
        double level = rp.power_dbm - tx.config.tx_power_dbm + s.source_tx_power_dbm;
        level = apply_module_calibration(apply_cw_calibration(level, rec.cw), module);
        residuals.push_back({level, s.rss_dbm, rp.path.visibility});
    }
    FitMetrics metrics = evaluate_metrics(residuals);

    OutputLock lock(cfg.output_dir);
    std::ofstream report(cfg.output_dir / "evaluation_report.txt");
    report << "service samples: " << samples.size() << "\n"
           << format_metrics_report(metrics);
    std::cout << format_metrics_report(metrics);
    return kOk;
}

int cmd_plan(const CommonOpts& opts, const std::string& record_path)
{
    LoadedProject proj = load_project(opts);
    ProjectConfig& cfg = proj.cfg;
    if (!cfg.region)
        throw ParseError("plan requires a region in the config");

    PathLossParams params = cfg.path_loss;
    Calibrations cals;
    if (!record_path.empty()) {
        CalibrationRecord rec = load_calibration_record(record_path);
        cals.cw = rec.cw;
        if (rec.module)
            cals.module = *rec.module;
        if (rec.fitted_params)
            params = *rec.fitted_params;
    } else {
        cals = load_calibrations(cfg, params);
    }

    struct Candidate {
        std::size_t index;
        CoverageReport report;
        double margin_db;
    };
    std::vector<Candidate> ranked;
    for (std::size_t i = 0; i < cfg.tx_sites.size(); ++i) {
        CoverageGrid grid = simulate_grid(proj.scene, cfg.tx_sites[i], cfg.rx_radio, params,
                                          cals, *cfg.region, cfg.cell_size_m, opts.threads);
        CoverageReport rep = report_from_grid(grid, cfg.rx_radio, cals.module);
        double margin = 0.0;
        std::size_t n = 0;
        for (const auto& c : grid.cells) {
            if (c.p_r_dbm) {
                margin += *c.p_r_dbm - rep.threshold_dbm;
                ++n;
            }
        }
        ranked.push_back({i, rep, n ? margin / static_cast<double>(n) : 0.0});
    }
    std::stable_sort(ranked.begin(), ranked.end(), [](const Candidate& a, const Candidate& b) {
        if (a.report.covered_fraction != b.report.covered_fraction)
            return a.report.covered_fraction > b.report.covered_fraction;
        return a.margin_db < b.margin_db;
    });

    OutputLock lock(cfg.output_dir);
    json out = json::array();
    for (const auto& c : ranked) {
        json j = {{"tx_index", c.index},
                  {"x_m", cfg.tx_sites[c.index].position.x},
                  {"y_m", cfg.tx_sites[c.index].position.y},
                  {"covered_fraction", c.report.covered_fraction},
                  {"threshold_dbm", c.report.threshold_dbm},
                  {"undersupplied_cells", c.report.undersupplied_cells.size()},
                  {"mean_margin_db", c.margin_db}};
        out.push_back(j);
        std::cout << "tx " << c.index << ": covered_fraction="
                  << format_double(c.report.covered_fraction)
                  << " undersupplied=" << c.report.undersupplied_cells.size() << "\n";
    }
    std::ofstream f(cfg.output_dir / "plan_report.json");
    f << out.dump(2) << "\n";
    return kOk;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Road-side radio coverage planning: simulate, calibrate, evaluate, plan"};
    app.require_subcommand(1);

    CommonOpts opts;
    app.add_option("--config", opts.config_path, "project config file")->required();
    app.add_option("--out", opts.out_dir, "output directory (overrides config)");
    app.add_option("--threads", opts.threads, "worker threads for grid simulation");
    app.add_option("--cell-size", opts.cell_size, "grid cell size in meters (overrides config)");
    app.add_option("--seed", opts.seed, "seed for synthetic-data helpers");

    auto* sim = app.add_subcommand("simulate", "compute coverage grid and trajectory exports");

    std::string cw_log, sweep_log;
    bool fit = false, per_class = false;
    double fit_min = 2.0, fit_max = 3.5, fit_step = 0.1;
    auto* cal = app.add_subcommand("calibrate", "derive CW and module calibration offsets");
    cal->add_option("--cw-log", cw_log, "CW measurement log (CSV)")->required();
    cal->add_option("--sweep-log", sweep_log, "wired attenuation sweep log (CSV)");
    cal->add_flag("--fit", fit, "grid-search path loss exponents before the offset");
    cal->add_option("--fit-min", fit_min, "exponent grid lower bound");
    cal->add_option("--fit-max", fit_max, "exponent grid upper bound");
    cal->add_option("--fit-step", fit_step, "exponent grid step");
    cal->add_flag("--per-class", per_class, "emit per-visibility-class CW offsets");

    std::string record_path, service_log;
    auto* eva = app.add_subcommand("evaluate", "compare calibrated simulation with service log");
    eva->add_option("--calibration", record_path, "calibration record (JSON)")->required();
    eva->add_option("--service-log", service_log, "service measurement log (CSV)")->required();

    std::string plan_record;
    auto* plan = app.add_subcommand("plan", "rank candidate tx sites by coverage");
    plan->add_option("--calibration", plan_record, "calibration record (JSON)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed())
            return cmd_simulate(opts);
        if (cal->parsed())
            return cmd_calibrate(opts, cw_log, sweep_log, fit, fit_min, fit_max, fit_step,
                                 per_class);
        if (eva->parsed())
            return cmd_evaluate(opts, record_path, service_log);
        if (plan->parsed())
            return cmd_plan(opts, plan_record);
    } catch (const ParseError& e) {
        emit_error("MissingInput", e.what());
        return kInputError;
    } catch (const EmptyInput& e) {
        emit_error("EmptyInput", e.what());
        return kInputError;
    } catch (const NoPathFound& e) {
        emit_error("NoPathFound", e.what());
        return kGeometryError;
    } catch (const OutOfTerrainBounds& e) {
        emit_error("OutOfTerrainBounds", e.what());
        return kGeometryError;
    } catch (const DomainError& e) {
        emit_error("DomainError", e.what());
        return kNumericError;
    } catch (const Error& e) {
        emit_error("Locked", e.what());
        return kLockError;
    }
    return kOk;
}
