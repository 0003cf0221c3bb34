#ifndef RSUCOV_CALIBRATION_HPP
#define RSUCOV_CALIBRATION_HPP

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rsucov/propagation.hpp"
#include "rsucov/scene.hpp"

namespace rsucov {

enum class SampleKind { CW, SERVICE };

struct MeasurementSample {
    Vec3 position;                 // scene frame, meters
    double rss_dbm = 0.0;
    SampleKind kind = SampleKind::CW;
    std::optional<double> timestamp_s;
    double source_tx_power_dbm = 0.0;
};

struct ModuleSweepRow {
    double attenuation_db = 0.0;
    double p_spec_dbm = 0.0;   // spectrum analyzer reading
    double p_module_dbm = 0.0; // module-reported RSSI
};

struct PlPair {
    double pl_measured_db = 0.0;
    double pl_simulated_db = 0.0;
    VisibilityClass visibility = VisibilityClass::LOS;
};

struct CwCalibration {
    double weight = 1.0;      // W in [0, 1]
    double offset_db = 0.0;   // weighted mean measured-minus-simulated PL
    std::size_t sample_count = 0;
    std::optional<std::map<VisibilityClass, double>> per_class_offsets;
};

struct ModuleCalibration {
    double offset_db = 0.0; // mean analyzer-minus-module level
    std::size_t rows_used = 0;
};

struct ClassMetrics {
    double rmse_db = 0.0;
    double sd_db = 0.0;
    double bias_db = 0.0;
    std::size_t count = 0;
};

struct FitMetrics {
    ClassMetrics overall;
    std::map<VisibilityClass, ClassMetrics> per_class; // absent classes omitted
};

// Weighted mean path-loss offset over aligned positions (measured - simulated).
CwCalibration cw_offset(const std::vector<PlPair>& pairs, double weight,
                        bool per_class = false);

double apply_cw_calibration(double p_sim_dbm, const CwCalibration& cal);

ModuleCalibration module_offset(const std::vector<ModuleSweepRow>& rows);

double apply_module_calibration(double p_sim_cal_dbm, const ModuleCalibration& cal);

struct ResidualSample {
    double simulated_db = 0.0;
    double measured_db = 0.0;
    VisibilityClass visibility = VisibilityClass::LOS;
};

FitMetrics evaluate_metrics(const std::vector<ResidualSample>& pairs);

// Per-class grid search over path loss exponents minimizing RMSE of
// simulated vs measured path loss; classes without samples keep defaults.
// Ties break toward the smaller exponent.
PathLossParams fit_exponents(const Scene& scene, const TxSite& tx,
                             const RadioConfig& rx,
                             const std::vector<MeasurementSample>& samples,
                             const PathLossParams& defaults,
                             const std::vector<double>& exponent_grid);

// Measured path loss recovered from an RSS sample via the link budget,
// using the recorded source transmit power.
double measured_path_loss_db(const Scene& scene, const TxSite& tx,
                             const RadioConfig& rx, const MeasurementSample& sample,
                             const PathLossParams& params);

} // namespace rsucov

#endif
