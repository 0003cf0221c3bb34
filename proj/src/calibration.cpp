#include "rsucov/calibration.hpp"

#include <algorithm>
#include <cmath>

#include "rsucov/errors.hpp"

namespace rsucov {

CwCalibration cw_offset(const std::vector<PlPair>& pairs, double weight, bool per_class)
{
    if (pairs.empty())
        throw EmptyInput("cw_offset: no aligned pairs");
    if (weight < 0.0 || weight > 1.0)
        throw DomainError("cw_offset: weight must lie in [0, 1]");

    CwCalibration cal;
    cal.weight = weight;
    cal.sample_count = pairs.size();
    double sum = 0.0;
    for (const auto& p : pairs)
        sum += p.pl_measured_db - p.pl_simulated_db;
    cal.offset_db = weight / static_cast<double>(pairs.size()) * sum;

    if (per_class) {
        std::map<VisibilityClass, std::pair<double, std::size_t>> acc;
        for (const auto& p : pairs) {
            auto& a = acc[p.visibility];
            a.first += p.pl_measured_db - p.pl_simulated_db;
            a.second += 1;
        }
        std::map<VisibilityClass, double> out;
        for (const auto& [cls, a] : acc)
            out[cls] = weight / static_cast<double>(a.second) * a.first;
        cal.per_class_offsets = std::move(out);
    }
    return cal;
}

double apply_cw_calibration(double p_sim_dbm, const CwCalibration& cal)
{
    return p_sim_dbm + cal.offset_db;
}

ModuleCalibration module_offset(const std::vector<ModuleSweepRow>& rows)
{
    if (rows.empty())
        throw EmptyInput("module_offset: no sweep rows");
    ModuleCalibration cal;
    cal.rows_used = rows.size();
    double sum = 0.0;
    for (const auto& r : rows) {
        if (r.attenuation_db < 0.0)
            throw DomainError("module_offset: attenuation_db must be >= 0");
        sum += r.p_spec_dbm - r.p_module_dbm;
    }
    cal.offset_db = sum / static_cast<double>(rows.size());
    return cal;
}

double apply_module_calibration(double p_sim_cal_dbm, const ModuleCalibration& cal)
{
    return p_sim_cal_dbm + cal.offset_db;
}

namespace {

ClassMetrics metrics_of(const std::vector<double>& residuals)
{
    ClassMetrics m;
    m.count = residuals.size();
    double sum = 0.0, sq = 0.0;
    for (double r : residuals) {
        sum += r;
        sq += r * r;
    }
    const double n = static_cast<double>(residuals.size());
    m.bias_db = sum / n;
    m.rmse_db = std::sqrt(sq / n);
    double var = 0.0;
    for (double r : residuals) {
        double d = r - m.bias_db;
        var += d * d;
    }
    m.sd_db = std::sqrt(var / n);
    return m;
}

} // namespace

FitMetrics evaluate_metrics(const std::vector<ResidualSample>& pairs)
{
    if (pairs.empty())
        throw EmptyInput("evaluate_metrics: no pairs");
    FitMetrics out;
    std::vector<double> all;
    std::map<VisibilityClass, std::vector<double>> by_class;
    for (const auto& p : pairs) {
        double r = p.simulated_db - p.measured_db;
        all.push_back(r);
        by_class[p.visibility].push_back(r);
    }
    out.overall = metrics_of(all);
    for (const auto& [cls, res] : by_class)
        out.per_class[cls] = metrics_of(res);
    return out;
}

double measured_path_loss_db(const Scene& scene, const TxSite& tx,
                             const RadioConfig& rx, const MeasurementSample& sample,
                             const PathLossParams& params)
{
    // Invert the link budget along the dominant path toward the sample,
    // normalized to the recorded source transmit power.
    ReceivedPower rp = received_power(scene, tx, sample.position.xy(), rx, params);
    double gains = rp.power_dbm - (tx.config.tx_power_dbm - rp.breakdown.total_db);
    return sample.source_tx_power_dbm + gains - sample.rss_dbm;
}

namespace {

struct ClassData {
    std::vector<const MeasurementSample*> samples;
    std::vector<double> measured_pl;
};

double class_rmse(const Scene& scene, const Vec3& tx3, const TxSite& tx,
                  const ClassData& data, const PathLossParams& candidate)
{
    DominantPathSolver solver(scene, tx3, candidate, tx.config.frequency_hz);
    double sq = 0.0;
    for (std::size_t i = 0; i < data.samples.size(); ++i) {
        DominantPath path = solver.solve(data.samples[i]->position);
        double sim = dpm_pl(path, candidate, tx.config.frequency_hz).total_db;
        double r = sim - data.measured_pl[i];
        sq += r * r;
    }
    return std::sqrt(sq / static_cast<double>(data.samples.size()));
}

} // namespace

PathLossParams fit_exponents(const Scene& scene, const TxSite& tx,
                             const RadioConfig& rx,
                             const std::vector<MeasurementSample>& samples,
                             const PathLossParams& defaults,
                             const std::vector<double>& exponent_grid)
{
    if (samples.empty())
        throw EmptyInput("fit_exponents: no samples");
    if (exponent_grid.empty())
        throw DomainError("fit_exponents: empty exponent grid");

    Vec3 tx3{tx.position.x, tx.position.y,
             scene.terrain_height_at(tx.position) + tx.config.antenna_height_m};

    std::map<VisibilityClass, ClassData> by_class;
    for (const auto& s : samples) {
        Vec3 rx3 = s.position;
        VisibilityClass cls = scene.classify_visibility(tx3, rx3);
        auto& cd = by_class[cls];
        cd.samples.push_back(&s);
        cd.measured_pl.push_back(measured_path_loss_db(scene, tx, rx, s, defaults));
    }

    std::vector<double> grid = exponent_grid;
    std::sort(grid.begin(), grid.end());

    PathLossParams fitted = defaults;
    for (auto& [cls, data] : by_class) {
        auto set_exp = [&](PathLossParams& p, double v) {
            switch (cls) {
            case VisibilityClass::LOS: p.exponent_los = v; break;
            case VisibilityClass::OLOS: p.exponent_olos = v; break;
            case VisibilityClass::NLOS: p.exponent_nlos = v; break;
            }
        };
        PathLossParams cand = fitted;
        double best_exp = 0.0;
        double best_rmse = 0.0;
        bool have_best = false;
        for (double e : grid) {
            if (e <= 0.0)
                throw DomainError("fit_exponents: grid exponents must be > 0");
            set_exp(cand, e);
            double rmse = class_rmse(scene, tx3, tx, data, cand);
            if (!have_best || rmse < best_rmse - 1e-12) {
                best_rmse = rmse;
                best_exp = e;
                have_best = true;
            }
        }
        // Keep the default when it strictly beats every grid point, so a
        // fit can never worsen RMSE relative to the defaults.
        set_exp(cand, defaults.exponent_for(cls));
        if (class_rmse(scene, tx3, tx, data, cand) < best_rmse - 1e-12)
            best_exp = defaults.exponent_for(cls);
        set_exp(fitted, best_exp);
    }
    return fitted;
}

} // namespace rsucov
