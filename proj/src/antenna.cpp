#include "rsucov/antenna.hpp"

#include <algorithm>
#include <cmath>

#include "rsucov/errors.hpp"

namespace rsucov {

double wrap_angle_deg(double a)
{
    a = std::fmod(a, 360.0);
    if (a > 180.0)
        a -= 360.0;
    else if (a <= -180.0)
        a += 360.0;
    return a;
}

double PatternCut::gain_at(double angle_deg) const
{
    if (points.empty())
        throw DomainError("empty pattern cut");
    if (angle_deg <= points.front().first)
        return points.front().second;
    if (angle_deg >= points.back().first)
        return points.back().second;
    auto it = std::lower_bound(points.begin(), points.end(), angle_deg,
                               [](const auto& p, double a) { return p.first < a; });
    auto lo = it - 1;
    double t = (angle_deg - lo->first) / (it->first - lo->first);
    return lo->second + t * (it->second - lo->second);
}

double gain_toward(const AntennaPattern& p, double azimuth_deg, double elevation_deg)
{
    if (!std::isfinite(azimuth_deg) || !std::isfinite(elevation_deg))
        throw DomainError("gain_toward: angles must be finite");
    if (p.kind == PatternKind::OMNI)
        return p.peak_gain_dbi;

    double daz = wrap_angle_deg(azimuth_deg - p.boresight_azimuth_deg);
    double del = wrap_angle_deg(elevation_deg - p.boresight_elevation_deg);

    if (p.horizontal_cut || p.vertical_cut) {
        double gh = p.horizontal_cut ? p.horizontal_cut->gain_at(daz) : p.peak_gain_dbi;
        double gv = p.vertical_cut ? p.vertical_cut->gain_at(del) : p.peak_gain_dbi;
        double g = gh + gv - p.peak_gain_dbi;
        return std::clamp(g, p.peak_gain_dbi - kPatternFloorDb, p.peak_gain_dbi);
    }

    double rh = daz / p.beamwidth_h_deg;
    double rv = del / p.beamwidth_v_deg;
    double loss = 12.0 * (rh * rh + rv * rv);
    return p.peak_gain_dbi - std::min(loss, kPatternFloorDb);
}

void RadioConfig::validate() const
{
    if (frequency_hz <= 0.0)
        throw DomainError("frequency_hz must be > 0");
    if (antenna_height_m < 0.0)
        throw DomainError("antenna_height_m must be >= 0");
    if (cable_loss_db < 0.0)
        throw DomainError("cable_loss_db must be >= 0");
    if (pattern.kind == PatternKind::PANEL) {
        if (pattern.beamwidth_h_deg <= 0.0 || pattern.beamwidth_h_deg > 360.0 ||
            pattern.beamwidth_v_deg <= 0.0 || pattern.beamwidth_v_deg > 360.0)
            throw DomainError("panel beamwidths must lie in (0, 360]");
    }
}

} // namespace rsucov
