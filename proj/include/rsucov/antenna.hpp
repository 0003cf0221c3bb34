#ifndef RSUCOV_ANTENNA_HPP
#define RSUCOV_ANTENNA_HPP

#include <optional>
#include <string>
#include <vector>

namespace rsucov {

// Tabulated gain cut: (angle_deg, gain_dbi) pairs, linearly interpolated.
struct PatternCut {
    std::vector<std::pair<double, double>> points; // sorted by angle

    double gain_at(double angle_deg) const;
};

enum class PatternKind { OMNI, PANEL };

struct AntennaPattern {
    PatternKind kind = PatternKind::OMNI;
    double peak_gain_dbi = 0.0;
    // PANEL only:
    double boresight_azimuth_deg = 0.0;
    double boresight_elevation_deg = 0.0;
    double beamwidth_h_deg = 360.0; // half-power, full width
    double beamwidth_v_deg = 360.0;
    // Optional measured cuts overriding the parabolic roll-off. Angles are
    // offsets from boresight; combined as peak + (h - peak) + (v - peak).
    std::optional<PatternCut> horizontal_cut;
    std::optional<PatternCut> vertical_cut;
};

// Pattern roll-off floor below peak gain, dB.
inline constexpr double kPatternFloorDb = 30.0;

// Gain toward an absolute (azimuth, elevation) direction in degrees.
double gain_toward(const AntennaPattern& pattern, double azimuth_deg,
                   double elevation_deg);

struct RadioConfig {
    double tx_power_dbm = 23.0;
    double cable_loss_db = 0.0;
    AntennaPattern pattern;
    double antenna_height_m = 1.5;
    double frequency_hz = 5.9e9;
    double sensitivity_dbm = -95.0;
    std::string mcs_label = "QPSK r=1/2";

    void validate() const; // throws DomainError on bad fields
};

// Smallest signed difference a - b wrapped to (-180, 180].
double wrap_angle_deg(double a);

} // namespace rsucov

#endif
