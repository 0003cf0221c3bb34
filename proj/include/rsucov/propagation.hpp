#ifndef RSUCOV_PROPAGATION_HPP
#define RSUCOV_PROPAGATION_HPP

#include <optional>
#include <vector>

#include "rsucov/antenna.hpp"
#include "rsucov/scene.hpp"

namespace rsucov {

inline constexpr double kSpeedOfLight = 299792458.0; // m/s

// Piecewise-linear interaction loss over the turn angle, deg in [0, 180].
// Must pass through (0, 0) and be non-decreasing.
struct InteractionLossCurve {
    std::vector<std::pair<double, double>> points{{0.0, 0.0}, {90.0, 8.0}, {180.0, 15.0}};

    double loss_at(double delta_phi_deg) const;
    void validate() const;
};

struct PathLossParams {
    double exponent_los = 2.6;
    double exponent_olos = 2.8;
    double exponent_nlos = 3.0;
    std::optional<double> breakpoint_m;
    std::optional<double> exponent_los_after;
    std::optional<double> exponent_olos_after;
    std::optional<double> exponent_nlos_after;
    InteractionLossCurve interaction_loss;
    // Street-canyon waveguiding hook: omega = -min(omega_max,
    // sum(kappa * seg_len / wall_dist)). kappa = 0 disables it.
    double waveguiding_kappa = 0.0;
    double waveguiding_max_db = 0.0;

    double exponent_for(VisibilityClass c) const;
    double exponent_after_for(VisibilityClass c) const;
    void validate() const;
};

struct Interaction {
    Vec3 at;
    double delta_phi_deg = 0.0; // [0, 180]
};

struct DominantPath {
    std::vector<Vec3> waypoints; // tx first, rx last
    std::vector<Interaction> interactions;
    double length_m = 0.0;
    VisibilityClass visibility = VisibilityClass::LOS;
};

struct PathLossBreakdown {
    double total_db = 0.0;
    double free_space_reference_db = 0.0; // 20 lg(f) - 147.55
    double distance_term_db = 0.0;        // 10 p lg(d) (two-slope if configured)
    double interaction_term_db = 0.0;     // sum g(dphi)
    double waveguiding_db = 0.0;          // omega, signed
    double diverse_losses_db = 0.0;       // PL_div
};

double free_space_pl(double frequency_hz, double distance_m);

PathLossBreakdown dpm_pl(const DominantPath& path, const PathLossParams& params,
                         double frequency_hz, double diverse_losses_db = 0.0);

// Turn angle in degrees [0, 180] between headings in->corner->out.
double turn_angle_deg(const Vec3& in_from, const Vec3& corner, const Vec3& out_to);

// Minimum-loss path over the corner visibility graph. Straight segment when
// no hard blocker obstructs tx-rx; throws NoPathFound when disconnected.
DominantPath find_dominant_path(const Scene& scene, const Vec3& tx, const Vec3& rx,
                                const PathLossParams& params, double frequency_hz);

// Precomputed tx-side solver for evaluating many receivers against one scene.
class DominantPathSolver {
public:
    DominantPathSolver(const Scene& scene, const Vec3& tx,
                       const PathLossParams& params, double frequency_hz);

    DominantPath solve(const Vec3& rx) const;

    // Precompute corner heights and corner-corner visibility for receivers
    // mounted at the given height above local terrain. Call before sharing
    // the solver across threads; solves at other heights fall back to
    // per-call computation.
    void prepare(double rx_height_above_ground_m);

private:
    const Scene& scene_;
    Vec3 tx_;
    PathLossParams params_;
    double frequency_hz_;
    std::vector<Vec2> corners_; // offset convex corners of hard blockers

    bool cache_valid_ = false;
    double cache_rx_height_ = 0.0;
    std::vector<Vec3> cache_corner3_;
    std::vector<char> cache_tx_vis_;
    std::vector<std::vector<char>> cache_cc_;
};

double link_budget(const RadioConfig& tx, const RadioConfig& rx, double pl_total_db,
                   double tx_gain_dbi, double rx_gain_dbi);

struct TxSite {
    Vec2 position;       // map coordinates
    RadioConfig config;  // antenna_height_m is above local terrain
};

struct ReceivedPower {
    double power_dbm = 0.0;
    PathLossBreakdown breakdown;
    DominantPath path;
};

ReceivedPower received_power(const Scene& scene, const TxSite& tx,
                             const Vec2& rx_position, const RadioConfig& rx,
                             const PathLossParams& params);

// Same, reusing a prebuilt solver for the tx site.
ReceivedPower received_power(const Scene& scene, const TxSite& tx,
                             const DominantPathSolver& solver, const Vec2& rx_position,
                             const RadioConfig& rx, const PathLossParams& params);

} // namespace rsucov

#endif
