#include "rsucov/propagation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "rsucov/errors.hpp"

namespace rsucov {

namespace {
const double kFreeSpaceConstDb = 20.0 * std::log10(4.0 * M_PI / kSpeedOfLight); // -147.55
constexpr double kCornerOffsetM = 1e-6;
} // namespace

double InteractionLossCurve::loss_at(double delta_phi_deg) const
{
    if (points.empty())
        return 0.0;
    if (delta_phi_deg <= points.front().first)
        return points.front().second;
    if (delta_phi_deg >= points.back().first)
        return points.back().second;
    auto it = std::lower_bound(points.begin(), points.end(), delta_phi_deg,
                               [](const auto& p, double a) { return p.first < a; });
    auto lo = it - 1;
    double t = (delta_phi_deg - lo->first) / (it->first - lo->first);
    return lo->second + t * (it->second - lo->second);
}

void InteractionLossCurve::validate() const
{
    if (points.empty() || points.front().first != 0.0 || points.front().second != 0.0)
        throw DomainError("interaction loss curve must start at (0, 0)");
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (points[i].first <= points[i - 1].first)
            throw DomainError("interaction loss curve angles must be increasing");
        if (points[i].second < points[i - 1].second)
            throw DomainError("interaction loss curve must be non-decreasing");
    }
}

double PathLossParams::exponent_for(VisibilityClass c) const
{
    switch (c) {
    case VisibilityClass::LOS: return exponent_los;
    case VisibilityClass::OLOS: return exponent_olos;
    case VisibilityClass::NLOS: return exponent_nlos;
    }
    return exponent_nlos;
}

double PathLossParams::exponent_after_for(VisibilityClass c) const
{
    switch (c) {
    case VisibilityClass::LOS: return exponent_los_after.value_or(exponent_los);
    case VisibilityClass::OLOS: return exponent_olos_after.value_or(exponent_olos);
    case VisibilityClass::NLOS: return exponent_nlos_after.value_or(exponent_nlos);
    }
    return exponent_nlos;
}

void PathLossParams::validate() const
{
    if (exponent_los <= 0.0 || exponent_olos <= 0.0 || exponent_nlos <= 0.0)
        throw DomainError("path loss exponents must be > 0");
    if (breakpoint_m && *breakpoint_m <= 0.0)
        throw DomainError("breakpoint_m must be > 0");
    interaction_loss.validate();
}

double free_space_pl(double frequency_hz, double distance_m)
{
    if (frequency_hz <= 0.0)
        throw DomainError("free_space_pl: frequency must be > 0");
    if (distance_m <= 0.0)
        throw DomainError("free_space_pl: distance must be > 0");
    return 20.0 * std::log10(distance_m) + 20.0 * std::log10(frequency_hz) + kFreeSpaceConstDb;
}

namespace {

// Two-slope distance term, continuous at the breakpoint.
double distance_term_db(double d, double p, double p_after,
                        const std::optional<double>& breakpoint_m)
{
    if (breakpoint_m && d > *breakpoint_m)
        return 10.0 * p * std::log10(*breakpoint_m) +
               10.0 * p_after * std::log10(d / *breakpoint_m);
    return 10.0 * p * std::log10(d);
}

} // namespace

PathLossBreakdown dpm_pl(const DominantPath& path, const PathLossParams& params,
                         double frequency_hz, double diverse_losses_db)
{
    if (path.length_m <= 0.0)
        throw DomainError("dpm_pl: path length must be > 0");
    if (frequency_hz <= 0.0)
        throw DomainError("dpm_pl: frequency must be > 0");

    PathLossBreakdown b;
    b.free_space_reference_db = 20.0 * std::log10(frequency_hz) + kFreeSpaceConstDb;
    b.distance_term_db = distance_term_db(path.length_m, params.exponent_for(path.visibility),
                                          params.exponent_after_for(path.visibility),
                                          params.breakpoint_m);
    b.interaction_term_db = 0.0;
    for (const auto& ia : path.interactions)
        b.interaction_term_db += params.interaction_loss.loss_at(ia.delta_phi_deg);
    b.waveguiding_db = 0.0;
    b.diverse_losses_db = diverse_losses_db;
    b.total_db = b.free_space_reference_db + b.distance_term_db + b.interaction_term_db +
                 b.waveguiding_db + b.diverse_losses_db;
    return b;
}

double turn_angle_deg(const Vec3& in_from, const Vec3& corner, const Vec3& out_to)
{
    Vec3 u = corner - in_from;
    Vec3 v = out_to - corner;
    double nu = u.norm();
    double nv = v.norm();
    if (nu < kGeomEps || nv < kGeomEps)
        return 0.0;
    double c = std::clamp(u.dot(v) / (nu * nv), -1.0, 1.0);
    return std::acos(c) * 180.0 / M_PI;
}

DominantPathSolver::DominantPathSolver(const Scene& scene, const Vec3& tx,
                                       const PathLossParams& params, double frequency_hz)
    : scene_(scene), tx_(tx), params_(params), frequency_hz_(frequency_hz)
{
    params_.validate();
    for (const auto& ob : scene.obstacles()) {
        if (!ob.hard_blocker)
            continue;
        for (std::size_t idx : convex_corner_indices(ob.footprint))
            corners_.push_back(offset_corner(ob.footprint, idx, kCornerOffsetM));
    }
}

namespace {

struct Label {
    double length = 0.0;
    double gsum = 0.0;
    int node = -1;   // corner index, or -2 for tx
    int parent = -1; // index into label arena
};

bool dominates(const Label& a, const Label& b)
{
    return a.length <= b.length + 1e-12 && a.gsum <= b.gsum + 1e-12;
}

} // namespace

DominantPath DominantPathSolver::solve(const Vec3& rx) const
{
    if ((rx - tx_).norm() < kGeomEps)
        throw DomainError("dominant path: tx and rx coincide");

    VisibilityClass vis = scene_.classify_visibility(tx_, rx);

    // Straight segment unless a hard blocker or the terrain obstructs it.
    if (!scene_.segment_blocked_3d(tx_, rx, /*hard_only=*/true)) {
        DominantPath p;
        p.waypoints = {tx_, rx};
        p.length_m = (rx - tx_).norm();
        p.visibility = vis;
        return p;
    }

    const double rx_above_ground = rx.z - scene_.terrain_height_at(rx.xy());
    const std::size_t nc = corners_.size();
    const bool use_cache = cache_valid_ && std::abs(rx_above_ground - cache_rx_height_) < 1e-9;

    std::vector<Vec3> corner3_local;
    std::vector<char> tx_vis_local;
    std::vector<std::vector<char>> cc_local;
    if (!use_cache) {
        corner3_local.resize(nc);
        for (std::size_t i = 0; i < nc; ++i)
            corner3_local[i] = {corners_[i].x, corners_[i].y,
                                scene_.terrain_height_at(corners_[i]) + rx_above_ground};
        tx_vis_local.resize(nc);
        for (std::size_t i = 0; i < nc; ++i)
            tx_vis_local[i] = !scene_.segment_blocked_3d(tx_, corner3_local[i], true);
        cc_local.assign(nc, std::vector<char>(nc, 0));
        for (std::size_t i = 0; i < nc; ++i)
            for (std::size_t j = i + 1; j < nc; ++j)
                cc_local[i][j] = cc_local[j][i] =
                    !scene_.segment_blocked_3d(corner3_local[i], corner3_local[j], true);
    }
    const std::vector<Vec3>& corner3 = use_cache ? cache_corner3_ : corner3_local;
    const std::vector<char>& tx_vis = use_cache ? cache_tx_vis_ : tx_vis_local;
    const std::vector<std::vector<char>>& cc = use_cache ? cache_cc_ : cc_local;

    std::vector<char> rx_vis(nc);
    for (std::size_t i = 0; i < nc; ++i)
        rx_vis[i] = !scene_.segment_blocked_3d(corner3[i], rx, true);

    auto node_pos = [&](int n) -> const Vec3& { return n == -2 ? tx_ : corner3[static_cast<std::size_t>(n)]; };

    // Pareto label-correcting search over (prev, node) states. Cycles never
    // survive domination since length strictly grows and gsum never shrinks.
    std::vector<Label> arena;
    // Pareto sets keyed by (prev, node); prev -2 means tx. Final labels at rx.
    std::vector<std::vector<std::vector<int>>> pareto(
        nc + 1, std::vector<std::vector<int>>(nc)); // pareto[prev+1... ] see below
    auto pareto_set = [&](int prev, int node) -> std::vector<int>& {
        std::size_t pi = prev == -2 ? nc : static_cast<std::size_t>(prev);
        return pareto[pi][static_cast<std::size_t>(node)];
    };

    std::deque<int> queue;
    std::vector<int> finals;

    auto try_insert = [&](std::vector<int>& set, const Label& cand) -> int {
        for (int id : set)
            if (dominates(arena[id], cand))
                return -1;
        std::erase_if(set, [&](int id) { return dominates(cand, arena[id]); });
        arena.push_back(cand);
        set.push_back(static_cast<int>(arena.size()) - 1);
        return static_cast<int>(arena.size()) - 1;
    };

    // Seed: tx -> each visible corner, and tx -> rx handled by short-circuit above.
    for (std::size_t i = 0; i < nc; ++i) {
        if (!tx_vis[i])
            continue;
        Label l;
        l.length = (corner3[i] - tx_).norm();
        l.gsum = 0.0;
        l.node = static_cast<int>(i);
        l.parent = -1;
        int id = try_insert(pareto_set(-2, l.node), l);
        if (id >= 0)
            queue.push_back(id);
    }

    std::vector<int> rx_finals;
    auto expand = [&](int label_id) {
        Label cur = arena[static_cast<std::size_t>(label_id)];
        int prev_node = cur.parent < 0 ? -2 : arena[static_cast<std::size_t>(cur.parent)].node;
        const Vec3& here = corner3[static_cast<std::size_t>(cur.node)];
        const Vec3& from = node_pos(prev_node);

        // Corner -> rx.
        if (rx_vis[static_cast<std::size_t>(cur.node)]) {
            double dphi = turn_angle_deg(from, here, rx);
            Label fin;
            fin.length = cur.length + (rx - here).norm();
            fin.gsum = cur.gsum + params_.interaction_loss.loss_at(dphi);
            fin.node = -3;
            fin.parent = label_id;
            arena.push_back(fin);
            rx_finals.push_back(static_cast<int>(arena.size()) - 1);
        }
        // Corner -> corner.
        for (std::size_t j = 0; j < nc; ++j) {
            if (static_cast<int>(j) == cur.node || !cc[static_cast<std::size_t>(cur.node)][j])
                continue;
            double dphi = turn_angle_deg(from, here, corner3[j]);
            Label nxt;
            nxt.length = cur.length + (corner3[j] - here).norm();
            nxt.gsum = cur.gsum + params_.interaction_loss.loss_at(dphi);
            nxt.node = static_cast<int>(j);
            nxt.parent = label_id;
            int id = try_insert(pareto_set(cur.node, nxt.node), nxt);
            if (id >= 0)
                queue.push_back(id);
        }
    };

    while (!queue.empty()) {
        int id = queue.front();
        queue.pop_front();
        // Stale labels (evicted from their Pareto set) still expand correctly
        // but waste time; skip those no longer referenced.
        Label cur = arena[static_cast<std::size_t>(id)];
        int prev_node = cur.parent < 0 ? -2 : arena[static_cast<std::size_t>(cur.parent)].node;
        auto& set = pareto_set(prev_node, cur.node);
        if (std::find(set.begin(), set.end(), id) == set.end())
            continue;
        expand(id);
    }

    if (rx_finals.empty())
        throw NoPathFound("dominant path: candidate graph is disconnected");

    // Select minimum Eq.-3 loss; tie-break lexicographically on waypoints.
    double p_exp = params_.exponent_for(vis);
    double p_after = params_.exponent_after_for(vis);
    auto cost_of = [&](const Label& l) {
        return distance_term_db(l.length, p_exp, p_after, params_.breakpoint_m) + l.gsum;
    };
    auto reconstruct = [&](int fin_id) {
        std::vector<Vec3> wps;
        int id = fin_id;
        wps.push_back(rx);
        id = arena[static_cast<std::size_t>(id)].parent;
        while (id >= 0) {
            wps.push_back(corner3[static_cast<std::size_t>(arena[static_cast<std::size_t>(id)].node)]);
            id = arena[static_cast<std::size_t>(id)].parent;
        }
        wps.push_back(tx_);
        std::reverse(wps.begin(), wps.end());
        return wps;
    };
    auto lex_less = [](const std::vector<Vec3>& a, const std::vector<Vec3>& b) {
        for (std::size_t i = 0; i < std::min(a.size(), b.size()); ++i) {
            if (a[i].x != b[i].x) return a[i].x < b[i].x;
            if (a[i].y != b[i].y) return a[i].y < b[i].y;
            if (a[i].z != b[i].z) return a[i].z < b[i].z;
        }
        return a.size() < b.size();
    };

    int best = -1;
    double best_cost = std::numeric_limits<double>::infinity();
    std::vector<Vec3> best_wps;
    for (int fid : rx_finals) {
        double c = cost_of(arena[static_cast<std::size_t>(fid)]);
        if (c < best_cost - 1e-12) {
            best = fid;
            best_cost = c;
            best_wps = reconstruct(fid);
        } else if (c < best_cost + 1e-12) {
            auto wps = reconstruct(fid);
            if (lex_less(wps, best_wps)) {
                best = fid;
                best_wps = std::move(wps);
            }
        }
    }
    (void)best;

    DominantPath path;
    path.waypoints = best_wps;
    path.visibility = vis;
    path.length_m = 0.0;
    for (std::size_t i = 0; i + 1 < best_wps.size(); ++i)
        path.length_m += (best_wps[i + 1] - best_wps[i]).norm();
    for (std::size_t i = 1; i + 1 < best_wps.size(); ++i) {
        Interaction ia;
        ia.at = best_wps[i];
        ia.delta_phi_deg = turn_angle_deg(best_wps[i - 1], best_wps[i], best_wps[i + 1]);
        path.interactions.push_back(ia);
    }
    return path;
}

void DominantPathSolver::prepare(double rx_height_above_ground_m)
{
    const std::size_t nc = corners_.size();
    cache_rx_height_ = rx_height_above_ground_m;
    cache_corner3_.resize(nc);
    for (std::size_t i = 0; i < nc; ++i)
        cache_corner3_[i] = {corners_[i].x, corners_[i].y,
                             scene_.terrain_height_at(corners_[i]) + rx_height_above_ground_m};
    cache_tx_vis_.resize(nc);
    for (std::size_t i = 0; i < nc; ++i)
        cache_tx_vis_[i] = !scene_.segment_blocked_3d(tx_, cache_corner3_[i], true);
    cache_cc_.assign(nc, std::vector<char>(nc, 0));
    for (std::size_t i = 0; i < nc; ++i)
        for (std::size_t j = i + 1; j < nc; ++j)
            cache_cc_[i][j] = cache_cc_[j][i] =
                !scene_.segment_blocked_3d(cache_corner3_[i], cache_corner3_[j], true);
    cache_valid_ = true;
}

DominantPath find_dominant_path(const Scene& scene, const Vec3& tx, const Vec3& rx,
                                const PathLossParams& params, double frequency_hz)
{
    DominantPathSolver solver(scene, tx, params, frequency_hz);
    return solver.solve(rx);
}

double link_budget(const RadioConfig& tx, const RadioConfig& rx, double pl_total_db,
                   double tx_gain_dbi, double rx_gain_dbi)
{
    return tx.tx_power_dbm - tx.cable_loss_db + tx_gain_dbi - pl_total_db + rx_gain_dbi -
           rx.cable_loss_db;
}

namespace {

void direction_angles(const Vec3& from, const Vec3& to, double& az_deg, double& el_deg)
{
    Vec3 d = to - from;
    double horiz = std::hypot(d.x, d.y);
    az_deg = std::atan2(d.y, d.x) * 180.0 / M_PI;
    el_deg = std::atan2(d.z, horiz) * 180.0 / M_PI;
}

} // namespace

ReceivedPower received_power(const Scene& scene, const TxSite& tx,
                             const DominantPathSolver& solver, const Vec2& rx_position,
                             const RadioConfig& rx, const PathLossParams& params)
{
    Vec3 rx3{rx_position.x, rx_position.y,
             scene.terrain_height_at(rx_position) + rx.antenna_height_m};
    ReceivedPower out;
    out.path = solver.solve(rx3);
    out.breakdown = dpm_pl(out.path, params, tx.config.frequency_hz);

    const auto& wps = out.path.waypoints;
    double az, el;
    direction_angles(wps.front(), wps[1], az, el);
    double gt = gain_toward(tx.config.pattern, az, el);
    direction_angles(wps.back(), wps[wps.size() - 2], az, el);
    double gr = gain_toward(rx.pattern, az, el);

    out.power_dbm = link_budget(tx.config, rx, out.breakdown.total_db, gt, gr);
    return out;
}

ReceivedPower received_power(const Scene& scene, const TxSite& tx,
                             const Vec2& rx_position, const RadioConfig& rx,
                             const PathLossParams& params)
{
    Vec3 tx3{tx.position.x, tx.position.y,
             scene.terrain_height_at(tx.position) + tx.config.antenna_height_m};
    DominantPathSolver solver(scene, tx3, params, tx.config.frequency_hz);
    return received_power(scene, tx, solver, rx_position, rx, params);
}

} // namespace rsucov
