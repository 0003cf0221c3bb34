#include "rsucov/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "rsucov/errors.hpp"

namespace rsucov {

using nlohmann::json;

namespace {

constexpr double kEarthRadiusM = 6378137.0;
constexpr double kDbmMin = -200.0;
constexpr double kDbmMax = 60.0;

json read_json_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open file: " + path.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

double require_number(const json& j, const std::string& key, const std::string& ctx)
{
    if (!j.contains(key) || !j[key].is_number())
        throw ParseError(ctx + ": missing or non-numeric field '" + key + "'");
    return j[key].get<double>();
}

double check_dbm(double v, const std::string& ctx, int line = -1)
{
    if (!(v >= kDbmMin && v <= kDbmMax))
        throw ParseError(ctx + ": dBm value " + std::to_string(v) +
                             " outside [-200, 60], likely a unit error",
                         line);
    return v;
}

} // namespace

Vec2 project_to_local(const GeoOrigin& origin, double lat_deg, double lon_deg)
{
    double lat0 = origin.lat_deg * M_PI / 180.0;
    double x = (lon_deg - origin.lon_deg) * M_PI / 180.0 * kEarthRadiusM * std::cos(lat0);
    double y = (lat_deg - origin.lat_deg) * M_PI / 180.0 * kEarthRadiusM;
    return {x, y};
}

Scene load_scene(const std::filesystem::path& path)
{
    json j = read_json_file(path);
    if (!j.contains("format_version"))
        throw ParseError(path.string() + ": missing format_version");

    std::optional<TerrainGrid> terrain;
    if (j.contains("terrain") && !j["terrain"].is_null()) {
        const auto& t = j["terrain"];
        Vec2 origin{require_number(t, "origin_x_m", "terrain"),
                    require_number(t, "origin_y_m", "terrain")};
        double cell = require_number(t, "cell_size_m", "terrain");
        std::vector<std::vector<double>> heights;
        for (const auto& row : t.at("heights_m"))
            heights.push_back(row.get<std::vector<double>>());
        terrain.emplace(origin, cell, std::move(heights));
    }

    std::map<std::string, Material> materials;
    for (const auto& m : j.value("materials", json::array())) {
        Material mat;
        mat.name = m.at("name").get<std::string>();
        mat.relative_permittivity = require_number(m, "relative_permittivity", "material " + mat.name);
        mat.reflection_loss_db = require_number(m, "reflection_loss_db", "material " + mat.name);
        materials[mat.name] = mat;
    }

    std::vector<Obstacle> obstacles;
    for (const auto& o : j.value("obstacles", json::array())) {
        Obstacle ob;
        for (const auto& v : o.at("footprint_m"))
            ob.footprint.push_back({v.at(0).get<double>(), v.at(1).get<double>()});
        ob.base_height_m = o.value("base_height_m", 0.0);
        ob.top_height_m = require_number(o, "top_height_m", "obstacle");
        ob.material = o.at("material").get<std::string>();
        ob.kind = obstacle_kind_from_string(o.value("kind", std::string("OTHER")));
        ob.hard_blocker = o.value("hard_blocker", default_hard_blocker(ob.kind));
        obstacles.push_back(std::move(ob));
    }
    return Scene(std::move(terrain), std::move(obstacles), std::move(materials));
}

namespace {

AntennaPattern parse_pattern(const json& p, const std::filesystem::path& base_dir)
{
    AntennaPattern out;
    std::string kind = p.value("kind", std::string("OMNI"));
    if (kind == "OMNI")
        out.kind = PatternKind::OMNI;
    else if (kind == "PANEL")
        out.kind = PatternKind::PANEL;
    else
        throw ParseError("pattern kind must be OMNI or PANEL, got '" + kind + "'");
    out.peak_gain_dbi = require_number(p, "peak_gain_dbi", "pattern");
    if (out.kind == PatternKind::PANEL) {
        out.boresight_azimuth_deg = p.value("boresight_azimuth_deg", 0.0);
        out.boresight_elevation_deg = p.value("boresight_elevation_deg", 0.0);
        out.beamwidth_h_deg = require_number(p, "beamwidth_h_deg", "pattern");
        out.beamwidth_v_deg = require_number(p, "beamwidth_v_deg", "pattern");
    }
    if (p.contains("horizontal_cut_path"))
        out.horizontal_cut = load_pattern_cut(base_dir / p["horizontal_cut_path"].get<std::string>());
    if (p.contains("vertical_cut_path"))
        out.vertical_cut = load_pattern_cut(base_dir / p["vertical_cut_path"].get<std::string>());
    return out;
}

RadioConfig parse_radio(const json& r, const std::filesystem::path& base_dir)
{
    RadioConfig cfg;
    cfg.tx_power_dbm = check_dbm(r.value("tx_power_dbm", 23.0), "radio tx_power_dbm");
    cfg.cable_loss_db = r.value("cable_loss_db", 0.0);
    cfg.antenna_height_m = require_number(r, "antenna_height_m", "radio");
    cfg.frequency_hz = r.value("frequency_hz", 5.9e9);
    cfg.sensitivity_dbm = check_dbm(r.value("sensitivity_dbm", -95.0), "radio sensitivity_dbm");
    cfg.mcs_label = r.value("mcs", std::string("QPSK r=1/2"));
    if (r.contains("pattern"))
        cfg.pattern = parse_pattern(r["pattern"], base_dir);
    cfg.validate();
    return cfg;
}

PathLossParams parse_path_loss(const json& p)
{
    PathLossParams out;
    out.exponent_los = p.value("exponent_los", 2.6);
    out.exponent_olos = p.value("exponent_olos", 2.8);
    out.exponent_nlos = p.value("exponent_nlos", 3.0);
    if (p.contains("breakpoint_m"))
        out.breakpoint_m = p["breakpoint_m"].get<double>();
    if (p.contains("exponent_los_after"))
        out.exponent_los_after = p["exponent_los_after"].get<double>();
    if (p.contains("exponent_olos_after"))
        out.exponent_olos_after = p["exponent_olos_after"].get<double>();
    if (p.contains("exponent_nlos_after"))
        out.exponent_nlos_after = p["exponent_nlos_after"].get<double>();
    if (p.contains("interaction_loss_curve")) {
        out.interaction_loss.points.clear();
        for (const auto& pt : p["interaction_loss_curve"])
            out.interaction_loss.points.emplace_back(pt.at(0).get<double>(),
                                                     pt.at(1).get<double>());
    }
    out.waveguiding_kappa = p.value("waveguiding_kappa", 0.0);
    out.waveguiding_max_db = p.value("waveguiding_max_db", 0.0);
    out.validate();
    return out;
}

json path_loss_to_json(const PathLossParams& p)
{
    json out;
    out["exponent_los"] = p.exponent_los;
    out["exponent_olos"] = p.exponent_olos;
    out["exponent_nlos"] = p.exponent_nlos;
    if (p.breakpoint_m)
        out["breakpoint_m"] = *p.breakpoint_m;
    if (p.exponent_los_after)
        out["exponent_los_after"] = *p.exponent_los_after;
    if (p.exponent_olos_after)
        out["exponent_olos_after"] = *p.exponent_olos_after;
    if (p.exponent_nlos_after)
        out["exponent_nlos_after"] = *p.exponent_nlos_after;
    json curve = json::array();
    for (const auto& pt : p.interaction_loss.points)
        curve.push_back({pt.first, pt.second});
    out["interaction_loss_curve"] = curve;
    out["waveguiding_kappa"] = p.waveguiding_kappa;
    out["waveguiding_max_db"] = p.waveguiding_max_db;
    return out;
}

} // namespace

ProjectConfig load_config(const std::filesystem::path& path)
{
    json j = read_json_file(path);
    if (!j.contains("format_version"))
        throw ParseError(path.string() + ": missing format_version");
    std::filesystem::path base = path.parent_path();

    ProjectConfig cfg;
    cfg.scene_path = base / j.at("scene_path").get<std::string>();
    for (const auto& t : j.at("tx_sites")) {
        TxSite site;
        site.position = {require_number(t, "x_m", "tx_site"), require_number(t, "y_m", "tx_site")};
        site.config = parse_radio(t.at("radio"), base);
        cfg.tx_sites.push_back(std::move(site));
    }
    if (cfg.tx_sites.empty())
        throw ParseError(path.string() + ": tx_sites must not be empty");
    cfg.rx_radio = parse_radio(j.at("rx_radio"), base);
    if (j.contains("path_loss"))
        cfg.path_loss = parse_path_loss(j["path_loss"]);
    cfg.cw_weight = j.value("cw_weight", 1.0);
    if (cfg.cw_weight < 0.0 || cfg.cw_weight > 1.0)
        throw ParseError(path.string() + ": cw_weight must lie in [0, 1]");
    if (j.contains("calibration_record_path"))
        cfg.calibration_record_path = base / j["calibration_record_path"].get<std::string>();
    if (j.contains("region")) {
        const auto& r = j["region"];
        cfg.region = Region{{require_number(r, "min_x_m", "region"), require_number(r, "min_y_m", "region")},
                            {require_number(r, "max_x_m", "region"), require_number(r, "max_y_m", "region")}};
    }
    for (const auto& p : j.value("trajectory_m", json::array()))
        cfg.trajectory.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
    cfg.cell_size_m = j.value("cell_size_m", 5.0);
    if (j.contains("geo_origin")) {
        cfg.geo_origin = GeoOrigin{require_number(j["geo_origin"], "lat_deg", "geo_origin"),
                                   require_number(j["geo_origin"], "lon_deg", "geo_origin")};
    }
    cfg.output_dir = base / j.value("output_dir", std::string("out"));
    return cfg;
}

namespace {

std::vector<std::string> split_csv(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur += c;
        }
    }
    out.push_back(cur);
    return out;
}

double parse_num(const std::string& s, const std::string& ctx, int line)
{
    try {
        std::size_t pos = 0;
        double v = std::stod(s, &pos);
        while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos])))
            ++pos;
        if (pos != s.size())
            throw std::invalid_argument("trailing junk");
        return v;
    } catch (const std::exception&) {
        throw ParseError(ctx + ": malformed number '" + s + "'", line);
    }
}

} // namespace

std::vector<MeasurementSample> load_measurement_log(const std::filesystem::path& path,
                                                    const std::optional<GeoOrigin>& origin)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open measurement log: " + path.string());

    std::string header;
    if (!std::getline(in, header))
        throw EmptyInput("measurement log is empty: " + path.string());
    auto cols = split_csv(header);
    bool geographic;
    if (cols == std::vector<std::string>{"timestamp", "x_m", "y_m", "rss_dbm", "kind", "tx_power_dbm"})
        geographic = false;
    else if (cols == std::vector<std::string>{"timestamp", "lat", "lon", "rss_dbm", "kind", "tx_power_dbm"})
        geographic = true;
    else
        throw ParseError(path.string() + ": unrecognized measurement log header '" + header + "'", 1);
    if (geographic && !origin)
        throw ParseError(path.string() + ": lat/lon log requires a configured geo_origin");

    std::vector<MeasurementSample> out;
    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        auto f = split_csv(line);
        if (f.size() != 6)
            throw ParseError(path.string() + ": expected 6 fields, got " + std::to_string(f.size()),
                             lineno);
        MeasurementSample s;
        if (!f[0].empty())
            s.timestamp_s = parse_num(f[0], path.string(), lineno);
        double a = parse_num(f[1], path.string(), lineno);
        double b = parse_num(f[2], path.string(), lineno);
        Vec2 p = geographic ? project_to_local(*origin, a, b) : Vec2{a, b};
        s.position = {p.x, p.y, 0.0};
        s.rss_dbm = check_dbm(parse_num(f[3], path.string(), lineno), path.string(), lineno);
        if (f[4] == "CW")
            s.kind = SampleKind::CW;
        else if (f[4] == "SERVICE")
            s.kind = SampleKind::SERVICE;
        else
            throw ParseError(path.string() + ": kind must be CW or SERVICE, got '" + f[4] + "'",
                             lineno);
        s.source_tx_power_dbm = check_dbm(parse_num(f[5], path.string(), lineno), path.string(), lineno);
        out.push_back(s);
    }
    return out;
}

std::vector<ModuleSweepRow> load_sweep_log(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open sweep log: " + path.string());
    std::string header;
    if (!std::getline(in, header))
        throw EmptyInput("sweep log is empty: " + path.string());
    if (split_csv(header) != std::vector<std::string>{"attenuation_db", "p_spec_dbm", "p_module_dbm"})
        throw ParseError(path.string() + ": unrecognized sweep log header '" + header + "'", 1);

    std::vector<ModuleSweepRow> out;
    std::string line;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        auto f = split_csv(line);
        if (f.size() != 3)
            throw ParseError(path.string() + ": expected 3 fields, got " + std::to_string(f.size()),
                             lineno);
        ModuleSweepRow r;
        r.attenuation_db = parse_num(f[0], path.string(), lineno);
        r.p_spec_dbm = check_dbm(parse_num(f[1], path.string(), lineno), path.string(), lineno);
        r.p_module_dbm = check_dbm(parse_num(f[2], path.string(), lineno), path.string(), lineno);
        out.push_back(r);
    }
    return out;
}

PatternCut load_pattern_cut(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError("cannot open pattern cut: " + path.string());
    PatternCut cut;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ss(line);
        double a, g;
        char sep;
        if (ss >> a) {
            if (ss.peek() == ',')
                ss >> sep;
            if (!(ss >> g))
                throw ParseError(path.string() + ": malformed pattern row", lineno);
            cut.points.emplace_back(a, g);
        } else {
            throw ParseError(path.string() + ": malformed pattern row", lineno);
        }
    }
    if (cut.points.empty())
        throw EmptyInput("pattern cut has no rows: " + path.string());
    std::sort(cut.points.begin(), cut.points.end());
    return cut;
}

void save_calibration_record(const std::filesystem::path& path, const CalibrationRecord& rec)
{
    json j;
    j["format_version"] = 1;
    j["cw"] = {{"weight", rec.cw.weight},
               {"offset_db", rec.cw.offset_db},
               {"sample_count", rec.cw.sample_count}};
    if (rec.cw.per_class_offsets) {
        json pc;
        for (const auto& [cls, off] : *rec.cw.per_class_offsets)
            pc[to_string(cls)] = off;
        j["cw"]["per_class_offsets"] = pc;
    }
    if (rec.module)
        j["module"] = {{"offset_db", rec.module->offset_db}, {"rows_used", rec.module->rows_used}};
    if (rec.fitted_params)
        j["fitted_path_loss"] = path_loss_to_json(*rec.fitted_params);

    std::ofstream out(path);
    if (!out)
        throw ParseError("cannot write calibration record: " + path.string());
    out << j.dump(2) << "\n";
}

CalibrationRecord load_calibration_record(const std::filesystem::path& path)
{
    json j = read_json_file(path);
    CalibrationRecord rec;
    const auto& cw = j.at("cw");
    rec.cw.weight = cw.at("weight").get<double>();
    rec.cw.offset_db = cw.at("offset_db").get<double>();
    rec.cw.sample_count = cw.at("sample_count").get<std::size_t>();
    if (cw.contains("per_class_offsets")) {
        std::map<VisibilityClass, double> pc;
        for (const auto& [k, v] : cw["per_class_offsets"].items()) {
            VisibilityClass cls = k == "LOS" ? VisibilityClass::LOS
                                : k == "OLOS" ? VisibilityClass::OLOS
                                              : VisibilityClass::NLOS;
            pc[cls] = v.get<double>();
        }
        rec.cw.per_class_offsets = std::move(pc);
    }
    if (j.contains("module")) {
        ModuleCalibration mc;
        mc.offset_db = j["module"].at("offset_db").get<double>();
        mc.rows_used = j["module"].at("rows_used").get<std::size_t>();
        rec.module = mc;
    }
    if (j.contains("fitted_path_loss"))
        rec.fitted_params = parse_path_loss(j["fitted_path_loss"]);
    return rec;
}

std::string format_double(double v)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void export_grid_csv(const std::filesystem::path& path, const CoverageGrid& grid)
{
    std::ofstream out(path);
    if (!out)
        throw ParseError("cannot write grid export: " + path.string());
    out << "x_m,y_m,p_r_dbm,class,covered,distance_m\n";
    for (const auto& c : grid.cells) {
        out << format_double(c.x_m) << ',' << format_double(c.y_m) << ','
            << (c.p_r_dbm ? format_double(*c.p_r_dbm) : std::string()) << ','
            << to_string(c.visibility) << ',' << (c.covered ? 1 : 0) << ','
            << format_double(c.distance_m) << '\n';
    }
}

void export_grid_geojson(const std::filesystem::path& path, const CoverageGrid& grid)
{
    json features = json::array();
    const double h = grid.cell_size_m * 0.5;
    for (const auto& c : grid.cells) {
        json geom;
        geom["type"] = "Polygon";
        geom["coordinates"] = {{{c.x_m - h, c.y_m - h},
                                {c.x_m + h, c.y_m - h},
                                {c.x_m + h, c.y_m + h},
                                {c.x_m - h, c.y_m + h},
                                {c.x_m - h, c.y_m - h}}};
        json props;
        if (c.p_r_dbm)
            props["p_r_dbm"] = *c.p_r_dbm;
        else
            props["p_r_dbm"] = nullptr;
        props["class"] = to_string(c.visibility);
        props["covered"] = c.covered;
        props["distance_m"] = c.distance_m;
        features.push_back({{"type", "Feature"}, {"geometry", geom}, {"properties", props}});
    }
    json fc = {{"type", "FeatureCollection"}, {"features", features}};
    std::ofstream out(path);
    if (!out)
        throw ParseError("cannot write GeoJSON export: " + path.string());
    out << fc.dump() << "\n";
}

void export_trajectory_csv(const std::filesystem::path& path,
                           const std::vector<TrajectoryRecord>& records)
{
    std::ofstream out(path);
    if (!out)
        throw ParseError("cannot write trajectory export: " + path.string());
    out << "x_m,y_m,chainage_m,distance_to_tx_m,class,p_r_dbm,covered,"
           "pl_total_db,pl_ref_db,pl_distance_db,pl_interaction_db,pl_waveguiding_db,"
           "pl_diverse_db\n";
    for (const auto& r : records) {
        out << format_double(r.position.x) << ',' << format_double(r.position.y) << ','
            << format_double(r.chainage_m) << ',' << format_double(r.distance_to_tx_m) << ','
            << to_string(r.visibility) << ','
            << (r.p_r_dbm ? format_double(*r.p_r_dbm) : std::string()) << ','
            << (r.covered ? 1 : 0) << ',';
        if (r.breakdown) {
            const auto& b = *r.breakdown;
            out << format_double(b.total_db) << ',' << format_double(b.free_space_reference_db)
                << ',' << format_double(b.distance_term_db) << ','
                << format_double(b.interaction_term_db) << ',' << format_double(b.waveguiding_db)
                << ',' << format_double(b.diverse_losses_db);
        } else {
            out << ",,,,,";
        }
        out << '\n';
    }
}

namespace {

std::string fmt_cell(const std::map<VisibilityClass, ClassMetrics>& per_class,
                     VisibilityClass cls, double ClassMetrics::*field)
{
    auto it = per_class.find(cls);
    if (it == per_class.end())
        return "-";
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", it->second.*field);
    return buf;
}

} // namespace

std::string format_metrics_report(const FitMetrics& m)
{
    std::ostringstream out;
    char buf[32];
    out << "metric      all      LOS      OLOS     NLOS\n";
    std::snprintf(buf, sizeof(buf), "%.2f", m.overall.rmse_db);
    out << "RMSE [dB]   " << buf;
    out << "     " << fmt_cell(m.per_class, VisibilityClass::LOS, &ClassMetrics::rmse_db);
    out << "     " << fmt_cell(m.per_class, VisibilityClass::OLOS, &ClassMetrics::rmse_db);
    out << "     " << fmt_cell(m.per_class, VisibilityClass::NLOS, &ClassMetrics::rmse_db) << "\n";
    std::snprintf(buf, sizeof(buf), "%.2f", m.overall.sd_db);
    out << "SD [dB]     " << buf;
    out << "     " << fmt_cell(m.per_class, VisibilityClass::LOS, &ClassMetrics::sd_db);
    out << "     " << fmt_cell(m.per_class, VisibilityClass::OLOS, &ClassMetrics::sd_db);
    out << "     " << fmt_cell(m.per_class, VisibilityClass::NLOS, &ClassMetrics::sd_db) << "\n";
    std::snprintf(buf, sizeof(buf), "%.2f", m.overall.bias_db);
    out << "bias [dB]   " << buf;
    out << "     " << fmt_cell(m.per_class, VisibilityClass::LOS, &ClassMetrics::bias_db);
    out << "     " << fmt_cell(m.per_class, VisibilityClass::OLOS, &ClassMetrics::bias_db);
    out << "     " << fmt_cell(m.per_class, VisibilityClass::NLOS, &ClassMetrics::bias_db) << "\n";
    return out.str();
}

} // namespace rsucov
