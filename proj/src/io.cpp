#include "swarmphase/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

namespace swarmphase {

ParseError::ParseError(const std::string& what, std::size_t line)
    : UsageError(line == 0 ? what : "line " + std::to_string(line) + ": " + what), line_(line) {}

namespace {

// JSON has no infinity; the degenerate-marker sentinel travels as null.
Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

double get_num(const Json& j) {
    if (j.is_null()) return std::numeric_limits<double>::infinity();
    if (!j.is_number()) throw ParseError("expected a number, got " + j.dump());
    return j.get<double>();
}

template <typename T>
T get_as(const Json& j, const std::string& key) {
    try {
        return j.at(key).get<T>();
    } catch (const Json::exception&) {
        throw ParseError(key + ": missing or wrong type");
    }
}

double get_double(const Json& j, const std::string& key) {
    if (!j.contains(key)) throw ParseError(key + ": missing");
    try {
        return get_num(j.at(key));
    } catch (const ParseError&) {
        throw ParseError(key + ": expected a number");
    }
}

void check_keys(const Json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ParseError(where + ": expected a JSON object");
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, _] : j.items()) {
        if (!ok.count(key)) throw UsageError(key + ": unknown key in " + where);
    }
}

std::string read_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Json parse_json_file(const std::filesystem::path& path) {
    const std::string text = read_text(path);
    try {
        return Json::parse(text);
    } catch (const Json::parse_error& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
}

}  // namespace

Json to_json(const SimParams& p) {
    return Json{{"n", p.n_agents},
                {"v", p.speed},
                {"omega_deg", rad_to_deg(p.turn_rate)},
                {"gamma", p.sensor.range},
                {"phi_deg", rad_to_deg(p.sensor.opening_angle)},
                {"controller", to_string(p.controller)},
                {"body_radius", p.body_radius},
                {"dt", p.dt},
                {"horizon", p.horizon},
                {"window", p.eval_window},
                {"record_interval", p.record_interval}};
}

SimParams params_from_json(const Json& j, SimParams p) {
    check_keys(j,
               {"n", "v", "omega_deg", "gamma", "phi_deg", "controller", "body_radius", "dt",
                "horizon", "window", "record_interval"},
               "params");
    if (j.contains("n")) {
        const Json& n = j.at("n");
        if (!n.is_number_integer()) throw UsageError("n: expected an integer");
        p.n_agents = n.get<int>();
    }
    if (j.contains("v")) p.speed = get_double(j, "v");
    if (j.contains("omega_deg")) p.turn_rate = deg_to_rad(get_double(j, "omega_deg"));
    if (j.contains("gamma")) p.sensor.range = get_double(j, "gamma");
    if (j.contains("phi_deg")) p.sensor.opening_angle = deg_to_rad(get_double(j, "phi_deg"));
    if (j.contains("controller")) p.controller = controller_from_string(get_as<std::string>(j, "controller"));
    if (j.contains("body_radius")) p.body_radius = get_double(j, "body_radius");
    if (j.contains("dt")) p.dt = get_double(j, "dt");
    if (j.contains("horizon")) p.horizon = get_double(j, "horizon");
    if (j.contains("window")) p.eval_window = get_double(j, "window");
    if (j.contains("record_interval")) p.record_interval = get_double(j, "record_interval");
    return p;
}

Json to_json(const StructureSet& s) {
    return Json{{"behavior", to_string(s.behavior)},
                {"circliness_max", s.circliness_max},
                {"speed_tol", s.speed_rel_tol},
                {"nn_variance_max", s.nn_variance_max},
                {"sustained_fraction", s.sustained_fraction}};
}

StructureSet thresholds_from_json(const Json& j, StructureSet s) {
    check_keys(j, {"behavior", "circliness_max", "speed_tol", "nn_variance_max", "sustained_fraction"},
               "thresholds");
    if (j.contains("behavior")) s.behavior = behavior_from_string(get_as<std::string>(j, "behavior"));
    if (j.contains("circliness_max")) s.circliness_max = get_double(j, "circliness_max");
    if (j.contains("speed_tol")) s.speed_rel_tol = get_double(j, "speed_tol");
    if (j.contains("nn_variance_max")) s.nn_variance_max = get_double(j, "nn_variance_max");
    if (j.contains("sustained_fraction")) s.sustained_fraction = get_double(j, "sustained_fraction");
    return s;
}

Json to_json(const MarkerVector& m) {
    return Json{{"v_bar", num(m.avg_speed)}, {"c_bar", num(m.circliness)}, {"delta_bar", num(m.nn_variance)}};
}

Json to_json(const Classification& c) {
    return Json{{"behavior", to_string(c.behavior)},
                {"value", c.value},
                {"markers", to_json(c.markers)},
                {"window", Json::array({c.markers.t_start, c.markers.t_end})},
                {"frames", c.markers.frames},
                {"sustained", c.sustained},
                {"thresholds", to_json(c.thresholds)}};
}

Classification classification_from_json(const Json& j) {
    Classification c;
    c.behavior = behavior_from_string(get_as<std::string>(j, "behavior"));
    c.value = get_as<int>(j, "value");
    const Json& m = j.at("markers");
    c.markers.avg_speed = get_double(m, "v_bar");
    c.markers.circliness = get_double(m, "c_bar");
    c.markers.nn_variance = get_double(m, "delta_bar");
    const Json& w = j.at("window");
    c.markers.t_start = get_num(w.at(0));
    c.markers.t_end = get_num(w.at(1));
    c.markers.frames = j.value("frames", std::size_t{0});
    c.sustained = j.contains("sustained") ? get_double(j, "sustained") : 1.0;
    c.thresholds = thresholds_from_json(j.at("thresholds"), StructureSet::for_behavior(c.behavior));
    return c;
}

Json to_json(const ParamGrid& g) {
    Json axes = Json::array();
    for (const auto& a : g.axes) axes.push_back({{"name", to_string(a.param)}, {"values", a.values}});
    return Json{{"base_params", to_json(g.base)},
                {"axes", axes},
                {"trials", g.trials_per_point},
                {"base_seed", g.base_seed},
                {"thresholds", to_json(g.thresholds)},
                {"init", {{"density_scale", g.init.density_scale}, {"max_attempts", g.init.max_attempts}}}};
}

ParamGrid grid_from_json(const Json& j) {
    check_keys(j, {"base_params", "axes", "trials", "base_seed", "thresholds", "init"}, "grid config");
    ParamGrid g;
    if (j.contains("base_params")) g.base = params_from_json(j.at("base_params"));
    g.thresholds = StructureSet::for_behavior(behavior_for(g.base.controller));
    if (j.contains("thresholds")) g.thresholds = thresholds_from_json(j.at("thresholds"), g.thresholds);
    if (j.contains("trials")) {
        if (!j.at("trials").is_number_integer()) throw UsageError("trials: expected an integer");
        g.trials_per_point = j.at("trials").get<int>();
    }
    if (j.contains("base_seed")) {
        if (!j.at("base_seed").is_number_unsigned()) throw UsageError("base_seed: expected an unsigned integer");
        g.base_seed = j.at("base_seed").get<std::uint64_t>();
    }
    if (j.contains("init")) {
        const Json& in = j.at("init");
        check_keys(in, {"density_scale", "max_attempts"}, "init");
        if (in.contains("density_scale")) g.init.density_scale = get_double(in, "density_scale");
        if (in.contains("max_attempts")) g.init.max_attempts = get_as<int>(in, "max_attempts");
    }
    if (!j.contains("axes") || !j.at("axes").is_array()) throw UsageError("axes: expected an array");
    for (const Json& a : j.at("axes")) {
        check_keys(a, {"name", "values", "min", "max", "steps"}, "axes entry");
        Axis axis;
        axis.param = sweep_param_from_string(get_as<std::string>(a, "name"));
        if (a.contains("values")) {
            if (a.contains("min") || a.contains("max") || a.contains("steps")) {
                throw UsageError("axes: give either values or min/max/steps, not both");
            }
            for (const Json& v : a.at("values")) axis.values.push_back(get_num(v));
        } else {
            const double lo = get_double(a, "min");
            const double hi = get_double(a, "max");
            const int steps = get_as<int>(a, "steps");
            if (steps < 1) throw UsageError("steps: must be >= 1");
            if (steps == 1) {
                axis.values.push_back(lo);
            } else {
                for (int k = 0; k < steps; ++k) axis.values.push_back(lo + (hi - lo) * k / (steps - 1));
            }
        }
        g.axes.push_back(std::move(axis));
    }
    g.validate();
    return g;
}

ParamGrid read_grid_config(const std::filesystem::path& path) { return grid_from_json(parse_json_file(path)); }

namespace {

Json coords_json(const std::vector<Coordinate>& coords) {
    Json out = Json::object();
    for (const auto& c : coords) out[to_string(c.param)] = c.value;
    return out;
}

Json coords_list(const std::vector<Coordinate>& coords) {
    Json out = Json::array();
    for (const auto& c : coords) out.push_back(Json::array({to_string(c.param), c.value}));
    return out;
}

std::vector<Coordinate> coords_from_list(const Json& j) {
    std::vector<Coordinate> out;
    for (const Json& e : j) out.push_back({sweep_param_from_string(e.at(0).get<std::string>()), get_num(e.at(1))});
    return out;
}

}  // namespace

Json to_json(const TrialRecord& r) {
    return Json{{"point", r.point_index},
                {"coords", coords_list(r.coords)},
                {"trial", r.trial_index},
                {"seed", r.seed},
                {"classification", to_json(r.classification)},
                {"failed", r.failed},
                {"error", r.error},
                {"wall_time", r.wall_time}};
}

TrialRecord trial_from_json(const Json& j) {
    TrialRecord r;
    r.point_index = get_as<std::size_t>(j, "point");
    r.coords = coords_from_list(j.at("coords"));
    r.trial_index = get_as<std::size_t>(j, "trial");
    r.seed = get_as<std::uint64_t>(j, "seed");
    r.classification = classification_from_json(j.at("classification"));
    r.failed = get_as<bool>(j, "failed");
    r.error = get_as<std::string>(j, "error");
    r.wall_time = get_double(j, "wall_time");
    return r;
}

Json to_json(const PhaseCell& c) {
    return Json{{"point", c.point_index},
                {"coords", coords_list(c.coords)},
                {"coords_by_name", coords_json(c.coords)},
                {"trials", c.trials},
                {"successes", c.successes},
                {"failures", c.failures},
                {"fraction", c.success_fraction()},
                {"mean_markers",
                 {{"v_bar", num(c.mean_avg_speed)},
                  {"c_bar", num(c.mean_circliness)},
                  {"delta_bar", num(c.mean_nn_variance)}}}};
}

PhaseCell cell_from_json(const Json& j) {
    PhaseCell c;
    c.point_index = get_as<std::size_t>(j, "point");
    c.coords = coords_from_list(j.at("coords"));
    c.trials = get_as<int>(j, "trials");
    c.successes = get_as<int>(j, "successes");
    c.failures = j.value("failures", 0);
    if (j.contains("mean_markers")) {
        const Json& m = j.at("mean_markers");
        c.mean_avg_speed = get_double(m, "v_bar");
        c.mean_circliness = get_double(m, "c_bar");
        c.mean_nn_variance = get_double(m, "delta_bar");
    }
    if (c.trials < 1 || c.successes < 0 || c.successes > c.trials) {
        throw ParseError("cell " + std::to_string(c.point_index) + ": inconsistent trial counts");
    }
    return c;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& contents) {
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp.string());
        out << contents;
        out.flush();
        if (!out) throw IoError("write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " + ec.message());
}

void write_trajectory(const std::filesystem::path& path, const Trajectory& traj, const Json& provenance) {
    std::ostringstream out;
    Json header{{"type", "header"}, {"params", to_json(traj.params)}, {"seed", traj.seed}};
    if (!provenance.is_null()) header["config"] = provenance;
    out << header.dump() << '\n';
    for (const auto& f : traj.frames) {
        Json agents = Json::array();
        for (const auto& a : f.agents) agents.push_back(Json::array({a.x, a.y, a.theta}));
        out << Json{{"t", f.time}, {"agents", agents}}.dump() << '\n';
    }
    write_file_atomic(path, out.str());
}

TrajectoryFile read_trajectory(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    TrajectoryFile file;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        Json j;
        try {
            j = Json::parse(line);
        } catch (const Json::parse_error& e) {
            throw ParseError(std::string("invalid JSON: ") + e.what(), lineno);
        }
        if (!j.is_object()) throw ParseError("expected a JSON object", lineno);
        try {
            if (j.value("type", "") == "header") {
                if (!file.frames.empty()) throw ParseError("header after frames", lineno);
                if (j.contains("params")) file.params = params_from_json(j.at("params"));
                if (j.contains("seed")) file.seed = j.at("seed").get<std::uint64_t>();
                continue;
            }
            Microstate f;
            f.time = get_double(j, "t");
            const Json& agents = j.at("agents");
            if (!agents.is_array() || agents.empty()) throw ParseError("agents: expected a non-empty array");
            for (const Json& a : agents) {
                if (!a.is_array() || a.size() != 3) throw ParseError("agent entry must be [x, y, theta]");
                const double x = a.at(0).get<double>();
                const double y = a.at(1).get<double>();
                const double th = a.at(2).get<double>();
                if (!std::isfinite(x) || !std::isfinite(y) || !std::isfinite(th)) {
                    throw ParseError("non-finite agent state");
                }
                f.agents.push_back({x, y, normalize_angle(th)});
            }
            if (!file.frames.empty()) {
                if (f.size() != file.frames.front().size()) throw ParseError("agent count changed between frames");
                if (!(f.time > file.frames.back().time)) throw ParseError("frame times must increase");
            }
            file.frames.push_back(std::move(f));
        } catch (const ParseError& e) {
            if (e.line() != 0) throw;
            throw ParseError(e.what(), lineno);
        } catch (const UsageError& e) {
            throw ParseError(e.what(), lineno);
        } catch (const Json::exception& e) {
            throw ParseError(e.what(), lineno);
        }
    }
    if (file.frames.empty()) throw ParseError(path.string() + ": no frames");
    return file;
}

void write_marker_csv(const std::filesystem::path& path, std::span<const MarkerSample> samples) {
    // Shortest round-trip formatting; inf prints as "inf".
    auto put = [](std::string& out, double v, char end) {
        char buf[32];
        const auto res = std::to_chars(buf, buf + sizeof buf, v);
        out.append(buf, res.ptr);
        out += end;
    };
    std::string out = "t,avg_speed,circliness,nn_variance\n";
    for (const auto& s : samples) {
        put(out, s.time, ',');
        put(out, s.avg_speed, ',');
        put(out, s.circliness, ',');
        put(out, s.nn_variance, '\n');
    }
    write_file_atomic(path, out);
}

void write_cells(const std::filesystem::path& path, const ParamGrid& grid, std::span<const PhaseCell> cells) {
    Json axes = Json::array();
    for (const auto& a : grid.axes) {
        axes.push_back({{"name", to_string(a.param)}, {"unit", unit_label(a.param)}, {"values", a.values}});
    }
    Json list = Json::array();
    for (const auto& c : cells) list.push_back(to_json(c));
    Json doc{{"config", to_json(grid)},
             {"behavior", to_string(grid.thresholds.behavior)},
             {"axes", axes},
             {"cells", list}};
    write_file_atomic(path, doc.dump(1) + "\n");
}

CellsFile read_cells(const std::filesystem::path& path) {
    const Json doc = parse_json_file(path);
    CellsFile out;
    try {
        out.grid = grid_from_json(doc.at("config"));
        for (const Json& c : doc.at("cells")) out.cells.push_back(cell_from_json(c));
    } catch (const Json::exception& e) {
        throw ParseError(path.string() + ": " + e.what());
    }
    if (out.cells.size() != out.grid.point_count()) {
        throw ParseError(path.string() + ": cell count does not match the grid axes");
    }
    return out;
}

}  // namespace swarmphase
