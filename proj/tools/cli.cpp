#include "cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "swarmphase/dynamics.hpp"
#include "swarmphase/io.hpp"
#include "swarmphase/macrostate.hpp"
#include "swarmphase/markers.hpp"
#include "swarmphase/phasediag.hpp"
#include "swarmphase/sweep.hpp"

namespace swarmphase::cli {
namespace fs = std::filesystem;

namespace {

// Flag values; only those given on the command line override the config file.
struct Flags {
    std::string config;
    std::string controller;
    int n = 0;
    double v = 0, omega_deg = 0, gamma = 0, phi_deg = 0, body_radius = 0, dt = 0, horizon = 0, window = 0,
           record_interval = 0;
    double circliness_max = 0, speed_tol = 0, nn_variance_max = 0, sustained_fraction = 0, density_scale = 0;
    std::uint64_t seed = 0;
    int workers = 0;
    std::string out;
    std::string behavior;
    std::string trajectory_in;
    std::string grid_path;
    std::string cells_path;
    std::string svg;
    std::string csv;
    std::string palette;
};

Json load_config(const std::string& path) {
    if (path.empty()) return Json::object();
    std::ifstream in(path);
    if (!in) throw IoError("config: cannot open " + path);
    try {
        Json j = Json::parse(in);
        if (!j.is_object()) throw UsageError("config: top level must be an object");
        return j;
    } catch (const Json::parse_error& e) {
        throw ParseError("config: " + std::string(e.what()));
    }
}

// Copies every explicitly given flag into the config object.
void overlay_flags(Json& cfg, const CLI::App& app, const Flags& f) {
    auto given = [&](const char* name) {
        const CLI::Option* opt = app.get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    Json& p = cfg["params"];
    if (p.is_null()) p = Json::object();
    if (given("--controller")) p["controller"] = f.controller;
    if (given("--n")) p["n"] = f.n;
    if (given("--v")) p["v"] = f.v;
    if (given("--omega-deg")) p["omega_deg"] = f.omega_deg;
    if (given("--gamma")) p["gamma"] = f.gamma;
    if (given("--phi-deg")) p["phi_deg"] = f.phi_deg;
    if (given("--body-radius")) p["body_radius"] = f.body_radius;
    if (given("--dt")) p["dt"] = f.dt;
    if (given("--horizon")) p["horizon"] = f.horizon;
    if (given("--window")) p["window"] = f.window;
    if (given("--record-interval")) p["record_interval"] = f.record_interval;

    Json& t = cfg["thresholds"];
    if (t.is_null()) t = Json::object();
    if (given("--behavior")) t["behavior"] = f.behavior;
    if (given("--circliness-max")) t["circliness_max"] = f.circliness_max;
    if (given("--speed-tol")) t["speed_tol"] = f.speed_tol;
    if (given("--nn-variance-max")) t["nn_variance_max"] = f.nn_variance_max;
    if (given("--sustained-fraction")) t["sustained_fraction"] = f.sustained_fraction;

    if (given("--density-scale")) cfg["init"]["density_scale"] = f.density_scale;
    if (given("--seed")) cfg["seed"] = f.seed;
    if (given("--workers")) cfg["workers"] = f.workers;
    if (given("--out")) cfg["out"] = f.out;
}

void check_top_keys(const Json& cfg, std::initializer_list<const char*> allowed) {
    for (const auto& [key, _] : cfg.items()) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || key == a;
        if (!ok) throw UsageError(key + ": unknown config key");
    }
}

int resolve_workers(const Json& cfg, bool flag_given) {
    if (flag_given) return cfg.at("workers").get<int>();
    if (const char* env = std::getenv("SWARMPHASE_WORKERS"); env && *env) {
        try {
            return std::stoi(env);
        } catch (const std::exception&) {
            throw UsageError("SWARMPHASE_WORKERS: expected an integer, got '" + std::string(env) + "'");
        }
    }
    if (cfg.contains("workers")) return cfg.at("workers").get<int>();
    return 0;
}

int exit_for(const Classification& c) { return c.value == 1 ? kExitObserved : kExitAbsent; }

void add_param_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--controller", f.controller, "milling | diffusion");
    cmd->add_option("--n", f.n, "number of agents");
    cmd->add_option("--v", f.v, "speed (m/s)");
    cmd->add_option("--omega-deg", f.omega_deg, "turning rate (deg/s)");
    cmd->add_option("--gamma", f.gamma, "sensor range (m)");
    cmd->add_option("--phi-deg", f.phi_deg, "sensor opening angle (deg)");
    cmd->add_option("--body-radius", f.body_radius, "agent body radius (m), 0 = point agents");
    cmd->add_option("--dt", f.dt, "integration step (s)");
    cmd->add_option("--horizon", f.horizon, "simulated time T (s)");
    cmd->add_option("--window", f.window, "evaluation window W at the end of the run (s)");
    cmd->add_option("--record-interval", f.record_interval, "time between recorded frames (s)");
}

void add_threshold_flags(CLI::App* cmd, Flags& f) {
    cmd->add_option("--behavior", f.behavior, "milling | diffusion");
    cmd->add_option("--circliness-max", f.circliness_max, "milling: circliness bound");
    cmd->add_option("--speed-tol", f.speed_tol, "milling: relative speed band");
    cmd->add_option("--nn-variance-max", f.nn_variance_max, "diffusion: nearest-neighbor variance bound");
    cmd->add_option("--sustained-fraction", f.sustained_fraction, "fraction of window frames that must comply");
}

int cmd_simulate(const CLI::App& app, const Flags& f, std::ostream& out) {
    Json cfg = load_config(f.config);
    overlay_flags(cfg, app, f);
    check_top_keys(cfg, {"params", "thresholds", "init", "seed", "workers", "out"});

    const SimParams params = params_from_json(cfg.at("params"));
    params.validate();
    StructureSet eta = thresholds_from_json(cfg.at("thresholds"), StructureSet::for_behavior(behavior_for(params.controller)));
    eta.validate();
    InitOptions init;
    if (cfg.contains("init")) {
        const Json& in = cfg.at("init");
        if (in.contains("density_scale")) init.density_scale = in.at("density_scale").get<double>();
        if (in.contains("max_attempts")) init.max_attempts = in.at("max_attempts").get<int>();
    }
    const std::uint64_t seed = cfg.value("seed", std::uint64_t{0});
    const fs::path dir = cfg.value("out", std::string("."));
    fs::create_directories(dir);

    Json effective = cfg;
    effective["params"] = to_json(params);
    effective["thresholds"] = to_json(eta);
    effective["seed"] = seed;
    effective["init"] = {{"density_scale", init.density_scale}, {"max_attempts", init.max_attempts}};

    const Trajectory traj = run(params, seed, init_connected(params, seed, init));
    write_trajectory(dir / "trajectory.jsonl", traj, effective);
    const auto samples = marker_series(traj.frames);
    write_marker_csv(dir / "markers.csv", samples);

    const Classification c = classify_trajectory(traj, eta);
    out << to_json(c).dump(2) << '\n';
    return exit_for(c);
}

int cmd_classify(const CLI::App& app, const Flags& f, std::ostream& out) {
    const TrajectoryFile file = read_trajectory(f.trajectory_in);

    Json cfg = load_config(f.config);
    if (file.params && !cfg.contains("params")) cfg["params"] = to_json(*file.params);
    overlay_flags(cfg, app, f);
    check_top_keys(cfg, {"params", "thresholds", "init", "seed", "workers", "out"});

    const SimParams params = params_from_json(cfg.at("params"));
    Behavior behavior = behavior_for(params.controller);
    if (cfg.at("thresholds").contains("behavior")) {
        behavior = behavior_from_string(cfg.at("thresholds").at("behavior").get<std::string>());
    }
    const StructureSet eta = thresholds_from_json(cfg.at("thresholds"), StructureSet::for_behavior(behavior));
    if (behavior == Behavior::Milling && !cfg.at("params").contains("v")) {
        throw UsageError("v: set speed is required to classify milling (no header in trajectory)");
    }
    const Classification c = classify_frames(file.frames, eta, params.speed, params.eval_window);
    out << to_json(c).dump(2) << '\n';
    return exit_for(c);
}

int cmd_sweep(const CLI::App& app, const Flags& f, std::ostream& out) {
    ParamGrid grid = read_grid_config(f.grid_path);
    if (app.count("--seed")) grid.base_seed = f.seed;
    Json cfg = load_config(f.config);
    check_top_keys(cfg, {"workers", "out"});
    if (app.count("--workers")) cfg["workers"] = f.workers;
    if (app.count("--out")) cfg["out"] = f.out;
    const int workers = resolve_workers(cfg, app.count("--workers") > 0);
    if (workers < 0) throw UsageError("workers: must be >= 0");
    const fs::path dir = cfg.value("out", std::string("."));
    fs::create_directories(dir);

    GridRunOptions opts;
    opts.workers = workers;
    opts.trials_path = dir / "trials.jsonl";
    const GridResult result = run_grid(grid, opts);
    write_cells(dir / "cells.json", grid, result.cells);

    int successes = 0;
    for (const auto& c : result.cells) successes += c.successes;
    out << Json{{"points", result.cells.size()},
                {"trials", result.records.size()},
                {"executed", result.executed},
                {"successes", successes},
                {"trials_file", (dir / "trials.jsonl").string()},
                {"cells_file", (dir / "cells.json").string()}}
               .dump(2)
        << '\n';
    return 0;
}

int cmd_render(const CLI::App& app, const Flags& f, std::ostream& out) {
    const CellsFile cells = read_cells(f.cells_path);
    if (cells.grid.axes.size() != 2) {
        throw UsageError("cells: rendering needs exactly 2 axes; this sweep has " +
                         std::to_string(cells.grid.axes.size()) +
                         " (the per-trial JSONL and cells JSON already hold the 1-axis results)");
    }
    const ColorRule palette = app.count("--palette") ? ColorRule::from_name(f.palette)
                                                     : ColorRule::for_behavior(cells.grid.thresholds.behavior);
    const PhaseDiagram d = make_diagram(cells.grid, cells.cells, palette);
    const fs::path stem = fs::path(f.cells_path).replace_extension();
    const fs::path svg = f.svg.empty() ? fs::path(stem.string() + ".svg") : fs::path(f.svg);
    const fs::path csv = f.csv.empty() ? fs::path(stem.string() + ".csv") : fs::path(f.csv);
    render(d, svg);
    export_matrix(d, csv);
    out << Json{{"svg", svg.string()}, {"csv", csv.string()}}.dump(2) << '\n';
    return 0;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"swarmphase: swarm macrostate simulator and phase-diagram sweeps"};
    app.require_subcommand(1);
    Flags f;

    auto* simulate = app.add_subcommand("simulate", "run one simulation and classify it");
    simulate->add_option("--config", f.config, "JSON config file");
    add_param_flags(simulate, f);
    add_threshold_flags(simulate, f);
    simulate->add_option("--density-scale", f.density_scale, "initial disk density factor");
    simulate->add_option("--seed", f.seed, "random seed");
    simulate->add_option("--workers", f.workers, "unused; accepted for uniformity");
    simulate->add_option("--out", f.out, "output directory");

    auto* classify = app.add_subcommand("classify", "classify a recorded trajectory without simulating");
    classify->add_option("trajectory", f.trajectory_in, "trajectory JSONL")->required();
    classify->add_option("--config", f.config, "JSON config file");
    add_param_flags(classify, f);
    add_threshold_flags(classify, f);

    auto* sweep = app.add_subcommand("sweep", "run a grid sweep (resumable)");
    sweep->add_option("grid", f.grid_path, "grid config JSON")->required();
    sweep->add_option("--config", f.config, "JSON file with workers/out");
    sweep->add_option("--seed", f.seed, "override base_seed");
    sweep->add_option("--workers", f.workers, "worker threads (0 = all cores)");
    sweep->add_option("--out", f.out, "output directory");

    auto* render_cmd = app.add_subcommand("render", "render cells JSON to SVG and CSV");
    render_cmd->add_option("cells", f.cells_path, "cells JSON from sweep")->required();
    render_cmd->add_option("--svg", f.svg, "SVG output path");
    render_cmd->add_option("--csv", f.csv, "CSV output path");
    render_cmd->add_option("--palette", f.palette, "green-red | green-orange | blue-red");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }

    try {
        if (*simulate) return cmd_simulate(*simulate, f, out);
        if (*classify) return cmd_classify(*classify, f, out);
        if (*sweep) return cmd_sweep(*sweep, f, out);
        return cmd_render(*render_cmd, f, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitError;
    }
}

}  // namespace swarmphase::cli
