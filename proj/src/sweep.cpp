#include "swarmphase/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <set>
#include <sstream>

#include <omp.h>

#include "swarmphase/io.hpp"

namespace swarmphase {

double init_disk_radius(const SimParams& params, const InitOptions& opts) {
    const double root_n = std::sqrt(static_cast<double>(params.n_agents));
    return std::max(params.sensor.range, 2.0 * params.body_radius * root_n) * opts.density_scale * root_n;
}

Microstate init_connected(const SimParams& params, std::uint64_t seed, const InitOptions& opts) {
    params.validate();
    if (!(opts.density_scale > 0.0)) throw UsageError("density_scale: must be > 0");
    if (opts.max_attempts < 1) throw UsageError("max_attempts: must be >= 1");

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const double radius = init_disk_radius(params, opts);
    const double min_sep = 2.0 * params.body_radius;
    const double gamma = params.sensor.range;

    Microstate state;
    state.agents.reserve(static_cast<std::size_t>(params.n_agents));
    for (int i = 0; i < params.n_agents; ++i) {
        bool placed = false;
        for (int attempt = 0; attempt < opts.max_attempts && !placed; ++attempt) {
            const double r = radius * std::sqrt(unit(rng));
            const double a = kTwoPi * unit(rng);
            const Vec2 q{r * std::cos(a), r * std::sin(a)};
            bool linked = state.agents.empty();
            bool clear = true;
            for (const auto& other : state.agents) {
                const double d = distance(q, other.position());
                if (d < min_sep) {
                    clear = false;
                    break;
                }
                if (d <= gamma) linked = true;
            }
            if (clear && linked) {
                state.agents.push_back({q.x, q.y, normalize_angle(-kPi + kTwoPi * unit(rng))});
                placed = true;
            }
        }
        if (!placed) {
            throw InfeasibleInitialization("cannot place agent " + std::to_string(i) + " of " +
                                           std::to_string(params.n_agents) + " within gamma = " +
                                           std::to_string(gamma) + " m after " +
                                           std::to_string(opts.max_attempts) + " attempts");
        }
    }
    return state;
}

SweepParam sweep_param_from_string(const std::string& name) {
    if (name == "N" || name == "n") return SweepParam::N;
    if (name == "v") return SweepParam::V;
    if (name == "omega") return SweepParam::Omega;
    if (name == "gamma") return SweepParam::Gamma;
    if (name == "phi") return SweepParam::Phi;
    throw UsageError("axes: unknown axis name '" + name + "' (expected N, v, omega, gamma or phi)");
}

std::string to_string(SweepParam p) {
    switch (p) {
        case SweepParam::N: return "N";
        case SweepParam::V: return "v";
        case SweepParam::Omega: return "omega";
        case SweepParam::Gamma: return "gamma";
        case SweepParam::Phi: return "phi";
    }
    return "?";
}

std::string unit_label(SweepParam p) {
    switch (p) {
        case SweepParam::N: return "agents";
        case SweepParam::V: return "m/s";
        case SweepParam::Omega: return "deg/s";
        case SweepParam::Gamma: return "m";
        case SweepParam::Phi: return "deg";
    }
    return "";
}

void apply_coordinate(SimParams& params, SweepParam p, double value) {
    switch (p) {
        case SweepParam::N:
            if (value != std::floor(value)) throw UsageError("N: axis values must be integers");
            params.n_agents = static_cast<int>(value);
            break;
        case SweepParam::V: params.speed = value; break;
        case SweepParam::Omega: params.turn_rate = deg_to_rad(value); break;
        case SweepParam::Gamma: params.sensor.range = value; break;
        case SweepParam::Phi: params.sensor.opening_angle = deg_to_rad(value); break;
    }
}

void ParamGrid::validate() const {
    base.validate();
    thresholds.validate();
    if (axes.empty() || axes.size() > 2) throw UsageError("axes: expected 1 or 2 axes");
    if (axes.size() == 2 && axes[0].param == axes[1].param) throw UsageError("axes: parameter names must be distinct");
    if (trials_per_point < 1) throw UsageError("trials: must be >= 1");
    if (trials_per_point >= (1 << 20)) throw UsageError("trials: must be < 2^20");
    for (const auto& a : axes) {
        if (a.values.empty()) throw UsageError("axes: axis '" + to_string(a.param) + "' has no values");
        for (std::size_t k = 0; k < a.values.size(); ++k) {
            if (k > 0 && !(a.values[k] > a.values[k - 1])) {
                throw UsageError("axes: values of '" + to_string(a.param) + "' must be strictly increasing");
            }
            SimParams p = base;
            apply_coordinate(p, a.param, a.values[k]);
            p.validate();
        }
    }
}

std::size_t ParamGrid::point_count() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.values.size();
    return n;
}

std::vector<Coordinate> ParamGrid::coordinates(std::size_t point_index) const {
    std::vector<Coordinate> out(axes.size());
    for (std::size_t k = axes.size(); k-- > 0;) {
        const std::size_t len = axes[k].values.size();
        out[k] = {axes[k].param, axes[k].values[point_index % len]};
        point_index /= len;
    }
    return out;
}

SimParams ParamGrid::params_at(std::size_t point_index) const {
    SimParams p = base;
    for (const auto& c : coordinates(point_index)) apply_coordinate(p, c.param, c.value);
    return p;
}

namespace {

std::uint64_t mix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t split_seed(std::uint64_t base_seed, std::uint64_t point_index, std::uint64_t trial_index) {
    // mix64 is a bijection, so distinct packed indices give distinct seeds.
    const std::uint64_t packed = (point_index << 20) | (trial_index & 0xFFFFFULL);
    return mix64(mix64(base_seed) ^ packed);
}

bool same_outcome(const TrialRecord& a, const TrialRecord& b) {
    auto key = [](const TrialRecord& r) {
        Json j = to_json(r);
        j.erase("wall_time");
        return j.dump();
    };
    return key(a) == key(b);
}

TrialRecord run_trial(const SimParams& params, std::uint64_t seed, const StructureSet& eta,
                      const InitOptions& init) {
    const auto t0 = std::chrono::steady_clock::now();
    TrialRecord rec;
    rec.seed = seed;
    rec.classification.behavior = eta.behavior;
    rec.classification.thresholds = eta;
    rec.classification.sustained = 0.0;
    try {
        const Microstate start = init_connected(params, seed, init);
        const Trajectory traj = run(params, seed, start);
        rec.classification = classify_trajectory(traj, eta);
    } catch (const InfeasibleInitialization& e) {
        rec.failed = true;
        rec.error = std::string("infeasible initialization: ") + e.what();
    } catch (const SimulationDiverged& e) {
        rec.failed = true;
        rec.error = e.what();
    }
    if (rec.failed) {
        const double inf = std::numeric_limits<double>::infinity();
        rec.classification.value = 0;
        rec.classification.markers = MarkerVector{0.0, 0.0, inf, inf, inf, 0};
    }
    rec.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return rec;
}

std::vector<TrialRecord> run_point(const SimParams& params, int trials, std::uint64_t base_seed,
                                   std::size_t point_index, const StructureSet& eta, const InitOptions& init) {
    params.validate();
    if (trials < 1) throw UsageError("trials: must be >= 1");
    std::vector<TrialRecord> out;
    out.reserve(static_cast<std::size_t>(trials));
    for (int t = 0; t < trials; ++t) {
        const auto k = static_cast<std::size_t>(t);
        TrialRecord r = run_trial(params, split_seed(base_seed, point_index, k), eta, init);
        r.point_index = point_index;
        r.trial_index = k;
        out.push_back(std::move(r));
    }
    return out;
}

namespace {

TrialRecord execute(const ParamGrid& grid, const WorkUnit& u) {
    TrialRecord r = run_trial(grid.params_at(u.point_index), split_seed(grid.base_seed, u.point_index, u.trial_index),
                              grid.thresholds, grid.init);
    r.point_index = u.point_index;
    r.trial_index = u.trial_index;
    r.coords = grid.coordinates(u.point_index);
    return r;
}

}  // namespace

std::vector<TrialRecord> run_units_serial(const ParamGrid& grid, std::span<const WorkUnit> units,
                                          const RecordSink& sink) {
    std::vector<TrialRecord> out;
    out.reserve(units.size());
    for (const WorkUnit& u : units) {
        out.push_back(execute(grid, u));
        if (sink) sink(out.back());
    }
    return out;
}

std::vector<TrialRecord> run_units_parallel(const ParamGrid& grid, std::span<const WorkUnit> units,
                                            int workers, const RecordSink& sink) {
    std::vector<TrialRecord> out(units.size());
    std::mutex sink_mutex;
    std::exception_ptr failure;
    std::atomic<bool> abort{false};
    const int threads = workers > 0 ? workers : omp_get_max_threads();
    const auto count = static_cast<std::ptrdiff_t>(units.size());

#pragma omp parallel for schedule(dynamic, 1) num_threads(threads)
    for (std::ptrdiff_t k = 0; k < count; ++k) {
        if (abort.load(std::memory_order_relaxed)) continue;
        try {
            out[static_cast<std::size_t>(k)] = execute(grid, units[static_cast<std::size_t>(k)]);
            if (sink) {
                std::lock_guard<std::mutex> lock(sink_mutex);
                sink(out[static_cast<std::size_t>(k)]);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(sink_mutex);
            if (!failure) failure = std::current_exception();
            abort.store(true);
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

std::vector<PhaseCell> aggregate_cells(const ParamGrid& grid, std::span<const TrialRecord> records) {
    std::vector<PhaseCell> cells(grid.point_count());
    std::vector<int> finite_counts(cells.size(), 0);
    for (std::size_t p = 0; p < cells.size(); ++p) {
        cells[p].point_index = p;
        cells[p].coords = grid.coordinates(p);
    }
    for (const auto& r : records) {
        if (r.point_index >= cells.size()) throw UsageError("record point index outside the grid");
        PhaseCell& c = cells[r.point_index];
        ++c.trials;
        c.successes += r.classification.value;
        if (r.failed) {
            ++c.failures;
            continue;
        }
        ++finite_counts[r.point_index];
        c.mean_avg_speed += r.classification.markers.avg_speed;
        c.mean_circliness += r.classification.markers.circliness;
        c.mean_nn_variance += r.classification.markers.nn_variance;
    }
    for (std::size_t p = 0; p < cells.size(); ++p) {
        const int n = finite_counts[p];
        if (n == 0) {
            const double inf = std::numeric_limits<double>::infinity();
            cells[p].mean_avg_speed = 0.0;
            cells[p].mean_circliness = inf;
            cells[p].mean_nn_variance = inf;
            continue;
        }
        cells[p].mean_avg_speed /= n;
        cells[p].mean_circliness /= n;
        cells[p].mean_nn_variance /= n;
    }
    return cells;
}

namespace {

Json trial_header(const ParamGrid& grid) { return Json{{"type", "header"}, {"grid", to_json(grid)}}; }

// Reads records persisted by an earlier (possibly interrupted) run of the
// same grid. A torn final line is dropped.
std::map<std::pair<std::size_t, std::size_t>, TrialRecord> load_existing(const std::filesystem::path& path,
                                                                         const ParamGrid& grid) {
    std::map<std::pair<std::size_t, std::size_t>, TrialRecord> done;
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    std::vector<std::string> lines;
    for (std::string line; std::getline(in, line);) {
        if (!line.empty()) lines.push_back(line);
    }
    if (lines.empty()) return done;
    Json header;
    try {
        header = Json::parse(lines.front());
    } catch (const Json::parse_error&) {
        throw ParseError(path.string() + ": unreadable header", 1);
    }
    if (header != trial_header(grid)) {
        throw UsageError(path.string() + ": trial file was written for a different grid config");
    }
    for (std::size_t k = 1; k < lines.size(); ++k) {
        TrialRecord r;
        try {
            r = trial_from_json(Json::parse(lines[k]));
        } catch (const std::exception&) {
            if (k + 1 == lines.size()) break;
            throw ParseError(path.string() + ": malformed trial record", k + 1);
        }
        if (r.point_index < grid.point_count() && r.trial_index < static_cast<std::size_t>(grid.trials_per_point)) {
            done.emplace(std::make_pair(r.point_index, r.trial_index), std::move(r));
        }
    }
    return done;
}

std::string render_trials(const ParamGrid& grid, std::span<const TrialRecord> records) {
    std::ostringstream out;
    out << trial_header(grid).dump() << '\n';
    for (const auto& r : records) out << to_json(r).dump() << '\n';
    return out.str();
}

}  // namespace

GridResult run_grid(const ParamGrid& grid, const GridRunOptions& opts) {
    grid.validate();

    std::map<std::pair<std::size_t, std::size_t>, TrialRecord> done;
    if (opts.trials_path && std::filesystem::exists(*opts.trials_path)) {
        done = load_existing(*opts.trials_path, grid);
    }

    std::vector<WorkUnit> pending;
    for (std::size_t p = 0; p < grid.point_count(); ++p) {
        for (std::size_t t = 0; t < static_cast<std::size_t>(grid.trials_per_point); ++t) {
            if (!done.count({p, t})) pending.push_back({p, t});
        }
    }

    std::vector<TrialRecord> fresh;
    if (!pending.empty()) {
        std::ofstream sink_stream;
        RecordSink sink;
        if (opts.trials_path) {
            // Rewrite the surviving records first so a torn line never sits mid-file.
            std::vector<TrialRecord> kept;
            for (auto& [_, r] : done) kept.push_back(r);
            write_file_atomic(*opts.trials_path, render_trials(grid, kept));
            sink_stream.open(*opts.trials_path, std::ios::app);
            if (!sink_stream) throw IoError("cannot append to " + opts.trials_path->string());
            sink = [&](const TrialRecord& r) {
                sink_stream << to_json(r).dump() << '\n';
                sink_stream.flush();
                if (!sink_stream) throw IoError("write failed for " + opts.trials_path->string());
            };
        }
        fresh = opts.workers == 1 ? run_units_serial(grid, pending, sink)
                                  : run_units_parallel(grid, pending, opts.workers, sink);
    }

    GridResult result;
    result.executed = fresh.size();
    for (auto& r : fresh) done.emplace(std::make_pair(r.point_index, r.trial_index), std::move(r));
    result.records.reserve(done.size());
    for (auto& [_, r] : done) result.records.push_back(std::move(r));
    result.cells = aggregate_cells(grid, result.records);

    if (opts.trials_path) write_file_atomic(*opts.trials_path, render_trials(grid, result.records));
    return result;
}

}  // namespace swarmphase
