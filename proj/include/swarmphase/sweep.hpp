#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "swarmphase/core.hpp"
#include "swarmphase/dynamics.hpp"
#include "swarmphase/macrostate.hpp"

namespace swarmphase {

class InfeasibleInitialization : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct InitOptions {
    /// Disk radius R0 = max(gamma, 2 * body_radius * sqrt(N)) * density_scale * sqrt(N).
    double density_scale = 0.75;
    /// Rejected candidate positions allowed per agent before giving up.
    int max_attempts = 1000;
};

double init_disk_radius(const SimParams& params, const InitOptions& opts = {});

/// Random initial microstate whose gamma-disk graph is connected and whose
/// bodies do not overlap. Agents are placed one at a time, uniformly in the
/// disk of radius init_disk_radius(); a candidate is rejected unless it lies
/// within gamma of an already placed agent and clears every body. Headings
/// are uniform in [-pi, pi). Deterministic in seed.
Microstate init_connected(const SimParams& params, std::uint64_t seed, const InitOptions& opts = {});

/// Sweepable parameters. Coordinates are kept in configuration units
/// (degrees for omega and phi).
enum class SweepParam { N, V, Omega, Gamma, Phi };

SweepParam sweep_param_from_string(const std::string& name);
std::string to_string(SweepParam p);
std::string unit_label(SweepParam p);

/// Writes one coordinate (configuration units) into params.
void apply_coordinate(SimParams& params, SweepParam p, double value);

struct Axis {
    SweepParam param = SweepParam::N;
    std::vector<double> values;
};

struct Coordinate {
    SweepParam param = SweepParam::N;
    double value = 0.0;

    friend bool operator==(const Coordinate&, const Coordinate&) = default;
};

struct ParamGrid {
    SimParams base;
    std::vector<Axis> axes;
    int trials_per_point = 10;
    std::uint64_t base_seed = 0;
    StructureSet thresholds = StructureSet::milling();
    InitOptions init;

    void validate() const;
    std::size_t point_count() const;
    /// Row-major decoding: the last axis varies fastest.
    std::vector<Coordinate> coordinates(std::size_t point_index) const;
    SimParams params_at(std::size_t point_index) const;
};

/// Mixes (base_seed, point_index, trial_index) into a trial seed. Injective
/// for trial_index < 2^20 and point_index < 2^44.
std::uint64_t split_seed(std::uint64_t base_seed, std::uint64_t point_index, std::uint64_t trial_index);

struct TrialRecord {
    std::size_t point_index = 0;
    std::vector<Coordinate> coords;
    std::size_t trial_index = 0;
    std::uint64_t seed = 0;
    Classification classification;
    bool failed = false;       // initialization infeasible or simulation diverged
    std::string error;
    double wall_time = 0.0;    // seconds
};

/// True when two records agree on every field except wall_time.
bool same_outcome(const TrialRecord& a, const TrialRecord& b);

struct PhaseCell {
    std::size_t point_index = 0;
    std::vector<Coordinate> coords;
    int trials = 0;
    int successes = 0;
    int failures = 0;          // trials that errored (counted as B = 0)
    double mean_avg_speed = 0.0;
    double mean_circliness = 0.0;
    double mean_nn_variance = 0.0;

    double success_fraction() const { return trials == 0 ? 0.0 : static_cast<double>(successes) / trials; }
};

/// Runs and classifies one trial. Errors are captured in the record.
TrialRecord run_trial(const SimParams& params, std::uint64_t seed, const StructureSet& eta,
                      const InitOptions& init = {});

/// `trials` independent trials at one parameter point with split seeds.
std::vector<TrialRecord> run_point(const SimParams& params, int trials, std::uint64_t base_seed,
                                   std::size_t point_index, const StructureSet& eta,
                                   const InitOptions& init = {});

struct WorkUnit {
    std::size_t point_index = 0;
    std::size_t trial_index = 0;
};

using RecordSink = std::function<void(const TrialRecord&)>;

/// Serial reference executor. Records come back in unit order; the sink, if
/// given, sees each record as it completes.
std::vector<TrialRecord> run_units_serial(const ParamGrid& grid, std::span<const WorkUnit> units,
                                          const RecordSink& sink = {});

/// OpenMP executor over `workers` threads (<= 0 means the OpenMP default).
/// Returns records in unit order; sink calls are serialized.
std::vector<TrialRecord> run_units_parallel(const ParamGrid& grid, std::span<const WorkUnit> units,
                                            int workers, const RecordSink& sink = {});

/// Aggregates records into one cell per grid point, in point order.
std::vector<PhaseCell> aggregate_cells(const ParamGrid& grid, std::span<const TrialRecord> records);

struct GridRunOptions {
    int workers = 1;
    /// Trial JSONL file. Existing records for the same grid are reused.
    std::optional<std::filesystem::path> trials_path;
};

struct GridResult {
    std::vector<PhaseCell> cells;
    std::vector<TrialRecord> records;  // sorted by (point, trial)
    std::size_t executed = 0;          // units run in this call (not resumed)
};

GridResult run_grid(const ParamGrid& grid, const GridRunOptions& opts = {});

}  // namespace swarmphase
