#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "swarmphase/dynamics.hpp"
#include "swarmphase/macrostate.hpp"
#include "swarmphase/sweep.hpp"

namespace swarmphase {

using Json = nlohmann::json;

/// Malformed input file. line() is 1-based, 0 when not line oriented.
class ParseError : public UsageError {
public:
    ParseError(const std::string& what, std::size_t line = 0);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

// Parameter objects use configuration units: omega_deg and phi_deg in degrees.
Json to_json(const SimParams& p);
/// Overlays the keys present in j onto `defaults`. Unknown keys are errors.
SimParams params_from_json(const Json& j, SimParams defaults = {});

Json to_json(const StructureSet& s);
StructureSet thresholds_from_json(const Json& j, StructureSet defaults);

Json to_json(const MarkerVector& m);
Json to_json(const Classification& c);
Classification classification_from_json(const Json& j);

Json to_json(const ParamGrid& g);
/// Grid config: {base_params, axes: [{name, values} | {name, min, max, steps}],
/// trials, base_seed, thresholds?, init?}.
ParamGrid grid_from_json(const Json& j);
ParamGrid read_grid_config(const std::filesystem::path& path);

Json to_json(const TrialRecord& r);
TrialRecord trial_from_json(const Json& j);

Json to_json(const PhaseCell& c);
PhaseCell cell_from_json(const Json& j);

// Trajectory JSON Lines: a header {"type":"header","params":{...},"seed":u64}
// followed by one {"t": s, "agents": [[x, y, theta], ...]} per frame.
void write_trajectory(const std::filesystem::path& path, const Trajectory& traj,
                      const Json& provenance = {});

struct TrajectoryFile {
    std::optional<SimParams> params;
    std::optional<std::uint64_t> seed;
    std::vector<Microstate> frames;
};

/// Reads a trajectory file. The header line is optional so that externally
/// recorded data only needs frame lines. Errors carry the line number.
TrajectoryFile read_trajectory(const std::filesystem::path& path);

/// Per-frame marker CSV: t, avg_speed, circliness, nn_variance.
void write_marker_csv(const std::filesystem::path& path, std::span<const MarkerSample> samples);

/// {config, behavior, axes: [{name, unit, values}], cells: [...]}.
void write_cells(const std::filesystem::path& path, const ParamGrid& grid,
                 std::span<const PhaseCell> cells);

struct CellsFile {
    ParamGrid grid;
    std::vector<PhaseCell> cells;
};

CellsFile read_cells(const std::filesystem::path& path);

/// Writes `contents` to a sibling temp file and renames it over `path`.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

}  // namespace swarmphase
