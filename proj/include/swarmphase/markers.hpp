#pragma once

#include <limits>
#include <span>
#include <vector>

#include "swarmphase/core.hpp"

namespace swarmphase {

/// Minimum centroid distance below which circliness is reported as +inf.
inline constexpr double kCirclinessDegeneracy = 1e-9;

/// Per-frame information markers.
struct MarkerSample {
    double time = 0.0;
    double avg_speed = 0.0;     // m/s
    double circliness = 0.0;    // dimensionless, +inf when degenerate
    double nn_variance = 0.0;   // m^2
};

/// Window-averaged markers.
struct MarkerVector {
    double t_start = 0.0;
    double t_end = 0.0;
    double avg_speed = 0.0;
    double circliness = 0.0;
    double nn_variance = 0.0;
    std::size_t frames = 0;
};

Vec2 centroid(const Microstate& state);

/// (max_i |q_i - mu| - min_i |q_i - mu|) / min_i |q_i - mu|. Returns +inf when
/// N < 2 or the closest agent sits within kCirclinessDegeneracy of the centroid.
double circliness(const Microstate& state);

/// Mean finite-difference positional speed between two frames.
double avg_speed(const Microstate& prev, const Microstate& next);

/// Population variance of nearest-neighbor distances. Requires N >= 2.
double nn_variance(const Microstate& state);

/// Markers for frames[1..]; each speed uses the preceding frame. A single
/// agent has no neighbors, so its nn_variance is reported as +inf.
std::vector<MarkerSample> marker_series(std::span<const Microstate> frames);

/// Means of the samples whose time lies in [t_start, t_end].
MarkerVector aggregate(std::span<const MarkerSample> samples, double t_start, double t_end);

}  // namespace swarmphase
