#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include "swarmphase/core.hpp"

namespace swarmphase {

/// Commanded forward speed (m/s, negative = reverse) and turn rate (rad/s).
struct ControlInput {
    double forward_speed = 0.0;
    double turn_rate = 0.0;

    friend bool operator==(const ControlInput&, const ControlInput&) = default;
};

/// Milling law: always drive forward at v, turn +omega while something is
/// sensed and -omega otherwise.
ControlInput milling_control(int h, const SimParams& params);

/// Diffusion law: back straight away at v while something is sensed,
/// otherwise rotate in place at +omega.
ControlInput diffusion_control(int h, const SimParams& params);

ControlInput control_for(int h, const SimParams& params);

/// Exact unicycle integration over dt with constant controls.
AgentState integrate_unicycle(const AgentState& s, ControlInput u, double dt);

/// Pushes overlapping bodies apart until every pair is at least
/// 2 * body_radius apart (at most 16 passes). Headings are untouched.
/// Overlapping pairs are processed in an order that depends only on
/// geometry, so the result does not depend on agent indexing.
Microstate resolve_collisions(Microstate state, double body_radius);

/// One simultaneous sense-then-act step of the whole swarm.
Microstate step(const Microstate& state, const SimParams& params);

struct Trajectory {
    SimParams params;
    std::uint64_t seed = 0;
    std::vector<Microstate> frames;

    double duration() const { return frames.empty() ? 0.0 : frames.back().time - frames.front().time; }
};

class SimulationDiverged : public std::runtime_error {
public:
    SimulationDiverged(std::size_t step_index);
    std::size_t step_index() const { return step_; }

private:
    std::size_t step_;
};

/// Runs params.total_steps() steps from init and records a frame every
/// params.record_stride() steps (and the initial state). Deterministic.
Trajectory run(const SimParams& params, std::uint64_t seed, const Microstate& init);

}  // namespace swarmphase
