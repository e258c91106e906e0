#include "swarmphase/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <tuple>

namespace swarmphase {

ControlInput milling_control(int h, const SimParams& params) {
    return {params.speed, h == 1 ? params.turn_rate : -params.turn_rate};
}

ControlInput diffusion_control(int h, const SimParams& params) {
    if (h == 1) return {-params.speed, 0.0};
    return {0.0, params.turn_rate};
}

ControlInput control_for(int h, const SimParams& params) {
    return params.controller == Controller::Milling ? milling_control(h, params)
                                                    : diffusion_control(h, params);
}

AgentState integrate_unicycle(const AgentState& s, ControlInput u, double dt) {
    const double v = u.forward_speed;
    const double w = u.turn_rate;
    AgentState out = s;
    if (w == 0.0) {
        out.x += v * dt * std::cos(s.theta);
        out.y += v * dt * std::sin(s.theta);
        return out;
    }
    const double theta_end = s.theta + w * dt;
    out.x += (v / w) * (std::sin(theta_end) - std::sin(s.theta));
    out.y -= (v / w) * (std::cos(theta_end) - std::cos(s.theta));
    out.theta = normalize_angle(theta_end);
    return out;
}

namespace {

constexpr int kMaxCollisionPasses = 16;
// Over-relaxation for passes after the first; jammed clusters otherwise
// converge too slowly to clear within the pass budget.
constexpr double kCollisionRelaxation = 1.5;

// Deterministic unit direction for separating a coincident pair.
Vec2 pair_direction(std::size_t i, std::size_t j) {
    std::uint64_t z = (static_cast<std::uint64_t>(std::min(i, j)) << 32) ^ std::max(i, j);
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    z ^= z >> 31;
    const double angle = kTwoPi * static_cast<double>(z >> 11) * 0x1.0p-53;
    return {std::cos(angle), std::sin(angle)};
}

struct Overlap {
    std::size_t lo;  // agent with the lexicographically smaller position
    std::size_t hi;
    std::tuple<double, double, double, double> key;
};

}  // namespace

Microstate resolve_collisions(Microstate state, double body_radius) {
    if (body_radius <= 0.0) return state;
    const double min_sep = 2.0 * body_radius;
    auto& a = state.agents;
    const std::size_t n = a.size();

    std::vector<Overlap> overlaps;
    for (int pass = 0; pass < kMaxCollisionPasses; ++pass) {
        overlaps.clear();
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                if (distance(a[i].position(), a[j].position()) >= min_sep) continue;
                auto pi = std::make_pair(a[i].x, a[i].y);
                auto pj = std::make_pair(a[j].x, a[j].y);
                if (pj < pi) {
                    overlaps.push_back({j, i, {pj.first, pj.second, pi.first, pi.second}});
                } else {
                    overlaps.push_back({i, j, {pi.first, pi.second, pj.first, pj.second}});
                }
            }
        }
        if (overlaps.empty()) break;
        std::sort(overlaps.begin(), overlaps.end(),
                  [](const Overlap& l, const Overlap& r) { return l.key < r.key; });

        for (const Overlap& o : overlaps) {
            AgentState& p = a[o.lo];
            AgentState& q = a[o.hi];
            double dx = q.x - p.x;
            double dy = q.y - p.y;
            double d = std::hypot(dx, dy);
            if (d >= min_sep) continue;
            Vec2 dir;
            if (d > 0.0) {
                dir = {dx / d, dy / d};
            } else {
                dir = pair_direction(o.lo, o.hi);
            }
            const double push = 0.5 * (min_sep - d) * (pass == 0 ? 1.0 : kCollisionRelaxation);
            p.x -= push * dir.x;
            p.y -= push * dir.y;
            q.x += push * dir.x;
            q.y += push * dir.y;
        }
    }
    return state;
}

Microstate step(const Microstate& state, const SimParams& params) {
    const std::vector<int> h = sense_all(state, params.sensor);
    Microstate next;
    next.time = state.time + params.dt;
    next.agents.resize(state.size());
    for (std::size_t i = 0; i < state.size(); ++i) {
        next.agents[i] = integrate_unicycle(state.agents[i], control_for(h[i], params), params.dt);
    }
    return resolve_collisions(std::move(next), params.body_radius);
}

SimulationDiverged::SimulationDiverged(std::size_t step_index)
    : std::runtime_error("simulation diverged at step " + std::to_string(step_index)),
      step_(step_index) {}

namespace {

bool all_finite(const Microstate& s) {
    return std::all_of(s.agents.begin(), s.agents.end(), [](const AgentState& a) {
        return std::isfinite(a.x) && std::isfinite(a.y) && std::isfinite(a.theta);
    });
}

}  // namespace

Trajectory run(const SimParams& params, std::uint64_t seed, const Microstate& init) {
    params.validate();
    if (init.size() != static_cast<std::size_t>(params.n_agents)) {
        throw UsageError("init: microstate has " + std::to_string(init.size()) +
                         " agents, params.n = " + std::to_string(params.n_agents));
    }
    if (!all_finite(init)) throw SimulationDiverged(0);

    Trajectory traj{params, seed, {}};
    const std::size_t steps = params.total_steps();
    const std::size_t stride = params.record_stride();
    traj.frames.reserve(steps / stride + 2);

    Microstate current = init;
    current.time = 0.0;
    traj.frames.push_back(current);
    for (std::size_t k = 1; k <= steps; ++k) {
        current = step(current, params);
        // Re-derive time from the step count so that frame spacing does not drift.
        current.time = static_cast<double>(k) * params.dt;
        if (!all_finite(current)) throw SimulationDiverged(k);
        if (k % stride == 0) traj.frames.push_back(current);
    }
    return traj;
}

}  // namespace swarmphase
