#pragma once

#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace swarmphase {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

/// Raised for invalid arguments or configuration. The message names the
/// offending key when one exists.
class UsageError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    friend bool operator==(const Vec2&, const Vec2&) = default;
};

/// Maps any finite angle onto [-pi, pi). Throws std::domain_error on NaN/Inf.
double normalize_angle(double theta);

/// Observable state of one agent: position in meters, heading in radians.
/// The heading is kept in [-pi, pi) by every mutating operation.
struct AgentState {
    double x = 0.0;
    double y = 0.0;
    double theta = 0.0;

    Vec2 position() const { return {x, y}; }

    friend bool operator==(const AgentState&, const AgentState&) = default;
};

/// All agent states at one instant. Agent identity is the index.
struct Microstate {
    std::vector<AgentState> agents;
    double time = 0.0;

    std::size_t size() const { return agents.size(); }

    friend bool operator==(const Microstate&, const Microstate&) = default;
};

/// Forward-facing binary cone sensor: range gamma (m) and full opening angle phi (rad).
struct SensorSpec {
    double range = 1.0;
    double opening_angle = deg_to_rad(50.0);

    void validate() const;

    friend bool operator==(const SensorSpec&, const SensorSpec&) = default;
};

enum class Controller { Milling, Diffusion };

std::string to_string(Controller c);
Controller controller_from_string(const std::string& name);

/// One point of the parameter space plus the integration settings used to
/// realize it.
struct SimParams {
    int n_agents = 6;
    double speed = 0.25;                   // m/s
    double turn_rate = deg_to_rad(45.0);   // rad/s
    SensorSpec sensor{};
    Controller controller = Controller::Milling;
    double body_radius = 0.08;             // m, 0 = point agents
    double dt = 0.01;                      // s
    double horizon = 120.0;                // s
    double eval_window = 10.0;             // s
    double record_interval = 0.1;          // s between recorded frames

    /// Throws UsageError naming the first invalid field.
    void validate() const;

    /// Integration steps between recorded frames.
    std::size_t record_stride() const;
    /// Total number of integration steps, ceil(horizon / dt).
    std::size_t total_steps() const;

    friend bool operator==(const SimParams&, const SimParams&) = default;
};

double distance(Vec2 a, Vec2 b);

/// Membership of target in the observer's field of view. Distance must lie
/// in (0, range] and the bearing offset must be at most half the opening
/// angle; both bounds inclusive.
bool in_fov(const AgentState& observer, Vec2 target, const SensorSpec& sensor);

/// Binary sensor reading h_i: 1 iff some other agent's center is in FOV_i.
int sense(std::size_t i, const Microstate& state, const SensorSpec& sensor);

/// Sensor readings for every agent, evaluated against the same microstate.
std::vector<int> sense_all(const Microstate& state, const SensorSpec& sensor);

/// Connectivity of the undirected r-disk graph (edge iff distance <= radius).
bool r_disk_connected(const Microstate& state, double radius);

}  // namespace swarmphase
