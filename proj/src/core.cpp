#include "swarmphase/core.hpp"

#include <cmath>
#include <string>

namespace swarmphase {

double normalize_angle(double theta) {
    if (!std::isfinite(theta)) {
        throw std::domain_error("normalize_angle: non-finite angle");
    }
    double r = theta - kTwoPi * std::floor((theta + kPi) / kTwoPi);
    // floor() can land one ulp outside the half-open range.
    if (r >= kPi) r -= kTwoPi;
    if (r < -kPi) r += kTwoPi;
    return r;
}

std::string to_string(Controller c) {
    return c == Controller::Milling ? "milling" : "diffusion";
}

Controller controller_from_string(const std::string& name) {
    if (name == "milling") return Controller::Milling;
    if (name == "diffusion") return Controller::Diffusion;
    throw UsageError("controller: expected 'milling' or 'diffusion', got '" + name + "'");
}

void SensorSpec::validate() const {
    if (!(std::isfinite(range) && range > 0.0)) {
        throw UsageError("gamma: sensor range must be > 0");
    }
    if (!(opening_angle > 0.0 && opening_angle <= kTwoPi)) {
        throw UsageError("phi: opening angle must lie in (0, 360] degrees");
    }
}

namespace {

void require_positive(double value, const char* key) {
    if (!(std::isfinite(value) && value > 0.0)) {
        throw UsageError(std::string(key) + ": must be a finite value > 0");
    }
}

}  // namespace

void SimParams::validate() const {
    if (n_agents < 1) throw UsageError("n: number of agents must be >= 1");
    require_positive(speed, "v");
    require_positive(turn_rate, "omega");
    sensor.validate();
    if (!(std::isfinite(body_radius) && body_radius >= 0.0)) {
        throw UsageError("body_radius: must be >= 0");
    }
    require_positive(dt, "dt");
    require_positive(horizon, "horizon");
    require_positive(eval_window, "window");
    if (eval_window > horizon) throw UsageError("window: must not exceed horizon");
    require_positive(record_interval, "record_interval");
    if (record_interval < dt * (1.0 - 1e-9)) {
        throw UsageError("record_interval: must be at least dt");
    }
}

std::size_t SimParams::record_stride() const {
    const double ratio = record_interval / dt;
    const auto stride = static_cast<std::size_t>(std::llround(ratio));
    return stride == 0 ? 1 : stride;
}

std::size_t SimParams::total_steps() const {
    // Tolerate representation error so that e.g. 1.0 / 0.01 gives 100, not 101.
    return static_cast<std::size_t>(std::ceil(horizon / dt - 1e-9));
}

double distance(Vec2 a, Vec2 b) { return std::hypot(b.x - a.x, b.y - a.y); }

bool in_fov(const AgentState& observer, Vec2 target, const SensorSpec& sensor) {
    const double dx = target.x - observer.x;
    const double dy = target.y - observer.y;
    const double d = std::hypot(dx, dy);
    if (d <= 0.0 || d > sensor.range) return false;
    const double offset = normalize_angle(std::atan2(dy, dx) - observer.theta);
    return std::abs(offset) <= 0.5 * sensor.opening_angle;
}

int sense(std::size_t i, const Microstate& state, const SensorSpec& sensor) {
    if (i >= state.size()) {
        throw UsageError("sense: agent index " + std::to_string(i) + " out of range");
    }
    const AgentState& self = state.agents[i];
    for (std::size_t j = 0; j < state.size(); ++j) {
        if (j != i && in_fov(self, state.agents[j].position(), sensor)) return 1;
    }
    return 0;
}

std::vector<int> sense_all(const Microstate& state, const SensorSpec& sensor) {
    std::vector<int> h(state.size());
    for (std::size_t i = 0; i < state.size(); ++i) h[i] = sense(i, state, sensor);
    return h;
}

bool r_disk_connected(const Microstate& state, double radius) {
    const std::size_t n = state.size();
    if (n <= 1) return true;
    std::vector<bool> seen(n, false);
    std::vector<std::size_t> stack{0};
    seen[0] = true;
    std::size_t reached = 1;
    while (!stack.empty()) {
        const std::size_t i = stack.back();
        stack.pop_back();
        for (std::size_t j = 0; j < n; ++j) {
            if (seen[j]) continue;
            if (distance(state.agents[i].position(), state.agents[j].position()) <= radius) {
                seen[j] = true;
                ++reached;
                stack.push_back(j);
            }
        }
    }
    return reached == n;
}

}  // namespace swarmphase
