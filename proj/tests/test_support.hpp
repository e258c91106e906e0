#pragma once

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>

#include "swarmphase/core.hpp"

namespace swarmphase::testing {

/// Random microstate with positions uniform in [-extent, extent]^2.
inline Microstate random_microstate(std::mt19937_64& rng, std::size_t n, double extent = 3.0) {
    std::uniform_real_distribution<double> pos(-extent, extent);
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    Microstate s;
    s.agents.resize(n);
    for (auto& a : s.agents) a = {pos(rng), pos(rng), ang(rng)};
    return s;
}

struct RigidMotion {
    double angle = 0.0;
    double tx = 0.0;
    double ty = 0.0;

    Vec2 apply(Vec2 p) const {
        const double c = std::cos(angle);
        const double s = std::sin(angle);
        return {c * p.x - s * p.y + tx, s * p.x + c * p.y + ty};
    }
    AgentState apply(const AgentState& a) const {
        const Vec2 p = apply(a.position());
        return {p.x, p.y, normalize_angle(a.theta + angle)};
    }
    Microstate apply(const Microstate& m) const {
        Microstate out = m;
        for (auto& a : out.agents) a = apply(a);
        return out;
    }
};

inline RigidMotion random_motion(std::mt19937_64& rng) {
    std::uniform_real_distribution<double> ang(-kPi, kPi);
    std::uniform_real_distribution<double> shift(-10.0, 10.0);
    return {ang(rng), shift(rng), shift(rng)};
}

/// Fresh, empty directory under the system temp dir, removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        std::random_device rd;
        path = std::filesystem::temp_directory_path() /
               ("swarmphase-" + tag + "-" + std::to_string(rd()));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    TempDir(const TempDir&) = delete;
    TempDir& operator=(const TempDir&) = delete;
};

}  // namespace swarmphase::testing
