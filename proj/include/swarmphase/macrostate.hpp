#pragma once

#include "swarmphase/core.hpp"
#include "swarmphase/dynamics.hpp"
#include "swarmphase/markers.hpp"

namespace swarmphase {

enum class Behavior { Milling, Diffusion };

std::string to_string(Behavior b);
Behavior behavior_from_string(const std::string& name);
Behavior behavior_for(Controller c);

/// Region of marker space whose membership defines a macrostate.
struct StructureSet {
    Behavior behavior = Behavior::Milling;
    double circliness_max = 0.01;    // milling: c < circliness_max
    double speed_rel_tol = 0.02;     // milling: |v_bar - v| <= tol * v
    double nn_variance_max = 0.005;  // diffusion: delta < nn_variance_max
    /// Fraction of window frames that must individually meet the shape
    /// criterion for classify_trajectory.
    double sustained_fraction = 0.9;

    static StructureSet milling() { return {Behavior::Milling}; }
    static StructureSet diffusion() { return {Behavior::Diffusion}; }
    static StructureSet for_behavior(Behavior b) { return {b}; }

    void validate() const;
};

struct Classification {
    Behavior behavior = Behavior::Milling;
    int value = 0;
    MarkerVector markers;
    StructureSet thresholds;
    /// Fraction of window frames meeting the per-frame shape criterion. Set by
    /// classify_trajectory only.
    double sustained = 1.0;
};

bool milling_member(const MarkerVector& m, const StructureSet& eta, double v_set);
bool diffusion_member(const MarkerVector& m, const StructureSet& eta);

Classification classify_milling(const MarkerVector& m, const StructureSet& eta, double v_set);
Classification classify_diffusion(const MarkerVector& m, const StructureSet& eta);

/// Markers over the final window [T - W, T] plus the sustained-membership
/// rule. Throws UsageError when the trajectory is shorter than the window.
Classification classify_frames(std::span<const Microstate> frames, const StructureSet& eta,
                               double v_set, double window);

Classification classify_trajectory(const Trajectory& traj, const StructureSet& eta);

}  // namespace swarmphase
