#include "swarmphase/macrostate.hpp"

#include <cmath>
#include <string>

namespace swarmphase {

std::string to_string(Behavior b) { return b == Behavior::Milling ? "milling" : "diffusion"; }

Behavior behavior_from_string(const std::string& name) {
    if (name == "milling") return Behavior::Milling;
    if (name == "diffusion") return Behavior::Diffusion;
    throw UsageError("behavior: expected 'milling' or 'diffusion', got '" + name + "'");
}

Behavior behavior_for(Controller c) {
    return c == Controller::Milling ? Behavior::Milling : Behavior::Diffusion;
}

void StructureSet::validate() const {
    if (!(circliness_max > 0.0)) throw UsageError("circliness_max: must be > 0");
    if (!(speed_rel_tol > 0.0)) throw UsageError("speed_tol: must be > 0");
    if (!(nn_variance_max > 0.0)) throw UsageError("nn_variance_max: must be > 0");
    if (!(sustained_fraction >= 0.0 && sustained_fraction <= 1.0)) {
        throw UsageError("sustained_fraction: must lie in [0, 1]");
    }
}

bool milling_member(const MarkerVector& m, const StructureSet& eta, double v_set) {
    return m.circliness < eta.circliness_max &&
           std::abs(m.avg_speed - v_set) <= eta.speed_rel_tol * v_set;
}

bool diffusion_member(const MarkerVector& m, const StructureSet& eta) {
    return m.nn_variance < eta.nn_variance_max;
}

Classification classify_milling(const MarkerVector& m, const StructureSet& eta, double v_set) {
    if (eta.behavior != Behavior::Milling) throw UsageError("classify_milling: structure set is not milling");
    return {Behavior::Milling, milling_member(m, eta, v_set) ? 1 : 0, m, eta, 1.0};
}

Classification classify_diffusion(const MarkerVector& m, const StructureSet& eta) {
    if (eta.behavior != Behavior::Diffusion) throw UsageError("classify_diffusion: structure set is not diffusion");
    return {Behavior::Diffusion, diffusion_member(m, eta) ? 1 : 0, m, eta, 1.0};
}

Classification classify_frames(std::span<const Microstate> frames, const StructureSet& eta,
                               double v_set, double window) {
    eta.validate();
    if (frames.size() < 2) throw UsageError("trajectory: needs at least 2 frames");
    const double t_end = frames.back().time;
    const double t_start = t_end - window;
    if (t_start < frames.front().time - 1e-9 * std::max(1.0, t_end)) {
        throw UsageError("window: trajectory spans " + std::to_string(t_end - frames.front().time) +
                         " s, shorter than the evaluation window of " + std::to_string(window) + " s");
    }

    const std::vector<MarkerSample> series = marker_series(frames);
    const MarkerVector m = aggregate(series, t_start, t_end);

    Classification c = eta.behavior == Behavior::Milling ? classify_milling(m, eta, v_set)
                                                          : classify_diffusion(m, eta);
    const double slack = 1e-9 * std::max(1.0, t_end);
    std::size_t in_window = 0;
    std::size_t holding = 0;
    for (const auto& s : series) {
        if (s.time < t_start - slack || s.time > t_end + slack) continue;
        ++in_window;
        const bool ok = eta.behavior == Behavior::Milling ? s.circliness < eta.circliness_max
                                                           : s.nn_variance < eta.nn_variance_max;
        if (ok) ++holding;
    }
    c.sustained = static_cast<double>(holding) / static_cast<double>(in_window);
    if (c.sustained < eta.sustained_fraction) c.value = 0;
    return c;
}

Classification classify_trajectory(const Trajectory& traj, const StructureSet& eta) {
    return classify_frames(traj.frames, eta, traj.params.speed, traj.params.eval_window);
}

}  // namespace swarmphase
