#include "swarmphase/markers.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace swarmphase {

Vec2 centroid(const Microstate& state) {
    if (state.size() == 0) throw UsageError("centroid: empty microstate");
    double sx = 0.0;
    double sy = 0.0;
    for (const auto& a : state.agents) {
        sx += a.x;
        sy += a.y;
    }
    const double n = static_cast<double>(state.size());
    return {sx / n, sy / n};
}

double circliness(const Microstate& state) {
    if (state.size() < 2) return std::numeric_limits<double>::infinity();
    const Vec2 mu = centroid(state);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const auto& a : state.agents) {
        const double r = distance(a.position(), mu);
        lo = std::min(lo, r);
        hi = std::max(hi, r);
    }
    if (lo < kCirclinessDegeneracy) return std::numeric_limits<double>::infinity();
    return (hi - lo) / lo;
}

double avg_speed(const Microstate& prev, const Microstate& next) {
    if (prev.size() != next.size()) throw UsageError("avg_speed: frames differ in agent count");
    if (prev.size() == 0) throw UsageError("avg_speed: empty microstate");
    const double gap = next.time - prev.time;
    if (!(gap > 0.0)) throw UsageError("avg_speed: frames must be strictly increasing in time");
    double total = 0.0;
    for (std::size_t i = 0; i < prev.size(); ++i) {
        total += distance(prev.agents[i].position(), next.agents[i].position());
    }
    return total / static_cast<double>(prev.size()) / gap;
}

double nn_variance(const Microstate& state) {
    const std::size_t n = state.size();
    if (n < 2) throw UsageError("nn_variance: requires at least 2 agents");
    std::vector<double> nearest(n, std::numeric_limits<double>::infinity());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double d = distance(state.agents[i].position(), state.agents[j].position());
            nearest[i] = std::min(nearest[i], d);
            nearest[j] = std::min(nearest[j], d);
        }
    }
    double mean = 0.0;
    for (double d : nearest) mean += d;
    mean /= static_cast<double>(n);
    double var = 0.0;
    for (double d : nearest) var += (d - mean) * (d - mean);
    return var / static_cast<double>(n);
}

std::vector<MarkerSample> marker_series(std::span<const Microstate> frames) {
    std::vector<MarkerSample> out;
    if (frames.size() < 2) return out;
    out.reserve(frames.size() - 1);
    for (std::size_t k = 1; k < frames.size(); ++k) {
        const Microstate& f = frames[k];
        MarkerSample s;
        s.time = f.time;
        s.avg_speed = avg_speed(frames[k - 1], f);
        s.circliness = circliness(f);
        s.nn_variance = f.size() >= 2 ? nn_variance(f) : std::numeric_limits<double>::infinity();
        out.push_back(s);
    }
    return out;
}

MarkerVector aggregate(std::span<const MarkerSample> samples, double t_start, double t_end) {
    // Frame times are multiples of dt; allow for their rounding at the edges.
    const double slack = 1e-9 * std::max(1.0, std::abs(t_end));
    MarkerVector m;
    m.t_start = t_start;
    m.t_end = t_end;
    for (const auto& s : samples) {
        if (s.time < t_start - slack || s.time > t_end + slack) continue;
        m.avg_speed += s.avg_speed;
        m.circliness += s.circliness;
        m.nn_variance += s.nn_variance;
        ++m.frames;
    }
    if (m.frames < 2) {
        throw UsageError("aggregate: window [" + std::to_string(t_start) + ", " +
                         std::to_string(t_end) + "] holds fewer than 2 samples");
    }
    const double n = static_cast<double>(m.frames);
    m.avg_speed /= n;
    m.circliness /= n;
    m.nn_variance /= n;
    return m;
}

}  // namespace swarmphase
