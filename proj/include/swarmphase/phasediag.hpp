#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "swarmphase/macrostate.hpp"
#include "swarmphase/sweep.hpp"

namespace swarmphase {

struct Color {
    std::uint8_t r = 255;
    std::uint8_t g = 255;
    std::uint8_t b = 255;

    std::string hex() const;
    friend bool operator==(const Color&, const Color&) = default;
};

inline constexpr Color kWhite{255, 255, 255};
inline constexpr Color kGreen{0, 128, 0};
inline constexpr Color kRed{178, 34, 34};
inline constexpr Color kOrange{255, 140, 0};
inline constexpr Color kBlue{30, 90, 200};

/// Frequency coloring of a phase diagram cell. Majority success shades
/// toward success_hue, majority failure toward failure_hue, ties are white.
struct ColorRule {
    Color success_hue = kGreen;
    Color failure_hue = kRed;
    Color tie_color = kWhite;

    static ColorRule for_behavior(Behavior b);
    /// "green-red", "green-orange" or "blue-red".
    static ColorRule from_name(const std::string& name);
};

/// Signed shading in [-1, 1]: +1 all trials succeeded, -1 none, 0 a tie.
/// Linear in the success fraction.
double signed_intensity(int successes, int trials);

Color color_for(int successes, int trials, const ColorRule& rule);

struct PhaseDiagram {
    Axis x_axis;
    Axis y_axis;
    /// cells[y][x]
    std::vector<std::vector<PhaseCell>> cells;
    Behavior behavior = Behavior::Milling;
    ColorRule palette;
    /// Parameters held fixed across the slice, e.g. "v = 0.25 m/s".
    std::vector<std::string> fixed;

    void validate() const;
};

/// Builds a diagram from a 2-axis grid; x is the first axis.
PhaseDiagram make_diagram(const ParamGrid& grid, const std::vector<PhaseCell>& cells, const ColorRule& palette);

/// Standalone SVG, byte-deterministic for equal inputs.
std::string render_svg(const PhaseDiagram& diagram);
void render(const PhaseDiagram& diagram, const std::filesystem::path& path);

/// CSV: header row of x values, first column y values, body = success
/// fractions to three decimals.
std::string matrix_csv(const PhaseDiagram& diagram);
void export_matrix(const PhaseDiagram& diagram, const std::filesystem::path& path);

struct FractionMatrix {
    std::vector<double> x_values;
    std::vector<double> y_values;
    std::vector<std::vector<double>> fractions;  // [y][x]
};

FractionMatrix read_matrix(const std::filesystem::path& path);

}  // namespace swarmphase
