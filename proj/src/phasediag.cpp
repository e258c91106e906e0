#include "swarmphase/phasediag.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "swarmphase/io.hpp"

namespace swarmphase {

std::string Color::hex() const {
    char buf[8];
    std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
    return buf;
}

ColorRule ColorRule::for_behavior(Behavior b) {
    return b == Behavior::Milling ? ColorRule{kGreen, kRed, kWhite} : ColorRule{kGreen, kOrange, kWhite};
}

ColorRule ColorRule::from_name(const std::string& name) {
    if (name == "green-red") return {kGreen, kRed, kWhite};
    if (name == "green-orange") return {kGreen, kOrange, kWhite};
    if (name == "blue-red") return {kBlue, kRed, kWhite};
    throw UsageError("palette: expected green-red, green-orange or blue-red, got '" + name + "'");
}

double signed_intensity(int successes, int trials) {
    if (trials < 1) throw UsageError("color_for: trials must be >= 1");
    if (successes < 0 || successes > trials) throw UsageError("color_for: successes must lie in [0, trials]");
    return static_cast<double>(2 * successes - trials) / static_cast<double>(trials);
}

namespace {

// base + (hue - base) * num / den, rounded half away from zero, in exact
// integer arithmetic so ties do not depend on floating-point error.
std::uint8_t blend(std::uint8_t base, std::uint8_t hue, int num, int den) {
    const long scaled = static_cast<long>(base) * den + (static_cast<long>(hue) - base) * num;
    const long q = scaled / den;
    const long r = scaled % den;
    return static_cast<std::uint8_t>(2 * r >= den ? q + 1 : q);
}

Color shade(Color base, Color hue, int num, int den) {
    return {blend(base.r, hue.r, num, den), blend(base.g, hue.g, num, den), blend(base.b, hue.b, num, den)};
}

std::string fmt_num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", v);
    return buf;
}

std::string fmt_fixed(double v, int decimals) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&': out += "&amp;"; break;
            case '<': out += "&lt;"; break;
            case '>': out += "&gt;"; break;
            case '"': out += "&quot;"; break;
            default: out += c;
        }
    }
    return out;
}

std::string axis_title(const Axis& a) { return to_string(a.param) + " (" + unit_label(a.param) + ")"; }

}  // namespace

Color color_for(int successes, int trials, const ColorRule& rule) {
    signed_intensity(successes, trials);  // validates
    const int margin = 2 * successes - trials;
    if (margin > 0) return shade(rule.tie_color, rule.success_hue, margin, trials);
    if (margin < 0) return shade(rule.tie_color, rule.failure_hue, -margin, trials);
    return rule.tie_color;
}

void PhaseDiagram::validate() const {
    if (x_axis.values.empty() || y_axis.values.empty()) throw UsageError("diagram: axes must not be empty");
    if (cells.size() != y_axis.values.size()) throw UsageError("diagram: row count does not match the y axis");
    for (const auto& row : cells) {
        if (row.size() != x_axis.values.size()) throw UsageError("diagram: column count does not match the x axis");
        for (const auto& c : row) {
            if (c.trials < 1) throw UsageError("diagram: every cell needs at least one trial");
        }
    }
}

PhaseDiagram make_diagram(const ParamGrid& grid, const std::vector<PhaseCell>& cells, const ColorRule& palette) {
    if (grid.axes.size() != 2) {
        throw UsageError("axes: phase diagrams need exactly 2 axes; use the CSV export for 1-axis sweeps");
    }
    if (cells.size() != grid.point_count()) throw UsageError("cells: count does not match the grid");
    PhaseDiagram d;
    d.x_axis = grid.axes[0];
    d.y_axis = grid.axes[1];
    d.behavior = grid.thresholds.behavior;
    d.palette = palette;
    const std::size_t nx = d.x_axis.values.size();
    const std::size_t ny = d.y_axis.values.size();
    d.cells.assign(ny, std::vector<PhaseCell>(nx));
    // Row-major point order: the second (y) axis varies fastest.
    for (std::size_t ix = 0; ix < nx; ++ix) {
        for (std::size_t iy = 0; iy < ny; ++iy) d.cells[iy][ix] = cells[ix * ny + iy];
    }

    const SimParams& b = grid.base;
    auto swept = [&](SweepParam p) { return d.x_axis.param == p || d.y_axis.param == p; };
    if (!swept(SweepParam::N)) d.fixed.push_back("N = " + std::to_string(b.n_agents));
    if (!swept(SweepParam::V)) d.fixed.push_back("v = " + fmt_num(b.speed) + " m/s");
    if (!swept(SweepParam::Omega)) d.fixed.push_back("omega = " + fmt_num(rad_to_deg(b.turn_rate)) + " deg/s");
    if (!swept(SweepParam::Gamma)) d.fixed.push_back("gamma = " + fmt_num(b.sensor.range) + " m");
    if (!swept(SweepParam::Phi)) d.fixed.push_back("phi = " + fmt_num(rad_to_deg(b.sensor.opening_angle)) + " deg");
    d.validate();
    return d;
}

std::string render_svg(const PhaseDiagram& d) {
    d.validate();
    constexpr int cell_w = 48;
    constexpr int cell_h = 32;
    constexpr int left = 90;
    constexpr int top = 70;
    constexpr int legend_w = 190;
    const int nx = static_cast<int>(d.x_axis.values.size());
    const int ny = static_cast<int>(d.y_axis.values.size());
    const int plot_w = nx * cell_w;
    const int plot_h = ny * cell_h;
    const int width = left + plot_w + 30 + legend_w;
    const int height = std::max(top + plot_h + 70, top + 6 * 26 + 40);

    std::ostringstream out;
    out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
        << "\" viewBox=\"0 0 " << width << ' ' << height << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
    out << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"#ffffff\"/>\n";

    std::string title = to_string(d.behavior) + " frequency: " + to_string(d.y_axis.param) + " vs " +
                        to_string(d.x_axis.param);
    std::string fixed;
    for (std::size_t k = 0; k < d.fixed.size(); ++k) fixed += (k ? ", " : "") + d.fixed[k];
    out << "<text class=\"title\" x=\"" << left << "\" y=\"24\" font-size=\"15\" font-weight=\"bold\">"
        << xml_escape(title) << "</text>\n";
    out << "<text class=\"subtitle\" x=\"" << left << "\" y=\"44\">" << xml_escape(fixed) << "</text>\n";

    out << "<g class=\"cells\">\n";
    for (int iy = 0; iy < ny; ++iy) {
        for (int ix = 0; ix < nx; ++ix) {
            const PhaseCell& c = d.cells[static_cast<std::size_t>(iy)][static_cast<std::size_t>(ix)];
            const int x = left + ix * cell_w;
            const int y = top + (ny - 1 - iy) * cell_h;
            out << "<rect class=\"cell\" x=\"" << x << "\" y=\"" << y << "\" width=\"" << cell_w << "\" height=\""
                << cell_h << "\" fill=\"" << color_for(c.successes, c.trials, d.palette).hex()
                << "\" stroke=\"#999999\" stroke-width=\"0.5\"><title>" << c.successes << '/' << c.trials
                << "</title></rect>\n";
        }
    }
    out << "</g>\n";

    for (int ix = 0; ix < nx; ++ix) {
        out << "<text class=\"tick x-tick\" x=\"" << left + ix * cell_w + cell_w / 2 << "\" y=\""
            << top + plot_h + 16 << "\" text-anchor=\"middle\">"
            << fmt_num(d.x_axis.values[static_cast<std::size_t>(ix)]) << "</text>\n";
    }
    for (int iy = 0; iy < ny; ++iy) {
        out << "<text class=\"tick y-tick\" x=\"" << left - 6 << "\" y=\"" << top + (ny - 1 - iy) * cell_h + cell_h / 2 + 4
            << "\" text-anchor=\"end\">" << fmt_num(d.y_axis.values[static_cast<std::size_t>(iy)]) << "</text>\n";
    }
    out << "<text class=\"axis-label\" x=\"" << left + plot_w / 2 << "\" y=\"" << top + plot_h + 40
        << "\" text-anchor=\"middle\">" << xml_escape(axis_title(d.x_axis)) << "</text>\n";
    out << "<text class=\"axis-label\" x=\"20\" y=\"" << top + plot_h / 2 << "\" text-anchor=\"middle\" transform=\"rotate(-90 20 "
        << top + plot_h / 2 << ")\">" << xml_escape(axis_title(d.y_axis)) << "</text>\n";

    struct Entry {
        int successes;
        const char* label;
    };
    // Shown on a ten-trial scale.
    const Entry entries[] = {{10, "behavior in all trials"}, {7, "majority (lighter)"}, {5, "tie"},
                             {3, "minority (lighter)"},       {0, "behavior in no trial"}};
    const int lx = left + plot_w + 30;
    out << "<g class=\"legend\">\n";
    out << "<text x=\"" << lx << "\" y=\"" << top - 8 << "\" font-weight=\"bold\">trials with behavior</text>\n";
    int ly = top;
    for (const Entry& e : entries) {
        out << "<rect class=\"legend-swatch\" x=\"" << lx << "\" y=\"" << ly << "\" width=\"18\" height=\"18\" fill=\""
            << color_for(e.successes, 10, d.palette).hex() << "\" stroke=\"#999999\" stroke-width=\"0.5\"/>\n";
        out << "<text x=\"" << lx + 26 << "\" y=\"" << ly + 13 << "\">" << e.successes << "/10 " << e.label
            << "</text>\n";
        ly += 26;
    }
    out << "</g>\n";
    out << "</svg>\n";
    return out.str();
}

void render(const PhaseDiagram& diagram, const std::filesystem::path& path) {
    write_file_atomic(path, render_svg(diagram));
}

std::string matrix_csv(const PhaseDiagram& d) {
    d.validate();
    std::ostringstream out;
    out << to_string(d.y_axis.param) << '\\' << to_string(d.x_axis.param);
    for (double x : d.x_axis.values) out << ',' << fmt_num(x);
    out << '\n';
    for (std::size_t iy = 0; iy < d.y_axis.values.size(); ++iy) {
        out << fmt_num(d.y_axis.values[iy]);
        for (const auto& c : d.cells[iy]) out << ',' << fmt_fixed(c.success_fraction(), 3);
        out << '\n';
    }
    return out.str();
}

void export_matrix(const PhaseDiagram& diagram, const std::filesystem::path& path) {
    write_file_atomic(path, matrix_csv(diagram));
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::stringstream ss(line);
    for (std::string field; std::getline(ss, field, ',');) out.push_back(field);
    return out;
}

double parse_double(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("not a number: '" + s + "'", line);
    }
}

}  // namespace

FractionMatrix read_matrix(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());
    FractionMatrix m;
    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": empty file");
    auto header = split_csv(line);
    if (header.size() < 2) throw ParseError("header needs at least one x value", 1);
    for (std::size_t k = 1; k < header.size(); ++k) m.x_values.push_back(parse_double(header[k], 1));
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto fields = split_csv(line);
        if (fields.size() != header.size()) throw ParseError("wrong number of fields", lineno);
        m.y_values.push_back(parse_double(fields[0], lineno));
        std::vector<double> row;
        for (std::size_t k = 1; k < fields.size(); ++k) row.push_back(parse_double(fields[k], lineno));
        m.fractions.push_back(std::move(row));
    }
    return m;
}

}  // namespace swarmphase
