#include "piv/report.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

#include "piv/config.hpp"
#include "piv/normal.hpp"
#include "piv/version.hpp"

namespace piv {

namespace {

constexpr double inv_sqrt_2pi = 0.39894228040143267794;

// Shortest decimal form that parses back to the identical double.
std::string shortest(double v) {
    std::array<char, 32> buf{};
    const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
    return std::string(buf.data(), res.ptr);
}

// 4 significant digits for human-facing text.
std::string fmt4(double v) {
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.4g", v);
    return std::string(buf.data());
}

std::string study_meta_json(const observed_study& s) {
    nlohmann::ordered_json j;
    j["mean_treated_obs"] = s.mean_treated_obs;
    j["mean_control_obs"] = s.mean_control_obs;
    j["var_treated"] = s.var_treated;
    j["var_control"] = s.var_control;
    j["n_obs"] = s.n_obs;
    j["prop_treated"] = s.prop_treated;
    return j.dump();
}

void append_common_meta(data_table& t, const observed_study& s, effect_direction dir,
                        double threshold_value) {
    t.meta.emplace_back("tool", "piv");
    t.meta.emplace_back("version", version_string);
    t.meta.emplace_back("study", study_meta_json(s));
    t.meta.emplace_back("direction", direction_name(dir));
    t.meta.emplace_back("threshold", shortest(threshold_value));
}

}  // namespace

void write_csv(const data_table& t, std::ostream& os) {
    for (const auto& [key, value] : t.meta) os << "# " << key << " = " << value << "\n";
    for (std::size_t c = 0; c < t.columns.size(); ++c)
        os << t.columns[c] << (c + 1 < t.columns.size() ? "," : "");
    os << "\n";
    for (const auto& row : t.rows) {
        for (std::size_t c = 0; c < row.size(); ++c)
            os << shortest(row[c]) << (c + 1 < row.size() ? "," : "");
        os << "\n";
    }
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            return out;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
}

}  // namespace

data_table read_csv(std::istream& is) {
    data_table t;
    std::string line;
    bool header_seen = false;
    while (std::getline(is, line)) {
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (line.front() == '#') {
            const std::size_t eq = line.find(" = ");
            if (eq == std::string::npos)
                throw validation_error("csv", "malformed metadata line: " + line);
            // strip the leading "# ".
            t.meta.emplace_back(line.substr(2, eq - 2), line.substr(eq + 3));
            continue;
        }
        if (!header_seen) {
            t.columns = split_csv_line(line);
            header_seen = true;
            continue;
        }
        const auto cells = split_csv_line(line);
        if (cells.size() != t.columns.size())
            throw validation_error("csv", "row width does not match header: " + line);
        std::vector<double> row(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const auto res =
                std::from_chars(cells[i].data(), cells[i].data() + cells[i].size(), row[i]);
            if (res.ec != std::errc{} || res.ptr != cells[i].data() + cells[i].size())
                throw validation_error("csv", "cell is not a number: " + cells[i]);
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

std::string table_json(const data_table& t) {
    nlohmann::ordered_json j;
    auto& meta = j["meta"] = nlohmann::ordered_json::object();
    for (const auto& [key, value] : t.meta) meta[key] = value;
    j["columns"] = t.columns;
    auto& rows = j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : t.rows) rows.push_back(row);
    return j.dump(2);
}

void validate(const plausible_region& r) {
    if (!std::isfinite(r.treated_lo) || !std::isfinite(r.treated_hi) ||
        !(r.treated_lo < r.treated_hi))
        throw validation_error("treated_un_range",
                               "treated_un range must be a finite interval with lower < upper");
    if (!std::isfinite(r.control_lo) || !std::isfinite(r.control_hi) ||
        !(r.control_lo < r.control_hi))
        throw validation_error("control_un_range",
                               "control_un range must be a finite interval with lower < upper");
    if (r.resolution < 2)
        throw validation_error("resolution", "resolution must be >= 2 points per axis");
}

namespace {

std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> xs(static_cast<std::size_t>(n));
    const double step = (hi - lo) / static_cast<double>(n - 1);
    for (int i = 0; i < n; ++i) xs[static_cast<std::size_t>(i)] = lo + step * i;
    xs.back() = hi;  // pin the endpoint against accumulation drift
    return xs;
}

}  // namespace

contour_grid emit_contour_grid(const observed_study& s, const plausible_region& region,
                               const threshold_spec& t, effect_direction dir) {
    validate(s);
    validate(region);
    validate(t);

    contour_grid g;
    g.region = region;
    g.study = s;
    g.direction = dir;
    g.threshold_value = realize_threshold(t, dir, s);
    g.treated_un = linspace(region.treated_lo, region.treated_hi, region.resolution);
    g.control_un = linspace(region.control_lo, region.control_hi, region.resolution);
    g.piv.reserve(g.treated_un.size() * g.control_un.size());
    g.probit.reserve(g.piv.capacity());
    for (const double c : g.control_un) {
        for (const double tu : g.treated_un) {
            const piv_result r = piv(s, tu, c, t, dir);
            g.piv.push_back(r.piv);
            g.probit.push_back(r.probit_value);
        }
    }
    return g;
}

data_table as_table(const contour_grid& g) {
    data_table t;
    append_common_meta(t, g.study, g.direction, g.threshold_value);
    t.meta.emplace_back("treated_un_range",
                        "[" + shortest(g.region.treated_lo) + ", " + shortest(g.region.treated_hi) + "]");
    t.meta.emplace_back("control_un_range",
                        "[" + shortest(g.region.control_lo) + ", " + shortest(g.region.control_hi) + "]");
    t.meta.emplace_back("resolution", std::to_string(g.region.resolution));
    t.columns = {"control_un", "treated_un", "probit", "piv"};
    t.rows.reserve(g.piv.size());
    for (std::size_t ic = 0; ic < g.control_un.size(); ++ic)
        for (std::size_t it = 0; it < g.treated_un.size(); ++it) {
            const std::size_t cell = ic * g.treated_un.size() + it;
            t.rows.push_back({g.control_un[ic], g.treated_un[it], g.probit[cell], g.piv[cell]});
        }
    return t;
}

threshold_table emit_threshold_table(const observed_study& s, double control_un,
                                     const std::vector<double>& piv_levels,
                                     const threshold_spec& t, effect_direction dir) {
    threshold_table out;
    out.study = s;
    out.control_un = control_un;
    out.direction = dir;
    out.threshold_value = realize_threshold(t, dir, s);
    out.rows.reserve(piv_levels.size());
    for (const double level : piv_levels) {
        const inversion_result r = invert_for_treated_un(s, control_un, level, t, dir);
        out.rows.push_back({level, r.treated_un_threshold, r.delta_hat_ideal});
    }
    return out;
}

data_table as_table(const threshold_table& tt) {
    data_table t;
    append_common_meta(t, tt.study, tt.direction, tt.threshold_value);
    t.meta.emplace_back("control_un", shortest(tt.control_un));
    t.columns = {"piv_level", "treated_un_threshold", "delta_hat_ideal"};
    for (const auto& row : tt.rows)
        t.rows.push_back({row.piv_level, row.treated_un_threshold, row.delta_hat_ideal});
    return t;
}

power_figure emit_power_figure_data(const observed_study& s, double treated_un,
                                    double control_un, const threshold_spec& t,
                                    effect_direction dir, int points) {
    if (t.kind != threshold_spec::kind_t::statistical)
        throw validation_error("threshold",
                               "the power figure needs a statistical threshold; the retest "
                               "densities are defined by critical * se");
    if (points < 3) throw validation_error("points", "points must be >= 3");

    power_figure f;
    f.at = piv(s, treated_un, control_un, t, dir);
    f.threshold_value = f.at.threshold_value;
    f.mass_phi = f.at.piv;

    const double se = f.at.se_ideal;
    const double d = f.at.delta_hat_ideal;
    const bool negative = dir == effect_direction::negative_significant;

    // Symmetric about zero, wide enough that both densities decay to nothing.
    const double half = std::max(std::fabs(d), std::fabs(f.threshold_value)) + 6.0 * se;
    f.x = linspace(-half, half, points);
    f.null_density.resize(f.x.size());
    f.alt_density.resize(f.x.size());
    f.rejection.resize(f.x.size());
    const auto density = [se](double x, double mean) {
        const double u = (x - mean) / se;
        return inv_sqrt_2pi / se * std::exp(-0.5 * u * u);
    };
    for (std::size_t i = 0; i < f.x.size(); ++i) {
        f.null_density[i] = density(f.x[i], 0.0);
        f.alt_density[i] = density(f.x[i], d);
        f.rejection[i] =
            (negative ? f.x[i] <= f.threshold_value : f.x[i] >= f.threshold_value) ? 1 : 0;
    }

    // Trapezoid mass of the alternative density over the rejection side. The cell
    // containing the threshold is split with linear interpolation of the density.
    double mass = 0.0;
    for (std::size_t i = 0; i + 1 < f.x.size(); ++i) {
        const double x0 = f.x[i], x1 = f.x[i + 1];
        const double y0 = f.alt_density[i], y1 = f.alt_density[i + 1];
        const bool in0 = f.rejection[i] == 1, in1 = f.rejection[i + 1] == 1;
        if (in0 && in1) {
            mass += 0.5 * (y0 + y1) * (x1 - x0);
        } else if (in0 != in1) {
            const double frac = (f.threshold_value - x0) / (x1 - x0);
            const double yt = y0 + (y1 - y0) * frac;
            if (in0)
                mass += 0.5 * (y0 + yt) * (f.threshold_value - x0);
            else
                mass += 0.5 * (yt + y1) * (x1 - f.threshold_value);
        }
    }
    f.mass_trapezoid = mass;
    return f;
}

data_table as_table(const power_figure& f) {
    data_table t;
    t.meta.emplace_back("tool", "piv");
    t.meta.emplace_back("version", version_string);
    t.meta.emplace_back("direction", direction_name(f.at.direction));
    t.meta.emplace_back("threshold", shortest(f.threshold_value));
    t.meta.emplace_back("treated_un", shortest(f.at.treated_un));
    t.meta.emplace_back("control_un", shortest(f.at.control_un));
    t.meta.emplace_back("delta_hat_ideal", shortest(f.at.delta_hat_ideal));
    t.meta.emplace_back("se_ideal", shortest(f.at.se_ideal));
    t.meta.emplace_back("piv", shortest(f.mass_phi));
    t.meta.emplace_back("mass_trapezoid", shortest(f.mass_trapezoid));
    t.columns = {"x", "null_density", "alt_density", "is_rejection_region"};
    for (std::size_t i = 0; i < f.x.size(); ++i)
        t.rows.push_back({f.x[i], f.null_density[i], f.alt_density[i],
                          static_cast<double>(f.rejection[i])});
    return t;
}

// ---- SVG rendering ---------------------------------------------------------

namespace {

struct svg_frame {
    double width = 840, height = 640;
    double left = 80, right = 40, top = 50, bottom = 70;
    double x_lo = 0, x_hi = 1, y_lo = 0, y_hi = 1;

    double plot_w() const { return width - left - right; }
    double plot_h() const { return height - top - bottom; }
    double x(double v) const { return left + (v - x_lo) / (x_hi - x_lo) * plot_w(); }
    double y(double v) const { return top + (y_hi - v) / (y_hi - y_lo) * plot_h(); }
};

std::string svg_num(double v) {
    std::array<char, 40> buf{};
    std::snprintf(buf.data(), buf.size(), "%.2f", v);
    return std::string(buf.data());
}

void svg_open(std::ostringstream& os, const svg_frame& fr, const std::string& title) {
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fr.width << "\" height=\""
       << fr.height << "\" viewBox=\"0 0 " << fr.width << " " << fr.height << "\">\n";
    os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    os << "<text x=\"" << fr.width / 2 << "\" y=\"28\" font-family=\"sans-serif\" font-size=\"16\""
       << " text-anchor=\"middle\">" << title << "</text>\n";
}

void svg_axes(std::ostringstream& os, const svg_frame& fr, const std::string& x_label,
              const std::string& y_label) {
    os << "<rect x=\"" << fr.left << "\" y=\"" << fr.top << "\" width=\"" << fr.plot_w()
       << "\" height=\"" << fr.plot_h() << "\" fill=\"none\" stroke=\"black\"/>\n";
    constexpr int ticks = 6;
    for (int i = 0; i < ticks; ++i) {
        const double fx = fr.x_lo + (fr.x_hi - fr.x_lo) * i / (ticks - 1);
        const double px = fr.x(fx);
        os << "<line x1=\"" << svg_num(px) << "\" y1=\"" << svg_num(fr.top + fr.plot_h())
           << "\" x2=\"" << svg_num(px) << "\" y2=\"" << svg_num(fr.top + fr.plot_h() + 5)
           << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << svg_num(px) << "\" y=\"" << svg_num(fr.top + fr.plot_h() + 20)
           << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << fmt4(fx)
           << "</text>\n";
        const double fy = fr.y_lo + (fr.y_hi - fr.y_lo) * i / (ticks - 1);
        const double py = fr.y(fy);
        os << "<line x1=\"" << svg_num(fr.left - 5) << "\" y1=\"" << svg_num(py) << "\" x2=\""
           << svg_num(fr.left) << "\" y2=\"" << svg_num(py) << "\" stroke=\"black\"/>\n";
        os << "<text x=\"" << svg_num(fr.left - 8) << "\" y=\"" << svg_num(py + 4)
           << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << fmt4(fy)
           << "</text>\n";
    }
    os << "<text x=\"" << fr.left + fr.plot_w() / 2 << "\" y=\"" << fr.height - 18
       << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\">" << x_label
       << "</text>\n";
    os << "<text x=\"20\" y=\"" << fr.top + fr.plot_h() / 2
       << "\" font-family=\"sans-serif\" font-size=\"13\" text-anchor=\"middle\""
       << " transform=\"rotate(-90 20 " << fr.top + fr.plot_h() / 2 << ")\">" << y_label
       << "</text>\n";
}

const char* level_color(int idx) {
    // light to dark as the PIV rises
    static const char* palette[9] = {"#c6dbef", "#9ecae1", "#6baed6", "#4292c6", "#2171b5",
                                     "#8c6bb1", "#88419d", "#810f7c", "#4d004b"};
    return palette[idx % 9];
}

}  // namespace

std::string contour_svg(const contour_grid& g) {
    svg_frame fr;
    fr.x_lo = g.region.control_lo;
    fr.x_hi = g.region.control_hi;
    fr.y_lo = g.region.treated_lo;
    fr.y_hi = g.region.treated_hi;

    std::ostringstream os;
    svg_open(os, fr, "PIV over the plausible region (direction: " +
                         std::string(direction_name(g.direction)) + ")");
    svg_axes(os, fr, "control-arm unobserved mean", "treated-arm unobserved mean");

    const std::size_t nt = g.treated_un.size();
    const std::size_t nc = g.control_un.size();
    // Marching squares on the PIV surface; the surface is monotone along both axes,
    // so each iso-line is a single clean polyline (emitted as disjoint segments).
    for (int li = 0; li < 9; ++li) {
        const double level = 0.1 * (li + 1);
        std::ostringstream path;
        for (std::size_t ic = 0; ic + 1 < nc; ++ic) {
            for (std::size_t it = 0; it + 1 < nt; ++it) {
                const double x0 = g.control_un[ic], x1 = g.control_un[ic + 1];
                const double y0 = g.treated_un[it], y1 = g.treated_un[it + 1];
                const double v00 = g.piv[ic * nt + it];        // (x0, y0)
                const double v01 = g.piv[ic * nt + it + 1];    // (x0, y1)
                const double v10 = g.piv[(ic + 1) * nt + it];  // (x1, y0)
                const double v11 = g.piv[(ic + 1) * nt + it + 1];
                const auto cross = [level](double a, double b) {
                    return (a < level) != (b < level);
                };
                const auto lerp = [level](double a, double b, double pa, double pb) {
                    return pa + (level - a) / (b - a) * (pb - pa);
                };
                double px[4], py[4];
                int m = 0;
                if (cross(v00, v01)) { px[m] = x0; py[m] = lerp(v00, v01, y0, y1); ++m; }
                if (cross(v10, v11)) { px[m] = x1; py[m] = lerp(v10, v11, y0, y1); ++m; }
                if (cross(v00, v10)) { px[m] = lerp(v00, v10, x0, x1); py[m] = y0; ++m; }
                if (cross(v01, v11)) { px[m] = lerp(v01, v11, x0, x1); py[m] = y1; ++m; }
                // The affine surface cannot produce the saddle cases, so m is 0 or 2.
                if (m == 2) {
                    path << "M" << svg_num(fr.x(px[0])) << " " << svg_num(fr.y(py[0])) << "L"
                         << svg_num(fr.x(px[1])) << " " << svg_num(fr.y(py[1]));
                }
            }
        }
        const std::string d = path.str();
        if (!d.empty()) {
            os << "<path d=\"" << d << "\" fill=\"none\" stroke=\"" << level_color(li)
               << "\" stroke-width=\"1.6\"/>\n";
        }
        // legend swatch
        const double ly = fr.top + 16.0 * li;
        os << "<rect x=\"" << fr.width - 150 << "\" y=\"" << ly
           << "\" width=\"12\" height=\"12\" fill=\"" << level_color(li) << "\"/>\n";
        os << "<text x=\"" << fr.width - 132 << "\" y=\"" << ly + 10
           << "\" font-family=\"sans-serif\" font-size=\"11\">PIV = " << fmt4(level)
           << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string power_svg(const power_figure& f) {
    svg_frame fr;
    fr.x_lo = f.x.front();
    fr.x_hi = f.x.back();
    fr.y_lo = 0.0;
    double peak = 0.0;
    for (std::size_t i = 0; i < f.x.size(); ++i)
        peak = std::max({peak, f.null_density[i], f.alt_density[i]});
    fr.y_hi = peak * 1.08;

    std::ostringstream os;
    svg_open(os, fr, "Retest densities; shaded mass = PIV = " + fmt4(f.mass_phi));

    // Shaded rejection mass under the alternative density.
    std::ostringstream shade;
    bool started = false;
    double last_x = 0.0;
    for (std::size_t i = 0; i < f.x.size(); ++i) {
        if (f.rejection[i] != 1) continue;
        if (!started) {
            shade << "M" << svg_num(fr.x(f.x[i])) << " " << svg_num(fr.y(0.0));
            started = true;
        }
        shade << "L" << svg_num(fr.x(f.x[i])) << " " << svg_num(fr.y(f.alt_density[i]));
        last_x = f.x[i];
    }
    if (started) {
        shade << "L" << svg_num(fr.x(last_x)) << " " << svg_num(fr.y(0.0)) << "Z";
        os << "<path d=\"" << shade.str() << "\" fill=\"#bdbdbd\" stroke=\"none\"/>\n";
    }

    const auto polyline = [&](const std::vector<double>& ys, const char* color,
                              const char* dash) {
        os << "<path d=\"";
        for (std::size_t i = 0; i < f.x.size(); ++i)
            os << (i == 0 ? "M" : "L") << svg_num(fr.x(f.x[i])) << " " << svg_num(fr.y(ys[i]));
        os << "\" fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\"";
        if (dash) os << " stroke-dasharray=\"" << dash << "\"";
        os << "/>\n";
    };
    polyline(f.null_density, "#333333", "5,4");
    polyline(f.alt_density, "#2171b5", nullptr);

    os << "<line x1=\"" << svg_num(fr.x(f.threshold_value)) << "\" y1=\"" << svg_num(fr.y(fr.y_lo))
       << "\" x2=\"" << svg_num(fr.x(f.threshold_value)) << "\" y2=\"" << svg_num(fr.top)
       << "\" stroke=\"#d62728\" stroke-dasharray=\"2,3\"/>\n";
    os << "<text x=\"" << svg_num(fr.x(f.threshold_value) + 4) << "\" y=\"" << fr.top + 14
       << "\" font-family=\"sans-serif\" font-size=\"11\" fill=\"#d62728\">threshold = "
       << fmt4(f.threshold_value) << "</text>\n";
    svg_axes(os, fr, "ideal-sample effect estimate", "density");
    os << "<text x=\"" << fr.left + 10 << "\" y=\"" << fr.top + 16
       << "\" font-family=\"sans-serif\" font-size=\"12\">dashed: null; solid: ideal-sample "
          "estimate</text>\n";
    os << "</svg>\n";
    return os.str();
}

// ---- Eight-step report -----------------------------------------------------

const char* verdict_name(verdict_t v) {
    switch (v) {
        case verdict_t::strong: return "Strong";
        case verdict_t::borderline: return "Borderline";
        case verdict_t::weak: return "Weak";
    }
    return "Weak";
}

namespace {

std::string range_text(const belief_range& r) {
    if (r.is_point()) return "= " + fmt4(*r.lower);
    if (r.lower && r.upper) return "in [" + fmt4(*r.lower) + ", " + fmt4(*r.upper) + "]";
    if (r.lower) return ">= " + fmt4(*r.lower);
    if (r.upper) return "<= " + fmt4(*r.upper);
    return "unrestricted";
}

std::string model_text(const affine_probit& m) {
    const auto signed_term = [](double v, const std::string& name) {
        return (v < 0 ? " - " : " + ") + fmt4(std::fabs(v)) + (name.empty() ? "" : "*" + name);
    };
    std::string s = "probit(PIV) = " + fmt4(m.coef_control_un) + "*Ycun";
    s += signed_term(m.coef_treated_un, "Ytun");
    s += signed_term(m.intercept, "");
    return s;
}

std::string bound_text(const piv_result& r) {
    if (r.saturated) return std::string("saturates at ") + fmt4(r.piv) + " (belief side unbounded)";
    return fmt4(r.piv) + " at (treated_un = " + fmt4(r.treated_un) +
           ", control_un = " + fmt4(r.control_un) + ")";
}

}  // namespace

robustness_report build_report(const observed_study& s, const counterfactual_belief& b,
                               const threshold_spec& t, effect_direction dir, double cutoff) {
    if (!(cutoff > 0.0 && cutoff < 1.0))
        throw validation_error("cutoff", "cutoff must lie strictly between 0 and 1");

    robustness_report r;
    r.study = s;
    r.belief = b;
    r.threshold = t;
    r.direction = dir;
    r.cutoff = cutoff;
    r.bounds = bound_piv(s, b, t, dir);
    r.se = se_ideal(s);
    r.threshold_value = realize_threshold(t, dir, s);
    r.model = probit_model(s, r.threshold_value, dir);
    r.observed_rejects = observed_crosses_threshold(s, t, dir);

    const double lower = r.bounds.lower.piv;
    if (lower >= cutoff)
        r.verdict = verdict_t::strong;
    else if (lower >= cutoff - 0.05)
        r.verdict = verdict_t::borderline;
    else
        r.verdict = verdict_t::weak;

    const double d_obs = delta_hat_obs(s);
    r.narrative.push_back(
        "Step 1: observed study: mean_treated_obs = " + fmt4(s.mean_treated_obs) +
        ", mean_control_obs = " + fmt4(s.mean_control_obs) + ", var_treated = " +
        fmt4(s.var_treated) + ", var_control = " + fmt4(s.var_control) +
        ", n_obs = " + std::to_string(s.n_obs) + ", prop_treated = " + fmt4(s.prop_treated) +
        "; observed estimate = " + fmt4(d_obs) + " (" + direction_name(dir) + " direction).");
    r.narrative.push_back("Step 2: ideal-sample standard error = " + fmt4(r.se) +
                          " (variances pooled over both arms at the full sample size).");
    {
        std::string line = "Step 3: decision threshold = " + fmt4(r.threshold_value);
        if (t.kind == threshold_spec::kind_t::statistical)
            line += " (statistical: critical " + fmt4(critical_value(t)) + " x se)";
        else
            line += " (fixed)";
        if (!r.observed_rejects)
            line += "; warning: the observed estimate itself does not cross this threshold, "
                    "so the retest probability lacks its premise";
        r.narrative.push_back(line + ".");
    }
    r.narrative.push_back("Step 4: probit model over the unobserved means: " +
                          model_text(r.model) + ".");
    r.narrative.push_back("Step 5: beliefs: treated_un " + range_text(b.treated_un) +
                          "; control_un " + range_text(b.control_un) + ".");
    r.narrative.push_back("Step 6: robustness cutoff = " + fmt4(cutoff) + ".");
    r.narrative.push_back("Step 7: PIV lower bound " + bound_text(r.bounds.lower) +
                          "; upper bound " + bound_text(r.bounds.upper) + ".");
    {
        std::string why;
        switch (r.verdict) {
            case verdict_t::strong:
                why = "the PIV cannot fall below the cutoff anywhere in the belief region";
                break;
            case verdict_t::borderline:
                why = "the lower bound sits within 0.05 of the cutoff";
                break;
            case verdict_t::weak:
                why = "the belief region admits PIV values well below the cutoff";
                break;
        }
        r.narrative.push_back(std::string("Step 8: verdict: ") + verdict_name(r.verdict) + " (" +
                              why + ").");
    }
    return r;
}

std::string report_text(const robustness_report& r) {
    std::ostringstream os;
    os << "PIV robustness report\n";
    os << "---------------------\n";
    for (const auto& line : r.narrative) os << line << "\n";
    os << "verdict: " << verdict_name(r.verdict) << "\n";
    return os.str();
}

}  // namespace piv
