#pragma once

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "piv/engine.hpp"

namespace piv {

// Column-oriented numeric table with `# key = value` metadata lines, the common
// currency of the emitters. CSV cells use shortest round-trip formatting, so a
// parsed file reproduces the in-memory values bit for bit.
struct data_table {
    std::vector<std::pair<std::string, std::string>> meta;
    std::vector<std::string> columns;
    std::vector<std::vector<double>> rows;
};

void write_csv(const data_table& t, std::ostream& os);
data_table read_csv(std::istream& is);
std::string table_json(const data_table& t);

// Rectangle of belief-consistent unobserved means to scan, `resolution` points per axis.
struct plausible_region {
    double treated_lo = 0.0;
    double treated_hi = 0.0;
    double control_lo = 0.0;
    double control_hi = 0.0;
    int resolution = 201;
};

void validate(const plausible_region& r);

// PIV and probit surfaces over the region. Values are stored row-major with the
// control index outermost, matching the emitted row order.
struct contour_grid {
    plausible_region region;
    std::vector<double> treated_un;  // axis values, size = resolution
    std::vector<double> control_un;
    std::vector<double> piv;         // [ic * resolution + it]
    std::vector<double> probit;
    observed_study study;
    effect_direction direction = effect_direction::positive_significant;
    double threshold_value = 0.0;

    double piv_at(int ic, int it) const { return piv[static_cast<std::size_t>(ic) * treated_un.size() + it]; }
};

// Every cell comes from the same engine call a caller would make; emission adds no
// arithmetic of its own.
contour_grid emit_contour_grid(const observed_study& s, const plausible_region& region,
                               const threshold_spec& t, effect_direction dir);
data_table as_table(const contour_grid& g);
std::string contour_svg(const contour_grid& g);

struct threshold_row {
    double piv_level = 0.0;
    double treated_un_threshold = 0.0;
    double delta_hat_ideal = 0.0;
};

struct threshold_table {
    std::vector<threshold_row> rows;
    double control_un = 0.0;
    observed_study study;
    effect_direction direction = effect_direction::positive_significant;
    double threshold_value = 0.0;
};

// One row per level via invert_for_treated_un; an empty level list is an empty table.
threshold_table emit_threshold_table(const observed_study& s, double control_un,
                                     const std::vector<double>& piv_levels,
                                     const threshold_spec& t, effect_direction dir);
data_table as_table(const threshold_table& t);

// Null and alternative retest densities over a symmetric grid, plus the shaded
// rejection mass computed both in closed form and by trapezoid integration of the
// emitted density (the boundary cell is split by linear interpolation).
struct power_figure {
    std::vector<double> x;
    std::vector<double> null_density;  // N(0, se^2)
    std::vector<double> alt_density;   // N(delta_hat_ideal, se^2)
    std::vector<int> rejection;        // 1 where x lies in the rejection region
    double threshold_value = 0.0;
    double mass_phi = 0.0;        // = PIV
    double mass_trapezoid = 0.0;
    piv_result at;
};

power_figure emit_power_figure_data(const observed_study& s, double treated_un,
                                    double control_un, const threshold_spec& t,
                                    effect_direction dir, int points = 4001);
data_table as_table(const power_figure& f);
std::string power_svg(const power_figure& f);

enum class verdict_t { strong, borderline, weak };

const char* verdict_name(verdict_t v);

// Eight-step robustness walk-through: inputs, ideal-sample scale, threshold, probit
// model, beliefs, cutoff, PIV bounds, verdict. Strong means the lower PIV bound
// reaches the cutoff; Borderline means it falls within 0.05 below it.
struct robustness_report {
    observed_study study;
    counterfactual_belief belief;
    threshold_spec threshold;
    effect_direction direction = effect_direction::positive_significant;
    double cutoff = 0.8;
    affine_probit model{};
    double threshold_value = 0.0;
    double se = 0.0;
    piv_bounds bounds;
    verdict_t verdict = verdict_t::weak;
    bool observed_rejects = true;  // false warns that the observed result itself fails the test
    std::vector<std::string> narrative;  // the eight numbered steps
};

robustness_report build_report(const observed_study& s, const counterfactual_belief& b,
                               const threshold_spec& t, effect_direction dir,
                               double cutoff = 0.8);
std::string report_text(const robustness_report& r);

}  // namespace piv
