// Command-line front end: every subcommand is a thin adapter over the library,
// so the numbers it prints equal the corresponding library call's results exactly.

#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "piv/config.hpp"
#include "piv/engine.hpp"
#include "piv/report.hpp"
#include "piv/simulate.hpp"
#include "piv/version.hpp"

namespace {

using nlohmann::ordered_json;

struct cli_options {
    std::string config_path;
    std::string output;  // empty = subcommand default
    std::string out_path;

    std::optional<double> mean_treated_obs, mean_control_obs;
    std::optional<double> var_treated, var_control;
    std::optional<std::int64_t> n_obs;
    std::optional<double> prop_treated;

    std::optional<double> treated_un, treated_un_lower, treated_un_upper;
    std::optional<double> control_un, control_un_lower, control_un_upper;

    std::optional<double> fixed_threshold;
    std::optional<double> alpha;
    std::optional<double> critical;
    std::optional<std::string> direction;

    // subcommand extras
    std::optional<double> target_piv;
    std::string levels = "0.1:0.9:0.1";
    std::string treated_range, control_range;
    int resolution = 201;
    int points = 4001;
    std::optional<std::uint64_t> seed;
    std::uint64_t replications = 1'000'000;
    std::string mode = "estimator";
    int threads = 0;
    std::string sweep;
    double cutoff = 0.8;
};

std::string fmt4(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.4g", v);
    return buf;
}

double parse_double(const std::string& s, const char* field) {
    double v{};
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
        throw piv::validation_error(field, std::string(field) + ": '" + s + "' is not a number");
    return v;
}

// "lo:hi" -> pair with lo < hi
std::pair<double, double> parse_span(const std::string& s, const char* field) {
    const auto colon = s.find(':');
    if (colon == std::string::npos || s.find(':', colon + 1) != std::string::npos)
        throw piv::validation_error(field, std::string(field) + " must look like lo:hi");
    const double lo = parse_double(s.substr(0, colon), field);
    const double hi = parse_double(s.substr(colon + 1), field);
    if (!(lo < hi))
        throw piv::validation_error(field, std::string(field) + " needs lo < hi");
    return {lo, hi};
}

// "start:stop:step", a comma list, or a single number.
std::vector<double> parse_list(const std::string& s, const char* field) {
    std::vector<double> out;
    if (s.find(':') != std::string::npos) {
        const auto c1 = s.find(':');
        const auto c2 = s.find(':', c1 + 1);
        if (c2 == std::string::npos || s.find(':', c2 + 1) != std::string::npos)
            throw piv::validation_error(field, std::string(field) + " must look like start:stop:step");
        const double start = parse_double(s.substr(0, c1), field);
        const double stop = parse_double(s.substr(c1 + 1, c2 - c1 - 1), field);
        const double step = parse_double(s.substr(c2 + 1), field);
        if (!(step > 0.0) || stop < start)
            throw piv::validation_error(field, std::string(field) + " needs step > 0 and stop >= start");
        const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
        out.reserve(count);
        for (std::size_t k = 0; k < count; ++k) out.push_back(start + static_cast<double>(k) * step);
        return out;
    }
    std::size_t pos = 0;
    while (pos <= s.size()) {
        const auto comma = s.find(',', pos);
        const auto piece = s.substr(pos, comma == std::string::npos ? std::string::npos : comma - pos);
        out.push_back(parse_double(piece, field));
        if (comma == std::string::npos) break;
        pos = comma + 1;
    }
    return out;
}

piv::analysis_config resolve_config(const cli_options& o) {
    piv::analysis_config cfg;
    if (!o.config_path.empty()) cfg = piv::load_config_file(o.config_path);

    auto& s = cfg.study;
    if (o.mean_treated_obs) s.mean_treated_obs = *o.mean_treated_obs;
    if (o.mean_control_obs) s.mean_control_obs = *o.mean_control_obs;
    if (o.var_treated) s.var_treated = *o.var_treated;
    if (o.var_control) s.var_control = *o.var_control;
    if (o.n_obs) s.n_obs = *o.n_obs;
    if (o.prop_treated) s.prop_treated = *o.prop_treated;

    if (o.treated_un && (o.treated_un_lower || o.treated_un_upper))
        throw piv::validation_error(
            "treated_un", "give either --treated-un or --treated-un-lower/--treated-un-upper");
    if (o.treated_un) cfg.belief.treated_un = piv::belief_range::point(*o.treated_un);
    if (o.treated_un_lower) cfg.belief.treated_un.lower = *o.treated_un_lower;
    if (o.treated_un_upper) cfg.belief.treated_un.upper = *o.treated_un_upper;

    if (o.control_un && (o.control_un_lower || o.control_un_upper))
        throw piv::validation_error(
            "control_un", "give either --control-un or --control-un-lower/--control-un-upper");
    if (o.control_un) cfg.belief.control_un = piv::belief_range::point(*o.control_un);
    if (o.control_un_lower) cfg.belief.control_un.lower = *o.control_un_lower;
    if (o.control_un_upper) cfg.belief.control_un.upper = *o.control_un_upper;

    const bool stat_flags = o.alpha.has_value() || o.critical.has_value();
    if (o.fixed_threshold && stat_flags)
        throw piv::validation_error(
            "threshold", "give either --fixed-threshold or --alpha/--critical, not both");
    if (o.fixed_threshold) cfg.threshold = piv::threshold_spec::fixed(*o.fixed_threshold);
    if (stat_flags) {
        cfg.threshold.kind = piv::threshold_spec::kind_t::statistical;
        if (o.alpha) cfg.threshold.alpha = *o.alpha;
        if (o.critical) cfg.threshold.critical = *o.critical;
    }

    if (o.direction) {
        if (*o.direction == "auto")
            cfg.direction = piv::direction_choice::automatic;
        else if (*o.direction == "positive")
            cfg.direction = piv::direction_choice::positive;
        else if (*o.direction == "negative")
            cfg.direction = piv::direction_choice::negative;
        else
            throw piv::validation_error("direction",
                                        "direction must be auto, positive, or negative");
    }
    return cfg;
}

struct resolved_analysis {
    piv::analysis_config cfg;
    piv::effect_direction dir;
};

resolved_analysis resolve_all(const cli_options& o) {
    resolved_analysis r{resolve_config(o), piv::effect_direction::positive_significant};
    piv::validate(r.cfg.study);
    piv::validate(r.cfg.belief);
    piv::validate(r.cfg.threshold);
    r.dir = piv::resolve_direction(r.cfg);
    if (!piv::observed_crosses_threshold(r.cfg.study, r.cfg.threshold, r.dir))
        std::cerr << "warning: the observed estimate does not cross the decision threshold; "
                     "the PIV presumes a prior rejection\n";
    return r;
}

double need_point(const piv::belief_range& r, const char* field, const char* flag) {
    if (!r.is_point())
        throw piv::validation_error(field, std::string(field) +
                                               " must be a single point for this subcommand; "
                                               "pass --" +
                                               flag + " or a {\"point\": ...} belief");
    return *r.lower;
}

const char* requested_direction_name(piv::direction_choice c) {
    switch (c) {
        case piv::direction_choice::automatic: return "auto";
        case piv::direction_choice::positive: return "positive";
        case piv::direction_choice::negative: return "negative";
    }
    return "auto";
}

ordered_json fin(double v) {
    if (std::isfinite(v)) return v;
    if (std::isnan(v)) return "nan";
    return v > 0 ? "inf" : "-inf";
}

ordered_json range_json(const piv::belief_range& r) {
    ordered_json j = ordered_json::object();
    if (r.is_point()) {
        j["point"] = *r.lower;
        return j;
    }
    if (r.lower) j["lower"] = *r.lower;
    if (r.upper) j["upper"] = *r.upper;
    return j;
}

ordered_json inputs_json(const resolved_analysis& a) {
    const auto& cfg = a.cfg;
    ordered_json j;
    ordered_json js;
    js["mean_treated_obs"] = cfg.study.mean_treated_obs;
    js["mean_control_obs"] = cfg.study.mean_control_obs;
    js["var_treated"] = cfg.study.var_treated;
    js["var_control"] = cfg.study.var_control;
    js["n_obs"] = cfg.study.n_obs;
    js["prop_treated"] = cfg.study.prop_treated;
    j["study"] = js;
    ordered_json jb;
    jb["treated_un"] = range_json(cfg.belief.treated_un);
    jb["control_un"] = range_json(cfg.belief.control_un);
    j["belief"] = jb;
    ordered_json jt;
    if (cfg.threshold.kind == piv::threshold_spec::kind_t::fixed) {
        jt["fixed"] = cfg.threshold.fixed_value;
    } else {
        ordered_json st;
        st["alpha"] = cfg.threshold.alpha;
        st["critical"] = piv::critical_value(cfg.threshold);
        jt["statistical"] = st;
    }
    jt["value"] = piv::realize_threshold(cfg.threshold, a.dir, cfg.study);
    j["threshold"] = jt;
    ordered_json jd;
    jd["requested"] = requested_direction_name(cfg.direction);
    jd["resolved"] = piv::direction_name(a.dir);
    j["direction"] = jd;
    return j;
}

std::string range_text(const piv::belief_range& r) {
    if (r.is_point()) return "= " + fmt4(*r.lower);
    if (r.lower && r.upper) return "in [" + fmt4(*r.lower) + ", " + fmt4(*r.upper) + "]";
    if (r.lower) return ">= " + fmt4(*r.lower);
    if (r.upper) return "<= " + fmt4(*r.upper);
    return "unrestricted";
}

std::string echo_text(const resolved_analysis& a) {
    const auto& cfg = a.cfg;
    const auto& s = cfg.study;
    std::ostringstream os;
    os << "study: mean_treated_obs = " << fmt4(s.mean_treated_obs)
       << ", mean_control_obs = " << fmt4(s.mean_control_obs)
       << ", var_treated = " << fmt4(s.var_treated) << ", var_control = " << fmt4(s.var_control)
       << ", n_obs = " << s.n_obs << ", prop_treated = " << fmt4(s.prop_treated) << "\n";
    os << "belief: treated_un " << range_text(cfg.belief.treated_un) << "; control_un "
       << range_text(cfg.belief.control_un) << "\n";
    if (cfg.threshold.kind == piv::threshold_spec::kind_t::fixed)
        os << "threshold: fixed " << fmt4(cfg.threshold.fixed_value);
    else
        os << "threshold: statistical (alpha = " << fmt4(cfg.threshold.alpha)
           << ", critical = " << fmt4(piv::critical_value(cfg.threshold)) << ")";
    os << "; realized = " << fmt4(piv::realize_threshold(cfg.threshold, a.dir, cfg.study)) << "\n";
    os << "direction: " << piv::direction_name(a.dir) << " ("
       << requested_direction_name(cfg.direction) << ")\n\n";
    return os.str();
}

void deliver(const std::string& content, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream f;
    f.exceptions(std::ios::failbit | std::ios::badbit);
    f.open(out_path, std::ios::binary);
    f << content;
}

std::string resolve_format(const cli_options& o, const char* preferred,
                           std::initializer_list<const char*> allowed) {
    const std::string fmt = o.output.empty() ? preferred : o.output;
    for (const char* a : allowed)
        if (fmt == a) return fmt;
    std::string msg = "output for this subcommand must be one of:";
    for (const char* a : allowed) msg += std::string(" ") + a;
    throw piv::validation_error("output", msg + " (got " + fmt + ")");
}

void emit_json(const char* subcommand, const resolved_analysis& a, ordered_json result,
               const cli_options& o, std::optional<std::uint64_t> seed = std::nullopt) {
    ordered_json out;
    out["tool"] = "piv";
    out["version"] = piv::version_string;
    out["subcommand"] = subcommand;
    out["inputs"] = inputs_json(a);
    if (seed) out["inputs"]["seed"] = *seed;
    out["result"] = std::move(result);
    deliver(out.dump(2) + "\n", o.out_path);
}

ordered_json piv_result_json(const piv::piv_result& r) {
    ordered_json j;
    j["piv"] = fin(r.piv);
    j["probit"] = fin(r.probit_value);
    j["delta_hat_ideal"] = fin(r.delta_hat_ideal);
    j["se_ideal"] = r.se_ideal;
    j["t_ratio"] = fin(r.t_ratio);
    j["threshold_value"] = r.threshold_value;
    j["direction"] = piv::direction_name(r.direction);
    j["statistical"] = r.statistical;
    if (r.statistical) j["critical"] = r.critical;
    j["treated_un"] = fin(r.treated_un);
    j["control_un"] = fin(r.control_un);
    j["saturated"] = r.saturated;
    return j;
}

ordered_json table_to_json(const piv::data_table& t) {
    ordered_json j;
    auto& meta = j["meta"] = ordered_json::object();
    for (const auto& [key, value] : t.meta) meta[key] = value;
    j["columns"] = t.columns;
    auto& rows = j["rows"] = ordered_json::array();
    for (const auto& row : t.rows) rows.push_back(row);
    return j;
}

std::string table_text(const piv::data_table& t) {
    std::ostringstream os;
    for (const auto& col : t.columns) os << std::setw(22) << std::left << col;
    os << "\n";
    for (const auto& row : t.rows) {
        for (const double v : row) os << std::setw(22) << std::left << fmt4(v);
        os << "\n";
    }
    return os.str();
}

std::string corner_text(const piv::piv_result& r) {
    if (r.saturated) {
        std::string sides;
        if (std::isnan(r.treated_un)) sides = "treated_un";
        if (std::isnan(r.control_un)) sides += std::string(sides.empty() ? "" : " and ") + "control_un";
        return fmt4(r.piv) + " (saturated: " + sides + " unbounded on the binding side)";
    }
    return fmt4(r.piv) + " at (treated_un = " + fmt4(r.treated_un) +
           ", control_un = " + fmt4(r.control_un) + ")";
}

std::string csv_string(const piv::data_table& t) {
    std::ostringstream os;
    piv::write_csv(t, os);
    return os.str();
}

// ---- subcommands -----------------------------------------------------------

int run_piv(const cli_options& o) {
    const auto a = resolve_all(o);
    const auto fmt = resolve_format(o, "text", {"text", "json"});
    const double tp = need_point(a.cfg.belief.treated_un, "treated_un", "treated-un");
    const double cp = need_point(a.cfg.belief.control_un, "control_un", "control-un");
    const piv::piv_result r = piv::piv(a.cfg.study, tp, cp, a.cfg.threshold, a.dir);
    if (fmt == "json") {
        emit_json("piv", a, piv_result_json(r), o);
        return 0;
    }
    std::ostringstream os;
    os << echo_text(a);
    os << "PIV = " << fmt4(r.piv) << "\n";
    os << "probit(PIV) = " << fmt4(r.probit_value) << "\n";
    os << "delta_hat_ideal = " << fmt4(r.delta_hat_ideal) << "\n";
    os << "se_ideal = " << fmt4(r.se_ideal) << "\n";
    os << "t_ratio = " << fmt4(r.t_ratio) << "\n";
    os << "threshold = " << fmt4(r.threshold_value) << "\n";
    deliver(os.str(), o.out_path);
    return 0;
}

int run_bound(const cli_options& o) {
    const auto a = resolve_all(o);
    const auto fmt = resolve_format(o, "text", {"text", "json"});
    const piv::piv_bounds b = piv::bound_piv(a.cfg.study, a.cfg.belief, a.cfg.threshold, a.dir);
    if (fmt == "json") {
        ordered_json r;
        r["lower"] = piv_result_json(b.lower);
        r["upper"] = piv_result_json(b.upper);
        emit_json("bound", a, std::move(r), o);
        return 0;
    }
    std::ostringstream os;
    os << echo_text(a);
    os << "PIV lower bound = " << corner_text(b.lower) << "\n";
    os << "PIV upper bound = " << corner_text(b.upper) << "\n";
    deliver(os.str(), o.out_path);
    return 0;
}

int run_invert(const cli_options& o) {
    const auto a = resolve_all(o);
    const auto fmt = resolve_format(o, "text", {"text", "json"});
    if (!o.target_piv) throw piv::validation_error("target_piv", "--target-piv is required");
    const double cp = need_point(a.cfg.belief.control_un, "control_un", "control-un");
    const piv::inversion_result r =
        piv::invert_for_treated_un(a.cfg.study, cp, *o.target_piv, a.cfg.threshold, a.dir);
    if (fmt == "json") {
        ordered_json j;
        j["treated_un_threshold"] = fin(r.treated_un_threshold);
        j["delta_hat_ideal"] = fin(r.delta_hat_ideal);
        j["target_piv"] = r.target_piv;
        j["control_un"] = r.control_un;
        emit_json("invert", a, std::move(j), o);
        return 0;
    }
    std::ostringstream os;
    os << echo_text(a);
    os << "treated_un threshold = " << fmt4(r.treated_un_threshold) << "\n";
    os << "delta_hat_ideal at the threshold = " << fmt4(r.delta_hat_ideal) << "\n";
    os << "target PIV = " << fmt4(r.target_piv) << "\n";
    os << "control_un = " << fmt4(r.control_un) << "\n";
    deliver(os.str(), o.out_path);
    return 0;
}

int run_table(const cli_options& o) {
    const auto a = resolve_all(o);
    const auto fmt = resolve_format(o, "text", {"text", "json", "csv"});
    const double cp = need_point(a.cfg.belief.control_un, "control_un", "control-un");
    const auto levels = parse_list(o.levels, "levels");
    for (const double v : levels)
        if (!(v > 0.0 && v < 1.0))
            throw piv::validation_error("levels", "levels must lie strictly between 0 and 1");
    const piv::threshold_table tt =
        piv::emit_threshold_table(a.cfg.study, cp, levels, a.cfg.threshold, a.dir);
    const piv::data_table dt = piv::as_table(tt);
    if (fmt == "json") {
        emit_json("table", a, table_to_json(dt), o);
    } else if (fmt == "csv") {
        deliver(csv_string(dt), o.out_path);
    } else {
        deliver(echo_text(a) + table_text(dt), o.out_path);
    }
    return 0;
}

piv::plausible_region resolve_region(const cli_options& o, const resolved_analysis& a) {
    piv::plausible_region region;
    region.resolution = o.resolution;
    const auto axis = [&](const piv::belief_range& r, const std::string& flag_value,
                          const char* flag_name) {
        if (!flag_value.empty()) return parse_span(flag_value, flag_name);
        if (r.is_bounded() && *r.lower < *r.upper) return std::make_pair(*r.lower, *r.upper);
        const double lo = std::min(a.cfg.study.mean_treated_obs, a.cfg.study.mean_control_obs);
        const double hi = std::max(a.cfg.study.mean_treated_obs, a.cfg.study.mean_control_obs);
        if (!(lo < hi))
            throw piv::validation_error(
                flag_name, std::string("cannot infer a grid range; pass --") + flag_name);
        return std::make_pair(lo, hi);
    };
    std::tie(region.treated_lo, region.treated_hi) =
        axis(a.cfg.belief.treated_un, o.treated_range, "treated-range");
    std::tie(region.control_lo, region.control_hi) =
        axis(a.cfg.belief.control_un, o.control_range, "control-range");
    return region;
}

int run_grid(const cli_options& o) {
    const auto a = resolve_all(o);
    const auto fmt = resolve_format(o, "csv", {"csv", "json", "svg"});
    const piv::plausible_region region = resolve_region(o, a);
    const piv::contour_grid g = piv::emit_contour_grid(a.cfg.study, region, a.cfg.threshold, a.dir);
    if (fmt == "svg") {
        if (o.out_path.empty()) std::cerr << echo_text(a);
        deliver(piv::contour_svg(g), o.out_path);
    } else if (fmt == "json") {
        emit_json("grid", a, table_to_json(piv::as_table(g)), o);
    } else {
        deliver(csv_string(piv::as_table(g)), o.out_path);
    }
    return 0;
}

int run_power(const cli_options& o) {
    const auto a = resolve_all(o);
    const auto fmt = resolve_format(o, "csv", {"text", "csv", "json", "svg"});
    const double tp = need_point(a.cfg.belief.treated_un, "treated_un", "treated-un");
    const double cp = need_point(a.cfg.belief.control_un, "control_un", "control-un");
    const piv::power_figure f =
        piv::emit_power_figure_data(a.cfg.study, tp, cp, a.cfg.threshold, a.dir, o.points);
    if (fmt == "svg") {
        if (o.out_path.empty()) std::cerr << echo_text(a);
        deliver(piv::power_svg(f), o.out_path);
    } else if (fmt == "json") {
        ordered_json j = table_to_json(piv::as_table(f));
        j["piv"] = f.mass_phi;
        j["mass_trapezoid"] = f.mass_trapezoid;
        emit_json("power", a, std::move(j), o);
    } else if (fmt == "csv") {
        deliver(csv_string(piv::as_table(f)), o.out_path);
    } else {
        std::ostringstream os;
        os << echo_text(a);
        os << "PIV = " << fmt4(f.mass_phi) << "\n";
        os << "shaded rejection mass (trapezoid over the emitted grid) = "
           << fmt4(f.mass_trapezoid) << "\n";
        os << "threshold = " << fmt4(f.threshold_value) << "\n";
        os << "delta_hat_ideal = " << fmt4(f.at.delta_hat_ideal) << "\n";
        os << "se_ideal = " << fmt4(f.at.se_ideal) << "\n";
        deliver(os.str(), o.out_path);
    }
    return 0;
}

std::uint64_t resolve_seed(const cli_options& o) {
    if (o.seed) return *o.seed;
    if (const char* env = std::getenv("PIV_SEED")) {
        const std::string s(env);
        if (!s.empty()) {
            std::uint64_t v{};
            const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
            if (res.ec != std::errc{} || res.ptr != s.data() + s.size())
                throw piv::validation_error(
                    "PIV_SEED", "PIV_SEED must be a nonnegative integer (got '" + s + "')");
            return v;
        }
    }
    return 42;
}

piv::sim_mode parse_mode(const std::string& m) {
    if (m == "estimator") return piv::sim_mode::sample_estimator;
    if (m == "individuals") return piv::sim_mode::sample_individuals;
    throw piv::validation_error("mode", "mode must be estimator or individuals");
}

const char* mode_name(piv::sim_mode m) {
    return m == piv::sim_mode::sample_estimator ? "estimator" : "individuals";
}

int run_simulate(const cli_options& o) {
    if (o.threads > 0) {
        const std::string v = std::to_string(o.threads);
        setenv("PIV_THREADS", v.c_str(), 1);
    }
    const auto a = resolve_all(o);
    piv::sim_config cfg;
    cfg.n_replications = o.replications;
    cfg.seed = resolve_seed(o);
    cfg.mode = parse_mode(o.mode);

    const double cp = need_point(a.cfg.belief.control_un, "control_un", "control-un");

    if (!o.sweep.empty()) {
        const auto fmt = resolve_format(o, "text", {"text", "json", "csv"});
        const auto grid = parse_list(o.sweep, "sweep");
        const auto rows =
            piv::simulate_power_curve(a.cfg.study, cp, grid, a.cfg.threshold, a.dir, cfg);
        piv::data_table dt;
        dt.meta.emplace_back("tool", "piv");
        dt.meta.emplace_back("version", piv::version_string);
        dt.meta.emplace_back("direction", piv::direction_name(a.dir));
        dt.meta.emplace_back("control_un", fmt4(cp));
        dt.meta.emplace_back("replications", std::to_string(cfg.n_replications));
        dt.meta.emplace_back("seed", std::to_string(cfg.seed));
        dt.meta.emplace_back("mode", mode_name(cfg.mode));
        dt.meta.emplace_back("rng", piv::rng_algorithm);
        dt.columns = {"treated_un", "piv_closed", "piv_sim", "mc_stderr", "t_ratio"};
        for (const auto& r : rows)
            dt.rows.push_back({r.treated_un, r.piv_closed, r.piv_sim, r.mc_stderr, r.t_ratio});
        if (fmt == "json")
            emit_json("simulate", a, table_to_json(dt), o, cfg.seed);
        else if (fmt == "csv")
            deliver(csv_string(dt), o.out_path);
        else
            deliver(echo_text(a) + table_text(dt), o.out_path);
        return 0;
    }

    const auto fmt = resolve_format(o, "text", {"text", "json"});
    const double tp = need_point(a.cfg.belief.treated_un, "treated_un", "treated-un");
    const piv::piv_result closed = piv::piv(a.cfg.study, tp, cp, a.cfg.threshold, a.dir);
    const piv::sim_result r = piv::simulate_piv(a.cfg.study, tp, cp, a.cfg.threshold, a.dir, cfg);
    if (fmt == "json") {
        ordered_json j;
        j["piv_closed"] = closed.piv;
        j["piv_sim"] = r.piv_hat;
        j["mc_stderr"] = r.mc_stderr;
        j["replications"] = r.n_replications;
        j["seed"] = r.seed;
        j["mode"] = mode_name(r.mode);
        j["rng"] = piv::rng_algorithm;
        j["threshold_value"] = r.threshold_value;
        j["direction"] = piv::direction_name(r.direction);
        emit_json("simulate", a, std::move(j), o, cfg.seed);
        return 0;
    }
    std::ostringstream os;
    os << echo_text(a);
    os << "closed-form PIV = " << fmt4(closed.piv) << "\n";
    os << "simulated PIV = " << fmt4(r.piv_hat) << "\n";
    os << "mc_stderr = " << fmt4(r.mc_stderr) << "\n";
    os << "replications = " << r.n_replications << "\n";
    os << "seed = " << r.seed << "\n";
    os << "mode = " << mode_name(r.mode) << "\n";
    os << "rng = " << piv::rng_algorithm << "\n";
    deliver(os.str(), o.out_path);
    return 0;
}

int run_report(const cli_options& o) {
    const auto a = resolve_all(o);
    const auto fmt = resolve_format(o, "text", {"text", "json"});
    const piv::robustness_report r =
        piv::build_report(a.cfg.study, a.cfg.belief, a.cfg.threshold, a.dir, o.cutoff);
    if (fmt == "json") {
        ordered_json j;
        j["verdict"] = piv::verdict_name(r.verdict);
        j["cutoff"] = r.cutoff;
        ordered_json m;
        m["coef_treated_un"] = r.model.coef_treated_un;
        m["coef_control_un"] = r.model.coef_control_un;
        m["intercept"] = r.model.intercept;
        j["probit_model"] = m;
        j["threshold_value"] = r.threshold_value;
        j["se_ideal"] = r.se;
        j["observed_rejects"] = r.observed_rejects;
        j["lower"] = piv_result_json(r.bounds.lower);
        j["upper"] = piv_result_json(r.bounds.upper);
        j["narrative"] = r.narrative;
        emit_json("report", a, std::move(j), o);
        return 0;
    }
    deliver(echo_text(a) + piv::report_text(r), o.out_path);
    return 0;
}

void add_common(CLI::App* sub, cli_options& o) {
    sub->add_option("--config", o.config_path, "JSON analysis config file");
    sub->add_option("--output", o.output, "Output format (subcommand-dependent)");
    sub->add_option("--out", o.out_path, "Write the output to this file instead of stdout");

    sub->add_option("--mean-treated-obs", o.mean_treated_obs, "Observed treated-arm mean");
    sub->add_option("--mean-control-obs", o.mean_control_obs, "Observed control-arm mean");
    sub->add_option("--var-treated", o.var_treated, "Treated-arm outcome variance");
    sub->add_option("--var-control", o.var_control, "Control-arm outcome variance");
    sub->add_option("--n-obs", o.n_obs, "Total observed sample size");
    sub->add_option("--prop-treated", o.prop_treated, "Treated share of the observed sample");

    sub->add_option("--treated-un", o.treated_un, "Point belief for the treated unobserved mean");
    sub->add_option("--treated-un-lower", o.treated_un_lower, "Lower belief bound, treated side");
    sub->add_option("--treated-un-upper", o.treated_un_upper, "Upper belief bound, treated side");
    sub->add_option("--control-un", o.control_un, "Point belief for the control unobserved mean");
    sub->add_option("--control-un-lower", o.control_un_lower, "Lower belief bound, control side");
    sub->add_option("--control-un-upper", o.control_un_upper, "Upper belief bound, control side");

    sub->add_option("--fixed-threshold", o.fixed_threshold, "Fixed decision threshold");
    sub->add_option("--alpha", o.alpha, "Two-sided significance level (statistical threshold)");
    sub->add_option("--critical", o.critical, "Explicit critical value override");
    sub->add_option("--direction", o.direction, "auto, positive, or negative");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "piv: probability that a causal inference is robust for internal validity.\n"
        "Computes how likely an observed significant effect would survive a retest on the\n"
        "ideal sample in which every subject contributes both potential outcomes."};
    app.require_subcommand(1);
    cli_options o;

    auto* c_piv = app.add_subcommand("piv", "Closed-form PIV at point beliefs");
    auto* c_bound = app.add_subcommand("bound", "PIV bounds over belief intervals");
    auto* c_invert =
        app.add_subcommand("invert", "Treated-side belief at which the PIV hits a target");
    c_invert->add_option("--target-piv", o.target_piv, "PIV level to invert for");
    auto* c_table = app.add_subcommand("table", "Inversion table over a list of PIV levels");
    c_table->add_option("--levels", o.levels, "PIV levels: start:stop:step or a comma list");
    auto* c_grid = app.add_subcommand("grid", "PIV surface over a rectangle of beliefs");
    c_grid->add_option("--treated-range", o.treated_range, "Treated axis as lo:hi");
    c_grid->add_option("--control-range", o.control_range, "Control axis as lo:hi");
    c_grid->add_option("--resolution", o.resolution, "Points per axis");
    auto* c_power = app.add_subcommand("power", "Retest densities and the shaded PIV mass");
    c_power->add_option("--points", o.points, "Grid points for the density curves");
    auto* c_sim = app.add_subcommand("simulate", "Monte Carlo check of the closed form");
    c_sim->add_option("--replications", o.replications, "Monte Carlo replications");
    c_sim->add_option("--seed", o.seed, "RNG seed (default: PIV_SEED env var, then 42)");
    c_sim->add_option("--mode", o.mode, "estimator or individuals");
    c_sim->add_option("--threads", o.threads, "Worker threads (0 = automatic)");
    c_sim->add_option("--sweep", o.sweep, "Sweep treated_un over start:stop:step");
    auto* c_report = app.add_subcommand("report", "Eight-step robustness walk-through");
    c_report->add_option("--cutoff", o.cutoff, "Robustness cutoff for the verdict");

    for (CLI::App* sub : {c_piv, c_bound, c_invert, c_table, c_grid, c_power, c_sim, c_report})
        add_common(sub, o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        if (app.got_subcommand(c_piv)) return run_piv(o);
        if (app.got_subcommand(c_bound)) return run_bound(o);
        if (app.got_subcommand(c_invert)) return run_invert(o);
        if (app.got_subcommand(c_table)) return run_table(o);
        if (app.got_subcommand(c_grid)) return run_grid(o);
        if (app.got_subcommand(c_power)) return run_power(o);
        if (app.got_subcommand(c_sim)) return run_simulate(o);
        if (app.got_subcommand(c_report)) return run_report(o);
        std::cerr << "error: no subcommand\n";
        return 2;
    } catch (const piv::validation_error& e) {
        std::cerr << "validation error (field: " << e.field() << "): " << e.what() << "\n";
        return 2;
    } catch (const piv::saturation_error& e) {
        std::cerr << "degenerate value: " << e.what() << "\n";
        return 3;
    } catch (const piv::domain_error& e) {
        std::cerr << "degenerate value: " << e.what() << "\n";
        return 3;
    } catch (const std::ios_base::failure& e) {
        std::cerr << "i/o error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
