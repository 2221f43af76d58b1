#include "piv/config.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace piv {

namespace {

using json = nlohmann::json;

[[noreturn]] void bad(const std::string& path, const std::string& why) {
    throw validation_error(path, path + ": " + why);
}

void reject_unknown_keys(const json& obj, const std::string& path,
                         std::initializer_list<const char*> allowed) {
    for (const auto& [key, value] : obj.items()) {
        bool known = false;
        for (const char* a : allowed) known = known || key == a;
        if (!known) bad(path + "." + key, "unknown field");
    }
}

const json& require_object(const json& obj, const std::string& path) {
    if (!obj.is_object()) bad(path, "must be a JSON object");
    return obj;
}

double get_number(const json& obj, const std::string& path, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) bad(path + "." + key, "missing required field");
    if (!it->is_number()) bad(path + "." + key, "must be a number");
    return it->get<double>();
}

std::optional<double> get_optional_number(const json& obj, const std::string& path,
                                          const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) return std::nullopt;
    if (!it->is_number()) bad(path + "." + key, "must be a number");
    return it->get<double>();
}

std::int64_t get_integer(const json& obj, const std::string& path, const char* key) {
    const auto it = obj.find(key);
    if (it == obj.end()) bad(path + "." + key, "missing required field");
    if (!it->is_number_integer()) bad(path + "." + key, "must be an integer");
    return it->get<std::int64_t>();
}

observed_study parse_study(const json& j) {
    const std::string path = "study";
    require_object(j, path);
    reject_unknown_keys(j, path,
                        {"mean_treated_obs", "mean_control_obs", "var_treated", "var_control",
                         "n_obs", "prop_treated"});
    observed_study s;
    s.mean_treated_obs = get_number(j, path, "mean_treated_obs");
    s.mean_control_obs = get_number(j, path, "mean_control_obs");
    s.var_treated = get_number(j, path, "var_treated");
    s.var_control = get_number(j, path, "var_control");
    s.n_obs = get_integer(j, path, "n_obs");
    s.prop_treated = get_number(j, path, "prop_treated");
    return s;
}

belief_range parse_range(const json& j, const std::string& path) {
    require_object(j, path);
    reject_unknown_keys(j, path, {"point", "lower", "upper"});
    const auto point = get_optional_number(j, path, "point");
    const auto lower = get_optional_number(j, path, "lower");
    const auto upper = get_optional_number(j, path, "upper");
    if (point && (lower || upper))
        bad(path, "give either a point or lower/upper endpoints, not both");
    if (point) return belief_range::point(*point);
    belief_range r;
    r.lower = lower;
    r.upper = upper;
    return r;
}

counterfactual_belief parse_belief(const json& j) {
    const std::string path = "belief";
    require_object(j, path);
    reject_unknown_keys(j, path, {"treated_un", "control_un"});
    counterfactual_belief b;
    if (const auto it = j.find("treated_un"); it != j.end())
        b.treated_un = parse_range(*it, path + ".treated_un");
    if (const auto it = j.find("control_un"); it != j.end())
        b.control_un = parse_range(*it, path + ".control_un");
    return b;
}

threshold_spec parse_threshold(const json& j) {
    const std::string path = "threshold";
    require_object(j, path);
    reject_unknown_keys(j, path, {"fixed", "statistical"});
    const bool has_fixed = j.contains("fixed");
    const bool has_statistical = j.contains("statistical");
    if (has_fixed == has_statistical)
        bad(path, "give exactly one of \"fixed\" or \"statistical\"");
    if (has_fixed) {
        if (!j["fixed"].is_number()) bad(path + ".fixed", "must be a number");
        return threshold_spec::fixed(j["fixed"].get<double>());
    }
    const json& st = j["statistical"];
    const std::string spath = path + ".statistical";
    require_object(st, spath);
    reject_unknown_keys(st, spath, {"alpha", "critical"});
    threshold_spec t = threshold_spec::statistical();
    if (const auto alpha = get_optional_number(st, spath, "alpha")) t.alpha = *alpha;
    t.critical = get_optional_number(st, spath, "critical");
    return t;
}

direction_choice parse_direction(const json& j) {
    if (!j.is_string()) bad("direction", "must be one of \"auto\", \"positive\", \"negative\"");
    const std::string v = j.get<std::string>();
    if (v == "auto") return direction_choice::automatic;
    if (v == "positive") return direction_choice::positive;
    if (v == "negative") return direction_choice::negative;
    bad("direction", "must be one of \"auto\", \"positive\", \"negative\" (got \"" + v + "\")");
}

}  // namespace

analysis_config parse_config_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw validation_error("config", std::string("config is not valid JSON: ") + e.what());
    }
    require_object(j, "config");
    reject_unknown_keys(j, "config", {"study", "belief", "threshold", "direction"});
    if (!j.contains("study")) bad("study", "missing required field");

    analysis_config c;
    c.study = parse_study(j["study"]);
    if (j.contains("belief")) c.belief = parse_belief(j["belief"]);
    if (j.contains("threshold")) c.threshold = parse_threshold(j["threshold"]);
    if (j.contains("direction")) c.direction = parse_direction(j["direction"]);
    return c;
}

analysis_config load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::ios_base::failure("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad()) throw std::ios_base::failure("cannot read config file: " + path);
    return parse_config_json(buf.str());
}

effect_direction resolve_direction(const analysis_config& c) {
    switch (c.direction) {
        case direction_choice::positive: return effect_direction::positive_significant;
        case direction_choice::negative: return effect_direction::negative_significant;
        case direction_choice::automatic: break;
    }
    return infer_direction(c.study);
}

const char* direction_name(effect_direction d) {
    return d == effect_direction::positive_significant ? "positive" : "negative";
}

}  // namespace piv
