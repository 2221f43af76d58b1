#include "piv/study.hpp"

#include <cmath>
#include <sstream>

#include "piv/normal.hpp"

namespace piv {

namespace {

std::string num(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

[[noreturn]] void fail(const std::string& field, const std::string& rule, double got) {
    throw validation_error(field, field + " " + rule + " (got " + num(got) + ")");
}

void require_finite(const std::string& field, double v) {
    if (!std::isfinite(v)) fail(field, "must be finite", v);
}

}  // namespace

void validate(const observed_study& s) {
    require_finite("mean_treated_obs", s.mean_treated_obs);
    require_finite("mean_control_obs", s.mean_control_obs);
    require_finite("var_treated", s.var_treated);
    if (!(s.var_treated > 0.0)) fail("var_treated", "must be > 0", s.var_treated);
    require_finite("var_control", s.var_control);
    if (!(s.var_control > 0.0)) fail("var_control", "must be > 0", s.var_control);
    if (s.n_obs < 2)
        throw validation_error("n_obs", "n_obs must be >= 2 (got " + std::to_string(s.n_obs) + ")");
    require_finite("prop_treated", s.prop_treated);
    if (!(s.prop_treated > 0.0 && s.prop_treated < 1.0))
        fail("prop_treated", "must lie strictly between 0 and 1", s.prop_treated);
}

double delta_hat_obs(const observed_study& s) {
    return s.mean_treated_obs - s.mean_control_obs;
}

effect_direction infer_direction(const observed_study& s) {
    validate(s);
    const double d = delta_hat_obs(s);
    if (d == 0.0)
        throw domain_error(
            "direction is ambiguous: the observed effect estimate is exactly zero; "
            "specify the direction explicitly");
    return d > 0.0 ? effect_direction::positive_significant
                   : effect_direction::negative_significant;
}

namespace {

void validate_range(const char* side, const belief_range& r) {
    const std::string base(side);
    if (r.lower && !std::isfinite(*r.lower)) fail(base + ".lower", "must be finite", *r.lower);
    if (r.upper && !std::isfinite(*r.upper)) fail(base + ".upper", "must be finite", *r.upper);
    if (r.lower && r.upper && !(*r.lower <= *r.upper))
        throw validation_error(base, base + " interval must satisfy lower <= upper (got [" +
                                         num(*r.lower) + ", " + num(*r.upper) + "])");
}

}  // namespace

void validate(const counterfactual_belief& b) {
    validate_range("treated_un", b.treated_un);
    validate_range("control_un", b.control_un);
}

threshold_spec threshold_spec::fixed(double v) {
    threshold_spec t;
    t.kind = kind_t::fixed;
    t.fixed_value = v;
    return t;
}

threshold_spec threshold_spec::statistical(double alpha) {
    threshold_spec t;
    t.kind = kind_t::statistical;
    t.alpha = alpha;
    return t;
}

void validate(const threshold_spec& t) {
    if (t.kind == threshold_spec::kind_t::fixed) {
        require_finite("threshold.fixed", t.fixed_value);
        return;
    }
    if (!(t.alpha > 0.0 && t.alpha < 1.0) || !std::isfinite(t.alpha))
        fail("threshold.statistical.alpha", "must lie strictly between 0 and 1", t.alpha);
    if (t.critical) {
        if (!std::isfinite(*t.critical) || !(*t.critical > 0.0))
            fail("threshold.statistical.critical", "must be > 0", *t.critical);
    }
}

double critical_value(const threshold_spec& t) {
    validate(t);
    if (t.critical) return *t.critical;
    // The conventional rounded value for the default level; exact quantile otherwise.
    if (t.alpha == 0.05) return 1.96;
    return std_normal_quantile(1.0 - t.alpha / 2.0);
}

}  // namespace piv
