#include "piv/engine.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "piv/normal.hpp"

namespace piv {

namespace {

void require_point(const char* field, double v) {
    if (!std::isfinite(v))
        throw validation_error(field, std::string(field) + " must be a finite point belief");
}

bool is_positive(effect_direction d) { return d == effect_direction::positive_significant; }

}  // namespace

ideal_normal ideal_distribution(const observed_study& s, double treated_un, double control_un) {
    validate(s);
    require_point("treated_un", treated_un);
    require_point("control_un", control_un);
    const double pi = s.prop_treated;
    const double n = static_cast<double>(s.n_obs);
    return {(1.0 - pi) * treated_un + pi * s.mean_treated_obs,
            pi * control_un + (1.0 - pi) * s.mean_control_obs,
            s.var_treated / n,
            s.var_control / n};
}

double se_ideal(const observed_study& s) {
    validate(s);
    return std::sqrt((s.var_treated + s.var_control) / static_cast<double>(s.n_obs));
}

double realize_threshold(const threshold_spec& t, effect_direction dir, const observed_study& s) {
    validate(t);
    if (t.kind == threshold_spec::kind_t::fixed) return t.fixed_value;
    const double c = critical_value(t) * se_ideal(s);
    return is_positive(dir) ? c : -c;
}

affine_probit probit_model(const observed_study& s, double threshold, effect_direction dir) {
    validate(s);
    if (!std::isfinite(threshold))
        throw validation_error("threshold", "realized threshold must be finite");
    const double k = 1.0 / se_ideal(s);
    const double pi = s.prop_treated;
    // Positive case: k * [(1-pi)*t_un - pi*c_un + (m_t + m_c)*pi - m_c - threshold].
    double coef_t = (1.0 - pi) * k;
    double coef_c = -pi * k;
    double intercept =
        ((s.mean_treated_obs + s.mean_control_obs) * pi - s.mean_control_obs - threshold) * k;
    if (!is_positive(dir)) {
        // The negative case is the exact negation, threshold included.
        coef_t = -coef_t;
        coef_c = -coef_c;
        intercept = -intercept;
    }
    return {coef_t, coef_c, intercept};
}

double probit_piv(const observed_study& s, double treated_un, double control_un,
                  double threshold, effect_direction dir) {
    require_point("treated_un", treated_un);
    require_point("control_un", control_un);
    return probit_model(s, threshold, dir).at(treated_un, control_un);
}

piv_result piv(const observed_study& s, double treated_un, double control_un,
               const threshold_spec& t, effect_direction dir) {
    validate(s);
    validate(t);
    require_point("treated_un", treated_un);
    require_point("control_un", control_un);

    piv_result r;
    r.direction = dir;
    r.statistical = t.kind == threshold_spec::kind_t::statistical;
    r.critical = r.statistical ? critical_value(t) : 0.0;
    r.se_ideal = se_ideal(s);
    r.threshold_value = realize_threshold(t, dir, s);
    r.treated_un = treated_un;
    r.control_un = control_un;

    const ideal_normal dist = ideal_distribution(s, treated_un, control_un);
    r.delta_hat_ideal = dist.mean_delta();
    r.t_ratio = r.delta_hat_ideal / r.se_ideal;
    r.probit_value = probit_piv(s, treated_un, control_un, r.threshold_value, dir);
    r.piv = std_normal_cdf(r.probit_value);
    return r;
}

namespace {

// Limit of the PIV when the deciding belief side is unbounded.
piv_result saturated_result(const piv_result& shared, bool at_one, double treated_un,
                            double control_un) {
    piv_result r = shared;
    const double inf = std::numeric_limits<double>::infinity();
    r.piv = at_one ? 1.0 : 0.0;
    r.probit_value = at_one ? inf : -inf;
    r.treated_un = treated_un;
    r.control_un = control_un;
    // The ideal estimate runs away with the unbounded belief.
    const bool delta_up = at_one == is_positive(r.direction);
    r.delta_hat_ideal = delta_up ? inf : -inf;
    r.t_ratio = r.delta_hat_ideal / r.se_ideal;
    r.saturated = true;
    return r;
}

}  // namespace

piv_bounds bound_piv(const observed_study& s, const counterfactual_belief& b,
                     const threshold_spec& t, effect_direction dir) {
    validate(s);
    validate(b);
    validate(t);

    // Positive case: probit increasing in treated_un, decreasing in control_un;
    // the negative case swaps the roles. Extrema sit at the rectangle corners.
    const bool pos = is_positive(dir);
    const std::optional<double> t_min = pos ? b.treated_un.lower : b.treated_un.upper;
    const std::optional<double> c_min = pos ? b.control_un.upper : b.control_un.lower;
    const std::optional<double> t_max = pos ? b.treated_un.upper : b.treated_un.lower;
    const std::optional<double> c_max = pos ? b.control_un.lower : b.control_un.upper;

    // A template result carrying the shared scalars for saturated corners.
    piv_result shared;
    shared.direction = dir;
    shared.statistical = t.kind == threshold_spec::kind_t::statistical;
    shared.critical = shared.statistical ? critical_value(t) : 0.0;
    shared.se_ideal = se_ideal(s);
    shared.threshold_value = realize_threshold(t, dir, s);

    const double nan = std::numeric_limits<double>::quiet_NaN();
    piv_bounds out;
    if (t_min && c_min)
        out.lower = piv(s, *t_min, *c_min, t, dir);
    else
        out.lower = saturated_result(shared, false, t_min ? *t_min : nan, c_min ? *c_min : nan);
    if (t_max && c_max)
        out.upper = piv(s, *t_max, *c_max, t, dir);
    else
        out.upper = saturated_result(shared, true, t_max ? *t_max : nan, c_max ? *c_max : nan);
    return out;
}

inversion_result invert_for_treated_un(const observed_study& s, double control_un,
                                       double target_piv, const threshold_spec& t,
                                       effect_direction dir) {
    validate(s);
    validate(t);
    require_point("control_un", control_un);
    if (std::isnan(target_piv) || target_piv < 0.0 || target_piv > 1.0)
        throw validation_error("target_piv", "target_piv must lie in [0, 1]");
    // std_normal_quantile raises the saturation error for exactly 0 or 1.
    const double z = std_normal_quantile(target_piv);
    const double threshold = realize_threshold(t, dir, s);
    const affine_probit m = probit_model(s, threshold, dir);

    inversion_result r;
    r.target_piv = target_piv;
    r.control_un = control_un;
    r.treated_un_threshold = (z - m.coef_control_un * control_un - m.intercept) / m.coef_treated_un;
    r.delta_hat_ideal = ideal_distribution(s, r.treated_un_threshold, control_un).mean_delta();
    return r;
}

double power_identity(const piv_result& r, double critical) {
    if (!r.statistical)
        throw std::logic_error(
            "power_identity applies only to statistical-threshold results; "
            "a fixed threshold has no critical value");
    return is_positive(r.direction) ? r.t_ratio - critical : -r.t_ratio - critical;
}

posterior_check bayesian_posterior_check(const observed_study& s, double treated_un,
                                         double control_un) {
    const ideal_normal direct = ideal_distribution(s, treated_un, control_un);

    const double n = static_cast<double>(s.n_obs);
    const double n_t = s.prop_treated * n;          // observed treated half
    const double n_c = (1.0 - s.prop_treated) * n;  // observed control half

    // Treated arm: prior on the arm mean centered at the unobserved half
    // (precision n_c/var), updated by the n_t observed outcomes.
    const double prior_prec_t = n_c / s.var_treated;
    const double like_prec_t = n_t / s.var_treated;
    const double post_prec_t = prior_prec_t + like_prec_t;
    const double post_mean_t =
        (prior_prec_t * treated_un + like_prec_t * s.mean_treated_obs) / post_prec_t;

    // Control arm: the halves swap roles.
    const double prior_prec_c = n_t / s.var_control;
    const double like_prec_c = n_c / s.var_control;
    const double post_prec_c = prior_prec_c + like_prec_c;
    const double post_mean_c =
        (prior_prec_c * control_un + like_prec_c * s.mean_control_obs) / post_prec_c;

    posterior_check out;
    out.direct = direct;
    out.posterior = {post_mean_t, post_mean_c, 1.0 / post_prec_t, 1.0 / post_prec_c};

    const auto rel = [](double a, double b) {
        const double scale = std::max({std::fabs(a), std::fabs(b), 1.0});
        return std::fabs(a - b) / scale;
    };
    out.max_rel_err = std::max({rel(direct.theta_t, out.posterior.theta_t),
                                rel(direct.theta_c, out.posterior.theta_c),
                                rel(direct.phi_t, out.posterior.phi_t),
                                rel(direct.phi_c, out.posterior.phi_c),
                                rel(direct.mean_delta(), out.posterior.mean_delta()),
                                rel(direct.var_delta(), out.posterior.var_delta())});
    return out;
}

bool observed_crosses_threshold(const observed_study& s, const threshold_spec& t,
                                effect_direction dir) {
    const double threshold = realize_threshold(t, dir, s);
    const double d = delta_hat_obs(s);
    return is_positive(dir) ? d > threshold : d < threshold;
}

}  // namespace piv
