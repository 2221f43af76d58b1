#pragma once

#include "piv/study.hpp"

namespace piv {

// Normal law of the ideal-sample (observed + counterfactual) arm means.
// Each ideal arm has the full size n_obs, so both sampling variances divide by n_obs.
struct ideal_normal {
    double theta_t;  // (1-pi)*treated_un + pi*mean_treated_obs
    double theta_c;  // pi*control_un + (1-pi)*mean_control_obs
    double phi_t;    // var_treated / n_obs
    double phi_c;    // var_control / n_obs

    double mean_delta() const { return theta_t - theta_c; }
    double var_delta() const { return phi_t + phi_c; }
};

ideal_normal ideal_distribution(const observed_study& s, double treated_un, double control_un);

// Standard error of the ideal-sample effect estimate: sqrt((var_t + var_c)/n_obs).
double se_ideal(const observed_study& s);

// Realized decision threshold: a fixed value as-is; statistical thresholds are
// +critical*se_ideal for positive effects and -critical*se_ideal for negative ones.
double realize_threshold(const threshold_spec& t, effect_direction dir, const observed_study& s);

// probit(PIV) as an affine function of the two unobserved means. For positive effects
// the treated coefficient is +(1-pi)/se and the control coefficient is -pi/se; the
// negative case negates all three terms (with the same realized threshold).
struct affine_probit {
    double coef_treated_un;
    double coef_control_un;
    double intercept;

    double at(double treated_un, double control_un) const {
        return coef_treated_un * treated_un + coef_control_un * control_un + intercept;
    }
};

affine_probit probit_model(const observed_study& s, double threshold, effect_direction dir);

double probit_piv(const observed_study& s, double treated_un, double control_un,
                  double threshold, effect_direction dir);

// Closed-form PIV at one belief point, with the quantities behind it.
struct piv_result {
    double piv = 0.0;              // probability the ideal-sample retest crosses the threshold
    double probit_value = 0.0;
    double delta_hat_ideal = 0.0;  // theta_t - theta_c
    double se_ideal = 0.0;
    double t_ratio = 0.0;          // delta_hat_ideal / se_ideal
    double threshold_value = 0.0;  // realized threshold
    effect_direction direction = effect_direction::positive_significant;
    bool statistical = false;      // threshold came from a statistical spec
    double critical = 0.0;         // resolved critical value when statistical
    double treated_un = 0.0;       // belief point the result was evaluated at
    double control_un = 0.0;
    bool saturated = false;        // limit of an unbounded belief side (piv exactly 0 or 1)
};

piv_result piv(const observed_study& s, double treated_un, double control_un,
               const threshold_spec& t, effect_direction dir);

// PIV bounds over a belief rectangle. The probit is affine with direction-determined
// coefficient signs, so the extrema sit at corners; an unbounded side saturates the
// corresponding bound to exactly 0 or 1.
struct piv_bounds {
    piv_result lower;
    piv_result upper;
};

piv_bounds bound_piv(const observed_study& s, const counterfactual_belief& b,
                     const threshold_spec& t, effect_direction dir);

// Treated-arm unobserved mean at which the PIV equals target_piv, for a given
// control_un, together with the implied ideal-sample estimate.
struct inversion_result {
    double treated_un_threshold = 0.0;
    double delta_hat_ideal = 0.0;
    double target_piv = 0.0;
    double control_un = 0.0;
};

inversion_result invert_for_treated_un(const observed_study& s, double control_un,
                                       double target_piv, const threshold_spec& t,
                                       effect_direction dir);

// probit(PIV) recovered from the retest t-ratio: T - critical for positive effects,
// -T - critical for negative ones. Throws std::logic_error on a fixed-threshold result.
double power_identity(const piv_result& r, double critical);

// Conjugate-normal route to the ideal-sample law. The prior for each arm's mean sits
// on the unobserved half (variance var/other-half size) and the likelihood on the
// observed half; the posterior must coincide with ideal_distribution.
struct posterior_check {
    ideal_normal direct;     // moment route
    ideal_normal posterior;  // prior + likelihood route
    double max_rel_err;      // max over the four parameters and the delta mean/variance,
                             // each scaled by max(|a|, |b|, 1)
};

posterior_check bayesian_posterior_check(const observed_study& s, double treated_un,
                                         double control_un);

// True when the observed estimate itself crosses the realized threshold; a false
// return warrants a warning, since the retest probability presumes a prior rejection.
bool observed_crosses_threshold(const observed_study& s, const threshold_spec& t,
                                effect_direction dir);

}  // namespace piv
