#pragma once

#include <cstdint>
#include <optional>

#include "piv/errors.hpp"

namespace piv {

// Summary statistics of an observed two-arm study.
struct observed_study {
    double mean_treated_obs = 0.0;
    double mean_control_obs = 0.0;
    double var_treated = 0.0;   // within-arm outcome variance, treated
    double var_control = 0.0;   // within-arm outcome variance, control
    std::int64_t n_obs = 0;     // total observed sample size
    double prop_treated = 0.0;  // share of the observed sample in the treated arm
};

// Throws validation_error naming the first offending field.
// Rules: finite means and proportions, var_* > 0, n_obs >= 2, 0 < prop_treated < 1.
void validate(const observed_study& s);

// Observed effect estimate: mean_treated_obs - mean_control_obs.
double delta_hat_obs(const observed_study& s);

enum class effect_direction { positive_significant, negative_significant };

// Direction implied by the sign of the observed estimate. Throws domain_error when
// the estimate is exactly zero; callers may override with an explicit direction.
effect_direction infer_direction(const observed_study& s);

// One side of the belief about the unobserved half: a point, a closed interval,
// or a half line. A missing endpoint means that side is unbounded.
struct belief_range {
    std::optional<double> lower;
    std::optional<double> upper;

    static belief_range point(double v) { return {v, v}; }
    static belief_range interval(double lo, double hi) { return {lo, hi}; }
    static belief_range unbounded() { return {}; }

    bool is_point() const { return lower && upper && *lower == *upper; }
    bool is_bounded() const { return lower.has_value() && upper.has_value(); }
};

// Beliefs about the two unobserved arm means.
struct counterfactual_belief {
    belief_range treated_un;  // mean counterfactual treated outcome of control subjects
    belief_range control_un;  // mean counterfactual control outcome of treated subjects
};

// Given endpoints must be finite and ordered lower <= upper.
void validate(const counterfactual_belief& b);

// Decision threshold: a fixed effect size, or a statistical cutoff +-critical*se_ideal.
// `critical`, when set, overrides the alpha lookup (e.g. 1.645 for a one-sided test).
struct threshold_spec {
    enum class kind_t { fixed, statistical };

    kind_t kind = kind_t::statistical;
    double fixed_value = 0.0;
    double alpha = 0.05;
    std::optional<double> critical;

    static threshold_spec fixed(double v);
    static threshold_spec statistical(double alpha = 0.05);
};

void validate(const threshold_spec& t);

// Resolved critical value: the explicit override when present; the conventional 1.96
// for the default alpha = 0.05; otherwise the exact two-sided normal quantile.
double critical_value(const threshold_spec& t);

}  // namespace piv
