#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <doctest.h>

#include "oracle.hpp"
#include "piv/engine.hpp"
#include "piv/normal.hpp"

using piv::belief_range;
using piv::counterfactual_belief;
using piv::effect_direction;
using piv::observed_study;
using piv::threshold_spec;

namespace {

const effect_direction neg = effect_direction::negative_significant;
const effect_direction pos = effect_direction::positive_significant;

double hong_piv(double treated_un, double control_un) {
    return piv::piv(oracle::hong_study(), treated_un, control_un,
                    threshold_spec::statistical(), neg)
        .piv;
}

}  // namespace

TEST_CASE("ideal distribution mixes observed and unobserved halves") {
    const auto s = oracle::hong_study();
    const auto d = piv::ideal_distribution(s, 45.78, 45.2);
    CHECK(d.theta_t == doctest::Approx(45.224083).epsilon(1e-12));
    CHECK(d.theta_c == doctest::Approx(45.744214).epsilon(1e-12));
    CHECK(d.phi_t == 143.26 / 7639.0);
    CHECK(d.phi_c == 138.83 / 7639.0);
    CHECK(d.mean_delta() == d.theta_t - d.theta_c);
    CHECK(d.var_delta() == d.phi_t + d.phi_c);
}

TEST_CASE("standard error of the ideal estimate") {
    const auto s = oracle::hong_study();
    CHECK(piv::se_ideal(s) == std::sqrt((143.26 + 138.83) / 7639.0));
    CHECK(piv::se_ideal(s) == doctest::Approx(0.1921655752878155).epsilon(1e-15));
}

TEST_CASE("realized threshold: fixed passes through, statistical gets the sign") {
    const auto s = oracle::hong_study();
    CHECK(piv::realize_threshold(threshold_spec::fixed(-0.2), neg, s) == -0.2);
    CHECK(piv::realize_threshold(threshold_spec::fixed(-0.2), pos, s) == -0.2);

    const auto t = threshold_spec::statistical();
    const double want = 1.96 * piv::se_ideal(s);
    CHECK(piv::realize_threshold(t, pos, s) == want);
    CHECK(piv::realize_threshold(t, neg, s) == -want);
}

TEST_CASE("probit model matches the published negative-case coefficients") {
    const auto s = oracle::hong_study();
    const double threshold = piv::realize_threshold(threshold_spec::statistical(), neg, s);
    const auto m = piv::probit_model(s, threshold, neg);
    CHECK(m.coef_control_un == doctest::Approx(0.3210772788392977).epsilon(1e-13));
    CHECK(m.coef_treated_un == doctest::Approx(-4.882768407372984).epsilon(1e-13));
    CHECK(m.intercept == doctest::Approx(209.7671261466142).epsilon(1e-13));

    // Pinning the control belief folds its term into the constant.
    const double pinned_const = m.intercept + m.coef_control_un * 45.2;
    CHECK(pinned_const == doctest::Approx(224.27981915015047).epsilon(1e-12));
}

TEST_CASE("piv at the example operating points") {
    CHECK(hong_piv(45.78, 45.2) == doctest::Approx(0.7723720683730799).epsilon(1e-13));
    CHECK(hong_piv(45.78, 44.77) == doctest::Approx(0.7286112411594522).epsilon(1e-13));
    CHECK(hong_piv(45.78, 44.0) == doctest::Approx(0.641095562655543).epsilon(1e-13));
    CHECK(hong_piv(45.76, 45.2) == doctest::Approx(0.8007593941812727).epsilon(1e-13));
    CHECK(hong_piv(46.19, 45.2) == doctest::Approx(0.1046933591373575).epsilon(1e-13));
    CHECK(hong_piv(45.67, 45.2) == doctest::Approx(0.9003915757251397).epsilon(1e-13));
}

TEST_CASE("piv result carries consistent derived quantities") {
    const auto s = oracle::hong_study();
    const auto r = piv::piv(s, 45.78, 45.2, threshold_spec::statistical(), neg);
    CHECK(r.delta_hat_ideal == doctest::Approx(-0.520131).epsilon(1e-12));
    CHECK(r.se_ideal == piv::se_ideal(s));
    CHECK(r.t_ratio == r.delta_hat_ideal / r.se_ideal);
    CHECK(r.t_ratio == doctest::Approx(-2.706681460615276).epsilon(1e-12));
    CHECK(r.threshold_value == -(1.96 * r.se_ideal));
    CHECK(r.statistical);
    CHECK(r.critical == 1.96);
    CHECK(r.direction == neg);
    CHECK(r.treated_un == 45.78);
    CHECK(r.control_un == 45.2);
    CHECK_FALSE(r.saturated);
    // The reported probability is exactly the CDF of the reported probit value.
    CHECK(r.piv == piv::std_normal_cdf(r.probit_value));
    // And the probit value is the bracket form (threshold - estimate) / se.
    CHECK(r.probit_value ==
          doctest::Approx((r.threshold_value - r.delta_hat_ideal) / r.se_ideal).epsilon(1e-12));
}

TEST_CASE("affine model agrees with the bracket form on random fixtures") {
    oracle::fixture_generator gen(101);
    for (int i = 0; i < 200; ++i) {
        const auto f = gen.next(-5.0, 5.0);
        const auto r = piv::piv(f.study, f.treated_un, f.control_un, f.threshold, f.direction);
        const double sign = f.direction == pos ? 1.0 : -1.0;
        const double bracket = sign * (r.delta_hat_ideal - r.threshold_value) / r.se_ideal;
        const double scale = std::max({1.0, std::fabs(bracket), std::fabs(r.probit_value)});
        CHECK(std::fabs(r.probit_value - bracket) / scale <= 1e-12);
    }
}

TEST_CASE("piv equals the upper tail mass of the ideal estimate past the threshold") {
    // Independent reconstruction through the quadrature oracle: for a negative
    // direction the PIV is P(ideal estimate < threshold).
    const auto s = oracle::hong_study();
    const auto r = piv::piv(s, 45.78, 45.2, threshold_spec::statistical(), neg);
    const double z = (r.threshold_value - r.delta_hat_ideal) / r.se_ideal;
    CHECK(std::fabs(r.piv - oracle::normal_cdf(z)) <= 1e-12);
}

TEST_CASE("power identity links the probit to the retest t-ratio") {
    oracle::fixture_generator gen(202);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto f = gen.next(-5.0, 5.0);
        const auto r = piv::piv(f.study, f.treated_un, f.control_un, f.threshold, f.direction);
        const double via_t = piv::power_identity(r, r.critical);
        const double scale = std::max({1.0, std::fabs(r.probit_value)});
        worst = std::max(worst, std::fabs(via_t - r.probit_value) / scale);
    }
    CHECK(worst <= 1e-10);

    const auto s = oracle::hong_study();
    const auto fixed = piv::piv(s, 45.78, 45.2, threshold_spec::fixed(-0.3), neg);
    CHECK_THROWS_AS(piv::power_identity(fixed, 1.96), std::logic_error);
}

TEST_CASE("posterior route reproduces the ideal-sample law") {
    oracle::fixture_generator gen(303);
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const auto f = gen.next(-5.0, 5.0);
        worst = std::max(
            worst, piv::bayesian_posterior_check(f.study, f.treated_un, f.control_un).max_rel_err);
    }
    CHECK(worst <= 1e-12);
}

TEST_CASE("mirrored studies give bitwise-equal piv values") {
    // Negating every outcome (means, beliefs) flips the direction but leaves the
    // construction term-for-term negated, which IEEE arithmetic preserves exactly.
    oracle::fixture_generator gen(404);
    for (int i = 0; i < 200; ++i) {
        const auto f = gen.next(-5.0, 5.0);
        auto mirrored = f.study;
        mirrored.mean_treated_obs = -mirrored.mean_treated_obs;
        mirrored.mean_control_obs = -mirrored.mean_control_obs;
        const auto flipped = f.direction == pos ? neg : pos;
        const auto a = piv::piv(f.study, f.treated_un, f.control_un, f.threshold, f.direction);
        const auto b = piv::piv(mirrored, -f.treated_un, -f.control_un, f.threshold, flipped);
        CHECK(a.probit_value == b.probit_value);
        CHECK(a.piv == b.piv);
    }
}

TEST_CASE("opposite directions at a shared fixed threshold are complementary") {
    oracle::fixture_generator gen(505);
    for (int i = 0; i < 200; ++i) {
        const auto f = gen.next(-5.0, 5.0);
        const auto s = f.study;
        const double shared = piv::delta_hat_obs(s) * gen.uni(0.0, 1.0);
        const auto t = threshold_spec::fixed(shared);
        const double p_pos = piv::piv(s, f.treated_un, f.control_un, t, pos).piv;
        const double p_neg = piv::piv(s, f.treated_un, f.control_un, t, neg).piv;
        CHECK(std::fabs(p_neg - (1.0 - p_pos)) <= 1e-15);
    }
}

TEST_CASE("piv is monotone along each belief axis") {
    // Negative direction: a lower treated counterfactual mean strengthens the
    // inference; a higher control counterfactual mean strengthens it too. The
    // treated walk starts above 44.6 because below that the probit exceeds 6.5
    // and the piv saturates to exactly 1.0, where strict ordering cannot hold.
    double prev = hong_piv(44.6, 45.2);
    for (double t = 44.65; t <= 46.0; t += 0.05) {
        const double cur = hong_piv(t, 45.2);
        CHECK(cur < prev);
        prev = cur;
    }
    prev = hong_piv(45.78, 43.0);
    for (double c = 43.05; c <= 45.5; c += 0.05) {
        const double cur = hong_piv(45.78, c);
        CHECK(cur > prev);
        prev = cur;
    }
}

TEST_CASE("unconfounded beliefs reduce the ideal estimate to the observed one") {
    oracle::fixture_generator gen(606);
    for (int i = 0; i < 100; ++i) {
        const auto s = gen.next_study();
        const auto dir = piv::infer_direction(s);
        const auto r = piv::piv(s, s.mean_treated_obs, s.mean_control_obs,
                                threshold_spec::statistical(), dir);
        const double d_obs = piv::delta_hat_obs(s);
        const double scale = std::max(1.0, std::fabs(d_obs));
        CHECK(std::fabs(r.delta_hat_ideal - d_obs) / scale <= 1e-12);
    }
}

TEST_CASE("piv is invariant under rescaling of the outcome units") {
    oracle::fixture_generator gen(707);
    for (const double k : {0.01, 3.7, 1000.0}) {
        for (int i = 0; i < 50; ++i) {
            const auto f = gen.next(-5.0, 5.0);
            auto scaled = f.study;
            scaled.mean_treated_obs *= k;
            scaled.mean_control_obs *= k;
            scaled.var_treated *= k * k;
            scaled.var_control *= k * k;
            const auto a = piv::piv(f.study, f.treated_un, f.control_un, f.threshold, f.direction);
            const auto b =
                piv::piv(scaled, k * f.treated_un, k * f.control_un, f.threshold, f.direction);
            const double scale = std::max(1.0, std::fabs(a.probit_value));
            CHECK(std::fabs(a.probit_value - b.probit_value) / scale <= 1e-10);
            CHECK(std::fabs(a.piv - b.piv) <= 1e-12);
        }
    }
}

TEST_CASE("bounds sit at the correct rectangle corners") {
    const auto s = oracle::hong_study();
    counterfactual_belief b;
    b.treated_un = belief_range::interval(44.9, 45.78);
    b.control_un = belief_range::interval(44.0, 45.2);
    const auto bounds = piv::bound_piv(s, b, threshold_spec::statistical(), neg);

    // Negative direction: worst case is the highest treated / lowest control corner.
    CHECK(bounds.lower.piv == hong_piv(45.78, 44.0));
    CHECK(bounds.upper.piv == hong_piv(44.9, 45.2));
    CHECK(bounds.lower.treated_un == 45.78);
    CHECK(bounds.lower.control_un == 44.0);
    CHECK_FALSE(bounds.lower.saturated);
    CHECK(bounds.lower.piv <= bounds.upper.piv);
}

TEST_CASE("bounds dominate a brute-force grid scan") {
    oracle::fixture_generator gen(808);
    for (int i = 0; i < 20; ++i) {
        const auto f = gen.next(-3.0, 3.0);
        const double se = piv::se_ideal(f.study);
        counterfactual_belief b;
        b.treated_un =
            belief_range::interval(f.treated_un - gen.uni(0.1, 2.0) * se,
                                   f.treated_un + gen.uni(0.1, 2.0) * se);
        b.control_un =
            belief_range::interval(f.control_un - gen.uni(0.1, 2.0) * se,
                                   f.control_un + gen.uni(0.1, 2.0) * se);
        const auto bounds = piv::bound_piv(f.study, b, f.threshold, f.direction);

        double lo = 1.0, hi = 0.0;
        for (int it = 0; it <= 100; ++it) {
            const double t = *b.treated_un.lower +
                             (*b.treated_un.upper - *b.treated_un.lower) * it / 100.0;
            for (int ic = 0; ic <= 100; ++ic) {
                const double c = *b.control_un.lower +
                                 (*b.control_un.upper - *b.control_un.lower) * ic / 100.0;
                const double p = piv::piv(f.study, t, c, f.threshold, f.direction).piv;
                lo = std::min(lo, p);
                hi = std::max(hi, p);
            }
        }
        CHECK(bounds.lower.piv <= lo + 1e-12);
        CHECK(bounds.upper.piv >= hi - 1e-12);
        CHECK(std::fabs(bounds.lower.piv - lo) <= 1e-12);
        CHECK(std::fabs(bounds.upper.piv - hi) <= 1e-12);
    }
}

TEST_CASE("unbounded belief sides saturate the matching bound") {
    const auto s = oracle::hong_study();

    counterfactual_belief b;  // the example belief: treated half-line, control point
    b.treated_un.upper = 45.78;
    b.control_un = belief_range::point(45.2);
    const auto bounds = piv::bound_piv(s, b, threshold_spec::statistical(), neg);
    CHECK(bounds.lower.piv == doctest::Approx(0.7723720683730799).epsilon(1e-13));
    CHECK_FALSE(bounds.lower.saturated);
    CHECK(bounds.upper.saturated);
    CHECK(bounds.upper.piv == 1.0);
    CHECK(std::isinf(bounds.upper.probit_value));
    CHECK(bounds.upper.probit_value > 0.0);
    CHECK(std::isnan(bounds.upper.treated_un));
    CHECK(bounds.upper.control_un == 45.2);
    // An ever-lower treated counterfactual mean drives the ideal estimate down.
    CHECK(bounds.upper.delta_hat_ideal == -INFINITY);

    const counterfactual_belief open;  // nothing known at all
    const auto wide = piv::bound_piv(s, open, threshold_spec::statistical(), neg);
    CHECK(wide.lower.saturated);
    CHECK(wide.lower.piv == 0.0);
    CHECK(wide.upper.saturated);
    CHECK(wide.upper.piv == 1.0);
}

TEST_CASE("inversion finds the belief threshold for a target piv") {
    const auto s = oracle::hong_study();
    const auto t = threshold_spec::statistical();
    const auto r = piv::invert_for_treated_un(s, 45.2, 0.5, t, neg);
    CHECK(r.treated_un_threshold == doctest::Approx(45.932921744043355).epsilon(1e-10));
    CHECK(r.delta_hat_ideal == doctest::Approx(-0.3766445275641175).epsilon(1e-10));
    CHECK(r.target_piv == 0.5);
    CHECK(r.control_un == 45.2);

    // Evaluating the piv exactly at the solved point lands back on the target.
    SUBCASE("round trip over targets and fixtures") {
        for (double target = 0.1; target < 0.95; target += 0.1) {
            const auto inv = piv::invert_for_treated_un(s, 45.2, target, t, neg);
            CHECK(std::fabs(hong_piv(inv.treated_un_threshold, 45.2) - target) <= 1e-9);
        }
        oracle::fixture_generator gen(909);
        for (int i = 0; i < 50; ++i) {
            const auto f = gen.next(-3.0, 3.0);
            const double target = gen.uni(0.02, 0.98);
            const auto inv = piv::invert_for_treated_un(f.study, f.control_un, target,
                                                        f.threshold, f.direction);
            const double back = piv::piv(f.study, inv.treated_un_threshold, f.control_un,
                                         f.threshold, f.direction)
                                    .piv;
            CHECK(std::fabs(back - target) <= 1e-9);
        }
    }
}

TEST_CASE("inversion rejects out-of-range and degenerate targets") {
    const auto s = oracle::hong_study();
    const auto t = threshold_spec::statistical();
    CHECK_THROWS_AS(piv::invert_for_treated_un(s, 45.2, -0.1, t, neg), piv::validation_error);
    CHECK_THROWS_AS(piv::invert_for_treated_un(s, 45.2, 1.1, t, neg), piv::validation_error);
    CHECK_THROWS_AS(piv::invert_for_treated_un(s, 45.2, std::nan(""), t, neg),
                    piv::validation_error);
    // Targets of exactly 0 or 1 are reachable only in the limit.
    CHECK_THROWS_AS(piv::invert_for_treated_un(s, 45.2, 0.0, t, neg), piv::saturation_error);
    CHECK_THROWS_AS(piv::invert_for_treated_un(s, 45.2, 1.0, t, neg), piv::saturation_error);
}

TEST_CASE("a belief placed exactly at the inversion point gives a half-half piv") {
    const auto s = oracle::hong_study();
    const auto inv =
        piv::invert_for_treated_un(s, 45.2, 0.5, threshold_spec::statistical(), neg);
    CHECK(std::fabs(hong_piv(inv.treated_un_threshold, 45.2) - 0.5) <= 1e-10);
}

TEST_CASE("point belief inputs must be finite") {
    const auto s = oracle::hong_study();
    const auto t = threshold_spec::statistical();
    CHECK_THROWS_AS(piv::piv(s, std::nan(""), 45.2, t, neg), piv::validation_error);
    CHECK_THROWS_AS(piv::piv(s, 45.78, INFINITY, t, neg), piv::validation_error);
    try {
        piv::piv(s, std::nan(""), 45.2, t, neg);
    } catch (const piv::validation_error& e) {
        CHECK(e.field() == "treated_un");
    }
}

TEST_CASE("observed estimate crossing the threshold is reported correctly") {
    const auto s = oracle::hong_study();
    const auto t = threshold_spec::statistical();
    CHECK(piv::observed_crosses_threshold(s, t, neg));

    auto weak = s;
    weak.mean_treated_obs = 45.7;  // estimate -0.08, inside the acceptance band
    CHECK_FALSE(piv::observed_crosses_threshold(weak, t, neg));
}
