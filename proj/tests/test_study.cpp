#include <cmath>
#include <functional>
#include <string>

#include <doctest.h>

#include "oracle.hpp"
#include "piv/study.hpp"

using piv::belief_range;
using piv::counterfactual_belief;
using piv::effect_direction;
using piv::observed_study;
using piv::threshold_spec;

namespace {

std::string field_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const piv::validation_error& e) {
        return e.field();
    }
    return "";
}

}  // namespace

TEST_CASE("study validation accepts the bundled example") {
    CHECK_NOTHROW(piv::validate(oracle::hong_study()));
}

TEST_CASE("study validation names the offending field") {
    auto s = oracle::hong_study();

    s.mean_treated_obs = std::nan("");
    CHECK(field_of([&] { piv::validate(s); }) == "mean_treated_obs");
    s = oracle::hong_study();

    s.mean_control_obs = INFINITY;
    CHECK(field_of([&] { piv::validate(s); }) == "mean_control_obs");
    s = oracle::hong_study();

    s.var_treated = 0.0;
    CHECK(field_of([&] { piv::validate(s); }) == "var_treated");
    s.var_treated = -3.0;
    CHECK(field_of([&] { piv::validate(s); }) == "var_treated");
    s = oracle::hong_study();

    s.var_control = -1.0;
    CHECK(field_of([&] { piv::validate(s); }) == "var_control");
    s = oracle::hong_study();

    s.n_obs = 1;
    CHECK(field_of([&] { piv::validate(s); }) == "n_obs");
    s.n_obs = 0;
    CHECK(field_of([&] { piv::validate(s); }) == "n_obs");
    s = oracle::hong_study();

    for (double bad : {0.0, 1.0, -0.3, 1.7}) {
        s.prop_treated = bad;
        CHECK(field_of([&] { piv::validate(s); }) == "prop_treated");
    }
}

TEST_CASE("study validation reports the first broken field in declaration order") {
    auto s = oracle::hong_study();
    s.var_treated = -1.0;
    s.prop_treated = 2.0;
    CHECK(field_of([&] { piv::validate(s); }) == "var_treated");
}

TEST_CASE("observed effect estimate and direction") {
    const auto s = oracle::hong_study();
    CHECK(piv::delta_hat_obs(s) == 36.77 - 45.78);
    CHECK(piv::infer_direction(s) == effect_direction::negative_significant);

    auto flipped = s;
    std::swap(flipped.mean_treated_obs, flipped.mean_control_obs);
    CHECK(piv::infer_direction(flipped) == effect_direction::positive_significant);

    auto tied = s;
    tied.mean_treated_obs = tied.mean_control_obs;
    CHECK_THROWS_AS(piv::infer_direction(tied), piv::domain_error);
}

TEST_CASE("belief ranges distinguish points, intervals, and half lines") {
    const auto p = belief_range::point(45.2);
    CHECK(p.is_point());
    CHECK(p.is_bounded());
    CHECK(*p.lower == 45.2);
    CHECK(*p.upper == 45.2);

    const auto iv = belief_range::interval(44.0, 45.2);
    CHECK_FALSE(iv.is_point());
    CHECK(iv.is_bounded());

    const auto open = belief_range::unbounded();
    CHECK_FALSE(open.is_point());
    CHECK_FALSE(open.is_bounded());
    CHECK_FALSE(open.lower.has_value());

    belief_range half;
    half.upper = 45.78;
    CHECK_FALSE(half.is_bounded());
    CHECK_FALSE(half.is_point());
}

TEST_CASE("belief validation names the side and endpoint") {
    counterfactual_belief b;
    b.treated_un.lower = std::nan("");
    CHECK(field_of([&] { piv::validate(b); }) == "treated_un.lower");

    b = {};
    b.control_un.upper = INFINITY;
    CHECK(field_of([&] { piv::validate(b); }) == "control_un.upper");

    b = {};
    b.treated_un = belief_range::interval(46.0, 45.0);
    CHECK(field_of([&] { piv::validate(b); }) == "treated_un");

    b = {};
    b.control_un = belief_range::interval(45.2, 45.2);
    CHECK_NOTHROW(piv::validate(b));
}

TEST_CASE("threshold specs validate their own parameters") {
    CHECK_NOTHROW(piv::validate(threshold_spec::fixed(-0.2)));
    CHECK(field_of([&] { piv::validate(threshold_spec::fixed(std::nan(""))); }) ==
          "threshold.fixed");

    CHECK_NOTHROW(piv::validate(threshold_spec::statistical()));
    for (double bad : {0.0, 1.0, -0.05}) {
        CHECK(field_of([&] { piv::validate(threshold_spec::statistical(bad)); }) ==
              "threshold.statistical.alpha");
    }

    auto t = threshold_spec::statistical();
    t.critical = -1.0;
    CHECK(field_of([&] { piv::validate(t); }) == "threshold.statistical.critical");
}

TEST_CASE("critical value: convention at 0.05, override wins, exact quantile otherwise") {
    // The default level uses the conventional rounded value, not the exact quantile.
    CHECK(piv::critical_value(threshold_spec::statistical()) == 1.96);

    auto t = threshold_spec::statistical();
    t.critical = 1.645;
    CHECK(piv::critical_value(t) == 1.645);
    t.alpha = 0.01;  // override still wins over a non-default alpha
    CHECK(piv::critical_value(t) == 1.645);

    // Non-default levels fall through to the exact two-sided quantile.
    const double c01 = piv::critical_value(threshold_spec::statistical(0.01));
    CHECK(std::fabs(c01 - oracle::normal_quantile(0.995)) <= 2e-12);
    const double c20 = piv::critical_value(threshold_spec::statistical(0.2));
    CHECK(std::fabs(c20 - oracle::normal_quantile(0.9)) <= 2e-12);
}
