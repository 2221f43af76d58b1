#pragma once

#include <cstdint>
#include <vector>

#include "piv/engine.hpp"

namespace piv {

// sample_estimator draws the ideal-sample estimate directly from its normal law;
// sample_individuals draws n_obs outcomes per ideal arm and recomputes the estimate.
enum class sim_mode { sample_estimator, sample_individuals };

struct sim_config {
    std::uint64_t n_replications = 1'000'000;
    std::uint64_t seed = 42;
    sim_mode mode = sim_mode::sample_estimator;
};

extern const char* const rng_algorithm;  // documented generator name for output metadata

struct sim_result {
    double piv_hat = 0.0;
    double mc_stderr = 0.0;  // sqrt(p(1-p)/n) at p = piv_hat
    std::uint64_t n_replications = 0;
    std::uint64_t seed = 0;
    sim_mode mode = sim_mode::sample_estimator;
    double threshold_value = 0.0;
    effect_direction direction = effect_direction::positive_significant;
};

// Monte Carlo estimate of the PIV: the fraction of replications whose retest estimate
// crosses the realized threshold in the significant direction. Replication r consumes
// a dedicated counter-based substream, so the result depends only on (seed, config)
// and not on evaluation order or thread count.
sim_result simulate_piv(const observed_study& s, double treated_un, double control_un,
                        const threshold_spec& t, effect_direction dir, const sim_config& cfg);

struct power_curve_row {
    double treated_un = 0.0;
    double piv_closed = 0.0;
    double piv_sim = 0.0;
    double mc_stderr = 0.0;
    double t_ratio = 0.0;
};

// Sweeps treated_un over the grid, reusing the same substreams at every point
// (common random numbers), which preserves monotonicity in the simulated column.
std::vector<power_curve_row> simulate_power_curve(const observed_study& s, double control_un,
                                                  const std::vector<double>& treated_un_grid,
                                                  const threshold_spec& t, effect_direction dir,
                                                  const sim_config& cfg);

}  // namespace piv
