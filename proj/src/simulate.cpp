#include "piv/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <string>
#include <thread>

#include "piv/normal.hpp"

namespace piv {

const char* const rng_algorithm = "splitmix64-counter";

namespace {

// SplitMix64 evaluated at an explicit counter: output k of the seed-keyed sequence
// is mix(seed + k*gamma). Replication r owns the counter block [r*2^32, (r+1)*2^32),
// so streams never overlap and results are independent of evaluation order.
constexpr std::uint64_t gamma_step = 0x9E3779B97F4A7C15ull;

inline std::uint64_t mix64(std::uint64_t x) {
    x ^= x >> 30;
    x *= 0xBF58476D1CE4E5B9ull;
    x ^= x >> 27;
    x *= 0x94D049BB133111EBull;
    return x ^ (x >> 31);
}

// Uniform draw in the open interval (0,1): 53-bit mantissa plus a half-ulp offset.
inline double u01(std::uint64_t seed, std::uint64_t counter) {
    const std::uint64_t v = mix64(seed + counter * gamma_step);
    return std::fma(static_cast<double>(v >> 11), 0x1.0p-53, 0x1.0p-54);
}

constexpr std::size_t draw_block = 4096;

struct replication_plan {
    double mean_t = 0.0;     // theta_t
    double mean_c = 0.0;     // theta_c
    double sd_t = 0.0;       // sqrt(var_treated), individuals mode
    double sd_c = 0.0;
    double se = 0.0;         // estimator mode scale
    double threshold = 0.0;
    bool negative = false;
    std::uint64_t n = 0;     // per-arm ideal sample size
    sim_mode mode = sim_mode::sample_estimator;
};

inline bool crosses(const replication_plan& p, double d) {
    return p.negative ? d < p.threshold : d > p.threshold;
}

// Mean of `count` standard normal draws from the replication substream starting at
// counter offset `base`. Draw order inside a replication is fixed, so the sum is
// reproducible regardless of how replications are scheduled.
double standard_normal_mean(std::uint64_t seed, std::uint64_t rep, std::uint64_t base,
                            std::uint64_t count) {
    double u[draw_block];
    double z[draw_block];
    const std::uint64_t origin = rep << 32;
    double sum = 0.0;
    for (std::uint64_t done = 0; done < count;) {
        const std::size_t m = static_cast<std::size_t>(
            std::min<std::uint64_t>(draw_block, count - done));
        for (std::size_t j = 0; j < m; ++j)
            u[j] = u01(seed, origin + base + done + j);
        std_normal_quantile_batch(u, z, m);
        // Fixed-shape blocked reduction: eight independent accumulators combined in
        // a fixed tree. The order depends only on (count, draw_block), never on
        // threading, so sums stay bit-reproducible; the lanes also break the
        // add-latency chain a strict left-to-right sum would serialize on.
        double acc[8] = {0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0};
        std::size_t j = 0;
        for (; j + 8 <= m; j += 8)
            for (int k = 0; k < 8; ++k) acc[k] += z[j + k];
        for (int k = 0; j < m; ++j, ++k) acc[k] += z[j];
        const double s01 = acc[0] + acc[1], s23 = acc[2] + acc[3];
        const double s45 = acc[4] + acc[5], s67 = acc[6] + acc[7];
        sum += (s01 + s23) + (s45 + s67);
        done += m;
    }
    return sum / static_cast<double>(count);
}

std::uint64_t count_hits_individuals(const replication_plan& p, std::uint64_t seed,
                                     std::uint64_t first, std::uint64_t last) {
    std::uint64_t hits = 0;
    for (std::uint64_t r = first; r < last; ++r) {
        const double zt = standard_normal_mean(seed, r, 0, p.n);
        const double zc = standard_normal_mean(seed, r, p.n, p.n);
        const double d = (p.mean_t + p.sd_t * zt) - (p.mean_c + p.sd_c * zc);
        hits += crosses(p, d) ? 1 : 0;
    }
    return hits;
}

std::uint64_t count_hits_estimator(const replication_plan& p, std::uint64_t seed,
                                   std::uint64_t first, std::uint64_t last) {
    double u[draw_block];
    double z[draw_block];
    std::uint64_t hits = 0;
    const double mean_delta = p.mean_t - p.mean_c;
    for (std::uint64_t r = first; r < last;) {
        const std::size_t m = static_cast<std::size_t>(
            std::min<std::uint64_t>(draw_block, last - r));
        for (std::size_t j = 0; j < m; ++j) u[j] = u01(seed, (r + j) << 32);
        std_normal_quantile_batch(u, z, m);
        for (std::size_t j = 0; j < m; ++j)
            hits += crosses(p, std::fma(p.se, z[j], mean_delta)) ? 1 : 0;
        r += m;
    }
    return hits;
}

unsigned thread_budget(std::uint64_t reps) {
    unsigned t = std::thread::hardware_concurrency();
    if (const char* env = std::getenv("PIV_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) t = static_cast<unsigned>(v);
    }
    if (t < 1) t = 1;
    // No point spinning up threads for a handful of replications each.
    const std::uint64_t cap = std::max<std::uint64_t>(1, reps / 4096);
    return static_cast<unsigned>(std::min<std::uint64_t>(t, cap));
}

std::uint64_t count_hits(const replication_plan& p, std::uint64_t seed, std::uint64_t reps) {
    const unsigned threads = thread_budget(reps);
    const auto worker = [&](std::uint64_t first, std::uint64_t last) {
        return p.mode == sim_mode::sample_individuals
                   ? count_hits_individuals(p, seed, first, last)
                   : count_hits_estimator(p, seed, first, last);
    };
    if (threads == 1) return worker(0, reps);

    std::vector<std::uint64_t> partial(threads, 0);
    std::vector<std::thread> pool;
    pool.reserve(threads);
    const std::uint64_t chunk = reps / threads;
    for (unsigned i = 0; i < threads; ++i) {
        const std::uint64_t first = i * chunk;
        const std::uint64_t last = (i + 1 == threads) ? reps : first + chunk;
        pool.emplace_back([&, i, first, last] { partial[i] = worker(first, last); });
    }
    for (auto& th : pool) th.join();
    std::uint64_t hits = 0;
    for (const auto h : partial) hits += h;  // integer sum: order cannot matter
    return hits;
}

void validate_config(const sim_config& cfg, const observed_study& s) {
    if (cfg.n_replications < 1)
        throw validation_error("n_replications", "n_replications must be >= 1");
    if (cfg.n_replications > (1ull << 32))
        throw validation_error("n_replications",
                               "n_replications must fit the substream layout (<= 2^32)");
    if (cfg.mode == sim_mode::sample_individuals &&
        static_cast<std::uint64_t>(s.n_obs) * 2 >= (1ull << 32))
        throw validation_error("n_obs",
                               "sample_individuals needs 2*n_obs below 2^32 draws per replication");
}

}  // namespace

sim_result simulate_piv(const observed_study& s, double treated_un, double control_un,
                        const threshold_spec& t, effect_direction dir, const sim_config& cfg) {
    validate(s);
    validate(t);
    validate_config(cfg, s);

    const ideal_normal dist = ideal_distribution(s, treated_un, control_un);
    replication_plan p;
    p.mean_t = dist.theta_t;
    p.mean_c = dist.theta_c;
    p.sd_t = std::sqrt(s.var_treated);
    p.sd_c = std::sqrt(s.var_control);
    p.se = se_ideal(s);
    p.threshold = realize_threshold(t, dir, s);
    p.negative = dir == effect_direction::negative_significant;
    p.n = static_cast<std::uint64_t>(s.n_obs);
    p.mode = cfg.mode;

    const std::uint64_t hits = count_hits(p, cfg.seed, cfg.n_replications);
    const double n = static_cast<double>(cfg.n_replications);
    const double p_hat = static_cast<double>(hits) / n;

    sim_result out;
    out.piv_hat = p_hat;
    out.mc_stderr = std::sqrt(p_hat * (1.0 - p_hat) / n);
    out.n_replications = cfg.n_replications;
    out.seed = cfg.seed;
    out.mode = cfg.mode;
    out.threshold_value = p.threshold;
    out.direction = dir;
    return out;
}

std::vector<power_curve_row> simulate_power_curve(const observed_study& s, double control_un,
                                                  const std::vector<double>& treated_un_grid,
                                                  const threshold_spec& t, effect_direction dir,
                                                  const sim_config& cfg) {
    if (treated_un_grid.empty())
        throw validation_error("treated_un_grid", "treated_un_grid must be nonempty");
    std::vector<power_curve_row> rows;
    rows.reserve(treated_un_grid.size());
    for (const double t_un : treated_un_grid) {
        const piv_result closed = piv(s, t_un, control_un, t, dir);
        const sim_result sim = simulate_piv(s, t_un, control_un, t, dir, cfg);
        rows.push_back({t_un, closed.piv, sim.piv_hat, sim.mc_stderr, closed.t_ratio});
    }
    return rows;
}

}  // namespace piv
