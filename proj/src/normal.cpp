#include "piv/normal.hpp"

#include <bit>
#include <cmath>
#include <cstdint>

#include "piv/errors.hpp"

namespace piv {

namespace {

constexpr double inv_sqrt2 = 0.70710678118654752440;

// Rational approximations from Wichura's PPND16 (Algorithm AS 241, Applied
// Statistics 37, 1988), relative error below 1e-15 across the open unit interval.
constexpr double central_num[8] = {
    3.3871328727963666080e0,  1.3314166789178437745e2,
    1.9715909503065514427e3,  1.3731693765509461125e4,
    4.5921953931549871457e4,  6.7265770927008700853e4,
    3.3430575583588128105e4,  2.5090809287301226727e3};
constexpr double central_den[8] = {
    1.0,                      4.2313330701600911252e1,
    6.8718700749205790830e2,  5.3941960214247511077e3,
    2.1213794301586595867e4,  3.9307895800092710610e4,
    2.8729085735721942674e4,  5.2264952788528545610e3};
constexpr double middle_num[8] = {
    1.42343711074968357734e0, 4.6303378461565452959e0,
    5.7694972214606914055e0,  3.64784832476320460504e0,
    1.27045825245236838258e0, 2.41780725177450611770e-1,
    2.27238449892691845833e-2, 7.74545014278341407640e-4};
constexpr double middle_den[8] = {
    1.0,                      2.05319162663775882187e0,
    1.67638483018380384940e0, 6.89767334985100004550e-1,
    1.48103976427480074590e-1, 1.51986665636164571966e-2,
    5.47593808499534494600e-4, 1.05075007164441684324e-9};
constexpr double far_num[8] = {
    6.65790464350110377720e0, 5.46378491116411436990e0,
    1.78482653991729133580e0, 2.96560571828504891230e-1,
    2.65321895265761230930e-2, 1.24266094738807843860e-3,
    2.71155556874348757815e-5, 2.01033439929228813265e-7};
constexpr double far_den[8] = {
    1.0,                      5.99832206555887937690e-1,
    1.36929880922735805310e-1, 1.48753612908506148525e-2,
    7.86869131145613259100e-4, 1.84631831751005468180e-5,
    1.42151175831644588870e-7, 2.04426310338993978564e-15};

// Straight-line Horner with explicit fma: the batch loop needs a branch-free,
// unrollable body, and the explicit fma pins the rounding so the scalar and
// vectorized evaluations agree bit for bit.
inline double horner7(const double (&c)[8], double x) {
    double v = std::fma(c[7], x, c[6]);
    v = std::fma(v, x, c[5]);
    v = std::fma(v, x, c[4]);
    v = std::fma(v, x, c[3]);
    v = std::fma(v, x, c[2]);
    v = std::fma(v, x, c[1]);
    return std::fma(v, x, c[0]);
}

constexpr double ln2_hi = 6.93147180369123816490e-01;  // high bits of log 2
constexpr double ln2_lo = 1.90821492927058770002e-10;  // log 2 - ln2_hi

// Branch-free natural log for finite x > 0. Decomposes x = 2^k * m with
// m in [sqrt(1/2), sqrt(2)) and sums the odd atanh series in f = (m-1)/(m+1),
// f^2 <= 0.0295. Absolute error stays below ~5e-15 even at the subnormal end,
// which the quantile tail dilutes further (an error dL in log p moves the
// quantile by about dL / |z|). Exists because the tail path must vectorize;
// every operation here maps to SIMD arithmetic, unlike a libm call.
inline double log_positive(double x) {
    const bool tiny = x < 0x1p-1022;
    const double xs = tiny ? x * 0x1p52 : x;
    const double kadj = tiny ? 52.0 : 0.0;
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(xs);
    constexpr std::uint64_t sqrt_half_bits = 0x3fe6a09e667f3bcdULL;
    const std::int64_t k = static_cast<std::int64_t>(bits - sqrt_half_bits) >> 52;
    const double m = std::bit_cast<double>(bits - (static_cast<std::uint64_t>(k) << 52));
    const double kd = static_cast<double>(k) - kadj;
    const double f = (m - 1.0) / (m + 1.0);
    const double w = f * f;
    double p = 1.0 / 21.0;
    p = std::fma(p, w, 1.0 / 19.0);
    p = std::fma(p, w, 1.0 / 17.0);
    p = std::fma(p, w, 1.0 / 15.0);
    p = std::fma(p, w, 1.0 / 13.0);
    p = std::fma(p, w, 1.0 / 11.0);
    p = std::fma(p, w, 1.0 / 9.0);
    p = std::fma(p, w, 1.0 / 7.0);
    p = std::fma(p, w, 1.0 / 5.0);
    p = std::fma(p, w, 1.0 / 3.0);
    p = std::fma(p, w, 1.0);
    const double log_m = 2.0 * f * p;
    const double lo = std::fma(kd, ln2_lo, log_m);
    return std::fma(kd, ln2_hi, lo);  // kd * ln2_hi is exact: |kd| < 2^11
}

// Both branch candidates are always evaluated and blended, and a single division
// finishes the selected rational. One expression graph serves the scalar and the
// batch path, which is what makes them bit-identical; it also keeps the division
// count at one per value, the limiting resource once the loop vectorizes.
// Central branch: |q| <= 0.425 with q = p - 0.5. Tail branches: r = sqrt(-log pmin),
// split at r = 5.
inline double quantile_value(double p, double q) {
    const double rc = std::fma(-q, q, 0.180625);
    const double central_n = q * horner7(central_num, rc);
    const double central_d = horner7(central_den, rc);

    const double pmin = (q < 0.0) ? p : 1.0 - p;
    const double r = std::sqrt(-log_positive(pmin));
    const bool mid = r <= 5.0;
    const double s = mid ? r - 1.6 : r - 5.0;
    double tail_n = mid ? horner7(middle_num, s) : horner7(far_num, s);
    const double tail_d = mid ? horner7(middle_den, s) : horner7(far_den, s);
    tail_n = (q < 0.0) ? -tail_n : tail_n;

    const bool central = std::fabs(q) <= 0.425;
    const double num = central ? central_n : tail_n;
    const double den = central ? central_d : tail_d;
    return num / den;
}

[[noreturn]] void reject_probability(double p) {
    if (p == 0.0 || p == 1.0)
        throw saturation_error("std_normal_quantile: p of exactly 0 or 1 has no finite quantile");
    throw domain_error("std_normal_quantile: p must lie strictly inside (0, 1)");
}

}  // namespace

double std_normal_cdf(double z) {
    if (!std::isfinite(z)) throw domain_error("std_normal_cdf: non-finite input");
    if (z > 8.0) return 1.0;
    if (z < -8.0) return 0.0;
    const double upper_half = 0.5 * std::erfc(std::fabs(z) * inv_sqrt2);
    return (z >= 0.0) ? 1.0 - upper_half : upper_half;
}

double std_normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) reject_probability(p);
    return quantile_value(p, p - 0.5);
}

void std_normal_quantile_batch(const double* u, double* z, std::size_t n) {
    // Validate up front so the main loop stays branch-free. NaN fails both
    // comparisons, so bad input cannot slip through.
    std::size_t ok = 0;
    for (std::size_t i = 0; i < n; ++i)
        ok += static_cast<std::size_t>((u[i] > 0.0) & (u[i] < 1.0));
    if (ok != n)
        for (std::size_t i = 0; i < n; ++i)
            if (!(u[i] > 0.0 && u[i] < 1.0)) reject_probability(u[i]);

    // Same expression graph as the scalar path, so each element equals
    // std_normal_quantile(u[i]) bit for bit.
    for (std::size_t i = 0; i < n; ++i)
        z[i] = quantile_value(u[i], u[i] - 0.5);
}

}  // namespace piv
