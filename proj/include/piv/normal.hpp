#pragma once

#include <cstddef>

namespace piv {

// Standard normal CDF. Saturates to exactly 0 or 1 for |z| > 8 so that huge probit
// arguments stay deterministic. Throws domain_error on non-finite input.
double std_normal_cdf(double z);

// Inverse standard normal CDF on the open interval (0, 1). Throws saturation_error
// at exactly 0 or 1, domain_error for anything else outside the interval.
double std_normal_quantile(double p);

// Batch form of std_normal_quantile over u[0..n), bit-identical per element to the
// scalar call: both share one branch-free expression graph, so the loop vectorizes.
// Inputs are validated up front; same preconditions as the scalar call.
void std_normal_quantile_batch(const double* u, double* z, std::size_t n);

}  // namespace piv
