#pragma once

#include <span>
#include <utility>

namespace c2st::stats {

double normal_cdf(double z);

/// Upper tail 1 - Phi(z), accurate far into the tail.
double normal_sf(double z);

double normal_quantile(double prob);

/// p-value for rejecting when the statistic is large.
inline double one_sided_p(double z) { return normal_sf(z); }

/// p-value 2(1 - Phi(|z|)).
inline double two_sided_p(double z) { return 2.0 * normal_sf(z < 0 ? -z : z); }

double mean(std::span<const double> values);

/// Sample variance with the (n - 1) denominator; requires n >= 2.
double sample_variance(std::span<const double> values);

struct KsResult {
    double statistic = 0.0;
    double p_value = 1.0;
};

/// One-sample Kolmogorov-Smirnov test of `sample` against N(0, 1).
///
/// The p-value uses the asymptotic Kolmogorov distribution evaluated at
/// (sqrt(n) + 0.12 + 0.11 / sqrt(n)) * D, Stephens' finite-sample correction.
KsResult ks_test_normal(std::span<const double> sample);

/// Survival function of the Kolmogorov distribution, P(K > lambda).
double kolmogorov_sf(double lambda);

/// Exact (Clopper-Pearson) two-sided confidence interval for a binomial rate.
std::pair<double, double> clopper_pearson(std::size_t successes, std::size_t trials, double level);

} // namespace c2st::stats
