#include "c2st/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/normal.hpp>

namespace c2st::stats {

double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

double normal_sf(double z) { return 0.5 * std::erfc(z / std::sqrt(2.0)); }

double normal_quantile(double prob) {
    if (!(prob > 0.0 && prob < 1.0)) throw std::domain_error("normal_quantile: prob outside (0, 1)");
    return boost::math::quantile(boost::math::normal_distribution<double>(), prob);
}

double mean(std::span<const double> values) {
    if (values.empty()) throw std::invalid_argument("mean of empty sample");
    return std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(values.size());
}

double sample_variance(std::span<const double> values) {
    if (values.size() < 2) throw std::invalid_argument("sample variance needs at least two values");
    const double m = mean(values);
    double ss = 0.0;
    for (const double v : values) ss += (v - m) * (v - m);
    return ss / static_cast<double>(values.size() - 1);
}

double kolmogorov_sf(double lambda) {
    if (lambda <= 0.0) return 1.0;
    if (lambda < 0.2) return 1.0;
    // Alternating series 2 * sum (-1)^(k-1) exp(-2 k^2 lambda^2).
    double sum = 0.0;
    double sign = 1.0;
    for (int k = 1; k <= 200; ++k) {
        const double term = std::exp(-2.0 * k * k * lambda * lambda);
        sum += sign * term;
        if (term < 1e-18) break;
        sign = -sign;
    }
    return std::clamp(2.0 * sum, 0.0, 1.0);
}

KsResult ks_test_normal(std::span<const double> sample) {
    if (sample.empty()) throw std::invalid_argument("KS test on empty sample");
    std::vector<double> sorted(sample.begin(), sample.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());
    double d = 0.0;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
        const double f = normal_cdf(sorted[i]);
        d = std::max({d, (static_cast<double>(i) + 1.0) / n - f, f - static_cast<double>(i) / n});
    }
    const double root = std::sqrt(n);
    return {d, kolmogorov_sf((root + 0.12 + 0.11 / root) * d)};
}

std::pair<double, double> clopper_pearson(std::size_t successes, std::size_t trials, double level) {
    if (trials == 0) throw std::invalid_argument("clopper_pearson: zero trials");
    if (successes > trials) throw std::invalid_argument("clopper_pearson: successes > trials");
    using boost::math::binomial_distribution;
    const double tail = (1.0 - level) / 2.0;
    const auto n = static_cast<double>(trials);
    const auto k = static_cast<double>(successes);
    const double lo = binomial_distribution<>::find_lower_bound_on_p(n, k, tail);
    const double hi = binomial_distribution<>::find_upper_bound_on_p(n, k, tail);
    return {lo, hi};
}

} // namespace c2st::stats
