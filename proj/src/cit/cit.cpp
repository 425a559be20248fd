#include <cmath>
#include <numeric>

#include "c2st/cit.hpp"
#include "c2st/errors.hpp"
#include "c2st/stats.hpp"

namespace c2st::cit {

namespace {

PooledData pooled_prefix(const PairedData& data, Eigen::Index k1, Eigen::Index k2) {
    const Eigen::Index p = data.dim();
    Matrix x(k1 + k2, p);
    Vector y(k1 + k2);
    std::vector<int> z(static_cast<std::size_t>(k1 + k2), 2);
    x.topRows(k1) = data.x1().topRows(k1);
    y.head(k1) = data.y1().head(k1);
    x.bottomRows(k2) = data.x2().topRows(k2);
    y.tail(k2) = data.y2().head(k2);
    std::fill(z.begin(), z.begin() + k1, 1);
    return PooledData(std::move(x), std::move(y), std::move(z));
}

// First min(n, n_bar) rows of one population, topped up with fresh draws.
std::pair<Matrix, Vector> resized(const synth::ScenarioSampler& sampler, int population, const Matrix& x,
                                  const Vector& y, Eigen::Index n_bar, Rng& rng) {
    const Eigen::Index kept = std::min(x.rows(), n_bar);
    Matrix xo(n_bar, x.cols());
    Vector yo(n_bar);
    xo.topRows(kept) = x.topRows(kept);
    yo.head(kept) = y.head(kept);
    if (n_bar > kept) {
        auto [xf, yf] = sampler.draw(population, n_bar - kept, rng);
        xo.bottomRows(n_bar - kept) = xf;
        yo.tail(n_bar - kept) = yf;
    }
    return {std::move(xo), std::move(yo)};
}

} // namespace

double gcm_statistic(const PooledData& pooled, const Regressor& f_hat, const Regressor& g_hat) {
    const Eigen::Index n = pooled.size();
    if (n < 2) throw InvalidData("GCM needs at least two observations");
    const Vector fy = f_hat.predict(pooled.x());
    const Vector gz = g_hat.predict(pooled.x());
    const Vector ry = pooled.y() - fy;
    const Vector rz = pooled.z_numeric() - gz;
    // A regression that reproduces its target leaves only rounding noise.
    const double tiny = 1e-10;
    if (ry.lpNorm<Eigen::Infinity>() <= tiny * (1.0 + pooled.y().lpNorm<Eigen::Infinity>()) ||
        rz.lpNorm<Eigen::Infinity>() <= tiny * 3.0)
        throw DegenerateVariance("GCM: a regression reproduces its target exactly");
    const Vector r = ry.array() * rz.array();
    if (!r.allFinite()) throw InvalidData("GCM: non-finite residual product");
    const double nn = static_cast<double>(n);
    const double m1 = r.sum() / nn;
    const double m2 = r.squaredNorm() / nn;
    const double var = m2 - m1 * m1;
    if (!(var > 1e-14 * m2)) throw DegenerateVariance("GCM: residual products have zero variance");
    return std::sqrt(nn) * m1 / std::sqrt(var);
}

TestOutcome gcm_test(const PooledData& pooled, const RegressorSpec& f_spec, const RegressorSpec& g_spec,
                     double alpha) {
    const std::string method = "gcm";
    const Regressor f = fit_regressor(f_spec, pooled.x(), pooled.y());
    const Regressor g = fit_regressor(g_spec, pooled.x(), pooled.z_numeric());
    try {
        const double t = gcm_statistic(pooled, f, g);
        return decide(method, t, stats::two_sided_p(t), alpha);
    } catch (const DegenerateVariance&) {
        return forced_accept(method, alpha, "degenerate_variance");
    }
}

double kstar(double epsilon, long long n1) {
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidEpsilon("epsilon must lie in (0, 1)");
    if (n1 < 1) throw InvalidData("kstar needs n1 >= 1");
    const double d = -1.5 * std::log(epsilon) / static_cast<double>(n1); // a - 1
    const double a = 1.0 + d;
    // a - sqrt(a^2 - 1) = 1 / (a + sqrt(a^2 - 1)); the second form avoids cancellation.
    return 1.0 / (a + std::sqrt(d * (a + 1.0)));
}

double default_epsilon(long long n) {
    if (n < 3) throw InvalidEpsilon("1 / log(n) is not in (0, 1) for n < 3");
    return 1.0 / std::log(static_cast<double>(n));
}

TestOutcome convert(const PairedData& data, const CitAdapter& adapter, Rng& rng) {
    if (!adapter.inner_test) throw ConfigError("converter has no inner test");
    if (!(adapter.alpha > 0.0 && adapter.alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    const long long n1 = data.n1();
    const long long n2 = data.n2();
    const long long n = n1 + n2;
    const double eps = adapter.epsilon.value_or(default_epsilon(n));
    const double k = kstar(eps, n1);
    const auto n_tilde = static_cast<long long>(std::llround(k * static_cast<double>(n)));
    const auto nt1 = static_cast<long long>(
        rng.binomial(static_cast<std::uint64_t>(n_tilde), static_cast<double>(n1) / static_cast<double>(n)));
    const long long nt2 = n_tilde - nt1;

    auto annotate = [&](TestOutcome out) {
        out.diagnostics["epsilon"] = eps;
        out.diagnostics["k_star"] = k;
        out.diagnostics["n_tilde"] = static_cast<double>(n_tilde);
        out.diagnostics["n_tilde1"] = static_cast<double>(nt1);
        out.diagnostics["n_tilde2"] = static_cast<double>(nt2);
        return out;
    };
    if (nt1 > n1 || nt2 > n2) return annotate(forced_accept("cit", adapter.alpha, "bad_event"));
    if (nt1 == 0 || nt2 == 0) return annotate(forced_accept("cit", adapter.alpha, "empty_group"));

    const PairedData shuffled = shuffle_rows(data, rng);
    const PooledData pooled = pooled_prefix(shuffled, nt1, nt2);
    return annotate(adapter.inner_test(pooled, adapter.alpha, rng));
}

CitAdapter gcm_adapter(const RegressorSpec& f_spec, const RegressorSpec& g_spec, double alpha,
                       std::optional<double> epsilon) {
    CitAdapter adapter;
    adapter.inner_test = [f_spec, g_spec](const PooledData& pooled, double a, Rng&) {
        return gcm_test(pooled, f_spec, g_spec, a);
    };
    adapter.epsilon = epsilon;
    adapter.alpha = alpha;
    return adapter;
}

CoupledPair coupled_gcm_pair(const synth::ScenarioSampler& sampler, const PairedData& data, const Regressor& f,
                             const Regressor& g, Rng& rng) {
    const Eigen::Index n1 = data.n1();
    const Eigen::Index n = n1 + data.n2();
    const auto n1_bar = static_cast<Eigen::Index>(
        rng.binomial(static_cast<std::uint64_t>(n), static_cast<double>(n1) / static_cast<double>(n)));
    const Eigen::Index n2_bar = n - n1_bar;

    CoupledPair out;
    out.n1_bar = n1_bar;
    out.t = gcm_statistic(pool(data), f, g);
    if (n1_bar == n1) {
        out.t_tilde = out.t;
        return out;
    }
    auto [x1, y1] = resized(sampler, 1, data.x1(), data.y1(), n1_bar, rng);
    auto [x2, y2] = resized(sampler, 2, data.x2(), data.y2(), n2_bar, rng);
    Matrix x(n, data.dim());
    Vector y(n);
    x.topRows(n1_bar) = x1;
    x.bottomRows(n2_bar) = x2;
    y.head(n1_bar) = y1;
    y.tail(n2_bar) = y2;
    std::vector<int> z(static_cast<std::size_t>(n), 2);
    std::fill(z.begin(), z.begin() + n1_bar, 1);
    out.t_tilde = gcm_statistic(PooledData(std::move(x), std::move(y), std::move(z)), f, g);
    return out;
}

} // namespace c2st::cit
