#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "c2st/cit.hpp"
#include "c2st/errors.hpp"
#include "c2st/stats.hpp"
#include "c2st/synth.hpp"

using namespace c2st;
using namespace c2st::cit;

namespace {

synth::ScenarioConfig s1u_null(int n) {
    synth::ScenarioConfig cfg;
    cfg.n = n;
    return cfg;
}

InnerTest constant_inner(bool reject) {
    return [reject](const PooledData&, double alpha, Rng&) {
        return decide("stub", 0.0, reject ? 0.0 : 1.0, alpha);
    };
}

PairedData small_pair(int n1, int n2, Rng& r) {
    Matrix x1(n1, 2), x2(n2, 2);
    Vector y1(n1), y2(n2);
    for (int i = 0; i < n1; ++i) {
        x1.row(i) << r.normal(), r.normal();
        y1(i) = r.normal();
    }
    for (int i = 0; i < n2; ++i) {
        x2.row(i) << r.normal(), r.normal();
        y2(i) = r.normal();
    }
    return PairedData(x1, y1, x2, y2);
}

} // namespace

TEST(Kstar, DefiningEquation) {
    Rng r(1, 0);
    for (int t = 0; t < 100; ++t) {
        const double eps = 1e-6 + (1.0 - 2e-6) * r.uniform();
        const long long n1 = 1 + static_cast<long long>(r.uniform_index(100000));
        const double k = kstar(eps, n1);
        ASSERT_GT(k, 0.0);
        ASSERT_LT(k, 1.0);
        const double lhs = double(n1) * k * (1.0 / k - 1.0) * (1.0 / k - 1.0) / 3.0;
        EXPECT_NEAR(lhs / -std::log(eps), 1.0, 1e-10);
    }
}

TEST(Kstar, ClosedFormAndLimits) {
    // eps = e^-1, n1 = 2: a = 1 + 3/4.
    EXPECT_NEAR(kstar(std::exp(-1.0), 2), 1.75 - std::sqrt(1.75 * 1.75 - 1.0), 1e-14);
    EXPECT_GT(kstar(0.05, 1000000), 0.99);
    EXPECT_LT(kstar(0.05, 100), kstar(0.05, 1000));
    EXPECT_THROW(kstar(0.0, 10), InvalidEpsilon);
    EXPECT_THROW(kstar(1.0, 10), InvalidEpsilon);
    EXPECT_NEAR(default_epsilon(4000), 1.0 / std::log(4000.0), 1e-15);
}

TEST(Convert, BadEventFrequencyBound) {
    Rng r(2, 0);
    const PairedData d = small_pair(500, 500, r);
    CitAdapter a;
    a.inner_test = constant_inner(false);
    a.epsilon = 0.05;
    int bad = 0;
    const int trials = 10000;
    for (int t = 0; t < trials; ++t) bad += convert(d, a, r).diagnostics.count("bad_event");
    const double rate = bad / double(trials);
    EXPECT_LE(rate, 2 * 0.05 + 3.0 * std::sqrt(0.1 * 0.9 / trials));
}

TEST(Convert, TinyEpsilonNeverBad) {
    Rng r(3, 0);
    const PairedData d = small_pair(50, 50, r);
    CitAdapter a;
    a.inner_test = constant_inner(false);
    a.epsilon = 1e-8;
    for (int t = 0; t < 1000; ++t) {
        const auto out = convert(d, a, r);
        EXPECT_EQ(out.diagnostics.count("bad_event"), 0u);
        EXPECT_LT(out.diagnostics.at("n_tilde"), 60.0);
    }
}

TEST(Convert, PropagatesInnerRejection) {
    Rng r(4, 0);
    const PairedData d = small_pair(200, 200, r);
    CitAdapter a;
    a.inner_test = constant_inner(true);
    a.epsilon = 1e-6;
    const auto out = convert(d, a, r);
    EXPECT_TRUE(out.reject);
    EXPECT_DOUBLE_EQ(out.diagnostics.at("n_tilde1") + out.diagnostics.at("n_tilde2"), out.diagnostics.at("n_tilde"));
}

TEST(Convert, InnerSeesRequestedCounts) {
    Rng r(5, 0);
    const PairedData d = small_pair(300, 100, r);
    CitAdapter a;
    Eigen::Index seen1 = -1, seen2 = -1;
    a.inner_test = [&](const PooledData& p, double alpha, Rng&) {
        seen1 = p.count(1);
        seen2 = p.count(2);
        return decide("stub", 0.0, 1.0, alpha);
    };
    const auto out = convert(d, a, r);
    if (!out.forced_acceptance()) {
        EXPECT_EQ(double(seen1), out.diagnostics.at("n_tilde1"));
        EXPECT_EQ(double(seen2), out.diagnostics.at("n_tilde2"));
    }
    EXPECT_NEAR(out.diagnostics.at("epsilon"), 1.0 / std::log(400.0), 1e-15);
    EXPECT_EQ(out.diagnostics.at("n_tilde"), std::round(kstar(1.0 / std::log(400.0), 300) * 400.0));
}

TEST(Convert, PreservesLevel) {
    CitAdapter a;
    a.inner_test = [](const PooledData&, double alpha, Rng& rng) { return decide("u", 0.0, rng.uniform(), alpha); };
    Rng r(6, 0);
    const PairedData d = small_pair(100, 100, r);
    int rej = 0;
    const int trials = 4000;
    for (int t = 0; t < trials; ++t) rej += convert(d, a, r).reject;
    EXPECT_LE(rej / double(trials), 0.05 + 3.0 * std::sqrt(0.05 * 0.95 / trials));
}

TEST(Convert, DiscardedSamplesScale) {
    // n - n~ stays within c sqrt(n log(1 / eps)) across a grid.
    for (long long n1 : {50LL, 500LL, 5000LL, 50000LL}) {
        for (double eps : {0.3, 0.05, 1e-3}) {
            const long long n = 2 * n1;
            const double discarded = double(n) - std::round(kstar(eps, n1) * double(n));
            EXPECT_LE(discarded, 3.0 * std::sqrt(double(n) * std::log(1.0 / eps)) + 1.0);
        }
    }
}

TEST(LinearRegressor, RecoversExactCoefficients) {
    Rng r(7, 0);
    Matrix x(30, 3);
    for (Eigen::Index i = 0; i < 30; ++i) x.row(i) << r.normal(), r.normal(), r.normal();
    Vector beta(3);
    beta << 1.5, -2.0, 0.25;
    const Vector t = (x * beta).array() + 4.0;
    const Regressor reg = fit_linear(x, t);
    const auto& lin = std::get<Regressor::Linear>(reg.state());
    EXPECT_NEAR(lin.intercept, 4.0, 1e-8);
    for (int j = 0; j < 3; ++j) EXPECT_NEAR(lin.slopes(j), beta(j), 1e-8);
}

TEST(LinearRegressor, DuplicateColumnsAndSquareDesign) {
    Rng r(8, 0);
    Matrix x(20, 2);
    for (Eigen::Index i = 0; i < 20; ++i) {
        x(i, 0) = r.normal();
        x(i, 1) = x(i, 0);
    }
    const Vector t = 2.0 * x.col(0);
    const Regressor dup = fit_linear(x, t);
    EXPECT_TRUE(dup.predict(x).allFinite());

    Matrix sq(4, 4);
    for (Eigen::Index i = 0; i < 4; ++i)
        for (Eigen::Index j = 0; j < 4; ++j) sq(i, j) = r.normal();
    Vector ts(4);
    ts << 1, -2, 3, 0.5;
    const Regressor reg = fit_linear(sq, ts);
    EXPECT_LE((reg.predict(sq) - ts).lpNorm<Eigen::Infinity>(), 1e-6);
}

TEST(KernelRidge, SinglePointAndLimits) {
    const kernels::KernelSpec k;
    Matrix x(1, 2);
    x << 0.3, -0.1;
    Vector t(1);
    t << 2.0;
    const Regressor one = fit_kernel_ridge(x, t, k, 0.5);
    EXPECT_NEAR(one.predict(Vector(x.row(0).transpose())), 2.0 / 1.5, 1e-14);

    Rng r(9, 0);
    Matrix xs(20, 1);
    Vector ts(20);
    for (int i = 0; i < 20; ++i) {
        xs(i, 0) = i * 0.3;
        ts(i) = std::sin(xs(i, 0)) + 3.0;
    }
    const Regressor huge = fit_kernel_ridge(xs, ts, k, 1e12);
    EXPECT_LE(huge.predict(xs).cwiseAbs().maxCoeff(), 1e-9);
    const Regressor interp = fit_kernel_ridge(xs, ts, k, 1e-8);
    EXPECT_LE((interp.predict(xs) - ts).lpNorm<Eigen::Infinity>(), 1e-3);
    EXPECT_THROW(fit_kernel_ridge(xs, ts, k, 0.0), ConfigError);
}

TEST(Gcm, HandComputedThreePoints) {
    Matrix x(3, 1);
    x << 0, 0, 0;
    Vector y(3);
    y << 1.0, 2.0, -1.0;
    const PooledData p(x, y, {1, 2, 2});
    const Regressor zero = Regressor::known([](const Vector&) { return 0.0; });
    // R = y * z = (1, 4, -2)
    const double m1 = 1.0, m2 = (1.0 + 16.0 + 4.0) / 3.0;
    EXPECT_NEAR(gcm_statistic(p, zero, zero), std::sqrt(3.0) * m1 / std::sqrt(m2 - m1 * m1), 1e-14);
}

TEST(Gcm, EqualResidualsDegenerate) {
    Matrix x(4, 1);
    x << 0.0, 1.0, 2.5, -1.0;
    Vector y = Vector::Constant(4, 1.0);
    const PooledData p(x, y, {1, 1, 2, 2});
    const Regressor f = Regressor::known([](const Vector&) { return 0.0; });
    const Regressor g = Regressor::known([](const Vector&) { return 0.0; });
    Vector y2(4);
    y2 << 2.0, 2.0, 1.0, 1.0; // R = (2, 2, 2, 2)
    EXPECT_THROW(gcm_statistic(PooledData(x, y2, {1, 1, 2, 2}), f, g), DegenerateVariance);
    const auto out = gcm_test(p, RegressorSpec{}, RegressorSpec{}, 0.05);
    EXPECT_TRUE(out.forced_acceptance());
}

TEST(Gcm, InvariantToReproducedShift) {
    Rng r(10, 0);
    const auto cfg = s1u_null(200);
    const synth::ScenarioSampler sampler(cfg, r);
    const PairedData d = sampler.generate(r);
    const PooledData p = pool(d);
    const Regressor f = Regressor::known([&](const Vector& x) { return sampler.conditional_mean(1, x); });
    const Regressor g = Regressor::known([&](const Vector& x) { return sampler.label_mean(x, 200, 200); });
    auto h = [](const Vector& x) { return std::sin(x(0)) + x(1) * x(2); };
    Vector y2 = p.y();
    for (Eigen::Index i = 0; i < p.size(); ++i) y2(i) += h(p.x().row(i).transpose());
    const Regressor f2 = Regressor::known([&](const Vector& x) { return sampler.conditional_mean(1, x) + h(x); });
    const double t1 = gcm_statistic(p, f, g);
    const double t2 = gcm_statistic(PooledData(p.x(), y2, p.z()), f2, g);
    EXPECT_NEAR(t1, t2, 1e-9 * std::max(1.0, std::abs(t1)));
}

TEST(Gcm, OracleNullIsStandardNormal) {
    const auto cfg = s1u_null(500);
    std::vector<double> ts;
    for (int rep = 0; rep < 500; ++rep) {
        Rng r(11, rep);
        const synth::ScenarioSampler sampler(cfg, r);
        const PairedData d = sampler.generate(r);
        const Regressor f = Regressor::known([&](const Vector& x) { return sampler.conditional_mean(1, x); });
        const Regressor g = Regressor::known([&](const Vector& x) { return sampler.label_mean(x, 500, 500); });
        ts.push_back(gcm_statistic(pool(d), f, g));
    }
    EXPECT_GT(stats::ks_test_normal(ts).p_value, 0.01);
}

TEST(Coupling, EqualCountsGiveEqualStatistics) {
    const auto cfg = s1u_null(100);
    int equal_cases = 0;
    for (int rep = 0; rep < 200; ++rep) {
        Rng r(12, rep);
        const synth::ScenarioSampler sampler(cfg, r);
        const PairedData d = sampler.generate(r);
        const Regressor f = Regressor::known([&](const Vector& x) { return sampler.conditional_mean(1, x); });
        const Regressor g = Regressor::known([&](const Vector& x) { return sampler.label_mean(x, 100, 100); });
        const auto pair = coupled_gcm_pair(sampler, d, f, g, r);
        if (pair.n1_bar == 100) {
            ++equal_cases;
            EXPECT_EQ(pair.t, pair.t_tilde);
        }
    }
    EXPECT_GT(equal_cases, 0);
}
