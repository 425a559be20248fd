#pragma once

#include <functional>
#include <optional>
#include <variant>

#include "c2st/data.hpp"
#include "c2st/kernels.hpp"
#include "c2st/synth.hpp"

namespace c2st::cit {

/// A fitted regression function x -> E[t | x].
class Regressor {
public:
    struct KnownFunction {
        std::function<double(const Vector&)> f;
    };
    struct Linear {
        double intercept = 0.0;
        Vector slopes;
    };
    struct KernelRidge {
        kernels::KernelSpec kernel;
        Matrix centers;
        Vector weights;
    };
    using State = std::variant<KnownFunction, Linear, KernelRidge>;

    explicit Regressor(State state);
    static Regressor known(std::function<double(const Vector&)> f);

    const State& state() const noexcept { return state_; }

    double predict(const Vector& x) const;
    Vector predict(const Matrix& x) const;

private:
    State state_;
};

/// Least squares with intercept. Singular normal equations get ridge jitter
/// 1e-8 * max(1, trace / dim), escalated until the solve succeeds.
Regressor fit_linear(const Matrix& x, const Vector& t);

/// Uncentered kernel ridge regression: weights (K + lambda I)^-1 t.
Regressor fit_kernel_ridge(const Matrix& x, const Vector& t, const kernels::KernelSpec& kernel, double lambda);

/// How a GCM regression is obtained.
struct RegressorSpec {
    enum class Kind { Known, Linear, KernelRidge };
    Kind kind = Kind::Linear;
    std::function<double(const Vector&)> known; ///< used when kind == Known
    kernels::KernelSpec kernel{kernels::Family::Gaussian, 10.0, 1.0};
    double lambda = 1.0;

    static RegressorSpec known_function(std::function<double(const Vector&)> f);
};

Regressor fit_regressor(const RegressorSpec& spec, const Matrix& x, const Vector& t);

/// GCM statistic T = (n^-1/2 sum R) / sqrt(n^-1 sum R^2 - (n^-1 sum R)^2) with
/// R_i = (Y_i - f(X_i)) (Z_i - g(X_i)) and Z in {1, 2}.
///
/// Throws DegenerateVariance when the denominator vanishes.
double gcm_statistic(const PooledData& pooled, const Regressor& f_hat, const Regressor& g_hat);

/// Fits f (Y on X) and g (Z on X) on the whole pooled sample and calibrates
/// T two-sided against N(0, 1). A vanishing denominator gives a forced
/// acceptance.
TestOutcome gcm_test(const PooledData& pooled, const RegressorSpec& f_spec, const RegressorSpec& g_spec,
                     double alpha = 0.05);

/// k* = a - sqrt(a^2 - 1) with a = 1 - 3 log(eps) / (2 n1), the root in (0, 1)
/// of n1 k (1/k - 1)^2 / 3 = -log(eps). Throws InvalidEpsilon.
double kstar(double epsilon, long long n1);

/// 1 / log(n).
double default_epsilon(long long n);

using InnerTest = std::function<TestOutcome(const PooledData& pooled, double alpha, Rng& rng)>;

/// Conditional independence test wrapped for two-sample use.
struct CitAdapter {
    InnerTest inner_test;
    std::optional<double> epsilon; ///< defaults to 1 / log(n1 + n2)
    double alpha = 0.05;
};

/// Draws n~1 ~ Binomial(n~, n1 / n) with n~ = round(k* n) and n~2 = n~ - n~1.
/// When a population is too small for its draw the result is a forced
/// acceptance flagged `bad_event`; otherwise the first n~1 and n~2 rows of the
/// shuffled populations are pooled and handed to the inner test.
TestOutcome convert(const PairedData& data, const CitAdapter& adapter, Rng& rng);

/// GCM with linear regressions behind the converter.
CitAdapter gcm_adapter(const RegressorSpec& f_spec = {}, const RegressorSpec& g_spec = {}, double alpha = 0.05,
                       std::optional<double> epsilon = std::nullopt);

struct CoupledPair {
    double t = 0.0;       ///< GCM on the original pooled sample
    double t_tilde = 0.0; ///< GCM on the binomially re-sized sample
    long long n1_bar = 0;
};

/// Draws n1_bar ~ Binomial(n, n1 / n), keeps the first min(n_j, n_j_bar) rows
/// of each population and tops up a short population with fresh draws from
/// `sampler`. Both statistics use the supplied known regressions.
CoupledPair coupled_gcm_pair(const synth::ScenarioSampler& sampler, const PairedData& data, const Regressor& f,
                             const Regressor& g, Rng& rng);

} // namespace c2st::cit
