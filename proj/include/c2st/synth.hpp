#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <utility>

#include "c2st/data.hpp"

namespace c2st::synth {

enum class Scenario { S1, S2, S3 };
enum class Support { Unbounded, Bounded };
enum class Hypothesis { Null, Alt };

/// Link applied in Scenario 3 (y = f(x'1 + 2 eps)).
enum class Link { Cos, Identity, Square, Cube, Sin, Tanh };

double apply_link(Link link, double v);

struct ScenarioConfig {
    Scenario scenario = Scenario::S1;
    Support support = Support::Unbounded;
    Hypothesis hypothesis = Hypothesis::Null;
    int n = 500;      ///< observations per population
    int p = 10;
    std::uint64_t seed = 0;
    double shift = 0.5; ///< Scenario 1 alternative offset delta^(2)

    /// Throws ConfigError when n < 2 or p < 5.
    void validate() const;

    /// Short identifier such as "S1U".
    std::string id() const;
};

/// Parses "S1U", "S2B", ... into scenario and support.
std::pair<Scenario, Support> parse_scenario_id(const std::string& id);

std::string to_string(Scenario s);
std::string to_string(Support s);
std::string to_string(Hypothesis h);
Hypothesis parse_hypothesis(const std::string& text);

/// mu = (1, 1, -1, -1, 0, ..., 0).
Vector mean_shift(int p);

/// beta = (1, -1, -1, 1, 0, ..., 0).
Vector s1_coefficients(int p);

constexpr double kTruncLo = -0.5;
constexpr double kTruncHi = 0.5;

/// n draws from N(mean, I) conditioned on every coordinate lying in [lo, hi],
/// by per-coordinate rejection.
Matrix sample_truncated_gaussian(const Vector& mean, double lo, double hi, Eigen::Index n, Rng& rng);

/// Mass of N(mean, 1) on [lo, hi].
double truncation_mass(double mean, double lo, double hi);

/// Data-generating process for one scenario configuration.
///
/// For the Scenario 3 alternative the population-2 link is drawn once, at
/// construction, and shared by every subsequent draw.
class ScenarioSampler {
public:
    ScenarioSampler(ScenarioConfig cfg, Rng& rng);

    const ScenarioConfig& config() const noexcept { return cfg_; }
    Link link(int population) const noexcept { return population == 1 ? Link::Cos : link2_; }

    Matrix draw_x(int population, Eigen::Index count, Rng& rng) const;
    Vector draw_y(int population, const Matrix& x, Rng& rng) const;

    /// `count` fresh (X, Y) rows from population 1 or 2.
    std::pair<Matrix, Vector> draw(int population, Eigen::Index count, Rng& rng) const;

    /// cfg.n draws from each population.
    PairedData generate(Rng& rng) const;

    /// E[Y | X = x] within one population.
    double conditional_mean(int population, const Vector& x) const;

    /// E[Z | X = x] for Z in {1, 2} when population j has mixing weight n_j / (n1 + n2).
    double label_mean(const Vector& x, double n1, double n2) const;

private:
    ScenarioConfig cfg_;
    Link link2_ = Link::Cos;
};

PairedData gen_scenario(const ScenarioConfig& cfg, Rng& rng);

/// Analytic marginal density ratio f_X^(1)(x) / f_X^(2)(x).
///
/// Throws OutOfSupport for bounded scenarios when x leaves [-0.5, 0.5]^p.
double true_marginal_ratio(const ScenarioConfig& cfg, const Vector& x);

enum class CovariateBias { None, ExpNegX1Squared };
enum class ResponseBias { None, ExpNegY };

struct BiasSpec {
    CovariateBias covariate_bias = CovariateBias::ExpNegX1Squared;
    ResponseBias response_bias = ResponseBias::ExpNegY;
    bool apply_response_bias = false;
};

/// Sampling weight of one row under `bias`.
double bias_weight(const BiasSpec& bias, const Eigen::Ref<const Vector>& x, double y);

/// k rows drawn without replacement with probability proportional to the
/// bias weight (successive-draw semantics).
///
/// Throws DegenerateWeights if every weight is numerically zero or fewer
/// than k rows carry positive weight.
std::pair<Matrix, Vector> biased_subsample(const Matrix& x, const Vector& y, Eigen::Index k,
                                           const BiasSpec& bias, Rng& rng);

} // namespace c2st::synth
