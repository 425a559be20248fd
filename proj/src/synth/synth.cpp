#include "c2st/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "c2st/errors.hpp"
#include "c2st/stats.hpp"

namespace c2st::synth {

namespace {

constexpr std::array kAltLinks{Link::Identity, Link::Square, Link::Cube, Link::Sin, Link::Tanh};

// Gauss-Hermite rule (weight exp(-t^2)) via the Golub-Welsch eigenproblem.
struct HermiteRule {
    Vector nodes;
    Vector weights;

    explicit HermiteRule(int order) {
        Matrix jacobi = Matrix::Zero(order, order);
        for (int i = 1; i < order; ++i) {
            const double b = std::sqrt(static_cast<double>(i) / 2.0);
            jacobi(i, i - 1) = b;
            jacobi(i - 1, i) = b;
        }
        Eigen::SelfAdjointEigenSolver<Matrix> eig(jacobi);
        nodes = eig.eigenvalues();
        weights = std::sqrt(M_PI) * eig.eigenvectors().row(0).transpose().array().square();
    }
};

const HermiteRule& hermite_rule() {
    static const HermiteRule rule(80);
    return rule;
}

// E[f(s + 2 eps)] for eps ~ N(0, 1).
double expected_link(Link link, double s) {
    const double damp = std::exp(-2.0);
    switch (link) {
    case Link::Cos: return std::cos(s) * damp;
    case Link::Sin: return std::sin(s) * damp;
    case Link::Identity: return s;
    case Link::Square: return s * s + 4.0;
    case Link::Cube: return s * s * s + 12.0 * s;
    case Link::Tanh: {
        const auto& rule = hermite_rule();
        double acc = 0.0;
        for (Eigen::Index i = 0; i < rule.nodes.size(); ++i)
            acc += rule.weights(i) * std::tanh(s + 2.0 * std::sqrt(2.0) * rule.nodes(i));
        return acc / std::sqrt(M_PI);
    }
    }
    return 0.0;
}

Vector population_mean(const ScenarioConfig& cfg, int population) {
    return population == 1 ? Vector::Zero(cfg.p) : mean_shift(cfg.p);
}

} // namespace

double apply_link(Link link, double v) {
    switch (link) {
    case Link::Cos: return std::cos(v);
    case Link::Identity: return v;
    case Link::Square: return v * v;
    case Link::Cube: return v * v * v;
    case Link::Sin: return std::sin(v);
    case Link::Tanh: return std::tanh(v);
    }
    return v;
}

void ScenarioConfig::validate() const {
    if (n < 2) throw ConfigError("scenario needs n >= 2 per population");
    if (p < 5) throw ConfigError("scenario dimension p must be at least 5 (mean shift and beta use four slots)");
}

std::string ScenarioConfig::id() const { return to_string(scenario) + to_string(support); }

std::string to_string(Scenario s) {
    switch (s) {
    case Scenario::S1: return "S1";
    case Scenario::S2: return "S2";
    case Scenario::S3: return "S3";
    }
    return "?";
}

std::string to_string(Support s) { return s == Support::Unbounded ? "U" : "B"; }

std::string to_string(Hypothesis h) { return h == Hypothesis::Null ? "null" : "alt"; }

Hypothesis parse_hypothesis(const std::string& text) {
    if (text == "null" || text == "Null" || text == "H0") return Hypothesis::Null;
    if (text == "alt" || text == "Alt" || text == "alternative" || text == "H1") return Hypothesis::Alt;
    throw ConfigError("unknown hypothesis '" + text + "'");
}

std::pair<Scenario, Support> parse_scenario_id(const std::string& id) {
    if (id.size() != 3 || id[0] != 'S') throw ConfigError("bad scenario id '" + id + "' (expected e.g. S1U)");
    Scenario s;
    switch (id[1]) {
    case '1': s = Scenario::S1; break;
    case '2': s = Scenario::S2; break;
    case '3': s = Scenario::S3; break;
    default: throw ConfigError("bad scenario id '" + id + "'");
    }
    if (id[2] == 'U') return {s, Support::Unbounded};
    if (id[2] == 'B') return {s, Support::Bounded};
    throw ConfigError("bad scenario id '" + id + "'");
}

Vector mean_shift(int p) {
    Vector mu = Vector::Zero(p);
    mu.head(4) << 1.0, 1.0, -1.0, -1.0;
    return mu;
}

Vector s1_coefficients(int p) {
    Vector beta = Vector::Zero(p);
    beta.head(4) << 1.0, -1.0, -1.0, 1.0;
    return beta;
}

double truncation_mass(double mean, double lo, double hi) {
    return stats::normal_cdf(hi - mean) - stats::normal_cdf(lo - mean);
}

Matrix sample_truncated_gaussian(const Vector& mean, double lo, double hi, Eigen::Index n, Rng& rng) {
    if (!(lo < hi)) throw ConfigError("truncation requires lo < hi");
    Matrix out(n, mean.size());
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < mean.size(); ++j) {
            double v;
            do {
                v = mean(j) + rng.normal();
            } while (v < lo || v > hi);
            out(i, j) = v;
        }
    }
    return out;
}

ScenarioSampler::ScenarioSampler(ScenarioConfig cfg, Rng& rng) : cfg_(cfg) {
    cfg_.validate();
    if (cfg_.scenario == Scenario::S3 && cfg_.hypothesis == Hypothesis::Alt)
        link2_ = kAltLinks[rng.uniform_index(kAltLinks.size())];
}

Matrix ScenarioSampler::draw_x(int population, Eigen::Index count, Rng& rng) const {
    const Vector mean = population_mean(cfg_, population);
    if (cfg_.support == Support::Bounded) return sample_truncated_gaussian(mean, kTruncLo, kTruncHi, count, rng);
    Matrix x(count, cfg_.p);
    for (Eigen::Index i = 0; i < count; ++i)
        for (Eigen::Index j = 0; j < cfg_.p; ++j) x(i, j) = mean(j) + rng.normal();
    return x;
}

Vector ScenarioSampler::draw_y(int population, const Matrix& x, Rng& rng) const {
    const bool alt2 = population == 2 && cfg_.hypothesis == Hypothesis::Alt;
    Vector y(x.rows());
    switch (cfg_.scenario) {
    case Scenario::S1: {
        const Vector beta = s1_coefficients(cfg_.p);
        const double delta = alt2 ? cfg_.shift : 0.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) y(i) = delta + x.row(i).dot(beta) + rng.student_t2();
        break;
    }
    case Scenario::S2: {
        Vector beta = Vector::Ones(cfg_.p);
        if (alt2) beta(cfg_.p - 1) = 0.0;
        for (Eigen::Index i = 0; i < x.rows(); ++i) {
            double variance = 100.0;
            if (alt2) {
                const double dist2 = (x.row(i).array() - 0.5).square().sum();
                variance = 10.0 * (1.0 + std::exp(-dist2 / 64.0));
            }
            y(i) = x.row(i).dot(beta) + std::sqrt(variance) * rng.normal();
        }
        break;
    }
    case Scenario::S3: {
        const Link f = link(population);
        for (Eigen::Index i = 0; i < x.rows(); ++i) y(i) = apply_link(f, x.row(i).sum() + 2.0 * rng.normal());
        break;
    }
    }
    return y;
}

std::pair<Matrix, Vector> ScenarioSampler::draw(int population, Eigen::Index count, Rng& rng) const {
    Matrix x = draw_x(population, count, rng);
    Vector y = draw_y(population, x, rng);
    return {std::move(x), std::move(y)};
}

PairedData ScenarioSampler::generate(Rng& rng) const {
    auto [x1, y1] = draw(1, cfg_.n, rng);
    auto [x2, y2] = draw(2, cfg_.n, rng);
    return PairedData(std::move(x1), std::move(y1), std::move(x2), std::move(y2));
}

double ScenarioSampler::conditional_mean(int population, const Vector& x) const {
    const bool alt2 = population == 2 && cfg_.hypothesis == Hypothesis::Alt;
    switch (cfg_.scenario) {
    case Scenario::S1: return (alt2 ? cfg_.shift : 0.0) + x.dot(s1_coefficients(cfg_.p));
    case Scenario::S2: {
        Vector beta = Vector::Ones(cfg_.p);
        if (alt2) beta(cfg_.p - 1) = 0.0;
        return x.dot(beta);
    }
    case Scenario::S3: return expected_link(link(population), x.sum());
    }
    return 0.0;
}

double ScenarioSampler::label_mean(const Vector& x, double n1, double n2) const {
    const double r = true_marginal_ratio(cfg_, x);
    return 1.0 + 1.0 / (1.0 + (n1 / n2) * r);
}

PairedData gen_scenario(const ScenarioConfig& cfg, Rng& rng) {
    const ScenarioSampler sampler(cfg, rng);
    return sampler.generate(rng);
}

double true_marginal_ratio(const ScenarioConfig& cfg, const Vector& x) {
    if (x.size() != cfg.p) throw DimensionMismatch("true_marginal_ratio: point has wrong dimension");
    const Vector mu = mean_shift(cfg.p);
    double log_ratio = 0.5 * mu.squaredNorm() - mu.dot(x);
    if (cfg.support == Support::Bounded) {
        for (Eigen::Index j = 0; j < x.size(); ++j)
            if (x(j) < kTruncLo || x(j) > kTruncHi)
                throw OutOfSupport("true_marginal_ratio: point outside [-0.5, 0.5]^p");
        // f1 = phi(x) / Z1 and f2 = phi(x - mu) / Z2, so r picks up Z2 / Z1.
        for (Eigen::Index j = 0; j < x.size(); ++j)
            log_ratio += std::log(truncation_mass(mu(j), kTruncLo, kTruncHi)) -
                         std::log(truncation_mass(0.0, kTruncLo, kTruncHi));
    }
    return std::exp(log_ratio);
}

double bias_weight(const BiasSpec& bias, const Eigen::Ref<const Vector>& x, double y) {
    double w = 1.0;
    if (bias.covariate_bias == CovariateBias::ExpNegX1Squared) w *= std::exp(-x(0) * x(0));
    if (bias.apply_response_bias && bias.response_bias == ResponseBias::ExpNegY) w *= std::exp(-y);
    return w;
}

std::pair<Matrix, Vector> biased_subsample(const Matrix& x, const Vector& y, Eigen::Index k,
                                           const BiasSpec& bias, Rng& rng) {
    if (y.size() != x.rows()) throw DimensionMismatch("biased_subsample: x and y lengths differ");
    if (k < 0 || k > x.rows()) throw ConfigError("biased_subsample: k exceeds the number of rows");

    // Efraimidis-Spirakis keys log(u) / w: the top-k keys are distributed as
    // k successive draws without replacement proportional to w.
    const auto n = static_cast<std::size_t>(x.rows());
    std::vector<double> key(n);
    std::size_t positive = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const auto row = static_cast<Eigen::Index>(i);
        const double w = bias_weight(bias, x.row(row).transpose(), y(row));
        if (!std::isfinite(w)) throw DegenerateWeights("biased_subsample: non-finite weight at row " + std::to_string(i));
        const double u = rng.uniform_open();
        if (w > 0.0) {
            key[i] = std::log(u) / w;
            ++positive;
        } else {
            key[i] = -std::numeric_limits<double>::infinity();
        }
    }
    if (positive == 0) throw DegenerateWeights("biased_subsample: all weights are numerically zero");
    if (positive < static_cast<std::size_t>(k))
        throw DegenerateWeights("biased_subsample: fewer positive-weight rows than requested");

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });
    order.resize(static_cast<std::size_t>(k));
    return {select_rows(x, order), select_rows(y, order)};
}

} // namespace c2st::synth
