#pragma once

#include <functional>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include "c2st/data.hpp"
#include "c2st/kernels.hpp"
#include "c2st/ratio.hpp"

namespace c2st::drt {

/// Marginal density ratio r_X(x) = f_X^(1)(x) / f_X^(2)(x).
using RatioFn = std::function<double(const Vector& x)>;

/// Joint density ratio r_YX(y, x) = f_YX^(1)(y, x) / f_YX^(2)(y, x).
using JointRatioFn = std::function<double(const Vector& x, double y)>;

/// Scalar feature psi(x, y) for the mean-comparison and rank-sum statistics.
using FeatureMap = std::function<double(const Vector& x, double y)>;

/// Known ratios supplied by the caller instead of being estimated.
struct OracleRatios {
    RatioFn marginal;
    JointRatioFn joint; ///< required by the classifier tests only
};

struct DrtConfig {
    std::variant<ratio::RatioMethod, OracleRatios> ratio_source = ratio::RatioMethod{};
    double split_train_eval = 0.5; ///< fraction of each population placed in D_a
    double ratio_eval_split = 0.8; ///< fraction of D_a used to fit r_X in the classifier test
    int folds = 2;
    kernels::KernelSpec kernel{kernels::Family::Gaussian, 1.0, 1.0};
    double alpha = 0.05;

    /// Throws ConfigError on out-of-range splits, folds < 2 (when `cross_validated`)
    /// or an invalid kernel.
    void validate(bool cross_validated) const;
};

/// psi(x, y) = y.
FeatureMap response_feature();

/// Wraps a fitted model as a marginal ratio function.
RatioFn as_ratio_fn(const ratio::DensityRatioModel& model);

/// Wraps a fitted joint model as a joint ratio function.
JointRatioFn as_joint_ratio_fn(const ratio::DensityRatioModel& model);

/// Importance-weighted difference of feature means, studentized with the
/// independent-sums variance; two-sided normal calibration.
TestOutcome mean_comparison(const PairedData& data, const RatioFn& ratio, const FeatureMap& psi, double alpha = 0.05);

/// (1 / n1 n2) sum_i sum_j r(X_j^(2)) 1{psi(V_j^(2)) < psi(V_i^(1))}; ties count as 0.
double weighted_rank_sum(const PairedData& data, const RatioFn& ratio, const FeatureMap& psi);

/// Plug-in Bayes classifier between f_YX^(1) and f^(2)(y | x) f_X^(1)(x):
/// 1 when r_YX(y, x) / (r_X(x) + r_YX(y, x)) > 1/2, else 2.
int plug_in_classify(double marginal_ratio, double joint_ratio);

/// Pieces of one accuracy statistic.
struct AccuracyFold {
    double numerator = 0.0;    ///< mean(A1) + mean(A2) - 1
    double variance_sum = 0.0; ///< sigma1^2 + sigma2^2, (m - 1) denominators
    Eigen::Index m = 0;

    /// sqrt(m) * numerator / sqrt(variance_sum); nullopt when variance_sum is zero.
    std::optional<double> statistic() const;
};

/// Accuracy terms A1_i = 1{h(V_i^(1)) = 1}, A2_i = r(X_i^(2)) 1{h(V_i^(2)) = 2}
/// on an evaluation block with equal population sizes m.
AccuracyFold accuracy_fold(const PairedData& eval, const RatioFn& marginal,
                           const std::function<int(const Vector& x, double y)>& classifier);

/// Single-split classifier accuracy test, one-sided.
TestOutcome classifier_test(const PairedData& data, const DrtConfig& cfg, Rng& rng);

/// K-fold cross-validated classifier accuracy test, one-sided.
TestOutcome classifier_test_cv(const PairedData& data, const DrtConfig& cfg, Rng& rng);

/// Linear-time MMD terms S_i, i = 1..m with m = floor(n_eval / 2), pairing i with i + m.
std::vector<double> linear_mmd_terms(const PairedData& eval, const RatioFn& ratio, const kernels::KernelSpec& kernel);

/// sqrt(m) * mean / sd of the terms; nullopt when the sample variance is zero.
std::optional<double> studentized_mean(std::span<const double> terms);

/// Studentized linear-time MMD test, one-sided.
TestOutcome mmd_linear_test(const PairedData& data, const DrtConfig& cfg, Rng& rng);

/// K-fold cross-fitted linear-time MMD test, one-sided.
TestOutcome mmd_linear_test_cv(const PairedData& data, const DrtConfig& cfg, Rng& rng);

/// (1 / sqrt(K)) * sum of the non-degenerate fold statistics, where K
/// counts every fold; nullopt when all folds are degenerate.
std::optional<double> combine_fold_statistics(std::span<const std::optional<double>> folds);

/// Importance-weighted unbiased (U-statistic) estimate of MMD^2. Diagnostic
/// only: no calibrated null distribution is provided.
double mmd_quadratic_estimate(const PairedData& data, const RatioFn& ratio, const kernels::KernelSpec& kernel);

} // namespace c2st::drt
