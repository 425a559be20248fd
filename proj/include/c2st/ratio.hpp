#pragma once

#include <span>
#include <vector>

#include "c2st/data.hpp"
#include "c2st/kernels.hpp"

namespace c2st::ratio {

enum class Kind { LL, KLR };

struct FitOptions {
    int max_iter = 100;
    double tol = 1e-8;   ///< bound on the infinity norm of the objective gradient
    double ridge = 0.0;  ///< L2 penalty on LL slopes (intercept excluded)
};

struct Clip {
    double lo = 0.0;
    double hi = 100.0;
};

struct FitReport {
    int iterations = 0;
    double gradient_norm = 0.0;
    double objective = 0.0;
    double jitter = 0.0; ///< largest ridge jitter added to a Newton system
};

/// Probabilistic-classification density ratio estimator.
///
/// With eta(v) = P(label = 1 | v) from a logistic (LL) or kernel logistic
/// (KLR) fit and prior correction N0 / N1 (label counts), the estimate
///
///     r(v) = prior * eta(v) / (1 - eta(v)) = prior * exp(theta(v))
///
/// targets f_{label 1}(v) / f_{label 0}(v). Predictions are clipped to
/// [clip.lo, clip.hi].
class DensityRatioModel {
public:
    DensityRatioModel(Kind kind, Vector coefficients, double prior_correction, Eigen::Index dim,
                      kernels::KernelSpec kernel = {}, Matrix centers = {});

    Kind kind() const noexcept { return kind_; }
    const Vector& coefficients() const noexcept { return coefficients_; }
    const kernels::KernelSpec& kernel() const noexcept { return kernel_; }
    const Matrix& centers() const noexcept { return centers_; }
    double prior_correction() const noexcept { return prior_correction_; }
    const Clip& clip() const noexcept { return clip_; }
    bool joint() const noexcept { return joint_; }
    Eigen::Index dim() const noexcept { return dim_; }
    const FitReport& report() const noexcept { return report_; }

    DensityRatioModel with_clip(Clip clip) const;
    DensityRatioModel with_joint(bool joint) const;
    DensityRatioModel with_report(FitReport report) const;

    /// Log-odds theta(v); throws DimensionMismatch on a wrong-sized point.
    double logit(const Eigen::Ref<const Vector>& point) const;
    double eta(const Eigen::Ref<const Vector>& point) const;
    double unclipped_ratio(const Eigen::Ref<const Vector>& point) const;
    double predict_ratio(const Eigen::Ref<const Vector>& point) const;

    /// Row-wise predict_ratio.
    Vector predict_ratios(const Matrix& points) const;
    Vector logits(const Matrix& points) const;

private:
    Kind kind_;
    Vector coefficients_;
    double prior_correction_;
    Eigen::Index dim_;
    kernels::KernelSpec kernel_;
    Matrix centers_;
    Clip clip_{};
    bool joint_ = false;
    FitReport report_{};
};

/// prior * eta / (1 - eta), the unclipped ratio for a class probability.
double ratio_from_eta(double eta, double prior_correction);

/// Negative log-likelihood of the linear logistic model plus
/// (ridge / 2) * ||slopes||^2. beta = (intercept, slopes...).
double ll_objective(const Matrix& features, std::span<const int> labels, const Vector& beta, double ridge);
Vector ll_gradient(const Matrix& features, std::span<const int> labels, const Vector& beta, double ridge);

/// IRLS fit of the linear logistic model; labels are 0/1.
///
/// Throws InvalidData when a class is missing or features are non-finite,
/// and Diverged when the iteration does not reach ||grad||_inf <= tol or the
/// unpenalized fit separates the classes.
DensityRatioModel fit_ll(const Matrix& features, std::span<const int> labels, const FitOptions& options = {});

/// Penalized kernel logistic objective with theta = b0 + K b and
/// penalty (lambda / 2) b' K b; coef = (b0, b).
double klr_objective(const Matrix& gram_train, std::span<const int> labels, const Vector& coef, double lambda);
Vector klr_gradient(const Matrix& gram_train, std::span<const int> labels, const Vector& coef, double lambda);

/// Newton fit of kernel logistic regression with every training point as
/// a center. Throws Diverged on failure to reach the gradient tolerance.
DensityRatioModel fit_klr(const Matrix& features, std::span<const int> labels, const kernels::KernelSpec& kernel,
                          double lambda, const FitOptions& options = {});

/// How the density ratio is estimated from data.
struct RatioMethod {
    Kind kind = Kind::LL;
    kernels::KernelSpec kernel{kernels::Family::Gaussian, 200.0, 1.0};
    double lambda = 5e-4;
    FitOptions options{};
    Clip clip{};
};

/// Estimate of r_X = f_X^(1) / f_X^(2) on covariates alone.
DensityRatioModel fit_marginal_ratio(const PairedData& data, const RatioMethod& method);

/// Estimate of r_YX = f_YX^(1) / f_YX^(2) on concatenated (x, y) rows.
DensityRatioModel fit_joint_ratio(const PairedData& data, const RatioMethod& method);

} // namespace c2st::ratio
