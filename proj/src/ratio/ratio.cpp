#include "c2st/ratio.hpp"

#include <algorithm>
#include <cmath>

#include "c2st/errors.hpp"

namespace c2st::ratio {

DensityRatioModel::DensityRatioModel(Kind kind, Vector coefficients, double prior_correction, Eigen::Index dim,
                                     kernels::KernelSpec kernel, Matrix centers)
    : kind_(kind), coefficients_(std::move(coefficients)), prior_correction_(prior_correction), dim_(dim),
      kernel_(kernel), centers_(std::move(centers)) {
    if (!(prior_correction_ > 0.0)) throw InvalidData("density ratio model: prior correction must be positive");
    const Eigen::Index expected = kind_ == Kind::LL ? dim_ + 1 : centers_.rows() + 1;
    if (coefficients_.size() != expected) throw DimensionMismatch("density ratio model: coefficient count mismatch");
    if (kind_ == Kind::KLR && centers_.cols() != dim_) throw DimensionMismatch("density ratio model: center dimension");
}

DensityRatioModel DensityRatioModel::with_clip(Clip clip) const {
    if (!(clip.lo >= 0.0 && clip.hi > clip.lo)) throw ConfigError("clip bounds must satisfy 0 <= lo < hi");
    DensityRatioModel copy = *this;
    copy.clip_ = clip;
    return copy;
}

DensityRatioModel DensityRatioModel::with_joint(bool joint) const {
    DensityRatioModel copy = *this;
    copy.joint_ = joint;
    return copy;
}

DensityRatioModel DensityRatioModel::with_report(FitReport report) const {
    DensityRatioModel copy = *this;
    copy.report_ = report;
    return copy;
}

double DensityRatioModel::logit(const Eigen::Ref<const Vector>& point) const {
    if (point.size() != dim_)
        throw DimensionMismatch("predict: point has dimension " + std::to_string(point.size()) + ", model expects " +
                                std::to_string(dim_));
    if (kind_ == Kind::LL) return coefficients_(0) + coefficients_.tail(dim_).dot(point);
    double theta = coefficients_(0);
    for (Eigen::Index j = 0; j < centers_.rows(); ++j)
        theta += coefficients_(j + 1) * kernels::kernel_eval(kernel_, centers_.row(j).transpose(), point);
    return theta;
}

double DensityRatioModel::eta(const Eigen::Ref<const Vector>& point) const {
    return 1.0 / (1.0 + std::exp(-logit(point)));
}

double DensityRatioModel::unclipped_ratio(const Eigen::Ref<const Vector>& point) const {
    return prior_correction_ * std::exp(logit(point));
}

double DensityRatioModel::predict_ratio(const Eigen::Ref<const Vector>& point) const {
    return std::clamp(unclipped_ratio(point), clip_.lo, clip_.hi);
}

Vector DensityRatioModel::logits(const Matrix& points) const {
    if (points.cols() != dim_)
        throw DimensionMismatch("predict: points have dimension " + std::to_string(points.cols()) +
                                ", model expects " + std::to_string(dim_));
    if (kind_ == Kind::LL) return (points * coefficients_.tail(dim_)).array() + coefficients_(0);
    const Matrix g = kernels::gram(kernel_, points, centers_);
    return (g * coefficients_.tail(centers_.rows())).array() + coefficients_(0);
}

Vector DensityRatioModel::predict_ratios(const Matrix& points) const {
    Vector theta = logits(points);
    for (Eigen::Index i = 0; i < theta.size(); ++i)
        theta(i) = std::clamp(prior_correction_ * std::exp(theta(i)), clip_.lo, clip_.hi);
    return theta;
}

double ratio_from_eta(double eta, double prior_correction) { return prior_correction * eta / (1.0 - eta); }

namespace {

// Population 1 carries label 1 so that prior * eta / (1 - eta) estimates f^(1) / f^(2).
DensityRatioModel fit_two_class(const Matrix& first, const Matrix& second, const RatioMethod& method) {
    Matrix features(first.rows() + second.rows(), first.cols());
    features.topRows(first.rows()) = first;
    features.bottomRows(second.rows()) = second;
    std::vector<int> labels(static_cast<std::size_t>(features.rows()), 0);
    std::fill(labels.begin(), labels.begin() + first.rows(), 1);
    DensityRatioModel model = method.kind == Kind::LL
                                  ? fit_ll(features, labels, method.options)
                                  : fit_klr(features, labels, method.kernel, method.lambda, method.options);
    return model.with_clip(method.clip);
}

} // namespace

DensityRatioModel fit_marginal_ratio(const PairedData& data, const RatioMethod& method) {
    return fit_two_class(data.x1(), data.x2(), method).with_joint(false);
}

DensityRatioModel fit_joint_ratio(const PairedData& data, const RatioMethod& method) {
    return fit_two_class(data.joint1(), data.joint2(), method).with_joint(true);
}

} // namespace c2st::ratio
