#include <algorithm>
#include <cmath>
#include <limits>

#include "c2st/errors.hpp"
#include "c2st/ratio.hpp"

namespace c2st::ratio {

namespace {

// log(1 + exp(t)) without overflow.
inline double softplus(double t) { return t > 0.0 ? t + std::log1p(std::exp(-t)) : std::log1p(std::exp(t)); }

inline double sigmoid(double t) {
    if (t >= 0.0) return 1.0 / (1.0 + std::exp(-t));
    const double e = std::exp(t);
    return e / (1.0 + e);
}

// Margin beyond which every training point being on its own side means the
// unpenalized likelihood has no finite maximizer.
constexpr double kSeparationMargin = 15.0;

// Near the optimum a Newton step changes the objective by less than its
// rounding error; such steps are accepted.
inline bool no_worse(double candidate, double current) {
    return candidate <= current + 1e-12 * (1.0 + std::abs(current));
}

void check_inputs(const Matrix& features, std::span<const int> labels) {
    if (static_cast<Eigen::Index>(labels.size()) != features.rows())
        throw DimensionMismatch("logistic fit: label count does not match feature rows");
    if (!features.allFinite()) throw InvalidData("logistic fit: non-finite feature value");
    bool has0 = false, has1 = false;
    for (const int l : labels) {
        if (l != 0 && l != 1) throw InvalidData("logistic fit: labels must be 0 or 1");
        (l == 1 ? has1 : has0) = true;
    }
    if (!has0 || !has1) throw InvalidData("logistic fit: both classes must be present");
}

double prior_from_labels(std::span<const int> labels) {
    const auto ones = static_cast<double>(std::count(labels.begin(), labels.end(), 1));
    return (static_cast<double>(labels.size()) - ones) / ones;
}

Vector labels_vector(std::span<const int> labels) {
    Vector l(static_cast<Eigen::Index>(labels.size()));
    for (std::size_t i = 0; i < labels.size(); ++i) l(static_cast<Eigen::Index>(i)) = labels[i];
    return l;
}

Matrix with_intercept(const Matrix& features) {
    Matrix a(features.rows(), features.cols() + 1);
    a.col(0).setOnes();
    a.rightCols(features.cols()) = features;
    return a;
}

// Solves the SPD system h * step = rhs, adding ridge jitter
// 1e-8 * trace(h) / dim (escalating) when the factorization fails.
Vector solve_spd_with_jitter(Matrix h, const Vector& rhs, double& jitter_used) {
    const double base = std::max(1e-8 * h.trace() / static_cast<double>(h.rows()), 1e-300);
    double jitter = 0.0;
    for (int attempt = 0; attempt < 12; ++attempt) {
        Eigen::LLT<Matrix> llt(h);
        if (llt.info() == Eigen::Success && llt.rcond() > 1e-14) {
            jitter_used = std::max(jitter_used, jitter);
            return llt.solve(rhs);
        }
        const double next = attempt == 0 ? base : jitter * 10.0;
        h.diagonal().array() += next - jitter;
        jitter = next;
    }
    throw Diverged("Newton system remained singular after ridge jitter");
}

} // namespace

double ll_objective(const Matrix& features, std::span<const int> labels, const Vector& beta, double ridge) {
    const Vector theta = (features * beta.tail(features.cols())).array() + beta(0);
    double obj = 0.0;
    for (Eigen::Index i = 0; i < theta.size(); ++i)
        obj += softplus(theta(i)) - labels[static_cast<std::size_t>(i)] * theta(i);
    return obj + 0.5 * ridge * beta.tail(features.cols()).squaredNorm();
}

Vector ll_gradient(const Matrix& features, std::span<const int> labels, const Vector& beta, double ridge) {
    const Vector theta = (features * beta.tail(features.cols())).array() + beta(0);
    Vector resid(theta.size());
    for (Eigen::Index i = 0; i < theta.size(); ++i) resid(i) = sigmoid(theta(i)) - labels[static_cast<std::size_t>(i)];
    Vector grad(beta.size());
    grad(0) = resid.sum();
    grad.tail(features.cols()) = features.transpose() * resid + ridge * beta.tail(features.cols());
    return grad;
}

DensityRatioModel fit_ll(const Matrix& features, std::span<const int> labels, const FitOptions& options) {
    check_inputs(features, labels);
    const Eigen::Index n = features.rows();
    const Eigen::Index p = features.cols();
    const Matrix a = with_intercept(features);
    const Vector l = labels_vector(labels);

    Vector beta = Vector::Zero(p + 1);
    double objective = ll_objective(features, labels, beta, options.ridge);
    FitReport report;
    bool converged = false;

    for (int iter = 0; iter <= options.max_iter; ++iter) {
        const Vector theta = a * beta;
        Vector eta(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            eta(i) = sigmoid(theta(i));
            w(i) = eta(i) * (1.0 - eta(i));
        }
        Vector grad = a.transpose() * (eta - l);
        grad.tail(p) += options.ridge * beta.tail(p);
        report.iterations = iter;
        report.gradient_norm = grad.lpNorm<Eigen::Infinity>();
        if (!std::isfinite(report.gradient_norm)) throw Diverged("logistic fit: non-finite gradient");
        if (report.gradient_norm <= options.tol) {
            converged = true;
            break;
        }
        if (iter == options.max_iter) break;

        Matrix h = a.transpose() * w.asDiagonal() * a;
        h.diagonal().tail(p).array() += options.ridge;
        const Vector step = solve_spd_with_jitter(std::move(h), -grad, report.jitter);

        // Step halving keeps the objective monotone.
        double t = 1.0;
        Vector candidate = beta + step;
        double cand_obj = ll_objective(features, labels, candidate, options.ridge);
        while (!no_worse(cand_obj, objective) && t > 1e-10) {
            t *= 0.5;
            candidate = beta + t * step;
            cand_obj = ll_objective(features, labels, candidate, options.ridge);
        }
        if (!no_worse(cand_obj, objective)) break;
        beta = std::move(candidate);
        objective = cand_obj;
    }
    report.objective = objective;

    if (!converged)
        throw Diverged("logistic fit did not converge: ||grad||_inf = " + std::to_string(report.gradient_norm) +
                       " after " + std::to_string(report.iterations) + " iterations");
    if (options.ridge == 0.0) {
        const Vector theta = a * beta;
        double min_margin = std::numeric_limits<double>::infinity();
        for (Eigen::Index i = 0; i < n; ++i) min_margin = std::min(min_margin, (2.0 * l(i) - 1.0) * theta(i));
        if (min_margin > kSeparationMargin)
            throw Diverged("logistic fit: classes are separable, maximum likelihood estimate is infinite");
    }

    return DensityRatioModel(Kind::LL, std::move(beta), prior_from_labels(labels), p).with_report(report);
}

double klr_objective(const Matrix& gram_train, std::span<const int> labels, const Vector& coef, double lambda) {
    const Eigen::Index n = gram_train.rows();
    const Vector kb = gram_train * coef.tail(n);
    double obj = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double theta = coef(0) + kb(i);
        obj += softplus(theta) - labels[static_cast<std::size_t>(i)] * theta;
    }
    return obj + 0.5 * lambda * coef.tail(n).dot(kb);
}

Vector klr_gradient(const Matrix& gram_train, std::span<const int> labels, const Vector& coef, double lambda) {
    const Eigen::Index n = gram_train.rows();
    const Vector kb = gram_train * coef.tail(n);
    Vector resid(n);
    for (Eigen::Index i = 0; i < n; ++i) resid(i) = sigmoid(coef(0) + kb(i)) - labels[static_cast<std::size_t>(i)];
    Vector grad(n + 1);
    grad(0) = resid.sum();
    grad.tail(n) = gram_train * (resid + lambda * coef.tail(n));
    return grad;
}

DensityRatioModel fit_klr(const Matrix& features, std::span<const int> labels, const kernels::KernelSpec& kernel,
                          double lambda, const FitOptions& options) {
    check_inputs(features, labels);
    kernel.validate();
    if (!(lambda > 0.0)) throw ConfigError("kernel logistic regression needs lambda > 0");
    const Eigen::Index n = features.rows();
    const Matrix k = kernels::gram(kernel, features, features);
    const Vector l = labels_vector(labels);

    Vector coef = Vector::Zero(n + 1);
    double objective = klr_objective(k, labels, coef, lambda);
    FitReport report;
    bool converged = false;

    for (int iter = 0; iter <= options.max_iter; ++iter) {
        const Vector kb = k * coef.tail(n);
        Vector eta(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            eta(i) = sigmoid(coef(0) + kb(i));
            w(i) = eta(i) * (1.0 - eta(i));
        }
        const Vector resid = eta - l;
        Vector grad(n + 1);
        grad(0) = resid.sum();
        grad.tail(n) = k * (resid + lambda * coef.tail(n));
        report.iterations = iter;
        report.gradient_norm = grad.lpNorm<Eigen::Infinity>();
        if (!std::isfinite(report.gradient_norm)) throw Diverged("kernel logistic fit: non-finite gradient");
        if (report.gradient_norm <= options.tol) {
            converged = true;
            break;
        }
        if (iter == options.max_iter) break;

        // The Newton system H d = -g has every coefficient row multiplied on
        // the left by K; dropping that common factor leaves
        //   W (1 d0 + K db) + lambda db = -(resid + lambda b)
        //   1' W (1 d0 + K db)          = -1' resid,
        // whose solution solves the full system and stays well conditioned
        // when K is numerically low rank.
        Matrix m(n + 1, n + 1);
        const Matrix wk = w.asDiagonal() * k;
        m(0, 0) = w.sum();
        m.block(0, 1, 1, n) = wk.colwise().sum();
        m.block(1, 0, n, 1) = w;
        m.block(1, 1, n, n) = wk;
        m.block(1, 1, n, n).diagonal().array() += lambda;
        Vector rhs(n + 1);
        rhs(0) = -resid.sum();
        rhs.tail(n) = -(resid + lambda * coef.tail(n));
        const Vector step = m.partialPivLu().solve(rhs);
        if (!step.allFinite()) throw Diverged("kernel logistic fit: singular Newton system");

        double t = 1.0;
        Vector candidate = coef + step;
        double cand_obj = klr_objective(k, labels, candidate, lambda);
        while (!no_worse(cand_obj, objective) && t > 1e-10) {
            t *= 0.5;
            candidate = coef + t * step;
            cand_obj = klr_objective(k, labels, candidate, lambda);
        }
        if (!no_worse(cand_obj, objective)) break;
        coef = std::move(candidate);
        objective = cand_obj;
    }
    report.objective = objective;
    if (!converged)
        throw Diverged("kernel logistic fit did not converge: ||grad||_inf = " + std::to_string(report.gradient_norm) +
                       " after " + std::to_string(report.iterations) + " iterations");

    return DensityRatioModel(Kind::KLR, std::move(coef), prior_from_labels(labels), features.cols(), kernel, features)
        .with_report(report);
}

} // namespace c2st::ratio
