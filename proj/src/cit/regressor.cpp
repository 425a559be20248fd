#include <cmath>

#include "c2st/cit.hpp"
#include "c2st/errors.hpp"

namespace c2st::cit {

namespace {

template <class... Fs>
struct Overloaded : Fs... {
    using Fs::operator()...;
};
template <class... Fs>
Overloaded(Fs...) -> Overloaded<Fs...>;

void check_training(const Matrix& x, const Vector& t) {
    if (x.rows() != t.size()) throw DimensionMismatch("regression: row count does not match target length");
    if (x.rows() < 1 || x.cols() < 1) throw InvalidData("regression: empty design");
    if (!x.allFinite() || !t.allFinite()) throw InvalidData("regression: non-finite training value");
}

} // namespace

Regressor::Regressor(State state) : state_(std::move(state)) {
    if (const auto* k = std::get_if<KnownFunction>(&state_); k && !k->f)
        throw ConfigError("known regression function is empty");
}

Regressor Regressor::known(std::function<double(const Vector&)> f) { return Regressor(KnownFunction{std::move(f)}); }

double Regressor::predict(const Vector& x) const {
    return std::visit(Overloaded{
                          [&](const KnownFunction& k) { return k.f(x); },
                          [&](const Linear& l) {
                              if (x.size() != l.slopes.size()) throw DimensionMismatch("predict: wrong dimension");
                              return l.intercept + l.slopes.dot(x);
                          },
                          [&](const KernelRidge& r) {
                              double acc = 0.0;
                              for (Eigen::Index j = 0; j < r.centers.rows(); ++j)
                                  acc += r.weights(j) * kernels::kernel_eval(r.kernel, r.centers.row(j).transpose(), x);
                              return acc;
                          },
                      },
                      state_);
}

Vector Regressor::predict(const Matrix& x) const {
    return std::visit(Overloaded{
                          [&](const KnownFunction& k) {
                              Vector out(x.rows());
                              for (Eigen::Index i = 0; i < x.rows(); ++i) out(i) = k.f(x.row(i).transpose());
                              return out;
                          },
                          [&](const Linear& l) -> Vector {
                              if (x.cols() != l.slopes.size()) throw DimensionMismatch("predict: wrong dimension");
                              return (x * l.slopes).array() + l.intercept;
                          },
                          [&](const KernelRidge& r) -> Vector {
                              return kernels::gram(r.kernel, x, r.centers) * r.weights;
                          },
                      },
                      state_);
}

Regressor fit_linear(const Matrix& x, const Vector& t) {
    check_training(x, t);
    Matrix a(x.rows(), x.cols() + 1);
    a.col(0).setOnes();
    a.rightCols(x.cols()) = x;
    Matrix h = a.transpose() * a;
    const Vector rhs = a.transpose() * t;

    const double base = 1e-8 * std::max(1.0, h.trace() / static_cast<double>(h.rows()));
    double jitter = 0.0;
    for (int attempt = 0; attempt < 16; ++attempt) {
        Eigen::LLT<Matrix> llt(h);
        if (llt.info() == Eigen::Success && llt.rcond() > 1e-14) {
            const Vector beta = llt.solve(rhs);
            if (beta.allFinite()) return Regressor(Regressor::Linear{beta(0), beta.tail(x.cols())});
        }
        const double next = attempt == 0 ? base : jitter * 10.0;
        h.diagonal().array() += next - jitter;
        jitter = next;
    }
    throw Diverged("linear regression: normal equations stayed singular");
}

Regressor fit_kernel_ridge(const Matrix& x, const Vector& t, const kernels::KernelSpec& kernel, double lambda) {
    check_training(x, t);
    kernel.validate();
    if (!(lambda > 0.0)) throw ConfigError("kernel ridge needs lambda > 0");
    Matrix k = kernels::gram(kernel, x, x);
    k.diagonal().array() += lambda;
    Eigen::LLT<Matrix> llt(k);
    Vector w = llt.info() == Eigen::Success ? Vector(llt.solve(t)) : Vector(k.partialPivLu().solve(t));
    return Regressor(Regressor::KernelRidge{kernel, x, std::move(w)});
}

RegressorSpec RegressorSpec::known_function(std::function<double(const Vector&)> f) {
    RegressorSpec spec;
    spec.kind = Kind::Known;
    spec.known = std::move(f);
    return spec;
}

Regressor fit_regressor(const RegressorSpec& spec, const Matrix& x, const Vector& t) {
    switch (spec.kind) {
    case RegressorSpec::Kind::Known:
        return Regressor::known(spec.known);
    case RegressorSpec::Kind::Linear:
        return fit_linear(x, t);
    case RegressorSpec::Kind::KernelRidge:
        return fit_kernel_ridge(x, t, spec.kernel, spec.lambda);
    }
    throw ConfigError("unknown regressor kind");
}

} // namespace c2st::cit
