#include "c2st/kernels.hpp"

#include <cmath>

#include "c2st/errors.hpp"

namespace c2st::kernels {

namespace {

// Direct difference form keeps k(a, b) == k(b, a) bit for bit.
inline double squared_distance(const double* a, const double* b, Eigen::Index p, Eigen::Index stride_a,
                               Eigen::Index stride_b) {
    double acc = 0.0;
    for (Eigen::Index k = 0; k < p; ++k) {
        const double d = a[k * stride_a] - b[k * stride_b];
        acc += d * d;
    }
    return acc;
}

} // namespace

void KernelSpec::validate() const {
    if (!(bandwidth_sq > 0.0)) throw ConfigError("kernel bandwidth must be positive");
    if (!(amplitude > 0.0)) throw ConfigError("kernel amplitude must be positive");
}

double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b) {
    if (a.size() != b.size())
        throw DimensionMismatch("kernel_eval: lengths " + std::to_string(a.size()) + " and " + std::to_string(b.size()));
    const double d2 = squared_distance(a.data(), b.data(), a.size(), a.innerStride(), b.innerStride());
    return spec.amplitude * std::exp(-d2 / spec.bandwidth_sq);
}

Matrix gram(const KernelSpec& spec, const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols())
        throw DimensionMismatch("gram: column counts " + std::to_string(a.cols()) + " and " + std::to_string(b.cols()));
    // Row-major copies give contiguous rows for the inner loop.
    const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> ra = a, rb = b;
    const Eigen::Index p = a.cols();
    Matrix g(a.rows(), b.rows());
    for (Eigen::Index j = 0; j < b.rows(); ++j) {
        const double* bj = rb.row(j).data();
        for (Eigen::Index i = 0; i < a.rows(); ++i)
            g(i, j) = spec.amplitude * std::exp(-squared_distance(ra.row(i).data(), bj, p, 1, 1) / spec.bandwidth_sq);
    }
    return g;
}

} // namespace c2st::kernels
