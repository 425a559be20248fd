#pragma once

#include "c2st/data.hpp"

namespace c2st::kernels {

enum class Family { Gaussian };

/// k(a, b) = amplitude * exp(-||a - b||^2 / bandwidth_sq).
///
/// `amplitude` is 1 for every kernel the tests construct by default; it
/// exists so the scale invariance of studentized statistics can be checked.
struct KernelSpec {
    Family family = Family::Gaussian;
    double bandwidth_sq = 1.0;
    double amplitude = 1.0;

    /// Throws ConfigError unless bandwidth_sq > 0 and amplitude > 0.
    void validate() const;
};

/// Throws DimensionMismatch when the lengths differ.
double kernel_eval(const KernelSpec& spec, const Eigen::Ref<const Vector>& a, const Eigen::Ref<const Vector>& b);

/// G(i, j) = k(A_i, B_j).
Matrix gram(const KernelSpec& spec, const Matrix& a, const Matrix& b);

} // namespace c2st::kernels
