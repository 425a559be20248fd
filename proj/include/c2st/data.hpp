#pragma once

#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "c2st/rng.hpp"

namespace c2st {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Two independent labeled samples {(X_i^(1), Y_i^(1))} and {(X_i^(2), Y_i^(2))}.
///
/// Construction validates the shape and finiteness invariants; after that
/// the object is immutable.
class PairedData {
public:
    /// Throws InvalidData unless n1, n2 >= 2, p >= 1, column counts agree
    /// and every entry is finite.
    PairedData(Matrix x1, Vector y1, Matrix x2, Vector y2);

    const Matrix& x1() const noexcept { return x1_; }
    const Vector& y1() const noexcept { return y1_; }
    const Matrix& x2() const noexcept { return x2_; }
    const Vector& y2() const noexcept { return y2_; }

    Eigen::Index n1() const noexcept { return x1_.rows(); }
    Eigen::Index n2() const noexcept { return x2_.rows(); }
    Eigen::Index dim() const noexcept { return x1_.cols(); }

    /// Rows (x, y) concatenated, one population at a time.
    Matrix joint1() const;
    Matrix joint2() const;

private:
    Matrix x1_;
    Vector y1_;
    Matrix x2_;
    Vector y2_;
};

/// The (X, Y, Z) triple with group label Z in {1, 2}.
class PooledData {
public:
    /// Throws InvalidData unless both labels occur and shapes agree.
    PooledData(Matrix x, Vector y, std::vector<int> z);

    const Matrix& x() const noexcept { return x_; }
    const Vector& y() const noexcept { return y_; }
    const std::vector<int>& z() const noexcept { return z_; }

    Eigen::Index size() const noexcept { return x_.rows(); }
    Eigen::Index count(int label) const;

    /// Z as a real vector with values 1.0 / 2.0.
    Vector z_numeric() const;

    /// Rows with the given label, in order.
    std::pair<Matrix, Vector> filter(int label) const;

private:
    Matrix x_;
    Vector y_;
    std::vector<int> z_;
};

/// Result of any calibrated test.
struct TestOutcome {
    double statistic = 0.0;
    double p_value = 1.0;
    bool reject = false;
    double alpha = 0.05;
    std::string method;
    std::map<std::string, double> diagnostics;

    /// True when the outcome was produced by a guard (bad event, degenerate
    /// variance) rather than by the test statistic.
    bool forced_acceptance() const;
};

/// Outcome with reject = (p <= alpha).
TestOutcome decide(std::string method, double statistic, double p_value, double alpha);

/// Conservative outcome: reject = false, p = 1, diagnostic `reason` = 1.
TestOutcome forced_accept(std::string method, double alpha, const std::string& reason);

/// Rows of `m` at the given indices, in that order.
Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows);
Vector select_rows(const Vector& v, std::span<const std::size_t> rows);

/// Per-population shuffle and cut at floor(ratio * n_j).
///
/// Throws SplitTooSmall if any of the four parts would have fewer than the
/// two rows a PairedData needs.
std::pair<PairedData, PairedData> split_paired(const PairedData& data, double ratio, Rng& rng);

/// Population 1 rows first (z = 1), then population 2 (z = 2).
PooledData pool(const PairedData& data);

/// Keeps the first `n1` and `n2` rows of each population.
PairedData head(const PairedData& data, Eigen::Index n1, Eigen::Index n2);

/// Per-population random permutation of rows.
PairedData shuffle_rows(const PairedData& data, Rng& rng);

/// Subsamples the larger population (without replacement) down to the
/// smaller size; the result is returned unchanged when n1 == n2.
PairedData balance(const PairedData& data, Rng& rng);

/// Splits each population, in row order, into `folds` contiguous blocks of
/// near-equal size. Returns, per fold, the held-out block and its complement.
std::vector<std::pair<PairedData, PairedData>> kfold(const PairedData& data, int folds);

} // namespace c2st
