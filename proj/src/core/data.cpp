#include "c2st/data.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "c2st/errors.hpp"

namespace c2st {

namespace {

bool all_finite(const Matrix& m) { return m.allFinite(); }

Matrix concat_xy(const Matrix& x, const Vector& y) {
    Matrix v(x.rows(), x.cols() + 1);
    v.leftCols(x.cols()) = x;
    v.col(x.cols()) = y;
    return v;
}

std::vector<std::size_t> iota_indices(std::size_t begin, std::size_t end) {
    std::vector<std::size_t> idx(end - begin);
    std::iota(idx.begin(), idx.end(), begin);
    return idx;
}

} // namespace

PairedData::PairedData(Matrix x1, Vector y1, Matrix x2, Vector y2)
    : x1_(std::move(x1)), y1_(std::move(y1)), x2_(std::move(x2)), y2_(std::move(y2)) {
    if (x1_.rows() < 2 || x2_.rows() < 2)
        throw InvalidData("each population needs at least two observations (n1 = " +
                          std::to_string(x1_.rows()) + ", n2 = " + std::to_string(x2_.rows()) + ")");
    if (x1_.cols() < 1 || x1_.cols() != x2_.cols())
        throw InvalidData("covariate matrices must share a positive column count");
    if (y1_.size() != x1_.rows() || y2_.size() != x2_.rows())
        throw InvalidData("response length does not match covariate rows");
    if (!all_finite(x1_) || !all_finite(x2_) || !y1_.allFinite() || !y2_.allFinite())
        throw InvalidData("non-finite entry in paired data");
}

Matrix PairedData::joint1() const { return concat_xy(x1_, y1_); }
Matrix PairedData::joint2() const { return concat_xy(x2_, y2_); }

PooledData::PooledData(Matrix x, Vector y, std::vector<int> z)
    : x_(std::move(x)), y_(std::move(y)), z_(std::move(z)) {
    if (y_.size() != x_.rows() || static_cast<Eigen::Index>(z_.size()) != x_.rows())
        throw InvalidData("pooled data: inconsistent lengths");
    for (const int label : z_)
        if (label != 1 && label != 2) throw InvalidData("pooled data: labels must be 1 or 2");
    if (count(1) < 1 || count(2) < 1) throw InvalidData("pooled data: both groups must be present");
}

Eigen::Index PooledData::count(int label) const {
    return static_cast<Eigen::Index>(std::count(z_.begin(), z_.end(), label));
}

Vector PooledData::z_numeric() const {
    Vector out(size());
    for (Eigen::Index i = 0; i < size(); ++i) out(i) = static_cast<double>(z_[static_cast<std::size_t>(i)]);
    return out;
}

std::pair<Matrix, Vector> PooledData::filter(int label) const {
    std::vector<std::size_t> rows;
    for (std::size_t i = 0; i < z_.size(); ++i)
        if (z_[i] == label) rows.push_back(i);
    return {select_rows(x_, rows), select_rows(y_, rows)};
}

bool TestOutcome::forced_acceptance() const {
    for (const char* key : {"bad_event", "degenerate_variance", "all_folds_degenerate", "replicate_error", "empty_group"}) {
        const auto it = diagnostics.find(key);
        if (it != diagnostics.end() && it->second != 0.0) return true;
    }
    return false;
}

TestOutcome decide(std::string method, double statistic, double p_value, double alpha) {
    TestOutcome out;
    out.method = std::move(method);
    out.statistic = statistic;
    out.p_value = std::clamp(p_value, 0.0, 1.0);
    out.alpha = alpha;
    out.reject = out.p_value <= alpha;
    return out;
}

TestOutcome forced_accept(std::string method, double alpha, const std::string& reason) {
    TestOutcome out;
    out.method = std::move(method);
    out.statistic = 0.0;
    out.p_value = 1.0;
    out.reject = false;
    out.alpha = alpha;
    out.diagnostics[reason] = 1.0;
    return out;
}

Matrix select_rows(const Matrix& m, std::span<const std::size_t> rows) {
    Matrix out(static_cast<Eigen::Index>(rows.size()), m.cols());
    for (std::size_t i = 0; i < rows.size(); ++i)
        out.row(static_cast<Eigen::Index>(i)) = m.row(static_cast<Eigen::Index>(rows[i]));
    return out;
}

Vector select_rows(const Vector& v, std::span<const std::size_t> rows) {
    Vector out(static_cast<Eigen::Index>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) out(static_cast<Eigen::Index>(i)) = v(static_cast<Eigen::Index>(rows[i]));
    return out;
}

std::pair<PairedData, PairedData> split_paired(const PairedData& data, double ratio, Rng& rng) {
    if (!(ratio > 0.0 && ratio < 1.0)) throw SplitTooSmall("split ratio must lie in (0, 1)");
    const auto n1 = static_cast<std::size_t>(data.n1());
    const auto n2 = static_cast<std::size_t>(data.n2());
    const auto cut1 = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n1)));
    const auto cut2 = static_cast<std::size_t>(std::floor(ratio * static_cast<double>(n2)));
    if (cut1 < 2 || cut2 < 2 || n1 - cut1 < 2 || n2 - cut2 < 2)
        throw SplitTooSmall("split of (" + std::to_string(n1) + ", " + std::to_string(n2) +
                            ") at ratio " + std::to_string(ratio) + " leaves a part with fewer than two rows");

    const auto perm1 = rng.permutation(n1);
    const auto perm2 = rng.permutation(n2);
    const std::span<const std::size_t> p1(perm1), p2(perm2);
    PairedData first(select_rows(data.x1(), p1.first(cut1)), select_rows(data.y1(), p1.first(cut1)),
                     select_rows(data.x2(), p2.first(cut2)), select_rows(data.y2(), p2.first(cut2)));
    PairedData second(select_rows(data.x1(), p1.subspan(cut1)), select_rows(data.y1(), p1.subspan(cut1)),
                      select_rows(data.x2(), p2.subspan(cut2)), select_rows(data.y2(), p2.subspan(cut2)));
    return {std::move(first), std::move(second)};
}

PooledData pool(const PairedData& data) {
    const Eigen::Index n1 = data.n1();
    const Eigen::Index n2 = data.n2();
    Matrix x(n1 + n2, data.dim());
    x.topRows(n1) = data.x1();
    x.bottomRows(n2) = data.x2();
    Vector y(n1 + n2);
    y.head(n1) = data.y1();
    y.tail(n2) = data.y2();
    std::vector<int> z(static_cast<std::size_t>(n1 + n2), 2);
    std::fill(z.begin(), z.begin() + n1, 1);
    return PooledData(std::move(x), std::move(y), std::move(z));
}

PairedData head(const PairedData& data, Eigen::Index n1, Eigen::Index n2) {
    return PairedData(data.x1().topRows(n1), data.y1().head(n1), data.x2().topRows(n2), data.y2().head(n2));
}

PairedData shuffle_rows(const PairedData& data, Rng& rng) {
    const auto perm1 = rng.permutation(static_cast<std::size_t>(data.n1()));
    const auto perm2 = rng.permutation(static_cast<std::size_t>(data.n2()));
    return PairedData(select_rows(data.x1(), perm1), select_rows(data.y1(), perm1),
                      select_rows(data.x2(), perm2), select_rows(data.y2(), perm2));
}

PairedData balance(const PairedData& data, Rng& rng) {
    if (data.n1() == data.n2()) return data;
    const Eigen::Index n = std::min(data.n1(), data.n2());
    if (data.n1() > n) {
        const auto perm = rng.permutation(static_cast<std::size_t>(data.n1()));
        const std::span<const std::size_t> keep(perm.data(), static_cast<std::size_t>(n));
        return PairedData(select_rows(data.x1(), keep), select_rows(data.y1(), keep), data.x2(), data.y2());
    }
    const auto perm = rng.permutation(static_cast<std::size_t>(data.n2()));
    const std::span<const std::size_t> keep(perm.data(), static_cast<std::size_t>(n));
    return PairedData(data.x1(), data.y1(), select_rows(data.x2(), keep), select_rows(data.y2(), keep));
}

std::vector<std::pair<PairedData, PairedData>> kfold(const PairedData& data, int folds) {
    if (folds < 2) throw SplitTooSmall("k-fold partition needs at least two folds");
    const auto n1 = static_cast<std::size_t>(data.n1());
    const auto n2 = static_cast<std::size_t>(data.n2());
    const auto k = static_cast<std::size_t>(folds);
    auto bounds = [k](std::size_t n, std::size_t j) { return std::pair{j * n / k, (j + 1) * n / k}; };

    std::vector<std::pair<PairedData, PairedData>> out;
    out.reserve(k);
    for (std::size_t j = 0; j < k; ++j) {
        const auto [a1, b1] = bounds(n1, j);
        const auto [a2, b2] = bounds(n2, j);
        const auto held1 = iota_indices(a1, b1);
        const auto held2 = iota_indices(a2, b2);
        std::vector<std::size_t> rest1 = iota_indices(0, a1), rest2 = iota_indices(0, a2);
        for (std::size_t i = b1; i < n1; ++i) rest1.push_back(i);
        for (std::size_t i = b2; i < n2; ++i) rest2.push_back(i);
        if (held1.size() < 2 || held2.size() < 2 || rest1.size() < 2 || rest2.size() < 2)
            throw SplitTooSmall("fold " + std::to_string(j) + " has fewer than two rows in a population");
        out.emplace_back(PairedData(select_rows(data.x1(), held1), select_rows(data.y1(), held1),
                                    select_rows(data.x2(), held2), select_rows(data.y2(), held2)),
                         PairedData(select_rows(data.x1(), rest1), select_rows(data.y1(), rest1),
                                    select_rows(data.x2(), rest2), select_rows(data.y2(), rest2)));
    }
    return out;
}

} // namespace c2st
