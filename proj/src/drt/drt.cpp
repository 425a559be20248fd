#include "c2st/drt.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "c2st/errors.hpp"
#include "c2st/stats.hpp"

namespace c2st::drt {

namespace {

// Variance below this fraction of the mean square is treated as zero.
constexpr double kDegenerateRel = 1e-20;

bool degenerate(double variance, double mean_square) {
    return !(variance > kDegenerateRel * std::max(mean_square, 1e-300));
}

double mean_square(std::span<const double> v) {
    double acc = 0.0;
    for (const double x : v) acc += x * x;
    return acc / static_cast<double>(v.size());
}

Vector ratio_on_rows(const RatioFn& ratio, const Matrix& x) {
    Vector r(x.rows());
    for (Eigen::Index i = 0; i < x.rows(); ++i) r(i) = ratio(x.row(i).transpose());
    return r;
}

struct ClassifierRatios {
    RatioFn marginal;
    JointRatioFn joint;
};

const OracleRatios* oracle_of(const DrtConfig& cfg) { return std::get_if<OracleRatios>(&cfg.ratio_source); }

RatioFn marginal_ratio_for(const DrtConfig& cfg, const PairedData& fit_data) {
    if (const auto* oracle = oracle_of(cfg)) {
        if (!oracle->marginal) throw ConfigError("oracle ratio source without a marginal ratio");
        return oracle->marginal;
    }
    return as_ratio_fn(ratio::fit_marginal_ratio(fit_data, std::get<ratio::RatioMethod>(cfg.ratio_source)));
}

ClassifierRatios classifier_ratios_for(const DrtConfig& cfg, const PairedData& fit_data) {
    if (const auto* oracle = oracle_of(cfg)) {
        if (!oracle->marginal || !oracle->joint)
            throw ConfigError("classifier test with oracle ratios needs both the marginal and the joint ratio");
        return {oracle->marginal, oracle->joint};
    }
    const auto& method = std::get<ratio::RatioMethod>(cfg.ratio_source);
    return {as_ratio_fn(ratio::fit_marginal_ratio(fit_data, method)),
            as_joint_ratio_fn(ratio::fit_joint_ratio(fit_data, method))};
}

std::function<int(const Vector&, double)> make_classifier(ClassifierRatios ratios) {
    return [ratios = std::move(ratios)](const Vector& x, double y) {
        return plug_in_classify(ratios.marginal(x), ratios.joint(x, y));
    };
}

TestOutcome one_sided(const std::string& method, std::optional<double> stat, double alpha) {
    if (!stat) return forced_accept(method, alpha, "degenerate_variance");
    return decide(method, *stat, stats::one_sided_p(*stat), alpha);
}

// Combined statistic plus one `fold<j>_stat` diagnostic per non-degenerate fold.
TestOutcome combined_outcome(const std::string& method, const std::vector<std::optional<double>>& fold_stats,
                             double alpha) {
    const auto combined = combine_fold_statistics(fold_stats);
    TestOutcome out = combined ? one_sided(method, combined, alpha) : forced_accept(method, alpha, "all_folds_degenerate");
    for (std::size_t j = 0; j < fold_stats.size(); ++j)
        if (fold_stats[j]) out.diagnostics["fold" + std::to_string(j + 1) + "_stat"] = *fold_stats[j];
    return out;
}

void note_balance(TestOutcome& out, const PairedData& original, const PairedData& balanced) {
    out.diagnostics["n_per_population"] = static_cast<double>(balanced.n1());
    if (original.n1() != original.n2()) out.diagnostics["balanced_by_subsampling"] = 1.0;
}

} // namespace

void DrtConfig::validate(bool cross_validated) const {
    if (!(split_train_eval > 0.0 && split_train_eval < 1.0)) throw ConfigError("split_train_eval must lie in (0, 1)");
    if (!(ratio_eval_split > 0.0 && ratio_eval_split < 1.0)) throw ConfigError("ratio_eval_split must lie in (0, 1)");
    if (cross_validated && folds < 2) throw ConfigError("cross-validated tests need K >= 2 folds");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    kernel.validate();
}

FeatureMap response_feature() {
    return [](const Vector&, double y) { return y; };
}

RatioFn as_ratio_fn(const ratio::DensityRatioModel& model) {
    return [model](const Vector& x) { return model.predict_ratio(x); };
}

JointRatioFn as_joint_ratio_fn(const ratio::DensityRatioModel& model) {
    return [model](const Vector& x, double y) {
        Vector v(x.size() + 1);
        v.head(x.size()) = x;
        v(x.size()) = y;
        return model.predict_ratio(v);
    };
}

TestOutcome mean_comparison(const PairedData& data, const RatioFn& ratio, const FeatureMap& psi, double alpha) {
    const std::string method = "mean";
    std::vector<double> a(static_cast<std::size_t>(data.n1())), b(static_cast<std::size_t>(data.n2()));
    for (Eigen::Index i = 0; i < data.n1(); ++i) a[static_cast<std::size_t>(i)] = psi(data.x1().row(i).transpose(), data.y1()(i));
    for (Eigen::Index i = 0; i < data.n2(); ++i) {
        const Vector x = data.x2().row(i).transpose();
        b[static_cast<std::size_t>(i)] = ratio(x) * psi(x, data.y2()(i));
    }
    const double numerator = stats::mean(a) - stats::mean(b);
    const double var = stats::sample_variance(a) / static_cast<double>(a.size()) +
                       stats::sample_variance(b) / static_cast<double>(b.size());
    const double scale = mean_square(a) / static_cast<double>(a.size()) + mean_square(b) / static_cast<double>(b.size());
    TestOutcome out = degenerate(var, scale) ? forced_accept(method, alpha, "degenerate_variance") : [&] {
        const double z = numerator / std::sqrt(var);
        return decide(method, z, stats::two_sided_p(z), alpha);
    }();
    out.diagnostics["numerator"] = numerator;
    return out;
}

double weighted_rank_sum(const PairedData& data, const RatioFn& ratio, const FeatureMap& psi) {
    std::vector<double> first(static_cast<std::size_t>(data.n1()));
    for (Eigen::Index i = 0; i < data.n1(); ++i) first[static_cast<std::size_t>(i)] = psi(data.x1().row(i).transpose(), data.y1()(i));
    std::sort(first.begin(), first.end());
    double acc = 0.0;
    for (Eigen::Index j = 0; j < data.n2(); ++j) {
        const Vector x = data.x2().row(j).transpose();
        const double v = psi(x, data.y2()(j));
        // Count of first-sample values strictly greater than v.
        const auto above = static_cast<double>(first.end() - std::upper_bound(first.begin(), first.end(), v));
        acc += ratio(x) * above;
    }
    return acc / (static_cast<double>(data.n1()) * static_cast<double>(data.n2()));
}

int plug_in_classify(double marginal_ratio, double joint_ratio) {
    // f^(1)(y, x) > f^(2)(y | x) f_X^(1)(x) is r_YX > r_X.
    return joint_ratio > marginal_ratio ? 1 : 2;
}

std::optional<double> AccuracyFold::statistic() const {
    if (!(variance_sum > 0.0)) return std::nullopt;
    return std::sqrt(static_cast<double>(m)) * numerator / std::sqrt(variance_sum);
}

AccuracyFold accuracy_fold(const PairedData& eval, const RatioFn& marginal,
                           const std::function<int(const Vector& x, double y)>& classifier) {
    const Eigen::Index m = std::min(eval.n1(), eval.n2());
    if (m < 2) throw SplitTooSmall("accuracy statistic needs at least two evaluation points per population");
    std::vector<double> a1(static_cast<std::size_t>(m)), a2(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        const Vector x1 = eval.x1().row(i).transpose();
        const Vector x2 = eval.x2().row(i).transpose();
        a1[static_cast<std::size_t>(i)] = classifier(x1, eval.y1()(i)) == 1 ? 1.0 : 0.0;
        a2[static_cast<std::size_t>(i)] = classifier(x2, eval.y2()(i)) == 2 ? marginal(x2) : 0.0;
    }
    AccuracyFold fold;
    fold.m = m;
    fold.numerator = stats::mean(a1) + stats::mean(a2) - 1.0;
    const double var = stats::sample_variance(a1) + stats::sample_variance(a2);
    fold.variance_sum = degenerate(var, mean_square(a1) + mean_square(a2)) ? 0.0 : var;
    return fold;
}

TestOutcome classifier_test(const PairedData& data, const DrtConfig& cfg, Rng& rng) {
    cfg.validate(false);
    const std::string method = "clf";
    const PairedData balanced = balance(data, rng);
    const auto [d_a, d_b] = split_paired(balanced, cfg.split_train_eval, rng);
    const auto classifier = make_classifier(classifier_ratios_for(cfg, d_b));
    const auto [d_a_fit, d_a_eval] = split_paired(d_a, cfg.ratio_eval_split, rng);
    const AccuracyFold fold = accuracy_fold(d_a_eval, marginal_ratio_for(cfg, d_a_fit), classifier);

    TestOutcome out = one_sided(method, fold.statistic(), cfg.alpha);
    out.diagnostics["m"] = static_cast<double>(fold.m);
    out.diagnostics["numerator"] = fold.numerator;
    note_balance(out, data, balanced);
    return out;
}

TestOutcome classifier_test_cv(const PairedData& data, const DrtConfig& cfg, Rng& rng) {
    cfg.validate(true);
    const std::string method = "clf-cv";
    const PairedData balanced = balance(data, rng);
    const auto [d_a, d_b] = split_paired(balanced, cfg.split_train_eval, rng);
    const auto classifier = make_classifier(classifier_ratios_for(cfg, d_b));

    std::vector<std::optional<double>> fold_stats;
    int degenerate_folds = 0;
    for (const auto& [held, rest] : kfold(d_a, cfg.folds)) {
        const AccuracyFold fold = accuracy_fold(held, marginal_ratio_for(cfg, rest), classifier);
        fold_stats.push_back(fold.statistic());
        if (!fold_stats.back()) ++degenerate_folds;
    }
    TestOutcome out = combined_outcome(method, fold_stats, cfg.alpha);
    out.diagnostics["folds"] = static_cast<double>(cfg.folds);
    out.diagnostics["degenerate_folds"] = degenerate_folds;
    note_balance(out, data, balanced);
    return out;
}

std::vector<double> linear_mmd_terms(const PairedData& eval, const RatioFn& ratio, const kernels::KernelSpec& kernel) {
    const Eigen::Index n_eval = std::min(eval.n1(), eval.n2());
    const Eigen::Index m = n_eval / 2;
    if (m < 2) throw SplitTooSmall("linear-time MMD needs at least four evaluation points per population");
    const Matrix v1 = eval.joint1();
    const Matrix v2 = eval.joint2();
    auto k = [&](const Matrix& a, Eigen::Index i, const Matrix& b, Eigen::Index j) {
        return kernels::kernel_eval(kernel, a.row(i).transpose(), b.row(j).transpose());
    };
    std::vector<double> terms(static_cast<std::size_t>(m));
    for (Eigen::Index i = 0; i < m; ++i) {
        const double ri = ratio(eval.x2().row(i).transpose());
        const double rim = ratio(eval.x2().row(i + m).transpose());
        terms[static_cast<std::size_t>(i)] = k(v1, i, v1, i + m) + ri * rim * k(v2, i, v2, i + m) -
                                             ri * k(v2, i, v1, i + m) - rim * k(v1, i, v2, i + m);
    }
    return terms;
}

std::optional<double> studentized_mean(std::span<const double> terms) {
    if (terms.size() < 2) return std::nullopt;
    const double var = stats::sample_variance(terms);
    if (degenerate(var, mean_square(terms))) return std::nullopt;
    return std::sqrt(static_cast<double>(terms.size())) * stats::mean(terms) / std::sqrt(var);
}

TestOutcome mmd_linear_test(const PairedData& data, const DrtConfig& cfg, Rng& rng) {
    cfg.validate(false);
    const std::string method = "mmd";
    const PairedData balanced = balance(data, rng);
    const auto [d_a, d_b] = split_paired(balanced, cfg.split_train_eval, rng);
    const auto terms = linear_mmd_terms(d_a, marginal_ratio_for(cfg, d_b), cfg.kernel);
    TestOutcome out = one_sided(method, studentized_mean(terms), cfg.alpha);
    out.diagnostics["m"] = static_cast<double>(terms.size());
    out.diagnostics["mean_term"] = stats::mean(terms);
    note_balance(out, data, balanced);
    return out;
}

TestOutcome mmd_linear_test_cv(const PairedData& data, const DrtConfig& cfg, Rng& rng) {
    cfg.validate(true);
    const std::string method = "mmd-cv";
    const PairedData balanced = balance(data, rng);
    const PairedData shuffled = shuffle_rows(balanced, rng);

    std::vector<std::optional<double>> fold_stats;
    int degenerate_folds = 0;
    for (const auto& [held, rest] : kfold(shuffled, cfg.folds)) {
        const auto terms = linear_mmd_terms(held, marginal_ratio_for(cfg, rest), cfg.kernel);
        fold_stats.push_back(studentized_mean(terms));
        if (!fold_stats.back()) ++degenerate_folds;
    }
    TestOutcome out = combined_outcome(method, fold_stats, cfg.alpha);
    out.diagnostics["folds"] = static_cast<double>(cfg.folds);
    out.diagnostics["degenerate_folds"] = degenerate_folds;
    note_balance(out, data, balanced);
    return out;
}

std::optional<double> combine_fold_statistics(std::span<const std::optional<double>> folds) {
    if (folds.empty()) return std::nullopt;
    double sum = 0.0;
    bool any = false;
    for (const auto& f : folds) {
        if (f) {
            sum += *f;
            any = true;
        }
    }
    if (!any) return std::nullopt;
    return sum / std::sqrt(static_cast<double>(folds.size()));
}

double mmd_quadratic_estimate(const PairedData& data, const RatioFn& ratio, const kernels::KernelSpec& kernel) {
    const Matrix v1 = data.joint1();
    const Matrix v2 = data.joint2();
    const Vector r = ratio_on_rows(ratio, data.x2());
    const auto n1 = static_cast<double>(v1.rows());
    const auto n2 = static_cast<double>(v2.rows());

    const Matrix k11 = kernels::gram(kernel, v1, v1);
    const Matrix k22 = kernels::gram(kernel, v2, v2);
    const Matrix k12 = kernels::gram(kernel, v1, v2);

    const double within1 = k11.sum() - k11.trace();
    const double within2 = r.dot(k22 * r) - (k22.diagonal().array() * r.array().square()).sum();
    const double cross = (k12 * r).sum();
    return within1 / (n1 * (n1 - 1.0)) + within2 / (n2 * (n2 - 1.0)) - 2.0 * cross / (n1 * n2);
}

} // namespace c2st::drt
