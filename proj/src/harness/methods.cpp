#include "c2st/cit.hpp"
#include "c2st/drt.hpp"
#include "c2st/errors.hpp"
#include "c2st/harness.hpp"

namespace c2st::harness {

namespace {

ratio::RatioMethod ratio_method_from_suffix(const std::string& suffix) {
    ratio::RatioMethod m;
    if (suffix.empty() || suffix == "ll") m.kind = ratio::Kind::LL;
    else if (suffix == "klr") m.kind = ratio::Kind::KLR;
    else throw ConfigError("unknown ratio estimator '" + suffix + "' (expected ll or klr)");
    return m;
}

MethodFn drt_method(const std::string& base, const ratio::RatioMethod& rm) {
    using TestFn = TestOutcome (*)(const PairedData&, const drt::DrtConfig&, Rng&);
    TestFn fn = nullptr;
    if (base == "clf") fn = drt::classifier_test;
    else if (base == "clf-cv") fn = drt::classifier_test_cv;
    else if (base == "mmd") fn = drt::mmd_linear_test;
    else if (base == "mmd-cv") fn = drt::mmd_linear_test_cv;
    return [fn, rm](const PairedData& data, double alpha, Rng& rng) {
        drt::DrtConfig cfg;
        cfg.ratio_source = rm;
        cfg.alpha = alpha;
        return fn(data, cfg, rng);
    };
}

} // namespace

std::vector<std::string> method_ids() {
    return {"gcm-lm", "gcm-lm-direct", "gcm-krr", "clf", "clf-cv", "mmd", "mmd-cv", "mean", "always-reject", "uniform-p"};
}

MethodFn resolve_method(const std::string& id) {
    const auto colon = id.find(':');
    const std::string base = id.substr(0, colon);
    const std::string suffix = colon == std::string::npos ? "" : id.substr(colon + 1);
    const bool ratio_based = base == "clf" || base == "clf-cv" || base == "mmd" || base == "mmd-cv" || base == "mean";
    if (!suffix.empty() && !ratio_based) throw ConfigError("method '" + base + "' takes no suffix");

    if (base == "gcm-lm" || base == "gcm-krr") {
        cit::RegressorSpec spec;
        if (base == "gcm-krr") spec.kind = cit::RegressorSpec::Kind::KernelRidge;
        return [spec](const PairedData& data, double alpha, Rng& rng) {
            return cit::convert(data, cit::gcm_adapter(spec, spec, alpha), rng);
        };
    }
    if (base == "gcm-lm-direct") {
        return [](const PairedData& data, double alpha, Rng&) {
            return cit::gcm_test(pool(data), cit::RegressorSpec{}, cit::RegressorSpec{}, alpha);
        };
    }
    if (base == "clf" || base == "clf-cv" || base == "mmd" || base == "mmd-cv")
        return drt_method(base, ratio_method_from_suffix(suffix));
    if (base == "mean") {
        const auto rm = ratio_method_from_suffix(suffix);
        return [rm](const PairedData& data, double alpha, Rng& rng) {
            const auto [eval, fit] = split_paired(data, 0.5, rng);
            const auto r = drt::as_ratio_fn(ratio::fit_marginal_ratio(fit, rm));
            return drt::mean_comparison(eval, r, drt::response_feature(), alpha);
        };
    }
    if (base == "always-reject") {
        return [](const PairedData&, double alpha, Rng&) { return decide("always-reject", 0.0, 0.0, alpha); };
    }
    if (base == "uniform-p") {
        return [](const PairedData&, double alpha, Rng& rng) {
            return decide("uniform-p", 0.0, rng.uniform(), alpha);
        };
    }
    throw ConfigError("unknown method '" + id + "'");
}

} // namespace c2st::harness
