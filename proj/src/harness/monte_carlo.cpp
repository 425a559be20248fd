#include <atomic>
#include <chrono>
#include <cstdlib>
#include <exception>
#include <thread>

#include "c2st/errors.hpp"
#include "c2st/harness.hpp"
#include "c2st/stats.hpp"

namespace c2st::harness {

int default_jobs() {
    if (const char* env = std::getenv("C2ST_JOBS")) {
        char* end = nullptr;
        const long v = std::strtol(env, &end, 10);
        if (end != env && *end == '\0' && v > 0 && v <= 1024) return static_cast<int>(v);
    }
    return 1;
}

void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task) {
    const auto workers = static_cast<std::size_t>(std::max(1, jobs));
    if (workers == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) task(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first_error;
    std::atomic<bool> failed{false};
    auto worker = [&] {
        for (std::size_t i = next++; i < count && !failed; i = next++) {
            try {
                task(i);
            } catch (...) {
                if (!failed.exchange(true)) first_error = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < std::min(workers, count); ++w) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
    if (first_error) std::rethrow_exception(first_error);
}

void ExperimentPlan::validate() const {
    if (scenarios.empty()) throw ConfigError("plan has no scenario cells");
    if (methods.empty()) throw ConfigError("plan has no methods");
    if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
    if (!(alpha > 0.0 && alpha < 1.0)) throw ConfigError("alpha must lie in (0, 1)");
    if (jobs < 0) throw ConfigError("jobs must be >= 0");
    for (const auto& s : scenarios) s.validate();
    for (const auto& m : methods) (void)resolve_method(m);
}

std::uint64_t data_stream(const synth::ScenarioConfig& cfg, int rep) {
    const std::string key = cfg.id() + "|" + synth::to_string(cfg.hypothesis) + "|n=" + std::to_string(cfg.n) +
                            "|p=" + std::to_string(cfg.p) + "|shift=" + std::to_string(cfg.shift);
    return hash_combine(stable_hash(key), static_cast<std::uint64_t>(rep));
}

std::vector<Replicate> run_cell(const synth::ScenarioConfig& cfg, const std::string& method, int reps, double alpha,
                                std::uint64_t base_seed, int jobs) {
    cfg.validate();
    if (reps < 1) throw ConfigError("repetitions must be >= 1");
    const MethodFn fn = resolve_method(method);
    const std::uint64_t method_key = stable_hash(method);
    std::vector<Replicate> out(static_cast<std::size_t>(reps));

    parallel_for(out.size(), jobs, [&](std::size_t i) {
        const std::uint64_t stream = data_stream(cfg, static_cast<int>(i));
        Rng data_rng(base_seed, stream);
        Rng method_rng(base_seed, hash_combine(stream, method_key));
        Replicate& r = out[i];
        const auto start = std::chrono::steady_clock::now();
        try {
            const synth::ScenarioSampler sampler(cfg, data_rng);
            const PairedData data = sampler.generate(data_rng);
            r.outcome = fn(data, alpha, method_rng);
        } catch (const std::exception& e) {
            r.failed = true;
            r.error = e.what();
            r.outcome = forced_accept(method, alpha, "replicate_error");
        }
        r.runtime_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    });
    return out;
}

RejectionSummary summarize(const synth::ScenarioConfig& cfg, const std::string& method,
                           const std::vector<Replicate>& reps) {
    if (reps.empty()) throw InvalidData("cannot summarize an empty cell");
    RejectionSummary s;
    s.scenario = cfg.id();
    s.support = cfg.support;
    s.hypothesis = cfg.hypothesis;
    s.n = cfg.n;
    s.method = method;
    s.repetitions = static_cast<int>(reps.size());
    double runtime = 0.0;
    for (const auto& r : reps) {
        if (r.outcome.reject) ++s.rejections;
        if (r.failed) ++s.failures;
        runtime += r.runtime_ms;
    }
    s.rate = static_cast<double>(s.rejections) / s.repetitions;
    std::tie(s.ci_lo, s.ci_hi) = stats::clopper_pearson(static_cast<std::size_t>(s.rejections),
                                                        static_cast<std::size_t>(s.repetitions), 0.95);
    s.mean_runtime_ms = runtime / s.repetitions;
    return s;
}

std::vector<RejectionSummary> run_monte_carlo(const ExperimentPlan& plan) {
    plan.validate();
    const int jobs = plan.jobs > 0 ? plan.jobs : default_jobs();
    std::vector<RejectionSummary> out;
    for (const auto& cfg : plan.scenarios)
        for (const auto& method : plan.methods)
            out.push_back(summarize(cfg, method, run_cell(cfg, method, plan.repetitions, plan.alpha, plan.base_seed, jobs)));
    return out;
}

} // namespace c2st::harness
