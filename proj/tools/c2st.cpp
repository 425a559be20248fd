// Command-line front end: simulate, test, calibrate.
//
// Exit codes: 0 ok, 2 configuration error, 3 data error.

#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "c2st/errors.hpp"
#include "c2st/harness.hpp"
#include "c2st/stats.hpp"

namespace {

using namespace c2st;

constexpr int kConfigError = 2;
constexpr int kDataError = 3;

nlohmann::ordered_json outcome_json(const TestOutcome& t) {
    nlohmann::ordered_json j;
    j["method"] = t.method;
    j["statistic"] = t.statistic;
    j["p_value"] = t.p_value;
    j["reject"] = t.reject;
    j["alpha"] = t.alpha;
    j["forced_acceptance"] = t.forced_acceptance();
    j["diagnostics"] = nlohmann::ordered_json::object();
    for (const auto& [k, v] : t.diagnostics) j["diagnostics"][k] = v;
    return j;
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

int run_simulate(const std::string& plan_path, const std::string& out_path, const std::string& format, int jobs) {
    harness::ExperimentPlan plan = harness::load_plan(plan_path);
    if (jobs > 0) plan.jobs = jobs;
    const auto fmt = harness::parse_report_format(format);
    const auto summaries = harness::run_monte_carlo(plan);
    harness::emit_report(summaries, fmt, out_path);
    for (const auto& s : summaries)
        if (s.failures > 0)
            std::cerr << "warning: " << s.scenario << " " << synth::to_string(s.hypothesis) << " n=" << s.n << " "
                      << s.method << ": " << s.failures << " replicate(s) failed and were counted as acceptances\n";
    return 0;
}

int run_test(const std::string& method, const std::string& data, const std::string& data2, double alpha,
             std::uint64_t seed, const std::string& x_cols, const std::string& y_col, const std::string& group_col) {
    harness::CsvSchema schema;
    schema.x_columns = split_commas(x_cols);
    schema.y_column = y_col;
    const harness::MethodFn fn = harness::resolve_method(method);
    harness::LoadedData loaded = [&] {
        if (data2.empty()) {
            schema.group_column = group_col;
            return harness::load_csv(data, schema);
        }
        return harness::load_csv_pair(data, data2, schema);
    }();
    for (const auto& w : loaded.warnings) std::cerr << "warning: " << w << '\n';
    for (std::size_t j = 0; j < loaded.standardization.columns.size(); ++j)
        std::cerr << "standardized " << loaded.standardization.columns[j] << ": mean "
                  << loaded.standardization.mean[j] << ", scale " << loaded.standardization.scale[j] << '\n';
    Rng rng(seed, stable_hash(method));
    TestOutcome out = fn(loaded.data, alpha, rng);
    if (out.method.empty()) out.method = method;
    std::cout << outcome_json(out).dump(2) << '\n';
    return 0;
}

int run_calibrate(const std::string& method, const std::string& scenario, int n, int p, int reps, std::uint64_t seed,
                  int jobs, double alpha, const std::string& samples_path) {
    synth::ScenarioConfig cfg;
    std::tie(cfg.scenario, cfg.support) = synth::parse_scenario_id(scenario);
    cfg.hypothesis = synth::Hypothesis::Null;
    cfg.n = n;
    cfg.p = p;
    cfg.seed = seed;
    const auto reps_out =
        harness::run_cell(cfg, method, reps, alpha, seed, jobs > 0 ? jobs : harness::default_jobs());
    const auto summary = harness::summarize(cfg, method, reps_out);

    std::vector<double> sample;
    int forced = 0;
    for (const auto& r : reps_out) {
        if (r.outcome.forced_acceptance()) ++forced;
        else sample.push_back(r.outcome.statistic);
    }
    if (!samples_path.empty()) {
        std::ofstream out(samples_path);
        if (!out) throw IoError("cannot open " + samples_path + " for writing");
        out.precision(17);
        for (const double s : sample) out << s << '\n';
    }

    nlohmann::ordered_json j;
    j["method"] = method;
    j["scenario"] = cfg.id();
    j["n"] = n;
    j["reps"] = reps;
    j["rejection_rate"] = summary.rate;
    j["ci95"] = {summary.ci_lo, summary.ci_hi};
    j["failures"] = summary.failures;
    j["forced_acceptances"] = forced;
    if (sample.size() >= 2) {
        const auto ks = stats::ks_test_normal(sample);
        j["ks_statistic"] = ks.statistic;
        j["ks_p_value"] = ks.p_value;
    }
    std::cout << j.dump(2) << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Conditional two-sample tests"};
    app.require_subcommand(1);

    std::string plan_path, out_path, format = "csv";
    int jobs = 0;
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo rejection rates for a plan file");
    simulate->add_option("--plan", plan_path, "Plan file (section.key = value)")->required();
    simulate->add_option("--out", out_path, "Report path")->required();
    simulate->add_option("--format", format, "csv, md or jsonl");
    simulate->add_option("--jobs", jobs, "Worker threads (default: C2ST_JOBS or 1)");

    std::string method, data, data2, x_cols, y_col = "y", group_col = "group";
    double alpha = 0.05;
    std::uint64_t seed = 0;
    auto* test = app.add_subcommand("test", "Run one test on CSV data");
    test->add_option("--method", method, "Method id")->required();
    test->add_option("--data", data, "CSV with both groups, or population 1")->required();
    test->add_option("--data2", data2, "CSV with population 2");
    test->add_option("--alpha", alpha, "Level");
    test->add_option("--seed", seed, "Random seed");
    test->add_option("--x", x_cols, "Comma-separated covariate columns (default: all others)");
    test->add_option("--y", y_col, "Response column");
    test->add_option("--group", group_col, "Group column with labels 1 and 2");

    std::string scenario = "S1U", samples_path;
    int n = 1000, p = 10, reps = 500;
    auto* calibrate = app.add_subcommand("calibrate", "Null statistic sample with a KS check against N(0, 1)");
    calibrate->add_option("--method", method, "Method id")->required();
    calibrate->add_option("--scenario", scenario, "Scenario id, e.g. S1U or S2B");
    calibrate->add_option("--n", n, "Observations per population");
    calibrate->add_option("--p", p, "Covariate dimension");
    calibrate->add_option("--reps", reps, "Replicates");
    calibrate->add_option("--seed", seed, "Base seed");
    calibrate->add_option("--jobs", jobs, "Worker threads");
    calibrate->add_option("--alpha", alpha, "Level");
    calibrate->add_option("--samples", samples_path, "Write the statistic sample here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kConfigError;
    }

    try {
        if (*simulate) return run_simulate(plan_path, out_path, format, jobs);
        if (*test) return run_test(method, data, data2, alpha, seed, x_cols, y_col, group_col);
        if (*calibrate) return run_calibrate(method, scenario, n, p, reps, seed, jobs, alpha, samples_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const InvalidEpsilon& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kConfigError;
    } catch (const Error& e) {
        std::cerr << "data error: " << e.what() << '\n';
        return kDataError;
    }
    return 0;
}
