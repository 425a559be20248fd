#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "c2st/errors.hpp"
#include "c2st/harness.hpp"
#include "c2st/stats.hpp"
#include "oracles/oracles.hpp"

using namespace c2st;
using namespace c2st::harness;

namespace {

synth::ScenarioConfig small_cell(int n = 60) {
    synth::ScenarioConfig cfg;
    cfg.n = n;
    cfg.p = 5;
    return cfg;
}

RejectionSummary sample_summary() {
    RejectionSummary s;
    s.scenario = "S1U";
    s.n = 500;
    s.method = "gcm-lm";
    s.rejections = 23;
    s.repetitions = 500;
    s.rate = 0.046;
    s.ci_lo = 0.029361;
    s.ci_hi = 0.068512;
    return s;
}

std::string temp_path(const std::string& stem) {
    return (std::filesystem::temp_directory_path() / ("c2st_test_" + stem)).string();
}

} // namespace

TEST(Methods, KnownIdsResolve) {
    for (const auto& id : method_ids()) EXPECT_NO_THROW(resolve_method(id)) << id;
    EXPECT_NO_THROW(resolve_method("clf:klr"));
    EXPECT_NO_THROW(resolve_method("mmd-cv:ll"));
    EXPECT_THROW(resolve_method("nope"), ConfigError);
    EXPECT_THROW(resolve_method("gcm-lm:klr"), ConfigError);
    EXPECT_THROW(resolve_method("clf:svm"), ConfigError);
}

TEST(MonteCarlo, AlwaysRejectGivesRateOne) {
    const auto reps = run_cell(small_cell(), "always-reject", 40, 0.05, 1, 1);
    const auto s = summarize(small_cell(), "always-reject", reps);
    EXPECT_EQ(s.rejections, 40);
    EXPECT_DOUBLE_EQ(s.rate, 1.0);
    EXPECT_EQ(s.failures, 0);
    const auto [lo, hi] = stats::clopper_pearson(40, 40, 0.95);
    EXPECT_DOUBLE_EQ(s.ci_lo, lo);
    EXPECT_DOUBLE_EQ(s.ci_hi, hi);
}

TEST(MonteCarlo, UniformPWithinBinomialBand) {
    const int reps = 2000;
    const auto s = summarize(small_cell(), "uniform-p", run_cell(small_cell(), "uniform-p", reps, 0.05, 2, 1));
    // 99% two-sided band of Bin(2000, 0.05).
    int lo = 0;
    while (oracle::binomial_lower_tail(lo, reps, 0.05) < 0.005) ++lo;
    int hi = reps;
    while (oracle::binomial_upper_tail(hi, reps, 0.05) < 0.005) --hi;
    EXPECT_GE(s.rejections, lo);
    EXPECT_LE(s.rejections, hi);
}

TEST(MonteCarlo, ReproducibleAndIndependentOfJobs) {
    const auto cfg = small_cell(80);
    for (const std::string method : {"uniform-p", "gcm-lm", "mmd"}) {
        const auto a = run_cell(cfg, method, 12, 0.05, 7, 1);
        const auto b = run_cell(cfg, method, 12, 0.05, 7, 1);
        const auto c = run_cell(cfg, method, 12, 0.05, 7, 4);
        for (std::size_t i = 0; i < a.size(); ++i) {
            EXPECT_EQ(a[i].outcome.statistic, b[i].outcome.statistic) << method;
            EXPECT_EQ(a[i].outcome.p_value, c[i].outcome.p_value) << method;
            EXPECT_EQ(a[i].outcome.reject, c[i].outcome.reject) << method;
        }
    }
    const auto other = run_cell(cfg, "uniform-p", 4, 0.05, 8, 1);
    const auto base = run_cell(cfg, "uniform-p", 4, 0.05, 7, 1);
    EXPECT_NE(other[0].outcome.p_value, base[0].outcome.p_value);
}

TEST(MonteCarlo, StreamsSeparateCellsAndReps) {
    const auto cfg = small_cell();
    auto alt = cfg;
    alt.hypothesis = synth::Hypothesis::Alt;
    EXPECT_NE(data_stream(cfg, 0), data_stream(cfg, 1));
    EXPECT_NE(data_stream(cfg, 0), data_stream(alt, 0));
    EXPECT_EQ(data_stream(cfg, 3), data_stream(cfg, 3));
}

TEST(MonteCarlo, ReplicateErrorsCountAsAcceptances) {
    // n = 2 per population is too small for the classifier split.
    auto cfg = small_cell(2);
    const auto reps = run_cell(cfg, "clf", 5, 0.05, 1, 1);
    const auto s = summarize(cfg, "clf", reps);
    EXPECT_EQ(s.rejections, 0);
    for (const auto& r : reps) {
        if (r.failed) {
            EXPECT_FALSE(r.error.empty());
            EXPECT_TRUE(r.outcome.forced_acceptance());
        }
    }
}

TEST(MonteCarlo, ParallelForCoversEveryIndexAndRethrows) {
    std::vector<int> hits(100, 0);
    parallel_for(hits.size(), 4, [&](std::size_t i) { hits[i] += 1; });
    for (int h : hits) EXPECT_EQ(h, 1);
    EXPECT_THROW(parallel_for(10, 3,
                              [](std::size_t i) {
                                  if (i == 5) throw InvalidData("boom");
                              }),
                 InvalidData);
}

TEST(MonteCarlo, PlanRunsEveryCell) {
    std::istringstream in("grid.scenarios = S1U, S2B\n"
                          "grid.hypotheses = null\n"
                          "grid.n = 40\n"
                          "grid.p = 5\n"
                          "run.methods = always-reject, uniform-p\n"
                          "run.repetitions = 3\n"
                          "run.jobs = 2\n");
    const auto out = run_monte_carlo(parse_plan(in));
    ASSERT_EQ(out.size(), 4u);
    EXPECT_EQ(out[0].scenario, "S1U");
    EXPECT_EQ(out[0].method, "always-reject");
    EXPECT_EQ(out[1].method, "uniform-p");
    EXPECT_EQ(out[2].scenario, "S2B");
    EXPECT_EQ(out[0].repetitions, 3);
}

TEST(Plan, ParsesGridAndDefaults) {
    std::istringstream in("# a comment\n"
                          "grid.scenarios = S1U, S3B   # trailing\n"
                          "grid.n = 200, 400\n"
                          "run.methods = gcm-lm, clf:klr\n"
                          "run.seed = 9\n"
                          "run.alpha = 0.1\n");
    const auto plan = parse_plan(in);
    // 2 scenarios x 2 hypotheses x 2 sizes.
    ASSERT_EQ(plan.scenarios.size(), 8u);
    EXPECT_EQ(plan.scenarios[0].id(), "S1U");
    EXPECT_EQ(plan.scenarios[0].hypothesis, synth::Hypothesis::Null);
    EXPECT_EQ(plan.scenarios[0].n, 200);
    EXPECT_EQ(plan.scenarios[1].n, 400);
    EXPECT_EQ(plan.scenarios[2].hypothesis, synth::Hypothesis::Alt);
    EXPECT_EQ(plan.scenarios[4].id(), "S3B");
    EXPECT_EQ(plan.scenarios[0].p, 10);
    EXPECT_EQ(plan.repetitions, 500);
    EXPECT_DOUBLE_EQ(plan.alpha, 0.1);
    EXPECT_EQ(plan.base_seed, 9u);
    EXPECT_EQ(plan.methods.size(), 2u);
}

TEST(Plan, RejectsMalformedInput) {
    auto parse = [](const std::string& text) {
        std::istringstream in(text);
        return parse_plan(in);
    };
    const std::string ok = "grid.scenarios = S1U\nrun.methods = clf\n";
    EXPECT_NO_THROW(parse(ok));
    EXPECT_THROW(parse(ok + "grid.bogus = 1\n"), ConfigError);
    EXPECT_THROW(parse(ok + "run.repetitions = many\n"), ConfigError);
    EXPECT_THROW(parse(ok + "run.repetitions = 0\n"), ConfigError);
    EXPECT_THROW(parse(ok + "run.alpha = 1.5\n"), ConfigError);
    EXPECT_THROW(parse(ok + "run.methods = clf\n"), ConfigError);
    EXPECT_THROW(parse("grid.scenarios = S1U\n"), ConfigError);
    EXPECT_THROW(parse("grid.scenarios = S9Q\nrun.methods = clf\n"), ConfigError);
    EXPECT_THROW(parse(ok + "no equals sign\n"), ConfigError);
    EXPECT_THROW(parse(ok + "run.methods2 = x\n"), ConfigError);
    EXPECT_THROW(parse("grid.scenarios = S1U\nrun.methods = warp\n"), ConfigError);
    EXPECT_THROW(load_plan(temp_path("missing_plan.txt")), IoError);
}

TEST(Csv, PooledZScoring) {
    std::istringstream in("a,b,y,group\n"
                          "1,10,0,1\n"
                          "2,10,1,1\n"
                          "3,10,2,2\n"
                          "4,10,3,2\n");
    CsvSchema schema;
    schema.group_column = "group";
    const auto loaded = parse_csv(in, schema);
    ASSERT_EQ(loaded.data.n1(), 2);
    ASSERT_EQ(loaded.data.n2(), 2);
    ASSERT_EQ(loaded.data.dim(), 2);
    // Column a: mean 2.5, sample SD sqrt(5/3).
    const double sd = std::sqrt(5.0 / 3.0);
    EXPECT_NEAR(loaded.data.x1()(0, 0), (1 - 2.5) / sd, 1e-14);
    EXPECT_NEAR(loaded.data.x2()(1, 0), (4 - 2.5) / sd, 1e-14);
    EXPECT_NEAR(loaded.data.y2()(0), (2 - 1.5) / sd, 1e-14);
    // Constant column b is centered only.
    EXPECT_DOUBLE_EQ(loaded.data.x1()(0, 1), 0.0);
    ASSERT_EQ(loaded.warnings.size(), 1u);
    EXPECT_NE(loaded.warnings[0].find("'b'"), std::string::npos);
    EXPECT_EQ(loaded.standardization.columns, (std::vector<std::string>{"a", "b", "y"}));
    EXPECT_DOUBLE_EQ(loaded.standardization.scale[1], 1.0);
    double pooled_mean = 0.0;
    for (int i = 0; i < 2; ++i) pooled_mean += loaded.data.x1()(i, 0) + loaded.data.x2()(i, 0);
    EXPECT_NEAR(pooled_mean, 0.0, 1e-14);
}

TEST(Csv, ErrorsCarryLocation) {
    CsvSchema schema;
    schema.group_column = "group";
    {
        std::istringstream in("a,y,group\n1,2,1\n3,x,2\n");
        try {
            parse_csv(in, schema);
            FAIL() << "expected ParseError";
        } catch (const ParseError& e) {
            EXPECT_EQ(e.row(), 3u);
            EXPECT_EQ(e.column(), 2u);
        }
    }
    {
        std::istringstream in("a,y,group\n1,2,1\n3,4\n");
        EXPECT_THROW(parse_csv(in, schema), ParseError);
    }
    {
        std::istringstream in("a,y,group\n1,2,1\n3,4,\n5,6,2\n");
        EXPECT_THROW(parse_csv(in, schema), GroupMissing);
    }
    {
        std::istringstream in("a,y,group\n1,2,1\n3,4,1\n");
        EXPECT_THROW(parse_csv(in, schema), GroupMissing);
    }
    {
        std::istringstream in("a,y,group\n1,2,1\n3,4,3\n");
        EXPECT_THROW(parse_csv(in, schema), ParseError);
    }
    {
        std::istringstream in("a,group\n1,1\n2,2\n");
        EXPECT_THROW(parse_csv(in, schema), ConfigError);
    }
    EXPECT_THROW(load_csv(temp_path("does_not_exist.csv"), schema), IoError);
}

TEST(Csv, PairOfFiles) {
    const std::string p1 = temp_path("pair1.csv"), p2 = temp_path("pair2.csv");
    {
        std::ofstream(p1) << "x1,y\n0,1\n2,3\n";
        std::ofstream(p2) << "x1,y\n4,5\n6,7\n8,9\n";
    }
    const auto loaded = load_csv_pair(p1, p2, CsvSchema{});
    EXPECT_EQ(loaded.data.n1(), 2);
    EXPECT_EQ(loaded.data.n2(), 3);
    EXPECT_NEAR(loaded.standardization.mean[0], 4.0, 1e-14);
    {
        std::ofstream(p2) << "x2,y\n4,5\n6,7\n";
    }
    EXPECT_THROW(load_csv_pair(p1, p2, CsvSchema{}), DimensionMismatch);
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}

TEST(Report, CsvHeaderAndThreeDecimals) {
    const std::string text = render_report({sample_summary()}, ReportFormat::Csv);
    std::istringstream in(text);
    std::string header, row;
    std::getline(in, header);
    std::getline(in, row);
    EXPECT_EQ(header, "scenario,support,hypothesis,n,method,rate,ci_lo,ci_hi,reps,failures");
    EXPECT_EQ(row, "S1U,U,null,500,gcm-lm,0.046,0.029,0.069,500,0");
}

TEST(Report, MarkdownAndJsonLines) {
    const auto md = render_report({sample_summary(), sample_summary()}, ReportFormat::Markdown);
    EXPECT_EQ(md.rfind("| scenario | support |", 0), 0u);
    EXPECT_NE(md.find("| 0.046 | 0.029 | 0.069 |"), std::string::npos);

    const auto jl = render_report({sample_summary()}, ReportFormat::JsonLines);
    const auto j = nlohmann::json::parse(jl.substr(0, jl.find('\n')));
    EXPECT_EQ(j["scenario"], "S1U");
    EXPECT_DOUBLE_EQ(j["ci_hi"].get<double>(), 0.069);
    EXPECT_EQ(j["reps"], 500);
}

TEST(Report, EmptyAndBadTargets) {
    EXPECT_THROW(render_report({}, ReportFormat::Csv), InvalidData);
    EXPECT_THROW(parse_report_format("xml"), ConfigError);
    EXPECT_EQ(parse_report_format("md"), ReportFormat::Markdown);
    EXPECT_THROW(emit_report({sample_summary()}, ReportFormat::Csv, "/nonexistent-dir/out.csv"), IoError);
    const std::string path = temp_path("report.csv");
    emit_report({sample_summary()}, ReportFormat::Csv, path);
    std::ifstream in(path);
    std::string first;
    std::getline(in, first);
    EXPECT_EQ(first.substr(0, 8), "scenario");
    std::remove(path.c_str());
}
