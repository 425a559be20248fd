#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "c2st/data.hpp"
#include "c2st/synth.hpp"

namespace c2st::harness {

// ---------------------------------------------------------------- methods

/// A two-sample test as run by the harness.
using MethodFn = std::function<TestOutcome(const PairedData& data, double alpha, Rng& rng)>;

/// Resolves a method id. Known ids:
///
///   gcm-lm          GCM with linear regressions behind the CIT converter
///   gcm-lm-direct   GCM with linear regressions on the raw pooled sample
///   gcm-krr         GCM with kernel ridge regressions behind the converter
///   clf, clf-cv     classifier accuracy tests (K = 2 for the cv variant)
///   mmd, mmd-cv     studentized linear-time MMD tests
///   mean            importance-weighted mean comparison of y
///   always-reject   stub, rejects every time
///   uniform-p       stub, p ~ U(0, 1)
///
/// Ratio-based ids take an optional ":ll" (default) or ":klr" suffix.
/// Throws ConfigError for unknown ids.
MethodFn resolve_method(const std::string& id);

/// Every base id accepted by resolve_method.
std::vector<std::string> method_ids();

// ---------------------------------------------------------------- plans

struct ExperimentPlan {
    std::vector<synth::ScenarioConfig> scenarios; ///< fully expanded grid
    std::vector<std::string> methods;
    int repetitions = 500;
    double alpha = 0.05;
    std::uint64_t base_seed = 0;
    int jobs = 0; ///< 0 picks default_jobs()

    /// Throws ConfigError for an empty grid, repetitions < 1, alpha outside
    /// (0, 1) or an unresolvable method.
    void validate() const;
};

/// C2ST_JOBS when set to a positive integer, else 1.
int default_jobs();

/// Parses the flat `section.key = value` plan format:
///
///     # comment
///     grid.scenarios   = S1U, S2B
///     grid.hypotheses  = null, alt
///     grid.n           = 500, 1000
///     grid.p           = 10
///     run.methods      = gcm-lm, clf
///     run.repetitions  = 500
///     run.alpha        = 0.05
///     run.seed         = 1
///     run.jobs         = 4
///
/// Throws ConfigError on unknown keys or malformed values.
ExperimentPlan parse_plan(std::istream& in);
ExperimentPlan load_plan(const std::string& path);

// ---------------------------------------------------------------- Monte Carlo

struct RejectionSummary {
    std::string scenario; ///< e.g. "S1U"
    synth::Support support = synth::Support::Unbounded;
    synth::Hypothesis hypothesis = synth::Hypothesis::Null;
    int n = 0;
    std::string method;
    int rejections = 0;
    int repetitions = 0;
    int failures = 0; ///< replicates that threw; counted as acceptances
    double rate = 0.0;
    double ci_lo = 0.0;
    double ci_hi = 0.0;
    double mean_runtime_ms = 0.0; ///< informational; never rendered
};

/// Per-replicate record of one cell.
struct Replicate {
    TestOutcome outcome;
    bool failed = false;
    std::string error;
    double runtime_ms = 0.0;
};

/// Stream of the data for replicate `rep` of a scenario cell. Every method
/// sees the same data for a given (cell, rep).
std::uint64_t data_stream(const synth::ScenarioConfig& cfg, int rep);

/// Runs `reps` replicates of `method` on fresh draws of `cfg`. Results are
/// independent of `jobs`.
std::vector<Replicate> run_cell(const synth::ScenarioConfig& cfg, const std::string& method, int reps, double alpha,
                                std::uint64_t base_seed, int jobs);

/// Rate, exact 95% interval and failure count for one cell.
RejectionSummary summarize(const synth::ScenarioConfig& cfg, const std::string& method,
                           const std::vector<Replicate>& reps);

/// Every (scenario, method) cell of the plan, in grid order.
std::vector<RejectionSummary> run_monte_carlo(const ExperimentPlan& plan);

/// Calls `task(i)` for i in [0, count) on `jobs` threads.
void parallel_for(std::size_t count, int jobs, const std::function<void(std::size_t)>& task);

// ---------------------------------------------------------------- CSV input

/// Column layout of an input table. With `group_column` set the file holds
/// both populations (labels 1 and 2); otherwise two files are read.
struct CsvSchema {
    std::vector<std::string> x_columns; ///< empty: every column except y and group
    std::string y_column = "y";
    std::optional<std::string> group_column;
};

struct Standardization {
    std::vector<std::string> columns; ///< x columns, then y
    std::vector<double> mean;
    std::vector<double> scale;
};

struct LoadedData {
    PairedData data;
    Standardization standardization;
    std::vector<std::string> warnings;
};

/// Reads one grouped CSV and applies pooled z-scoring to every column.
/// Throws ParseError (with row and column), GroupMissing, IoError.
LoadedData load_csv(const std::string& path, const CsvSchema& schema);

/// Population 1 from `path1`, population 2 from `path2`; pooled z-scoring.
LoadedData load_csv_pair(const std::string& path1, const std::string& path2, const CsvSchema& schema);

/// Same as load_csv on an already-open stream; `name` labels error messages.
LoadedData parse_csv(std::istream& in, const CsvSchema& schema, const std::string& name = "<stream>");

// ---------------------------------------------------------------- reports

enum class ReportFormat { Csv, Markdown, JsonLines };

ReportFormat parse_report_format(const std::string& text);

/// Columns: scenario, support, hypothesis, n, method, rate, ci_lo, ci_hi,
/// reps, failures. Rates carry three decimals. Throws InvalidData when empty.
std::string render_report(const std::vector<RejectionSummary>& summaries, ReportFormat format);

/// Writes render_report to `path`. Throws IoError.
void emit_report(const std::vector<RejectionSummary>& summaries, ReportFormat format, const std::string& path);

} // namespace c2st::harness
