#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "c2st/errors.hpp"
#include "c2st/harness.hpp"

namespace c2st::harness {

namespace {

std::string fixed3(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", v);
    return buf;
}

double round3(double v) { return std::round(v * 1000.0) / 1000.0; }

std::vector<std::string> cells(const RejectionSummary& s) {
    return {s.scenario,
            synth::to_string(s.support),
            synth::to_string(s.hypothesis),
            std::to_string(s.n),
            s.method,
            fixed3(s.rate),
            fixed3(s.ci_lo),
            fixed3(s.ci_hi),
            std::to_string(s.repetitions),
            std::to_string(s.failures)};
}

const std::vector<std::string>& header() {
    static const std::vector<std::string> h = {"scenario", "support", "hypothesis", "n",    "method",
                                               "rate",     "ci_lo",   "ci_hi",      "reps", "failures"};
    return h;
}

std::string join(const std::vector<std::string>& items, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < items.size(); ++i) out += (i ? sep : "") + items[i];
    return out;
}

} // namespace

ReportFormat parse_report_format(const std::string& text) {
    if (text == "csv") return ReportFormat::Csv;
    if (text == "md" || text == "markdown") return ReportFormat::Markdown;
    if (text == "jsonl" || text == "json-lines") return ReportFormat::JsonLines;
    throw ConfigError("unknown report format '" + text + "' (expected csv, md or jsonl)");
}

std::string render_report(const std::vector<RejectionSummary>& summaries, ReportFormat format) {
    if (summaries.empty()) throw InvalidData("no summaries to report");
    std::ostringstream out;
    switch (format) {
    case ReportFormat::Csv:
        out << join(header(), ",") << '\n';
        for (const auto& s : summaries) out << join(cells(s), ",") << '\n';
        break;
    case ReportFormat::Markdown: {
        out << "| " << join(header(), " | ") << " |\n";
        out << "|";
        for (std::size_t i = 0; i < header().size(); ++i) out << "---|";
        out << '\n';
        for (const auto& s : summaries) out << "| " << join(cells(s), " | ") << " |\n";
        break;
    }
    case ReportFormat::JsonLines:
        for (const auto& s : summaries) {
            nlohmann::ordered_json j;
            j["scenario"] = s.scenario;
            j["support"] = synth::to_string(s.support);
            j["hypothesis"] = synth::to_string(s.hypothesis);
            j["n"] = s.n;
            j["method"] = s.method;
            j["rate"] = round3(s.rate);
            j["ci_lo"] = round3(s.ci_lo);
            j["ci_hi"] = round3(s.ci_hi);
            j["reps"] = s.repetitions;
            j["failures"] = s.failures;
            out << j.dump() << '\n';
        }
        break;
    }
    return out.str();
}

void emit_report(const std::vector<RejectionSummary>& summaries, ReportFormat format, const std::string& path) {
    const std::string text = render_report(summaries, format);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << text;
    out.flush();
    if (!out) throw IoError("failed writing " + path);
}

} // namespace c2st::harness
