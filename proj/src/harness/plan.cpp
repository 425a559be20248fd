#include <algorithm>
#include <cctype>
#include <fstream>
#include <istream>
#include <map>
#include <sstream>

#include "c2st/errors.hpp"
#include "c2st/harness.hpp"

namespace c2st::harness {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& value) {
    std::vector<std::string> out;
    std::stringstream ss(value);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

long long parse_integer(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const long long v = std::stoll(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("plan: " + key + " expects an integer, got '" + text + "'");
}

double parse_real(const std::string& key, const std::string& text) {
    try {
        std::size_t used = 0;
        const double v = std::stod(text, &used);
        if (used == text.size()) return v;
    } catch (const std::exception&) {
    }
    throw ConfigError("plan: " + key + " expects a number, got '" + text + "'");
}

} // namespace

ExperimentPlan parse_plan(std::istream& in) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("plan line " + std::to_string(lineno) + ": expected 'section.key = value'");
        const std::string key = trim(line.substr(0, eq));
        if (kv.count(key)) throw ConfigError("plan line " + std::to_string(lineno) + ": duplicate key " + key);
        kv[key] = trim(line.substr(eq + 1));
    }

    static const std::vector<std::string> known = {"grid.scenarios", "grid.hypotheses", "grid.n",        "grid.p",
                                                   "grid.shift",     "run.methods",     "run.repetitions", "run.alpha",
                                                   "run.seed",       "run.jobs"};
    for (const auto& [key, value] : kv)
        if (std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError("plan: unknown key " + key);

    auto list = [&](const std::string& key, const std::string& fallback) {
        const auto it = kv.find(key);
        auto items = split_list(it == kv.end() ? fallback : it->second);
        if (items.empty()) throw ConfigError("plan: " + key + " is empty");
        return items;
    };

    ExperimentPlan plan;
    std::vector<int> ns;
    for (const auto& t : list("grid.n", "500")) ns.push_back(static_cast<int>(parse_integer("grid.n", t)));
    const int p = static_cast<int>(parse_integer("grid.p", kv.count("grid.p") ? kv["grid.p"] : "10"));
    const double shift = kv.count("grid.shift") ? parse_real("grid.shift", kv["grid.shift"]) : 0.5;

    plan.methods = list("run.methods", "");
    if (kv.count("run.repetitions"))
        plan.repetitions = static_cast<int>(parse_integer("run.repetitions", kv["run.repetitions"]));
    if (kv.count("run.alpha")) plan.alpha = parse_real("run.alpha", kv["run.alpha"]);
    if (kv.count("run.seed")) plan.base_seed = static_cast<std::uint64_t>(parse_integer("run.seed", kv["run.seed"]));
    if (kv.count("run.jobs")) plan.jobs = static_cast<int>(parse_integer("run.jobs", kv["run.jobs"]));

    for (const auto& sid : list("grid.scenarios", "")) {
        const auto [scenario, support] = synth::parse_scenario_id(sid);
        for (const auto& h : list("grid.hypotheses", "null, alt")) {
            for (const int n : ns) {
                synth::ScenarioConfig cfg;
                cfg.scenario = scenario;
                cfg.support = support;
                cfg.hypothesis = synth::parse_hypothesis(h);
                cfg.n = n;
                cfg.p = p;
                cfg.shift = shift;
                cfg.seed = plan.base_seed;
                plan.scenarios.push_back(cfg);
            }
        }
    }
    plan.validate();
    return plan;
}

ExperimentPlan load_plan(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open plan file " + path);
    return parse_plan(in);
}

} // namespace c2st::harness
