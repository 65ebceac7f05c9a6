#include "dpg/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>
#include <vector>

namespace dpg {

std::string run_mode_name(RunMode m) {
    switch (m) {
        case RunMode::Study: return "study";
        case RunMode::Adaptive: return "adaptive";
        case RunMode::Verify: return "verify";
        case RunMode::Describe: return "describe";
    }
    return "?";
}

RunMode parse_run_mode(const std::string& s) {
    for (RunMode m : {RunMode::Study, RunMode::Adaptive, RunMode::Verify, RunMode::Describe})
        if (run_mode_name(m) == s) return m;
    fail("unknown mode '" + s + "' (expected study, adaptive, verify or describe)");
}

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

int to_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const int x = std::stoi(v, &pos);
        if (pos == v.size()) return x;
    } catch (const std::exception&) {
    }
    fail("config key '" + key + "': expected an integer, got '" + v + "'");
}

double to_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const double x = std::stod(v, &pos);
        if (pos == v.size()) return x;
    } catch (const std::exception&) {
    }
    fail("config key '" + key + "': expected a number, got '" + v + "'");
}

std::uint64_t to_u64(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        const unsigned long long x = std::stoull(v, &pos);
        if (pos == v.size() && v.find('-') == std::string::npos) return x;
    } catch (const std::exception&) {
    }
    fail("config key '" + key + "': expected a non-negative integer, got '" + v + "'");
}

const std::set<std::string>& known_keys() {
    static const std::set<std::string> k{"mode",   "formulation", "case",     "p",          "delta",
                                         "space",  "domain",      "n0",       "levels",     "theta",
                                         "iterations", "max_dofs", "rate_fit", "suite",      "out",
                                         "dump_solution", "dump_estimator", "seed"};
    return k;
}

}  // namespace

std::map<std::string, std::string> parse_key_values(std::istream& is) {
    std::map<std::string, std::string> kv;
    std::string line;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        require(eq != std::string::npos, "config line " + std::to_string(lineno) + ": expected key=value");
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        require(!key.empty(), "config line " + std::to_string(lineno) + ": empty key");
        require(!kv.count(key), "config line " + std::to_string(lineno) + ": key '" + key + "' repeated");
        kv[key] = val;
    }
    return kv;
}

StudyConfig config_from_map(const std::map<std::string, std::string>& kv) {
    std::vector<std::string> unknown;
    for (const auto& [k, v] : kv)
        if (!known_keys().count(k)) unknown.push_back(k);
    if (!unknown.empty()) {
        std::string msg = "unknown config key";
        msg += unknown.size() > 1 ? "s" : "";
        for (size_t i = 0; i < unknown.size(); ++i) msg += (i ? ", '" : " '") + unknown[i] + "'";
        fail(msg);
    }
    auto has = [&](const char* k) { return kv.count(k) > 0; };
    auto get = [&](const char* k) { return kv.at(k); };

    std::vector<std::string> required{"mode"};
    StudyConfig c;
    if (has("mode")) {
        c.mode = parse_run_mode(get("mode"));
        switch (c.mode) {
            case RunMode::Study: required = {"formulation", "p", "levels"}; break;
            case RunMode::Adaptive: required = {"formulation", "p", "iterations"}; break;
            case RunMode::Describe: required = {"formulation"}; break;
            case RunMode::Verify: required = {}; break;
        }
    }
    std::vector<std::string> missing;
    for (const auto& k : required)
        if (!kv.count(k)) missing.push_back(k);
    if (!missing.empty()) {
        std::string msg = "missing required config key";
        msg += missing.size() > 1 ? "s" : "";
        for (size_t i = 0; i < missing.size(); ++i) msg += (i ? ", '" : " '") + missing[i] + "'";
        fail(msg);
    }

    if (has("formulation")) c.formulation = get("formulation");
    if (has("case")) c.case_name = get("case");
    if (has("p")) c.p = to_int("p", get("p"));
    if (has("delta")) c.delta = to_int("delta", get("delta"));
    if (has("space")) c.space_mode = parse_space_mode(get("space"));
    if (has("domain")) c.domain = parse_domain(get("domain"));
    if (has("n0")) c.n0 = to_int("n0", get("n0"));
    if (has("levels")) c.levels = to_int("levels", get("levels"));
    if (has("theta")) c.theta = to_double("theta", get("theta"));
    if (has("iterations")) c.iterations = to_int("iterations", get("iterations"));
    if (has("max_dofs")) c.max_dofs = to_int("max_dofs", get("max_dofs"));
    if (has("rate_fit")) {
        const std::string r = get("rate_fit");
        require(r == "last2" || r == "all", "config key 'rate_fit': expected last2 or all, got '" + r + "'");
        c.rate_all = r == "all";
    }
    if (has("suite")) c.suite = get("suite");
    if (has("out")) c.out = get("out");
    if (has("dump_solution")) c.dump_solution = get("dump_solution");
    if (has("dump_estimator")) c.dump_estimator = get("dump_estimator");
    if (has("seed")) c.seed = to_u64("seed", get("seed"));
    validate(c);
    return c;
}

StudyConfig read_config_file(const std::string& path, const std::map<std::string, std::string>& overrides) {
    std::ifstream in(path);
    require(in.good(), "cannot open config file '" + path + "'");
    auto kv = parse_key_values(in);
    for (const auto& [k, v] : overrides) kv[k] = v;
    return config_from_map(kv);
}

void validate(const StudyConfig& c) {
    const bool needs_form = c.mode != RunMode::Verify;
    if (needs_form) {
        const auto& ids = formulation_ids();
        require(std::find(ids.begin(), ids.end(), c.formulation) != ids.end(),
                "unknown formulation '" + c.formulation + "'");
    }
    if (!c.case_name.empty()) {
        const auto& names = case_names();
        require(std::find(names.begin(), names.end(), c.case_name) != names.end(),
                "unknown case '" + c.case_name + "'");
    }
    require(c.p >= 1 && c.p <= 4, "p must lie in [1, 4]");
    require(c.delta >= 0 && c.delta <= 4, "delta must lie in [0, 4] (0 selects the default)");
    require(c.n0 >= 0, "n0 must be non-negative");
    require(c.levels >= 1 && c.levels <= 8, "levels must lie in [1, 8]");
    require(c.theta > 0.0 && c.theta <= 1.0, "theta must lie in (0, 1]");
    require(c.iterations >= 1, "iterations must be positive");
    require(c.max_dofs >= 0, "max_dofs must be non-negative");
    static const std::set<std::string> suites{"all", "fortin", "duality", "annihilation", "stability", "survey", "orthogonality"};
    require(suites.count(c.suite) > 0, "unknown verify suite '" + c.suite + "'");
}

}  // namespace dpg
