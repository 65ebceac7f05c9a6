#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>

#include "dpg/forms.hpp"

namespace dpg {

enum class RunMode { Study, Adaptive, Verify, Describe };
std::string run_mode_name(RunMode m);
RunMode parse_run_mode(const std::string& s);

struct StudyConfig {
    RunMode mode = RunMode::Study;
    std::string formulation;
    std::string case_name;  ///< empty: the formulation's default case
    int p = 1;
    int delta = 0;  ///< 0: default for the space mode
    SpaceMode space_mode = SpaceMode::Guaranteed;
    std::optional<Domain> domain;  ///< empty: the case's domain
    int n0 = 0;                    ///< initial subdivisions per axis; 0 picks a default
    int levels = 3;
    double theta = 0.5;
    int iterations = 10;
    int max_dofs = 0;  ///< 0: unlimited
    bool rate_all = false;
    std::string suite = "all";
    std::string out = "-";
    std::string dump_solution;
    std::string dump_estimator;
    std::uint64_t seed = 1;
};

/// Raw key=value pairs of a config text; '#' starts a comment. Throws on malformed
/// lines and repeated keys.
std::map<std::string, std::string> parse_key_values(std::istream& is);

/// Strict conversion: unknown keys are rejected by name and missing required keys of
/// the selected mode are listed.
StudyConfig config_from_map(const std::map<std::string, std::string>& kv);

StudyConfig read_config_file(const std::string& path, const std::map<std::string, std::string>& overrides = {});

/// Range and catalog checks; throws listing the first violation.
void validate(const StudyConfig& cfg);

}  // namespace dpg
