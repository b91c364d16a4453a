// scenario.hpp: canonical runs, their output files and parameter sweeps
//
// A run writes, depending on the format, CSV tables and/or summary.json into its
// output directory, then MANIFEST.sha256 listing every file with its digest.
// Outputs are byte-identical for identical configs; wall-clock time is only reported
// in the returned RunReport.

#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "wgqed/config.hpp"
#include "wgqed/output.hpp"

namespace wgqed {

inline constexpr const char* kVersion = "1.0.0";
inline constexpr const char* kSchemaVersion = "wgqed.run/1";
inline constexpr const char* kManifestName = "MANIFEST.sha256";

struct RunOptions {
    std::filesystem::path out_dir;
    std::optional<OutputFormat> format;  // overrides the config's [output] format
    bool half_res_check{false};
    bool write_files{true};
};

struct Check {
    std::string name;
    double value{0.0};
    double limit{0.0};
    bool upper{true};  // passes when value <= limit (else value >= limit)
    bool passed() const { return upper ? value <= limit : value >= limit; }
};

struct ConvergenceReport {
    bool performed{false};
    std::string quantity;
    double full{0.0};
    double half{0.0};
    double tolerance{0.0};
    bool converged{true};
};

struct RunReport {
    Scenario scenario{Scenario::send_design};
    std::map<std::string, std::string> parameters;
    nlohmann::ordered_json results;
    std::vector<Check> checks;
    ConvergenceReport convergence;
    std::vector<ManifestEntry> manifest;
    double wall_seconds{0.0};

    bool passed() const;
};

// Throws ConfigError/DomainError for unusable parameters, NumericalError from the solvers.
RunReport run_scenario(const ScenarioConfig& config, const RunOptions& options);

// 0 when every check passed and the half-resolution rerun (if any) agreed, else 3.
int exit_code(const RunReport& report);

struct SweepCell {
    std::string value;
    std::optional<RunReport> report;
    std::string error;
    int exit_code{0};
};

// One run per value in <out_dir>/<key>=<value>, on at most `workers` threads (0 -> hardware
// concurrency). Cell failures are recorded, not rethrown. Results keep the order of `values`.
// Throws ConfigError when `key` is not a numeric key.
std::vector<SweepCell> run_sweep(const ScenarioConfig& base, const std::string& key,
                                 const std::vector<std::string>& values, const RunOptions& options,
                                 std::size_t workers = 0);

nlohmann::ordered_json sweep_summary(const std::string& key, const std::vector<SweepCell>& cells);

} // namespace wgqed
