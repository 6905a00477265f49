#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "mfg/config.hpp"

namespace mfg::cli {

enum ExitCode : int {
    kOk = 0,
    kConfigError = 1,
    kBlowUp = 2,
    kNonConvergence = 3,
    kVerifyFailed = 4,
};

/// Plain-text report plus a flat key=value summary and a manifest of written files.
struct Report {
    std::vector<std::string> lines;
    std::vector<std::pair<std::string, std::string>> summary;
    std::vector<std::string> files;

    void line(std::string text) { lines.push_back(std::move(text)); }
    void section(const std::string& name);
    void put(const std::string& key, const std::string& value) { summary.emplace_back(key, value); }
    void put(const std::string& key, double value);
    /// "PASS <name>: <detail> (tol <tolerance>)"; records <name>=PASS|FAIL in the summary.
    bool verdict(const std::string& name, bool pass, const std::string& detail,
                 const std::string& tolerance);

    std::string text() const;
    std::string summary_text() const;
};

struct CommandResult {
    int exit_code = kOk;
    Report report;
};

/// Command-line overrides; flag > MFG_SEED > config for the seed.
struct Overrides {
    std::filesystem::path out_dir = ".";
    bool quiet = false;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> paths;
    std::optional<double> dt_sim;
    std::optional<double> tol;
    std::optional<std::size_t> workers;
    std::optional<std::size_t> dump_paths;
    std::optional<std::string> sweep_parameter;
    std::optional<double> sweep_from;
    std::optional<double> sweep_to;
    std::optional<std::size_t> sweep_steps;
};

/// Applies flag/env overrides to a parsed config. `env_seed` is the raw MFG_SEED value.
RunConfig apply_overrides(RunConfig config, const Overrides& overrides,
                          const char* env_seed);

/// Each command writes its CSVs, <command>_report.txt and <command>_summary.txt
/// into out_dir.
CommandResult cmd_solve(const RunConfig& config, const std::filesystem::path& out_dir);
CommandResult cmd_verify(const RunConfig& config, const std::filesystem::path& out_dir);
CommandResult cmd_sweep(const RunConfig& config, const std::filesystem::path& out_dir);
CommandResult cmd_check(const RunConfig& config, const std::filesystem::path& out_dir);

/// Parameter value applied to a copy of `params` for one sweep row.
ModelParams sweep_instance(const ModelParams& params, const std::string& parameter, double value);

}  // namespace mfg::cli
