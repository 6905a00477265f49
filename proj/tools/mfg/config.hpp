#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "mfg/model.hpp"
#include "mfg/simulate.hpp"

namespace mfg::cli {

/// Parse or validation failure, with "source:line: message" diagnostics.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct SolveOptions {
    double tol = 1e-10;
    std::size_t max_iter = 200;
    double blowup_cap = 1e12;
};

struct VerifyOptions {
    /// Constant offset used by the optimality and saddle checks.
    double perturbation_scale = 0.5;
    /// Multiplies the feedback law of the simulated policy (1 = equilibrium law).
    double gain_scale = 1.0;
};

struct SweepOptions {
    std::string parameter;  ///< theta | c | T | qbar-scale
    double from = 0.0;
    double to = 0.0;
    std::size_t steps = 0;
    std::size_t workers = 0;
};

struct RunConfig {
    ModelParams model;
    /// Unset: 1000 steps per unit of horizon.
    std::optional<std::size_t> n_steps;
    SolveOptions solve;
    SimConfig sim;
    VerifyOptions verify;
    SweepOptions sweep;

    TimeGrid grid() const;
};

/// Strict INI-style parser: `[section]` headers, `key = value` lines, `#` or `;`
/// comments. Coefficients q, qbar, r, s take a number or a comma-separated table
/// spread uniformly over [0, T]. Unknown sections/keys and duplicates are errors.
RunConfig parse_config(std::string_view text, std::string_view source = "<config>");
RunConfig load_config(const std::string& path);

/// The [model] section of a config that re-parses to exactly `params`.
std::string echo_model(const ModelParams& params);

/// The full config (all sections), re-parseable.
std::string echo_config(const RunConfig& config);

/// "%.17g"
std::string format_double(double v);

}  // namespace mfg::cli
