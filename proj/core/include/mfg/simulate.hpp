#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mfg/equilibrium.hpp"
#include "mfg/model.hpp"
#include "mfg/riccati.hpp"

namespace mfg {

struct SimConfig {
    std::size_t n_paths = 100000;
    double dt_sim = 1e-3;
    std::uint64_t seed = 20240601;
    /// Paths come in (z, -z) pairs; statistics treat each pair average as one sample.
    bool antithetic = false;
    /// 0 selects std::thread::hardware_concurrency(). Results do not depend on it.
    std::size_t workers = 0;
    /// Keep the states of the first `dump_paths` paths at grid nodes (<= 1e6 values).
    std::size_t dump_paths = 0;
};

/// Number of paths in one random stream. Block b draws from a generator seeded
/// by (seed, b), so the ensemble is independent of how blocks map to workers.
inline constexpr std::size_t kPathsPerBlock = 2048;
inline constexpr std::size_t kMaxDumpValues = 1000000;

struct Policy {
    enum class Kind { Equilibrium, PerturbedControl, PerturbedDisturbance, Zero };

    Kind kind = Kind::Equilibrium;
    ValueCoefficients base;
    /// Open-loop offset added to u (PerturbedControl) or v (PerturbedDisturbance).
    std::optional<Trajectory> delta;

    static Policy equilibrium(ValueCoefficients base);
    static Policy perturbed_control(ValueCoefficients base, Trajectory delta_u);
    static Policy perturbed_disturbance(ValueCoefficients base, Trajectory delta_v);
    static Policy zero(const TimeGrid& grid);
};

struct MCEstimate {
    double mean = 0.0;
    double std_error = 0.0;
    std::size_t n_paths = 0;
};

/// Sample mean and standard error; with `antithetic` consecutive values are
/// averaged in pairs first.
MCEstimate summarize(std::span<const double> per_path, bool antithetic);

struct PathEnsemble {
    TimeGrid grid;
    std::size_t n_paths = 0;
    bool antithetic = false;
    double dt_sim = 0.0;
    /// Nodewise sample mean of x and its standard error.
    Trajectory node_mean;
    Trajectory node_std_error;
    /// Per-path cost: 1/2 [terminal + int (q x^2 + qbar (x - m)^2 + r u^2 - s v^2) dt].
    std::vector<double> cost;
    /// Per-path int (beta x + alpha) dB and int (beta x + alpha)^2 dt.
    std::vector<double> noise_integral;
    std::vector<double> noise_quadratic;
    /// dumped_paths[p][k]: state of path p at grid node k.
    std::vector<std::vector<double>> dumped_paths;
};

/// Euler-Maruyama paths of dx = [a x + abar m + b u + c v] dt + sigma dB from x0.
/// `m` and the policy trajectories are interpolated to the simulation nodes.
/// dt_sim must divide T, and the simulation step count must be a multiple of
/// the grid's step count.
PathEnsemble simulate_paths(const ModelParams& params, const Policy& policy, const Trajectory& m,
                            const SimConfig& config);

/// E[L]; RiskNeutral and Robust variants (the latter uses L2 with the -s v^2 term).
MCEstimate estimate_risk_neutral_cost(const PathEnsemble& ensemble, const ModelParams& params);

struct ExponentialCostEstimate {
    MCEstimate estimate;
    /// Sample kurtosis (not excess) of exp(theta L).
    double kurtosis = 0.0;
    bool heavy_tailed = false;
};

inline constexpr double kHeavyTailKurtosis = 20.0;

/// E[exp(theta L)]; risk-sensitive variants with an admissible theta.
ExponentialCostEstimate estimate_exponential_cost(const PathEnsemble& ensemble,
                                                  const ModelParams& params);

/// E[exp(theta sigma int (beta x + alpha) dB - 1/2 theta^2 sigma^2 int (beta x + alpha)^2 dt)].
MCEstimate estimate_girsanov_normalization(const PathEnsemble& ensemble, const ModelParams& params);

struct MeanConsistencyReport {
    double max_abs_error = 0.0;
    /// max over nodes of |mean - m| / SE (nodes with SE = 0 are skipped).
    double max_z = 0.0;
    std::size_t worst_node = 0;
    bool pass = false;
};

/// |mean(t_k) - m(t_k)| <= n_se * SE(t_k) + allowance at every node.
MeanConsistencyReport check_mean_consistency(const PathEnsemble& ensemble, const Trajectory& m,
                                             double n_se = 3.0, double allowance = 0.0);

/// Same test with a per-node allowance on the ensemble grid.
MeanConsistencyReport check_mean_consistency(const PathEnsemble& ensemble, const Trajectory& m,
                                             double n_se, const Trajectory& allowance);

/// Cost gap between a perturbed arm and the baseline.
struct GapCheck {
    MCEstimate baseline;
    MCEstimate perturbed;
    /// Expected-positive difference of the two estimates.
    double gap = 0.0;
    /// sqrt(SE_baseline^2 + SE_perturbed^2).
    double gap_se = 0.0;
    double analytic = 0.0;
    bool resolved = false;  ///< gap > 3 gap_se
    bool matches = false;   ///< |gap - analytic| <= 3 gap_se
};

/// Best-response optimality: cost(u + delta) - cost(u) for a constant control
/// offset. Analytic gap is delta^2/2 int r dt (exponentiated for risk-sensitive
/// variants). Common random numbers across both arms.
GapCheck control_perturbation_check(const ModelParams& params, const Equilibrium& eq,
                                    double delta, const SimConfig& config);

enum class SaddleStatus { Resolved, InsufficientResolution, Violated, ZeroPerturbation };

struct SaddleReport {
    /// gap = cost(u + du, v) - cost(u, v)
    GapCheck control;
    /// gap = cost(u, v) - cost(u, v + dv)
    GapCheck disturbance;
    /// cost(u + du, v) > cost(u, v) > cost(u, v + dv), each beyond 3 combined SE.
    bool ordering = false;
    SaddleStatus status = SaddleStatus::InsufficientResolution;
};

/// Saddle-point check for the robust variants with constant perturbations of
/// size `scale` and common random numbers across the three arms.
SaddleReport saddle_check(const ModelParams& params, const Equilibrium& eq, double scale,
                          const SimConfig& config);

const char* to_string(SaddleStatus status);

}  // namespace mfg
