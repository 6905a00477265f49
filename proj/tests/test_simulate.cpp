#include "mfg/simulate.hpp"

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "instances.hpp"

namespace mfg {
namespace {

SimConfig small(std::size_t n_paths = 8192) {
    SimConfig c;
    c.n_paths = n_paths;
    return c;
}

TEST(Summarize, MeanAndStandardError) {
    const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
    const auto s = summarize(v, false);
    EXPECT_DOUBLE_EQ(s.mean, 2.5);
    EXPECT_NEAR(s.std_error, std::sqrt(5.0 / 3.0 / 4.0), 1e-15);
    EXPECT_EQ(s.n_paths, 4u);
}

TEST(Summarize, AntitheticAveragesPairs) {
    const std::vector<double> v{1.0, 3.0, 2.0, 6.0};
    const auto s = summarize(v, true);
    EXPECT_DOUBLE_EQ(s.mean, 3.0);
    EXPECT_NEAR(s.std_error, std::sqrt(2.0 / 2.0), 1e-15);
    EXPECT_EQ(s.n_paths, 4u);
}

TEST(Simulate, IndependentOfWorkerCount) {
    const auto p = testing::benchmark();
    const auto eq = solve_equilibrium_picard(p, default_grid(1.0));
    auto c1 = small(5000);
    c1.workers = 1;
    c1.dump_paths = 3;
    auto c3 = c1;
    c3.workers = 3;
    const auto a = simulate_paths(p, Policy::equilibrium(eq.value), eq.m, c1);
    const auto b = simulate_paths(p, Policy::equilibrium(eq.value), eq.m, c3);
    EXPECT_EQ(a.node_mean, b.node_mean);
    EXPECT_EQ(a.node_std_error, b.node_std_error);
    EXPECT_EQ(a.cost, b.cost);
    EXPECT_EQ(a.noise_integral, b.noise_integral);
    EXPECT_EQ(a.dumped_paths, b.dumped_paths);
    ASSERT_EQ(a.dumped_paths.size(), 3u);
    EXPECT_EQ(a.dumped_paths[0].front(), p.x0);
}

TEST(Simulate, SeedChangesSample) {
    const auto p = testing::benchmark();
    const auto eq = solve_equilibrium_picard(p, default_grid(1.0));
    auto c = small(2048);
    const auto a = simulate_paths(p, Policy::equilibrium(eq.value), eq.m, c);
    c.seed += 1;
    const auto b = simulate_paths(p, Policy::equilibrium(eq.value), eq.m, c);
    EXPECT_NE(a.cost, b.cost);
}

TEST(Simulate, NoiseFreeRunIsDeterministicAndTracksMean) {
    auto p = testing::benchmark();
    p.sigma = 0.0;
    const auto eq = solve_equilibrium_picard(p, default_grid(1.0));
    const auto ens = simulate_paths(p, Policy::equilibrium(eq.value), eq.m, small(4));
    for (std::size_t k = 0; k < ens.node_std_error.size(); ++k) EXPECT_EQ(ens.node_std_error[k], 0.0);
    EXPECT_LE(max_abs_diff(ens.node_mean, eq.m), 1e-3);
    const auto cost = estimate_risk_neutral_cost(ens, p);
    EXPECT_EQ(cost.std_error, 0.0);
    EXPECT_NEAR(cost.mean, eq.value.value_at_0, 1e-3);
}

TEST(Simulate, ZeroPolicyFollowsOpenLoopMean) {
    ModelParams p;
    p.a = -1.0;
    p.sigma = 0.5;
    p.x0 = 2.0;
    p.m0 = 2.0;
    const auto grid = default_grid(1.0);
    std::vector<double> m(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) m[k] = 2.0 * std::exp(-grid.node(k));
    const auto ens = simulate_paths(p, Policy::zero(grid), Trajectory(grid, m), small(20000));
    EXPECT_TRUE(check_mean_consistency(ens, Trajectory(grid, m), 3.0, 1e-3).pass);
}

TEST(Simulate, MeanConsistencyOnBenchmark) {
    const auto p = testing::benchmark();
    const auto eq = solve_equilibrium_picard(p, default_grid(1.0));
    const auto ens = simulate_paths(p, Policy::equilibrium(eq.value), eq.m, small(20000));
    const auto rep = check_mean_consistency(ens, eq.m);
    EXPECT_TRUE(rep.pass) << rep.max_z;
    EXPECT_EQ(ens.n_paths, 20000u);
}

TEST(Simulate, AntitheticPairsKeepCostUnbiased) {
    const auto p = testing::benchmark();
    const auto eq = solve_equilibrium_picard(p, default_grid(1.0));
    auto c = small(4096);
    c.antithetic = true;
    const auto ens = simulate_paths(p, Policy::equilibrium(eq.value), eq.m, c);
    const auto cost = estimate_risk_neutral_cost(ens, p);
    EXPECT_EQ(cost.n_paths, 4096u);
    EXPECT_NEAR(cost.mean, eq.value.value_at_0, 3.0 * cost.std_error + 2e-4);
    c.n_paths = 4095;
    EXPECT_THROW(simulate_paths(p, Policy::equilibrium(eq.value), eq.m, c), std::invalid_argument);
}

TEST(Simulate, RejectsIncompatibleSteps) {
    const auto p = testing::benchmark();
    const auto eq = solve_equilibrium_picard(p, default_grid(1.0));
    auto c = small(16);
    c.dt_sim = 0.003;
    EXPECT_THROW(simulate_paths(p, Policy::equilibrium(eq.value), eq.m, c), std::invalid_argument);
    c.dt_sim = 0.002;
    EXPECT_THROW(simulate_paths(p, Policy::equilibrium(eq.value), eq.m, c), std::invalid_argument);
    c.dt_sim = 5e-4;
    EXPECT_NO_THROW(simulate_paths(p, Policy::equilibrium(eq.value), eq.m, c));
    c.dt_sim = 1e-3;
    c.dump_paths = 2000;
    EXPECT_THROW(simulate_paths(p, Policy::equilibrium(eq.value), eq.m, c), std::invalid_argument);
}

TEST(Estimators, RejectWrongVariant) {
    const auto rn = testing::benchmark();
    const auto eq = solve_equilibrium_picard(rn, default_grid(1.0));
    const auto ens = simulate_paths(rn, Policy::equilibrium(eq.value), eq.m, small(16));
    EXPECT_THROW(estimate_exponential_cost(ens, rn), std::invalid_argument);
    EXPECT_THROW(estimate_risk_neutral_cost(ens, testing::benchmark(Variant::RiskSensitive)),
                 std::invalid_argument);
    EXPECT_THROW(saddle_check(rn, eq, 0.5, small(16)), std::invalid_argument);
}

TEST(Estimators, ExponentialCostAndNormalization) {
    const auto p = testing::benchmark(Variant::RiskSensitive);
    const auto eq = solve_equilibrium_picard(p, default_grid(1.0));
    const auto ens = simulate_paths(p, Policy::equilibrium(eq.value), eq.m, small(20000));
    const auto e = estimate_exponential_cost(ens, p);
    EXPECT_NEAR(e.estimate.mean, *eq.value.exponential_value, 3.0 * e.estimate.std_error + 5e-4);
    EXPECT_FALSE(e.heavy_tailed);
    const auto g = estimate_girsanov_normalization(ens, p);
    EXPECT_NEAR(g.mean, 1.0, 3.0 * g.std_error);
}

TEST(GapChecks, ControlOffsetRaisesCost) {
    const auto p = testing::benchmark();
    const auto eq = solve_equilibrium_picard(p, default_grid(1.0));
    const auto g = control_perturbation_check(p, eq, 0.5, small(20000));
    EXPECT_DOUBLE_EQ(g.analytic, 0.125);
    EXPECT_TRUE(g.resolved);
    EXPECT_TRUE(g.matches) << g.gap << " +- " << g.gap_se;
}

TEST(GapChecks, ZeroScaleSaddleIsFlagged) {
    const auto p = testing::benchmark(Variant::Robust);
    const auto eq = solve_equilibrium_picard(p, default_grid(1.0));
    const auto rep = saddle_check(p, eq, 0.0, small(64));
    EXPECT_EQ(rep.status, SaddleStatus::ZeroPerturbation);
}

TEST(GapChecks, TinyPerturbationIsUnresolved) {
    const auto p = testing::benchmark(Variant::Robust);
    const auto eq = solve_equilibrium_picard(p, default_grid(1.0));
    const auto rep = saddle_check(p, eq, 1e-3, small(256));
    EXPECT_EQ(rep.status, SaddleStatus::InsufficientResolution);
}

}  // namespace
}  // namespace mfg
