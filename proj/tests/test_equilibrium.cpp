#include "mfg/equilibrium.hpp"

#include <algorithm>
#include <cmath>

#include <gtest/gtest.h>

#include "instances.hpp"

namespace mfg {
namespace {

TEST(Picard, ConvergesOnBenchmark) {
    const auto p = testing::benchmark();
    const auto eq = solve_equilibrium_picard(p, default_grid(1.0));
    EXPECT_LE(eq.residual, 1e-10);
    EXPECT_EQ(eq.residual_history.size(), eq.iterations);
    EXPECT_DOUBLE_EQ(eq.m.front(), p.m0);
    EXPECT_LE(max_abs_diff(apply_phi(p, eq.riccati.beta, eq.m), eq.m), 1e-10);
}

TEST(Routes, AgreeOnEveryVariant) {
    for (auto v : {Variant::RiskNeutral, Variant::RiskSensitive, Variant::Robust,
                   Variant::RobustRiskSensitive}) {
        const auto p = testing::benchmark(v);
        const auto grid = default_grid(1.0);
        const auto picard = solve_equilibrium_picard(p, grid);
        const auto closed = solve_equilibrium_closed_form(p, grid);
        EXPECT_LE(max_abs_diff(picard.m, closed.m), 1e-6) << to_string(v);
        EXPECT_EQ(closed.generalized_eta, v != Variant::RiskNeutral);
        ASSERT_TRUE(closed.riccati.eta);
        for (std::size_t k = 0; k < grid.size(); ++k) {
            EXPECT_NEAR(closed.riccati.alpha[k], (*closed.riccati.eta)[k] * closed.m[k], 1e-12);
        }
    }
}

TEST(Picard, MatchesReferenceValues) {
    namespace ref = testing::reference;
    struct Row {
        Variant v;
        double beta0;
        double value;
    };
    for (const Row& row : {Row{Variant::RiskNeutral, ref::kBeta0, ref::kValue},
                           Row{Variant::RiskSensitive, ref::kRsBeta0, ref::kRsValue},
                           Row{Variant::Robust, ref::kRobustBeta0, ref::kRobustValue},
                           Row{Variant::RobustRiskSensitive, ref::kRobustRsBeta0, ref::kRobustRsValue}}) {
        const auto eq = solve_equilibrium_picard(testing::benchmark(row.v), default_grid(1.0));
        EXPECT_NEAR(eq.riccati.beta.front(), row.beta0, 1e-10) << to_string(row.v);
        EXPECT_NEAR(eq.value.value_at_0, row.value, 1e-7) << to_string(row.v);
    }
    const auto eq = solve_equilibrium_picard(testing::benchmark(), default_grid(1.0));
    EXPECT_NEAR(eq.m.back(), ref::kMeanT, 1e-7);
    EXPECT_NEAR(eq.riccati.gamma.front(), ref::kGamma0, 1e-7);
    const auto rs = solve_equilibrium_picard(testing::benchmark(Variant::RiskSensitive), default_grid(1.0));
    ASSERT_TRUE(rs.value.exponential_value);
    EXPECT_NEAR(*rs.value.exponential_value, ref::kRsExpValue, 1e-7);
}

TEST(Picard, ZeroInitialMeanStaysZero) {
    auto p = testing::benchmark();
    p.m0 = 0.0;
    p.x0 = 0.0;
    const auto eq = solve_equilibrium_picard(p, default_grid(1.0));
    EXPECT_EQ(eq.m.sup_norm(), 0.0);
    EXPECT_EQ(eq.riccati.alpha.sup_norm(), 0.0);
}

TEST(Picard, ZeroCostInstanceHasZeroValue) {
    ModelParams p;
    const auto eq = solve_equilibrium_picard(p, default_grid(1.0));
    EXPECT_EQ(eq.value.value_at_0, 0.0);
    EXPECT_EQ(eq.riccati.beta.sup_norm(), 0.0);
    EXPECT_EQ(eq.riccati.gamma.sup_norm(), 0.0);
}

TEST(Picard, ContractionFromTwoStartingPoints) {
    auto p = testing::benchmark();
    p.T = 0.2;
    const auto grid = default_grid(0.2);
    const auto cond = check_conditions(p, solve_beta(p, grid).values);
    ASSERT_TRUE(cond.contraction);
    ASSERT_LT(cond.lipschitz_bound, 1.0);

    PicardOptions a;
    a.tol = 1e-12;
    PicardOptions b = a;
    std::vector<double> guess(grid.size());
    for (std::size_t k = 0; k < grid.size(); ++k) guess[k] = p.m0 + 3.0 * std::sin(20.0 * grid.node(k));
    b.initial_guess = Trajectory(grid, guess);
    const auto ea = solve_equilibrium_picard(p, grid, a);
    const auto eb = solve_equilibrium_picard(p, grid, b);
    EXPECT_LE(max_abs_diff(ea.m, eb.m), 1e-8);
    EXPECT_NEAR(ea.m.back(), testing::reference::kShortMeanT, 1e-7);
    EXPECT_NEAR(ea.value.value_at_0, testing::reference::kShortValue, 1e-8);

    const auto& h = eb.residual_history;
    for (std::size_t i = 1; i < h.size(); ++i) {
        if (h[i - 1] < 1e-13) break;
        EXPECT_LE(h[i] / h[i - 1], cond.lipschitz_bound + 0.1) << i;
    }
}

TEST(Picard, InitialGuessMustStartAtM0) {
    const auto p = testing::benchmark();
    PicardOptions o;
    o.initial_guess = Trajectory(default_grid(1.0), 2.0);
    EXPECT_THROW(solve_equilibrium_picard(p, default_grid(1.0), o), std::invalid_argument);
}

TEST(Picard, ReportsResidualHistoryOnNonConvergence) {
    PicardOptions o;
    o.max_iter = 3;
    try {
        solve_equilibrium_picard(testing::benchmark(), default_grid(1.0), o);
        FAIL() << "expected NonConvergenceError";
    } catch (const NonConvergenceError& e) {
        EXPECT_EQ(e.residuals().size(), 3u);
        EXPECT_GT(e.residuals().back(), 1e-10);
    }
}

TEST(Picard, PassesBlowUpThrough) {
    const auto p = testing::tan_blowup(2.0);
    EXPECT_THROW(solve_equilibrium_picard(p, default_grid(2.0)), BlowUpError);
    EXPECT_THROW(solve_equilibrium_closed_form(p, default_grid(2.0)), BlowUpError);
}

TEST(Conditions, MatchDirectRecomputation) {
    const auto p = testing::benchmark();
    const auto grid = default_grid(1.0);
    const auto beta = solve_beta(p, grid).values;
    const auto c = check_conditions(p, beta);
    double g = 0.0, eps = 0.0, expo = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        g = std::max(g, std::abs(-0.5 + 0.3 - beta[k]));
        eps = std::max(eps, std::abs(0.3 * beta[k] - 0.5));
        expo = std::max(expo, std::abs(-0.5 - beta[k]));
    }
    EXPECT_DOUBLE_EQ(c.g, g);
    EXPECT_DOUBLE_EQ(c.g_tilde, 1.0);
    EXPECT_DOUBLE_EQ(c.eps, eps);
    EXPECT_DOUBLE_EQ(c.exponent_norm, expo);
    EXPECT_NEAR(c.lipschitz_bound, g + 1.0 * (0.5 + eps * std::exp(expo)), 1e-14);
    EXPECT_FALSE(c.contraction);
    EXPECT_TRUE(c.admissible);
    EXPECT_FALSE(c.lipschitz_bound_alt);
    EXPECT_EQ(c.margin_expression, "b^2/r = 1 > 0");
}

TEST(Conditions, RiskSensitiveReportsAlternateBound) {
    const auto p = testing::benchmark(Variant::RiskSensitive);
    const auto c = check_conditions(p, solve_beta(p, default_grid(1.0)).values);
    ASSERT_TRUE(c.lipschitz_bound_alt);
    EXPECT_DOUBLE_EQ(*c.g_tilde_alt, 1.0 - 0.25 * 0.04);
    EXPECT_LT(*c.lipschitz_bound_alt, c.lipschitz_bound);
}

TEST(Conditions, RobustBoundaryIsNotAdmissible) {
    auto p = testing::benchmark(Variant::Robust);
    p.c = 1.0;
    p.s = 1.0;
    const auto grid = default_grid(1.0);
    const auto c = check_conditions(p, solve_beta(p, grid).values);
    EXPECT_FALSE(c.admissible);
    EXPECT_EQ(c.margin, 0.0);
    EXPECT_EQ(admissibility_margin(p, grid), 0.0);
}

TEST(Conditions, MarginFlipsAtRiskSensitiveThreshold) {
    auto p = testing::benchmark(Variant::RiskSensitive);
    p.sigma = 0.5;
    const auto grid = default_grid(1.0);
    p.theta = 3.99;
    EXPECT_GT(admissibility_margin(p, grid), 0.0);
    p.theta = 4.0;
    EXPECT_EQ(admissibility_margin(p, grid), 0.0);
    p.theta = 4.01;
    EXPECT_LT(admissibility_margin(p, grid), 0.0);
}

}  // namespace
}  // namespace mfg
