#include "mfg/equilibrium.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace mfg {

NonConvergenceError::NonConvergenceError(std::vector<double> residuals)
    : std::runtime_error("Picard iteration did not converge after " +
                         std::to_string(residuals.size()) + " iterations (last residual " +
                         (residuals.empty() ? std::string("n/a")
                                            : std::to_string(residuals.back())) +
                         ")"),
      residuals_(std::move(residuals)) {}

namespace {

Trajectory require_beta(const ModelParams& params, const TimeGrid& grid,
                        const RiccatiOptions& options) {
    auto beta = solve_beta(params, grid, options);
    if (beta.status.blew_up) throw BlowUpError("beta", beta.status.blowup_time);
    return std::move(beta.values);
}

Equilibrium finish(const ModelParams& params, Trajectory m, Trajectory beta, Trajectory alpha,
                   std::optional<Trajectory> eta) {
    auto gamma = solve_gamma(params, beta, alpha, m);
    auto value = assemble_value(params, beta, alpha, gamma);
    RiccatiSolution riccati{std::move(beta), std::move(alpha), std::move(gamma), std::move(eta),
                            SolveStatus::Admissible()};
    return Equilibrium{std::move(m), std::move(riccati), std::move(value), 0, 0.0, {}, false};
}

}  // namespace

Trajectory apply_phi(const ModelParams& p, const Trajectory& beta, const Trajectory& m) {
    const auto alpha = solve_alpha(p, beta, m);
    const auto& grid = beta.grid();
    const EffectiveCoefficients eff(p);
    const double dt = grid.dt();

    Trajectory out(grid);
    double prev = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double f = (p.a + p.abar) * m[k] - eff.lambda(grid.node(k)) * (beta[k] * m[k] + alpha[k]);
        out[k] = k == 0 ? p.m0 : out[k - 1] + 0.5 * dt * (prev + f);
        prev = f;
    }
    return out;
}

Equilibrium solve_equilibrium_picard(const ModelParams& p, const TimeGrid& grid,
                                     const PicardOptions& options) {
    auto beta = require_beta(p, grid, options.riccati);

    Trajectory m(grid, p.m0);
    if (options.initial_guess) {
        m = *options.initial_guess;
        if (!(m.grid() == grid)) throw std::invalid_argument("initial guess must live on the grid");
        if (m[0] != p.m0) throw std::invalid_argument("initial guess must start at m0");
    }

    std::vector<double> history;
    history.reserve(options.max_iter);
    for (std::size_t iter = 0; iter < options.max_iter; ++iter) {
        auto next = apply_phi(p, beta, m);
        const double residual = max_abs_diff(m, next);
        history.push_back(residual);
        if (residual <= options.tol) {
            auto alpha = solve_alpha(p, beta, m);
            auto eq = finish(p, std::move(m), std::move(beta), std::move(alpha), std::nullopt);
            eq.iterations = iter + 1;
            eq.residual = residual;
            eq.residual_history = std::move(history);
            return eq;
        }
        m = std::move(next);
    }
    throw NonConvergenceError(std::move(history));
}

Equilibrium solve_equilibrium_closed_form(const ModelParams& p, const TimeGrid& grid,
                                          const RiccatiOptions& options) {
    auto beta = require_beta(p, grid, options);
    auto eta_solve = solve_eta(p, beta, options);
    if (eta_solve.status.blew_up) throw BlowUpError("eta", eta_solve.status.blowup_time);
    const auto& eta = eta_solve.values;

    const EffectiveCoefficients eff(p);
    const double dt = grid.dt();
    Trajectory m(grid);
    Trajectory alpha(grid);
    double exponent = 0.0;
    double prev = 0.0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double f = p.a + p.abar - eff.lambda(grid.node(k)) * (beta[k] + eta[k]);
        if (k > 0) exponent += 0.5 * dt * (prev + f);
        prev = f;
        m[k] = p.m0 * std::exp(exponent);
        alpha[k] = eta[k] * m[k];
    }

    const double residual = max_abs_diff(m, apply_phi(p, beta, m));
    auto eq = finish(p, std::move(m), std::move(beta), std::move(alpha), eta);
    eq.residual = residual;
    eq.generalized_eta = p.variant != Variant::RiskNeutral;
    return eq;
}

double admissibility_margin(const ModelParams& p, const TimeGrid& grid) {
    const EffectiveCoefficients eff(p);
    double margin = INFINITY;
    for (std::size_t k = 0; k < grid.size(); ++k) margin = std::min(margin, eff.kappa(grid.node(k)));
    return margin;
}

ConditionsReport check_conditions(const ModelParams& p, const Trajectory& beta) {
    for (double v : beta.values()) {
        if (!std::isfinite(v)) throw std::invalid_argument("check_conditions: beta must be admissible");
    }
    const auto& grid = beta.grid();
    const EffectiveCoefficients eff(p);
    ConditionsReport rep;
    rep.variant = p.variant;
    rep.qbarT = p.qbarT;

    double margin = INFINITY;
    double g = 0.0, g_tilde = 0.0, eps = 0.0, expo = 0.0;
    double g_alt = 0.0, g_tilde_alt = 0.0;
    double min_q_sum = INFINITY, min_q = INFINITY, min_c_term = INFINITY;
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid.node(k);
        const double kappa = eff.kappa(t);
        const double lambda = eff.lambda(t);
        margin = std::min(margin, kappa);
        g = std::max(g, std::abs(p.a + p.abar - lambda * beta[k]));
        g_tilde = std::max(g_tilde, std::abs(lambda));
        eps = std::max(eps, std::abs(p.abar * beta[k] - p.qbar(t)));
        expo = std::max(expo, std::abs(p.a - kappa * beta[k]));
        g_alt = std::max(g_alt, std::abs(p.a + p.abar - kappa * beta[k]));
        g_tilde_alt = std::max(g_tilde_alt, std::abs(kappa));
        min_q_sum = std::min(min_q_sum, p.q(t) + p.qbar(t));
        min_q = std::min(min_q, p.q(t));
        min_c_term = std::min(min_c_term, p.c * p.c / p.s(t));
    }

    const double T = grid.horizon();
    rep.margin = margin;
    rep.admissible = margin > 0.0 && p.b != 0.0;
    rep.g = g;
    rep.g_tilde = g_tilde;
    rep.eps = eps;
    rep.exponent_norm = expo;
    const double tail = eps * std::exp(T * expo);
    rep.lipschitz_bound = T * (g + g_tilde * (p.qbarT + tail));
    rep.contraction = rep.lipschitz_bound < 1.0;

    if (is_risk_sensitive(p.variant)) {
        rep.g_alt = g_alt;
        rep.g_tilde_alt = g_tilde_alt;
        rep.lipschitz_bound_alt = T * (g_alt + g_tilde_alt * (p.qbarT + tail));
    }

    std::ostringstream expr;
    expr.precision(17);
    switch (p.variant) {
        case Variant::RiskNeutral: expr << "b^2/r"; break;
        case Variant::RiskSensitive: expr << "b^2/r - theta sigma^2"; break;
        case Variant::Robust: expr << "b^2/r - c^2/s"; break;
        case Variant::RobustRiskSensitive: expr << "b^2/r - c^2/s - theta sigma^2"; break;
    }
    expr << " = " << margin << (rep.admissible ? " > 0" : " <= 0");
    rep.margin_expression = expr.str();

    rep.extras.push_back({"q + qbar > 0", min_q_sum > 0.0});
    if (is_robust(p.variant)) rep.extras.push_back({"c^2/s > 0", min_c_term > 0.0});
    if (p.variant == Variant::RobustRiskSensitive) rep.extras.push_back({"q > 0", min_q > 0.0});
    return rep;
}

}  // namespace mfg
