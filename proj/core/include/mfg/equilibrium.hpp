#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "mfg/model.hpp"
#include "mfg/riccati.hpp"

namespace mfg {

struct Equilibrium {
    Trajectory m;
    RiccatiSolution riccati;
    ValueCoefficients value;
    std::size_t iterations = 0;
    /// ||m - Phi[m]||_inf for the returned m.
    double residual = 0.0;
    /// Picard route: ||m_k - Phi[m_k]||_inf for every iterate.
    std::vector<double> residual_history;
    /// Closed-form route for a variant other than RiskNeutral, which relies on
    /// the generalized eta equation.
    bool generalized_eta = false;
};

class NonConvergenceError : public std::runtime_error {
public:
    explicit NonConvergenceError(std::vector<double> residuals);
    const std::vector<double>& residuals() const { return residuals_; }

private:
    std::vector<double> residuals_;
};

struct PicardOptions {
    double tol = 1e-10;
    std::size_t max_iter = 200;
    RiccatiOptions riccati;
    /// Starting iterate; defaults to the constant m0. Its first node must equal m0.
    std::optional<Trajectory> initial_guess;
};

/// Phi[m](t) = m0 + int_0^t [(a + abar) m - lambda (beta m + alpha[m])] ds, by the
/// trapezoid rule on beta's grid, with alpha[m] = solve_alpha(params, beta, m).
Trajectory apply_phi(const ModelParams& params, const Trajectory& beta, const Trajectory& m);

/// Banach-Picard iteration m <- Phi[m]. Throws BlowUpError when beta escapes and
/// NonConvergenceError (with the residual history) after max_iter iterations.
Equilibrium solve_equilibrium_picard(const ModelParams& params, const TimeGrid& grid,
                                     const PicardOptions& options = {});

/// m(t) = m0 exp(int_0^t [a + abar - lambda (beta + eta)] ds), alpha = eta m.
/// Throws BlowUpError when beta or eta escapes.
Equilibrium solve_equilibrium_closed_form(const ModelParams& params, const TimeGrid& grid,
                                          const RiccatiOptions& options = {});

struct ConditionCheck {
    std::string name;
    bool holds;
};

/// Admissibility margin and contraction constants for the selected variant.
/// Sup-norms are maxima over grid nodes.
struct ConditionsReport {
    Variant variant = Variant::RiskNeutral;
    bool admissible = false;
    /// min over nodes of kappa(t): b^2/r [- c^2/s] [- theta sigma^2].
    double margin = 0.0;
    std::string margin_expression;

    double g = 0.0;              ///< |a + abar - lambda beta|_T
    double g_tilde = 0.0;        ///< |lambda|_T
    double eps = 0.0;            ///< |abar beta - qbar|_T
    double exponent_norm = 0.0;  ///< |a - kappa beta|_T
    double qbarT = 0.0;
    /// T [g + g_tilde (qbarT + eps exp(T exponent_norm))]
    double lipschitz_bound = 0.0;
    bool contraction = false;

    /// Risk-sensitive variants: the same bound with theta sigma^2 folded into the
    /// state-loop coefficient (kappa in place of lambda in g and g_tilde).
    std::optional<double> g_alt;
    std::optional<double> g_tilde_alt;
    std::optional<double> lipschitz_bound_alt;

    /// Side conditions that individual existence statements add on top of validate().
    std::vector<ConditionCheck> extras;
};

ConditionsReport check_conditions(const ModelParams& params, const Trajectory& beta);

/// min over grid nodes of kappa(t); the variant's solvability condition is margin > 0.
/// Needs no Riccati solve.
double admissibility_margin(const ModelParams& params, const TimeGrid& grid);

}  // namespace mfg
