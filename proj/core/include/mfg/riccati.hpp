#pragma once

#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

#include "mfg/model.hpp"

namespace mfg {

/// Outcome of a backward Riccati solve: admissible, or finite escape at `blowup_time`.
struct SolveStatus {
    bool blew_up = false;
    double blowup_time = std::numeric_limits<double>::quiet_NaN();

    bool admissible() const { return !blew_up; }
    static SolveStatus Admissible() { return {}; }
    static SolveStatus BlowUp(double t) { return {true, t}; }
};

/// A backward-integrated scalar trajectory. Nodes earlier than the escape time
/// hold NaN when status.blew_up.
struct ScalarSolve {
    Trajectory values;
    SolveStatus status;
};

/// Raised by routines that need an admissible Riccati solution but found a
/// finite-time escape.
class BlowUpError : public std::runtime_error {
public:
    BlowUpError(std::string which, double time);
    const std::string& which() const { return which_; }
    double time() const { return time_; }

private:
    std::string which_;
    double time_;
};

struct RiccatiOptions {
    /// |y| above this at any node (or a non-finite value) is reported as blow-up.
    double blowup_cap = 1e12;
};

struct RiccatiSolution {
    Trajectory beta;
    Trajectory alpha;
    Trajectory gamma;
    std::optional<Trajectory> eta;
    SolveStatus status;
};

/// Value-function coefficients at t = 0 and the saddle/best-response feedback law
///   u(t, x) = feedback_gain(t) x + feedback_offset(t)
///   v(t, x) = disturbance_gain(t) x + disturbance_offset(t)   (robust variants)
struct ValueCoefficients {
    double value_at_0 = 0.0;
    /// exp(theta * value_at_0); risk-sensitive variants only.
    std::optional<double> exponential_value;
    Trajectory beta;
    Trajectory alpha;
    Trajectory feedback_gain;
    Trajectory feedback_offset;
    std::optional<Trajectory> disturbance_gain;
    std::optional<Trajectory> disturbance_offset;
};

/// beta' + 2 a beta - kappa beta^2 + q + qbar = 0, beta(T) = qT + qbarT, integrated
/// backward with classical RK4 on `grid`.
ScalarSolve solve_beta(const ModelParams& params, const TimeGrid& grid,
                       const RiccatiOptions& options = {});

/// alpha' + a alpha + (abar beta - qbar) m - kappa alpha beta = 0, alpha(T) = -qbarT m(T).
/// `beta` and `m` must share a grid and be finite.
Trajectory solve_alpha(const ModelParams& params, const Trajectory& beta, const Trajectory& m);

/// gamma' + abar alpha m + sigma^2/2 beta + qbar/2 m^2 - kappa/2 alpha^2 = 0,
/// gamma(T) = qbarT/2 m(T)^2.
Trajectory solve_gamma(const ModelParams& params, const Trajectory& beta, const Trajectory& alpha,
                       const Trajectory& m);

/// eta' + [2a + abar - (kappa + lambda) beta] eta - lambda eta^2 + (abar beta - qbar) = 0,
/// eta(T) = -qbarT. With alpha = eta m this reproduces solve_alpha along the
/// equilibrium mean; for kappa = lambda = b^2/r it is the risk-neutral refinement.
ScalarSolve solve_eta(const ModelParams& params, const Trajectory& beta,
                      const RiccatiOptions& options = {});

/// beta, alpha and gamma for a given mean path. Throws BlowUpError if beta escapes.
RiccatiSolution solve_riccati(const ModelParams& params, const Trajectory& m,
                              const RiccatiOptions& options = {});

struct ConstantRiccatiValue {
    /// beta(t); NaN when escape_time is set.
    double value = std::numeric_limits<double>::quiet_NaN();
    /// Time in [t, T] at which the closed form has a pole, if any.
    std::optional<double> escape_time;
};

/// Exact solution of beta' = kappa beta^2 - 2 a beta - Q with beta(T) = betaT and
/// constant (a, kappa, Q), evaluated at t <= T.
ConstantRiccatiValue closed_form_constant_riccati(double a, double kappa, double Q, double betaT,
                                                  double T, double t);

ValueCoefficients assemble_value(const ModelParams& params, const Trajectory& beta,
                                 const Trajectory& alpha, const Trajectory& gamma);

}  // namespace mfg
