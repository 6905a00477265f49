#include "mfg/riccati.hpp"

#include <cmath>
#include <numbers>

namespace mfg {

BlowUpError::BlowUpError(std::string which, double time)
    : std::runtime_error(which + " blows up at t = " + std::to_string(time)),
      which_(std::move(which)),
      time_(time) {}

namespace {

template <class Rhs>
double rk4_step(Rhs& f, double t, double y, double h) {
    const double k1 = f(t, y);
    const double k2 = f(t + 0.5 * h, y + 0.5 * h * k1);
    const double k3 = f(t + 0.5 * h, y + 0.5 * h * k2);
    const double k4 = f(t + h, y + h * k3);
    return y + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

bool escaped(double y, double cap) { return !std::isfinite(y) || std::abs(y) > cap; }

// Right-hand side for w = 1/y when f is quadratic in y.
template <class Rhs>
auto reciprocal_rhs(Rhs& f) {
    return [&f](double t, double w) {
        const double c0 = f(t, 0.0);
        const double fp = f(t, 1.0);
        const double fm = f(t, -1.0);
        const double c2 = 0.5 * (fp + fm) - c0;
        const double c1 = 0.5 * (fp - fm);
        return -(c2 + c1 * w + c0 * w * w);
    };
}

bool crosses_zero(double from, double to) {
    return to == 0.0 || !std::isfinite(to) || std::signbit(to) != std::signbit(from);
}

// Bisection on a single RK4 step from (t_hi, y_hi) toward t_lo.
template <class Rhs>
double bisect_escape(Rhs& f, double t_hi, double y_hi, double t_lo, double cap) {
    double good_t = t_hi;
    double good_y = y_hi;
    double bad_t = t_lo;
    for (int iter = 0; iter < 60 && std::abs(good_t - bad_t) > 1e-15 * (1.0 + std::abs(good_t));
         ++iter) {
        const double mid = 0.5 * (good_t + bad_t);
        const double y = rk4_step(f, good_t, good_y, mid - good_t);
        if (escaped(y, cap)) {
            bad_t = mid;
        } else {
            good_t = mid;
            good_y = y;
        }
    }
    return 0.5 * (good_t + bad_t);
}

// Locate the escape inside [t_lo, t_hi]. The right-hand side is quadratic in y,
// so w = 1/y obeys w' = -(c2 + c1 w + c0 w^2), which is regular at the pole:
// substeps run on y while |y| <= 1, then on w until w changes sign.
template <class Rhs>
double refine_escape(Rhs& f, double t_hi, double y_hi, double t_lo, double cap, int substeps) {
    auto recip = reciprocal_rhs(f);
    const int kSubsteps = substeps;
    const double h = (t_lo - t_hi) / kSubsteps;
    double t = t_hi;
    double y = y_hi;
    bool reciprocal = false;
    for (int i = 0; i < kSubsteps; ++i) {
        const double t_next = i + 1 == kSubsteps ? t_lo : t + h;
        if (!reciprocal) {
            const double next = rk4_step(f, t, y, t_next - t);
            if (escaped(next, cap)) return bisect_escape(f, t, y, t_next, cap);
            y = next;
            if (std::abs(y) > 1.0) {
                reciprocal = true;
                y = 1.0 / y;
            }
        } else {
            const double next = rk4_step(recip, t, y, t_next - t);
            if (crosses_zero(y, next)) {
                double good_t = t;
                double good_w = y;
                double bad_t = t_next;
                for (int iter = 0; iter < 60; ++iter) {
                    const double mid = 0.5 * (good_t + bad_t);
                    const double w = rk4_step(recip, good_t, good_w, mid - good_t);
                    if (!crosses_zero(good_w, w)) {
                        good_t = mid;
                        good_w = w;
                    } else {
                        bad_t = mid;
                    }
                }
                return 0.5 * (good_t + bad_t);
            }
            y = next;
        }
        t = t_next;
    }
    // The coarse step escaped but the refined path did not reach the pole.
    return t_lo;
}

// With `quadratic`, a step that starts at |y| > 1 is also taken for w = 1/y; a
// sign change of w means the step passed over a pole that RK4 on y can miss.
template <class Rhs>
ScalarSolve integrate_backward(const TimeGrid& grid, double terminal, Rhs&& f, double cap,
                               bool quadratic) {
    auto recip = reciprocal_rhs(f);
    Trajectory values(grid, std::numeric_limits<double>::quiet_NaN());
    const std::size_t n = grid.n_steps();
    if (escaped(terminal, cap)) return {values, SolveStatus::BlowUp(grid.horizon())};
    values[n] = terminal;
    double y = terminal;
    for (std::size_t k = n; k-- > 0;) {
        const double t1 = grid.node(k + 1);
        const double t0 = grid.node(k);
        const double next = rk4_step(f, t1, y, t0 - t1);
        const bool pole = quadratic && std::abs(y) > 1.0 &&
                          crosses_zero(1.0 / y, rk4_step(recip, t1, 1.0 / y, t0 - t1));
        if (pole || escaped(next, cap)) {
            // Restart from the latest node with |y| <= 1: coarse RK4 on y loses
            // accuracy as the pole approaches.
            std::size_t j = k + 1;
            while (j < n && std::abs(values[j]) > 1.0) ++j;
            const double t = refine_escape(f, grid.node(j), values[j], t0, cap,
                                           256 * static_cast<int>(j - k));
            return {values, SolveStatus::BlowUp(t)};
        }
        y = next;
        values[k] = y;
    }
    return {values, SolveStatus::Admissible()};
}

void require_same_grid(const Trajectory& a, const Trajectory& b, const char* what) {
    if (!(a.grid() == b.grid())) {
        throw std::invalid_argument(std::string(what) + ": trajectories must share a grid");
    }
}

void require_finite(const Trajectory& tr, const char* what) {
    for (double v : tr.values()) {
        if (!std::isfinite(v)) {
            throw std::invalid_argument(std::string(what) + " must be finite on the whole grid");
        }
    }
}

}  // namespace

ScalarSolve solve_beta(const ModelParams& p, const TimeGrid& grid, const RiccatiOptions& options) {
    require_valid(p);
    const EffectiveCoefficients eff(p);
    auto rhs = [&](double t, double beta) {
        return -2.0 * p.a * beta + eff.kappa(t) * beta * beta - (p.q(t) + p.qbar(t));
    };
    return integrate_backward(grid, p.qT + p.qbarT, rhs, options.blowup_cap, true);
}

Trajectory solve_alpha(const ModelParams& p, const Trajectory& beta, const Trajectory& m) {
    require_same_grid(beta, m, "solve_alpha");
    require_finite(beta, "solve_alpha: beta");
    const EffectiveCoefficients eff(p);
    auto rhs = [&](double t, double alpha) {
        const double b = beta.cubic_at(t);
        return -p.a * alpha - (p.abar * b - p.qbar(t)) * m.cubic_at(t) + eff.kappa(t) * alpha * b;
    };
    // Linear equation: the cap only guards against overflow.
    auto sol = integrate_backward(beta.grid(), -p.qbarT * m.back(), rhs,
                                  std::numeric_limits<double>::max(), false);
    return sol.values;
}

Trajectory solve_gamma(const ModelParams& p, const Trajectory& beta, const Trajectory& alpha,
                       const Trajectory& m) {
    require_same_grid(beta, alpha, "solve_gamma");
    require_same_grid(beta, m, "solve_gamma");
    require_finite(beta, "solve_gamma: beta");
    require_finite(alpha, "solve_gamma: alpha");
    const EffectiveCoefficients eff(p);
    const double half_sigma_sq = 0.5 * p.sigma * p.sigma;
    auto rhs = [&](double t, double) {
        const double al = alpha.cubic_at(t);
        const double mm = m.cubic_at(t);
        return -p.abar * al * mm - half_sigma_sq * beta.cubic_at(t) - 0.5 * p.qbar(t) * mm * mm +
               0.5 * eff.kappa(t) * al * al;
    };
    auto sol = integrate_backward(beta.grid(), 0.5 * p.qbarT * m.back() * m.back(), rhs,
                                  std::numeric_limits<double>::max(), false);
    return sol.values;
}

ScalarSolve solve_eta(const ModelParams& p, const Trajectory& beta, const RiccatiOptions& options) {
    require_finite(beta, "solve_eta: beta");
    const EffectiveCoefficients eff(p);
    auto rhs = [&](double t, double eta) {
        const double b = beta.cubic_at(t);
        const double kappa = eff.kappa(t);
        const double lambda = eff.lambda(t);
        return -(2.0 * p.a + p.abar - (kappa + lambda) * b) * eta + lambda * eta * eta -
               (p.abar * b - p.qbar(t));
    };
    return integrate_backward(beta.grid(), -p.qbarT, rhs, options.blowup_cap, true);
}

RiccatiSolution solve_riccati(const ModelParams& p, const Trajectory& m,
                              const RiccatiOptions& options) {
    auto beta = solve_beta(p, m.grid(), options);
    if (beta.status.blew_up) throw BlowUpError("beta", beta.status.blowup_time);
    auto alpha = solve_alpha(p, beta.values, m);
    auto gamma = solve_gamma(p, beta.values, alpha, m);
    return {std::move(beta.values), std::move(alpha), std::move(gamma), std::nullopt,
            SolveStatus::Admissible()};
}

ConstantRiccatiValue closed_form_constant_riccati(double a, double kappa, double Q, double betaT,
                                                  double T, double t) {
    const double tau = T - t;
    if (tau < 0.0) throw std::invalid_argument("closed_form_constant_riccati: t must be <= T");
    ConstantRiccatiValue out;
    auto pole = [&](double tau_star) {
        if (tau_star <= tau) {
            out.escape_time = T - tau_star;
            return true;
        }
        return false;
    };

    if (kappa == 0.0) {
        if (a == 0.0) {
            out.value = betaT + Q * tau;
        } else {
            const double growth = std::exp(2.0 * a * tau);
            out.value = growth * betaT + Q * std::expm1(2.0 * a * tau) / (2.0 * a);
        }
        return out;
    }

    // beta = (a + z'/z) / kappa where z'' = D z in reversed time, D = a^2 + kappa Q.
    const double D = a * a + kappa * Q;
    if (D > 0.0) {
        const double d = std::sqrt(D);
        const double p = (kappa * betaT - a) / d;
        if (p < -1.0 && pole(std::atanh(-1.0 / p) / d)) return out;
        const double th = std::tanh(d * tau);
        out.value = (a + d * (th + p) / (1.0 + p * th)) / kappa;
    } else if (D < 0.0) {
        const double d = std::sqrt(-D);
        const double p = (kappa * betaT - a) / d;
        if (pole((std::atan(p) + 0.5 * std::numbers::pi) / d)) return out;
        const double cs = std::cos(d * tau);
        const double sn = std::sin(d * tau);
        out.value = (a + d * (p * cs - sn) / (cs + p * sn)) / kappa;
    } else {
        const double p = kappa * betaT - a;
        if (p < 0.0 && pole(-1.0 / p)) return out;
        out.value = (a + p / (1.0 + p * tau)) / kappa;
    }
    return out;
}

ValueCoefficients assemble_value(const ModelParams& p, const Trajectory& beta,
                                 const Trajectory& alpha, const Trajectory& gamma) {
    require_same_grid(beta, alpha, "assemble_value");
    require_same_grid(beta, gamma, "assemble_value");
    const auto& grid = beta.grid();
    ValueCoefficients v{0.0,        std::nullopt, beta, alpha, Trajectory(grid),
                        Trajectory(grid), std::nullopt, std::nullopt};
    v.value_at_0 = 0.5 * beta.front() * p.x0 * p.x0 + alpha.front() * p.x0 + gamma.front();
    if (is_risk_sensitive(p.variant)) v.exponential_value = std::exp(p.theta * v.value_at_0);

    const bool robust = is_robust(p.variant);
    Trajectory dgain(grid), doffset(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        const double t = grid.node(k);
        const double r = p.r(t);
        v.feedback_gain[k] = -p.b * beta[k] / r;
        v.feedback_offset[k] = -p.b * alpha[k] / r;
        if (robust) {
            const double s = p.s(t);
            dgain[k] = p.c * beta[k] / s;
            doffset[k] = p.c * alpha[k] / s;
        }
    }
    if (robust) {
        v.disturbance_gain = std::move(dgain);
        v.disturbance_offset = std::move(doffset);
    }
    return v;
}

}  // namespace mfg
