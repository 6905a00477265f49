#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace mfg {

/// Game variant. Selects which of the cost/disturbance terms are active.
enum class Variant {
    RiskNeutral,
    RiskSensitive,
    Robust,
    RobustRiskSensitive,
};

std::string_view to_string(Variant v);
std::optional<Variant> parse_variant(std::string_view name);

/// True for the variants with an exponential-of-integral cost (theta is used).
constexpr bool is_risk_sensitive(Variant v) {
    return v == Variant::RiskSensitive || v == Variant::RobustRiskSensitive;
}

/// True for the minimax variants with a disturbance player (c and s are used).
constexpr bool is_robust(Variant v) {
    return v == Variant::Robust || v == Variant::RobustRiskSensitive;
}

/// Uniform grid on [0, T] with nodes t_k = k * T / n_steps.
class TimeGrid {
public:
    TimeGrid(double horizon, std::size_t n_steps);

    double horizon() const { return horizon_; }
    std::size_t n_steps() const { return n_steps_; }
    std::size_t size() const { return n_steps_ + 1; }
    double dt() const { return horizon_ / static_cast<double>(n_steps_); }

    /// Node k; the last node is exactly T.
    double node(std::size_t k) const;

    bool operator==(const TimeGrid&) const = default;

private:
    double horizon_;
    std::size_t n_steps_;
};

/// A real function tabulated on the nodes of a TimeGrid.
class Trajectory {
public:
    explicit Trajectory(TimeGrid grid, double fill = 0.0);
    Trajectory(TimeGrid grid, std::vector<double> values);

    const TimeGrid& grid() const { return grid_; }
    std::size_t size() const { return values_.size(); }

    double operator[](std::size_t k) const { return values_[k]; }
    double& operator[](std::size_t k) { return values_[k]; }
    const std::vector<double>& values() const { return values_; }

    double front() const { return values_.front(); }
    double back() const { return values_.back(); }

    /// Piecewise-linear interpolation, t clamped to [0, T].
    double at(double t) const;

    /// Four-point Lagrange interpolation on the uniform grid (one-sided near
    /// the ends). Fourth-order accurate for smooth data.
    double cubic_at(double t) const;

    /// max over nodes with t_k <= t of |value|.
    double sup_norm(double t) const;
    double sup_norm() const;

    bool operator==(const Trajectory&) const = default;

private:
    TimeGrid grid_;
    std::vector<double> values_;
};

/// max_k |a_k - b_k| over two trajectories on the same grid.
double max_abs_diff(const Trajectory& a, const Trajectory& b);

/// Time-dependent weight: a constant, or values on a uniform table over
/// [0, horizon] with linear interpolation between table nodes.
class CoefficientFn {
public:
    struct Table {
        double horizon;
        std::vector<double> values;
        bool operator==(const Table&) const = default;
    };

    CoefficientFn(double constant = 0.0) : rep_(constant) {}  // NOLINT(implicit)
    CoefficientFn(double horizon, std::vector<double> values);

    double operator()(double t) const;

    bool is_constant() const { return std::holds_alternative<double>(rep_); }
    double constant() const { return std::get<double>(rep_); }
    const Table& table() const { return std::get<Table>(rep_); }

    /// Constant: the value. Table: the node values.
    std::vector<double> node_values() const;

    /// Same function with each value multiplied by `factor`.
    CoefficientFn scaled(double factor) const;
    /// Same node values spread over a new horizon (tables only; constants unchanged).
    CoefficientFn rescaled_to(double horizon) const;

    Trajectory sample(const TimeGrid& grid) const;

    bool operator==(const CoefficientFn&) const = default;

private:
    std::variant<double, Table> rep_;
};

struct ModelParams {
    Variant variant = Variant::RiskNeutral;
    double a = 0.0;
    double abar = 0.0;
    double b = 1.0;
    double c = 0.0;
    double sigma = 0.0;
    CoefficientFn q{0.0};
    CoefficientFn qbar{0.0};
    CoefficientFn r{1.0};
    CoefficientFn s{1.0};
    double qT = 0.0;
    double qbarT = 0.0;
    double theta = 0.0;
    double T = 1.0;
    double x0 = 0.0;
    double m0 = 0.0;

    bool operator==(const ModelParams&) const = default;
};

struct Violation {
    std::string field;
    std::optional<std::size_t> node;
    std::string message;
};

struct ValidationResult {
    std::vector<Violation> violations;
    bool ok() const { return violations.empty(); }
    /// One violation per line.
    std::string describe() const;
};

ValidationResult validate(const ModelParams& params);

/// Throws std::invalid_argument carrying describe() if validation fails.
void require_valid(const ModelParams& params);

/// Riccati quadratic coefficient kappa(t) and state-loop coefficient lambda(t).
///
///   RiskNeutral          kappa = lambda = b^2/r
///   RiskSensitive        kappa = b^2/r - theta sigma^2,        lambda = b^2/r
///   Robust               kappa = lambda = b^2/r - c^2/s
///   RobustRiskSensitive  kappa = b^2/r - c^2/s - theta sigma^2, lambda = b^2/r - c^2/s
class EffectiveCoefficients {
public:
    explicit EffectiveCoefficients(const ModelParams& params);

    double kappa(double t) const;
    double lambda(double t) const;

    Trajectory kappa_on(const TimeGrid& grid) const;
    Trajectory lambda_on(const TimeGrid& grid) const;

private:
    double b_sq_;
    double c_sq_;
    double theta_sigma_sq_;
    bool robust_;
    CoefficientFn r_;
    CoefficientFn s_;
};

EffectiveCoefficients effective_coefficients(const ModelParams& params);

/// Grid with the default resolution of 1000 steps per unit of horizon.
TimeGrid default_grid(double horizon);

}  // namespace mfg
