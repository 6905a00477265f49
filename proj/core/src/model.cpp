#include "mfg/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

namespace mfg {

std::string_view to_string(Variant v) {
    switch (v) {
        case Variant::RiskNeutral: return "risk_neutral";
        case Variant::RiskSensitive: return "risk_sensitive";
        case Variant::Robust: return "robust";
        case Variant::RobustRiskSensitive: return "robust_risk_sensitive";
    }
    return "unknown";
}

std::optional<Variant> parse_variant(std::string_view name) {
    for (auto v : {Variant::RiskNeutral, Variant::RiskSensitive, Variant::Robust,
                   Variant::RobustRiskSensitive}) {
        if (name == to_string(v)) return v;
    }
    return std::nullopt;
}

// ---------------------------------------------------------------------------
// TimeGrid

TimeGrid::TimeGrid(double horizon, std::size_t n_steps) : horizon_(horizon), n_steps_(n_steps) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) {
        throw std::invalid_argument("TimeGrid: horizon must be positive and finite");
    }
    if (n_steps < 2) throw std::invalid_argument("TimeGrid: n_steps must be >= 2");
}

double TimeGrid::node(std::size_t k) const {
    if (k == n_steps_) return horizon_;
    return horizon_ * static_cast<double>(k) / static_cast<double>(n_steps_);
}

TimeGrid default_grid(double horizon) {
    auto n = static_cast<std::size_t>(std::llround(1000.0 * horizon));
    return TimeGrid(horizon, std::max<std::size_t>(n, 2));
}

// ---------------------------------------------------------------------------
// Trajectory

Trajectory::Trajectory(TimeGrid grid, double fill) : grid_(grid), values_(grid.size(), fill) {}

Trajectory::Trajectory(TimeGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
    if (values_.size() != grid_.size()) {
        throw std::invalid_argument("Trajectory: values.size() must equal n_steps + 1");
    }
}

double Trajectory::at(double t) const {
    const double T = grid_.horizon();
    if (t <= 0.0) return values_.front();
    if (t >= T) return values_.back();
    const double pos = t / grid_.dt();
    auto k = std::min(static_cast<std::size_t>(pos), grid_.n_steps() - 1);
    const double w = (t - grid_.node(k)) / grid_.dt();
    return (1.0 - w) * values_[k] + w * values_[k + 1];
}

double Trajectory::cubic_at(double t) const {
    const std::size_t n = values_.size();
    if (n < 4) return at(t);
    t = std::clamp(t, 0.0, grid_.horizon());
    const auto k = std::min(static_cast<std::size_t>(t / grid_.dt()), grid_.n_steps() - 1);
    const std::size_t j0 = std::min(k > 0 ? k - 1 : 0, n - 4);
    double tj[4];
    for (std::size_t i = 0; i < 4; ++i) tj[i] = grid_.node(j0 + i);
    double result = 0.0;
    for (std::size_t i = 0; i < 4; ++i) {
        double basis = 1.0;
        for (std::size_t j = 0; j < 4; ++j) {
            if (j != i) basis *= (t - tj[j]) / (tj[i] - tj[j]);
        }
        result += basis * values_[j0 + i];
    }
    return result;
}

double Trajectory::sup_norm(double t) const {
    double norm = 0.0;
    for (std::size_t k = 0; k < values_.size() && grid_.node(k) <= t; ++k) {
        norm = std::max(norm, std::abs(values_[k]));
    }
    return norm;
}

double Trajectory::sup_norm() const {
    double norm = 0.0;
    for (double v : values_) norm = std::max(norm, std::abs(v));
    return norm;
}

double max_abs_diff(const Trajectory& a, const Trajectory& b) {
    if (a.size() != b.size()) throw std::invalid_argument("max_abs_diff: size mismatch");
    double d = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
    return d;
}

// ---------------------------------------------------------------------------
// CoefficientFn

CoefficientFn::CoefficientFn(double horizon, std::vector<double> values)
    : rep_(Table{horizon, std::move(values)}) {
    const auto& tab = std::get<Table>(rep_);
    if (tab.values.size() < 2) throw std::invalid_argument("CoefficientFn: table needs >= 2 values");
    if (!(horizon > 0.0)) throw std::invalid_argument("CoefficientFn: table horizon must be positive");
}

double CoefficientFn::operator()(double t) const {
    if (const auto* c = std::get_if<double>(&rep_)) return *c;
    const auto& tab = std::get<Table>(rep_);
    const std::size_t intervals = tab.values.size() - 1;
    const double h = tab.horizon / static_cast<double>(intervals);
    if (t <= 0.0) return tab.values.front();
    if (t >= tab.horizon) return tab.values.back();
    auto k = std::min(static_cast<std::size_t>(t / h), intervals - 1);
    const double w = (t - h * static_cast<double>(k)) / h;
    return (1.0 - w) * tab.values[k] + w * tab.values[k + 1];
}

std::vector<double> CoefficientFn::node_values() const {
    if (is_constant()) return {constant()};
    return table().values;
}

CoefficientFn CoefficientFn::scaled(double factor) const {
    if (is_constant()) return CoefficientFn(constant() * factor);
    auto tab = table();
    for (double& v : tab.values) v *= factor;
    return CoefficientFn(tab.horizon, std::move(tab.values));
}

CoefficientFn CoefficientFn::rescaled_to(double horizon) const {
    if (is_constant()) return *this;
    return CoefficientFn(horizon, table().values);
}

Trajectory CoefficientFn::sample(const TimeGrid& grid) const {
    Trajectory out(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) out[k] = (*this)(grid.node(k));
    return out;
}

// ---------------------------------------------------------------------------
// validate

namespace {

void check_fn(const CoefficientFn& fn, const char* name, bool strict, double horizon,
              std::vector<Violation>& out) {
    const auto values = fn.node_values();
    for (std::size_t k = 0; k < values.size(); ++k) {
        const double v = values[k];
        const bool bad = !std::isfinite(v) || (strict ? !(v > 0.0) : !(v >= 0.0));
        if (bad) {
            std::optional<std::size_t> node;
            if (!fn.is_constant()) node = k;
            out.push_back({name, node,
                           std::string(name) + (strict ? " must be strictly positive"
                                                       : " must be nonnegative")});
        }
    }
    if (!fn.is_constant() && std::abs(fn.table().horizon - horizon) > 1e-12 * horizon) {
        out.push_back({name, std::nullopt,
                       std::string(name) + " table horizon does not match T"});
    }
}

void check_scalar(double v, const char* name, bool nonneg, std::vector<Violation>& out) {
    if (!std::isfinite(v)) {
        out.push_back({name, std::nullopt, std::string(name) + " must be finite"});
    } else if (nonneg && v < 0.0) {
        out.push_back({name, std::nullopt, std::string(name) + " must be nonnegative"});
    }
}

}  // namespace

ValidationResult validate(const ModelParams& p) {
    ValidationResult res;
    auto& out = res.violations;
    check_scalar(p.a, "a", false, out);
    check_scalar(p.abar, "abar", false, out);
    check_scalar(p.b, "b", false, out);
    if (p.b == 0.0) out.push_back({"b", std::nullopt, "b must be nonzero"});
    check_scalar(p.c, "c", false, out);
    check_scalar(p.sigma, "sigma", true, out);
    check_scalar(p.qT, "qT", true, out);
    check_scalar(p.qbarT, "qbarT", true, out);
    check_scalar(p.theta, "theta", true, out);
    check_scalar(p.x0, "x0", false, out);
    check_scalar(p.m0, "m0", false, out);
    if (!(p.T > 0.0) || !std::isfinite(p.T)) {
        out.push_back({"T", std::nullopt, "T must be strictly positive"});
    }
    const double horizon = p.T > 0.0 ? p.T : 1.0;
    check_fn(p.q, "q", false, horizon, out);
    check_fn(p.qbar, "qbar", false, horizon, out);
    check_fn(p.r, "r", true, horizon, out);
    check_fn(p.s, "s", true, horizon, out);
    return res;
}

std::string ValidationResult::describe() const {
    std::ostringstream os;
    for (const auto& v : violations) {
        os << v.field;
        if (v.node) os << "[node " << *v.node << "]";
        os << ": " << v.message << '\n';
    }
    return os.str();
}

void require_valid(const ModelParams& params) {
    auto res = validate(params);
    if (!res.ok()) throw std::invalid_argument("invalid model parameters:\n" + res.describe());
}

// ---------------------------------------------------------------------------
// EffectiveCoefficients

EffectiveCoefficients::EffectiveCoefficients(const ModelParams& p)
    : b_sq_(p.b * p.b),
      c_sq_(is_robust(p.variant) ? p.c * p.c : 0.0),
      theta_sigma_sq_(is_risk_sensitive(p.variant) ? p.theta * p.sigma * p.sigma : 0.0),
      robust_(is_robust(p.variant)),
      r_(p.r),
      s_(p.s) {}

double EffectiveCoefficients::lambda(double t) const {
    const double control = b_sq_ / r_(t);
    if (!robust_) return control;
    return control - c_sq_ / s_(t);
}

double EffectiveCoefficients::kappa(double t) const { return lambda(t) - theta_sigma_sq_; }

Trajectory EffectiveCoefficients::kappa_on(const TimeGrid& grid) const {
    Trajectory out(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) out[k] = kappa(grid.node(k));
    return out;
}

Trajectory EffectiveCoefficients::lambda_on(const TimeGrid& grid) const {
    Trajectory out(grid);
    for (std::size_t k = 0; k < grid.size(); ++k) out[k] = lambda(grid.node(k));
    return out;
}

EffectiveCoefficients effective_coefficients(const ModelParams& params) {
    return EffectiveCoefficients(params);
}

}  // namespace mfg
