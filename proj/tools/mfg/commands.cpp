#include "mfg/commands.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <thread>

#include "mfg/csv.hpp"
#include "mfg/equilibrium.hpp"
#include "mfg/riccati.hpp"
#include "mfg/simulate.hpp"

namespace mfg::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kRouteTolerance = 1e-6;

std::string short_num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

const char* yes_no(bool b) { return b ? "true" : "false"; }

}  // namespace

void Report::section(const std::string& name) {
    if (!lines.empty()) lines.emplace_back();
    lines.push_back("== " + name + " ==");
}

void Report::put(const std::string& key, double value) { summary.emplace_back(key, format_double(value)); }

bool Report::verdict(const std::string& name, bool pass, const std::string& detail,
                     const std::string& tolerance) {
    line(std::string(pass ? "PASS " : "FAIL ") + name + ": " + detail + " (tol " + tolerance + ")");
    put("check." + name, pass ? "PASS" : "FAIL");
    return pass;
}

std::string Report::text() const {
    std::string out;
    for (const auto& l : lines) out += l + '\n';
    if (!files.empty()) {
        out += "\n== files ==\n";
        for (const auto& f : files) out += f + '\n';
    }
    return out;
}

std::string Report::summary_text() const {
    std::string out;
    for (const auto& [k, v] : summary) out += k + '=' + v + '\n';
    return out;
}

RunConfig apply_overrides(RunConfig config, const Overrides& o, const char* env_seed) {
    if (env_seed && *env_seed) {
        std::string_view s(env_seed);
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
            throw ConfigError("MFG_SEED: expected a nonnegative integer, got '" + std::string(s) + "'");
        }
        config.sim.seed = v;
    }
    if (o.seed) config.sim.seed = *o.seed;
    if (o.paths) config.sim.n_paths = *o.paths;
    if (o.dt_sim) config.sim.dt_sim = *o.dt_sim;
    if (o.tol) config.solve.tol = *o.tol;
    if (o.workers) {
        config.sim.workers = *o.workers;
        config.sweep.workers = *o.workers;
    }
    if (o.dump_paths) config.sim.dump_paths = *o.dump_paths;
    if (o.sweep_parameter) config.sweep.parameter = *o.sweep_parameter;
    if (o.sweep_from) config.sweep.from = *o.sweep_from;
    if (o.sweep_to) config.sweep.to = *o.sweep_to;
    if (o.sweep_steps) config.sweep.steps = *o.sweep_steps;
    return config;
}

namespace {

void finish(CommandResult& res, const std::filesystem::path& out_dir, const std::string& name) {
    res.report.put("exit_code", std::to_string(res.exit_code));
    res.report.files.push_back(name + "_report.txt");
    res.report.files.push_back(name + "_summary.txt");
    write_file(out_dir / (name + "_report.txt"), res.report.text());
    write_file(out_dir / (name + "_summary.txt"), res.report.summary_text());
}

void emit(Report& report, const std::filesystem::path& out_dir, const std::string& file,
          const std::string& contents) {
    write_file(out_dir / file, contents);
    report.files.push_back(file);
}

void describe_instance(Report& r, const RunConfig& cfg) {
    r.section("instance");
    std::istringstream in(echo_model(cfg.model));
    for (std::string l; std::getline(in, l);) r.line(l);
    r.line("[grid]");
    r.line("n_steps = " + std::to_string(cfg.grid().n_steps()));
    r.put("variant", std::string(to_string(cfg.model.variant)));
}

bool validate_into(Report& r, const ModelParams& p) {
    const auto v = validate(p);
    if (v.ok()) return true;
    r.section("validation");
    std::istringstream in(v.describe());
    for (std::string l; std::getline(in, l);) r.line(l);
    r.put("status", "invalid");
    return false;
}

void describe_conditions(Report& r, const ConditionsReport& c) {
    r.section("admissibility and contraction");
    r.line(std::string("admissible: ") + yes_no(c.admissible));
    r.line("margin: " + c.margin_expression);
    r.line("g = |a + abar - lambda beta|_T = " + short_num(c.g));
    r.line("g_tilde = |lambda|_T = " + short_num(c.g_tilde));
    r.line("eps = |abar beta - qbar|_T = " + short_num(c.eps));
    r.line("|a - kappa beta|_T = " + short_num(c.exponent_norm));
    r.line("qbarT = " + short_num(c.qbarT));
    r.line("lipschitz bound T [g + g_tilde (qbarT + eps exp(T |a - kappa beta|_T))] = " +
           short_num(c.lipschitz_bound));
    r.line(std::string("contraction (bound < 1): ") + yes_no(c.contraction));
    if (c.lipschitz_bound_alt) {
        r.line("with kappa in the state loop: g = " + short_num(*c.g_alt) +
               ", g_tilde = " + short_num(*c.g_tilde_alt) +
               ", bound = " + short_num(*c.lipschitz_bound_alt) +
               ", contraction " + yes_no(*c.lipschitz_bound_alt < 1.0));
    }
    for (const auto& e : c.extras) r.line("side condition " + e.name + ": " + yes_no(e.holds));

    r.put("admissible", yes_no(c.admissible));
    r.put("margin", c.margin);
    r.put("g", c.g);
    r.put("g_tilde", c.g_tilde);
    r.put("eps", c.eps);
    r.put("exponent_norm", c.exponent_norm);
    r.put("lipschitz_bound", c.lipschitz_bound);
    r.put("contraction", yes_no(c.contraction));
    if (c.lipschitz_bound_alt) {
        r.put("g_alt", *c.g_alt);
        r.put("g_tilde_alt", *c.g_tilde_alt);
        r.put("lipschitz_bound_alt", *c.lipschitz_bound_alt);
    }
}

void describe_blowup(Report& r, const std::string& which, double time) {
    r.section("blow-up");
    r.line(which + " escapes to infinity at t = " + format_double(time));
    r.put("status", "blowup");
    r.put("blowup." + which, time);
}

struct Solved {
    int exit_code = kOk;
    std::optional<ScalarSolve> beta;
    std::optional<ConditionsReport> conditions;
    std::optional<Equilibrium> picard;
    std::optional<Equilibrium> closed;
};

/// validate -> beta -> conditions -> Picard -> closed form, reporting as it goes.
Solved solve_pipeline(const RunConfig& cfg, Report& r) {
    Solved out;
    const auto& p = cfg.model;
    if (!validate_into(r, p)) {
        out.exit_code = kConfigError;
        return out;
    }
    const auto grid = cfg.grid();
    RiccatiOptions ropts{cfg.solve.blowup_cap};

    out.beta = solve_beta(p, grid, ropts);
    if (out.beta->status.blew_up) {
        r.section("admissibility and contraction");
        const double margin = admissibility_margin(p, grid);
        r.line(std::string("admissible: ") + yes_no(margin > 0.0));
        r.line("margin: min kappa = " + short_num(margin));
        r.put("admissible", yes_no(margin > 0.0));
        r.put("margin", margin);
        describe_blowup(r, "beta", out.beta->status.blowup_time);
        out.exit_code = kBlowUp;
        return out;
    }
    out.conditions = check_conditions(p, out.beta->values);
    describe_conditions(r, *out.conditions);

    r.section("equilibrium");
    PicardOptions popts;
    popts.tol = cfg.solve.tol;
    popts.max_iter = cfg.solve.max_iter;
    popts.riccati = ropts;
    try {
        out.picard = solve_equilibrium_picard(p, grid, popts);
    } catch (const NonConvergenceError& e) {
        const auto& h = e.residuals();
        r.line("Picard iteration did not reach tol " + short_num(cfg.solve.tol) + " in " +
               std::to_string(h.size()) + " iterations");
        const std::size_t from = h.size() > 5 ? h.size() - 5 : 0;
        for (std::size_t i = from; i < h.size(); ++i) {
            r.line("  residual[" + std::to_string(i) + "] = " + short_num(h[i]));
        }
        r.put("status", "nonconvergence");
        r.put("iterations", std::to_string(h.size()));
        if (!h.empty()) r.put("residual", h.back());
        out.exit_code = kNonConvergence;
        return out;
    }
    const auto& eq = *out.picard;
    r.line("value_at_0 = " + format_double(eq.value.value_at_0));
    if (eq.value.exponential_value) {
        r.line("exp(theta value_at_0) = " + format_double(*eq.value.exponential_value));
    }
    r.line("beta(0) = " + format_double(eq.riccati.beta.front()));
    r.line("alpha(0) = " + format_double(eq.riccati.alpha.front()));
    r.line("gamma(0) = " + format_double(eq.riccati.gamma.front()));
    r.line("Picard iterations = " + std::to_string(eq.iterations));
    r.line("Picard residual |m - Phi[m]|_inf = " + short_num(eq.residual));
    r.put("value_at_0", eq.value.value_at_0);
    if (eq.value.exponential_value) r.put("exponential_value", *eq.value.exponential_value);
    r.put("beta0", eq.riccati.beta.front());
    r.put("iterations", std::to_string(eq.iterations));
    r.put("residual", eq.residual);

    try {
        out.closed = solve_equilibrium_closed_form(p, grid, ropts);
    } catch (const BlowUpError& e) {
        describe_blowup(r, e.which(), e.time());
        out.exit_code = kBlowUp;
        return out;
    }
    const double gap = max_abs_diff(eq.m, out.closed->m);
    r.line("closed-form route residual |m - Phi[m]|_inf = " + short_num(out.closed->residual));
    r.verdict("route agreement", gap <= kRouteTolerance,
              "max |m_picard - m_closed_form| = " + short_num(gap), short_num(kRouteTolerance));
    r.put("route_gap", gap);
    r.put("status", "ok");
    return out;
}

}  // namespace

CommandResult cmd_solve(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    CommandResult res;
    auto& r = res.report;
    r.line("mfg solve");
    describe_instance(r, cfg);
    auto s = solve_pipeline(cfg, r);
    res.exit_code = s.exit_code;

    if (s.beta) emit(r, out_dir, "beta.csv", trajectory_csv({"beta"}, {&s.beta->values}));
    if (s.picard) {
        const auto& eq = *s.picard;
        emit(r, out_dir, "m.csv", trajectory_csv({"m"}, {&eq.m}));
        emit(r, out_dir, "alpha.csv", trajectory_csv({"alpha"}, {&eq.riccati.alpha}));
        emit(r, out_dir, "gamma.csv", trajectory_csv({"gamma"}, {&eq.riccati.gamma}));
        const auto& v = eq.value;
        if (v.disturbance_gain) {
            emit(r, out_dir, "gains.csv",
                 trajectory_csv({"feedback_gain", "feedback_offset", "disturbance_gain",
                                 "disturbance_offset"},
                                {&v.feedback_gain, &v.feedback_offset, &*v.disturbance_gain,
                                 &*v.disturbance_offset}));
        } else {
            emit(r, out_dir, "gains.csv",
                 trajectory_csv({"feedback_gain", "feedback_offset"},
                                {&v.feedback_gain, &v.feedback_offset}));
        }
    }
    if (s.closed) {
        emit(r, out_dir, "m_closed_form.csv", trajectory_csv({"m"}, {&s.closed->m}));
        if (s.closed->riccati.eta) {
            emit(r, out_dir, "eta.csv", trajectory_csv({"eta"}, {&*s.closed->riccati.eta}));
        }
    }
    finish(res, out_dir, "solve");
    return res;
}

CommandResult cmd_check(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    CommandResult res;
    auto& r = res.report;
    r.line("mfg check");
    describe_instance(r, cfg);
    if (!validate_into(r, cfg.model)) {
        res.exit_code = kConfigError;
    } else {
        const auto grid = cfg.grid();
        const auto beta = solve_beta(cfg.model, grid, {cfg.solve.blowup_cap});
        if (beta.status.blew_up) {
            const double margin = admissibility_margin(cfg.model, grid);
            r.section("admissibility and contraction");
            r.line(std::string("admissible: ") + yes_no(margin > 0.0));
            r.line("margin: min kappa = " + short_num(margin));
            r.put("admissible", yes_no(margin > 0.0));
            r.put("margin", margin);
            describe_blowup(r, "beta", beta.status.blowup_time);
            res.exit_code = kBlowUp;
        } else {
            describe_conditions(r, check_conditions(cfg.model, beta.values));
            r.put("status", "ok");
        }
    }
    finish(res, out_dir, "check");
    return res;
}

namespace {

ValueCoefficients scaled_law(ValueCoefficients v, double factor) {
    for (std::size_t k = 0; k < v.feedback_gain.size(); ++k) {
        v.feedback_gain[k] *= factor;
        v.feedback_offset[k] *= factor;
    }
    return v;
}

std::string mc_detail(const MCEstimate& est, double theory, double allowance) {
    const double z = est.std_error > 0.0 ? std::abs(est.mean - theory) / est.std_error : 0.0;
    std::string s = "estimate " + format_double(est.mean) + ", theory " + format_double(theory) +
                    ", SE " + short_num(est.std_error) + ", z " + short_num(z);
    if (allowance > 0.0) s += ", discretization allowance " + short_num(allowance);
    return s;
}

std::string gap_detail(const GapCheck& g) {
    return "baseline " + format_double(g.baseline.mean) + ", perturbed " +
           format_double(g.perturbed.mean) + ", gap " + short_num(g.gap) + ", theory " +
           short_num(g.analytic) + ", SE " + short_num(g.gap_se);
}

}  // namespace

CommandResult cmd_verify(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    CommandResult res;
    auto& r = res.report;
    r.line("mfg verify");
    describe_instance(r, cfg);
    auto s = solve_pipeline(cfg, r);
    if (s.exit_code != kOk) {
        res.exit_code = s.exit_code;
        finish(res, out_dir, "verify");
        return res;
    }
    const auto& p = cfg.model;
    const auto& eq = *s.picard;
    const auto& sim = cfg.sim;

    r.section("verification");
    r.line("n_paths = " + std::to_string(sim.n_paths) + ", dt_sim = " + short_num(sim.dt_sim) +
           ", seed = " + std::to_string(sim.seed) + ", antithetic = " + yes_no(sim.antithetic));
    if (cfg.verify.gain_scale != 1.0) {
        r.line("simulated feedback law scaled by " + short_num(cfg.verify.gain_scale));
    }
    if (p.x0 != p.m0) r.line("note: x0 differs from m0, so the simulated mean need not track m");

    const auto law = scaled_law(eq.value, cfg.verify.gain_scale);
    const auto ens = simulate_paths(p, Policy::equilibrium(law), eq.m, sim);

    // Noise-free run of the exact equilibrium law: its Euler bias bounds the
    // discretization part of each comparison.
    ModelParams p_det = p;
    p_det.sigma = 0.0;
    SimConfig sim_det = sim;
    sim_det.n_paths = 2;
    sim_det.antithetic = false;
    sim_det.dump_paths = 0;
    const auto det = simulate_paths(p_det, Policy::equilibrium(eq.value), eq.m, sim_det);

    const double slack = 1e-12;
    bool all = true;

    Trajectory mean_allow(eq.m.grid());
    for (std::size_t k = 0; k < eq.m.size(); ++k) {
        mean_allow[k] = std::abs(det.node_mean[k] - eq.m[k]) + slack * (1.0 + std::abs(eq.m[k]));
    }
    const auto mc = check_mean_consistency(ens, eq.m, 3.0, mean_allow);
    all &= r.verdict("mean-field consistency",
                     mc.pass,
                     "max |mean - m| = " + short_num(mc.max_abs_error) + ", max z = " +
                         short_num(mc.max_z) + " at t = " +
                         short_num(eq.m.grid().node(mc.worst_node)),
                     "3 SE per node + Euler bias of the noise-free mean");
    r.put("mean.max_abs_error", mc.max_abs_error);
    r.put("mean.max_z", mc.max_z);

    const auto gamma_det = solve_gamma(p_det, eq.riccati.beta, eq.riccati.alpha, eq.m);
    const double v_det = 0.5 * eq.riccati.beta.front() * p.x0 * p.x0 +
                         eq.riccati.alpha.front() * p.x0 + gamma_det.front();

    const double value = eq.value.value_at_0;
    if (!is_risk_sensitive(p.variant)) {
        const double cost_det = estimate_risk_neutral_cost(det, p_det).mean;
        const double allow = std::abs(cost_det - v_det) + slack * (1.0 + std::abs(value));
        const auto est = estimate_risk_neutral_cost(ens, p);
        const bool pass = std::abs(est.mean - value) <= 3.0 * est.std_error + allow;
        all &= r.verdict("value identity E[L] = value_at_0", pass, mc_detail(est, value, allow),
                         "3 SE + discretization allowance");
        r.put("value.estimate", est.mean);
        r.put("value.std_error", est.std_error);
    } else {
        ModelParams p_rn = p_det;
        p_rn.variant = is_robust(p.variant) ? Variant::Robust : Variant::RiskNeutral;
        p_rn.theta = 0.0;
        const double cost_det = estimate_risk_neutral_cost(det, p_rn).mean;
        const double target = *eq.value.exponential_value;
        const double allow =
            target * std::abs(std::expm1(p.theta * (cost_det - v_det))) + slack * (1.0 + target);
        const auto est = estimate_exponential_cost(ens, p);
        const bool pass = std::abs(est.estimate.mean - target) <= 3.0 * est.estimate.std_error + allow;
        all &= r.verdict("exponential value identity E[exp(theta L)] = exp(theta value_at_0)", pass,
                         mc_detail(est.estimate, target, allow) + ", kurtosis " +
                             short_num(est.kurtosis),
                         "3 SE + discretization allowance");
        if (est.heavy_tailed) r.line("warning: heavy-tailed exp(theta L), SE may be unreliable");
        r.put("exp_value.estimate", est.estimate.mean);
        r.put("exp_value.std_error", est.estimate.std_error);
        r.put("exp_value.kurtosis", est.kurtosis);

        const auto g = estimate_girsanov_normalization(ens, p);
        const bool gpass = std::abs(g.mean - 1.0) <= 3.0 * g.std_error + slack;
        all &= r.verdict("stochastic exponential normalization E[E_T] = 1", gpass,
                         mc_detail(g, 1.0, 0.0), "3 SE");
        r.put("girsanov.estimate", g.mean);
        r.put("girsanov.std_error", g.std_error);
    }

    const double scale = cfg.verify.perturbation_scale;
    // Gap of the same check on the noise-free run, measured against the exact
    // noise-free gap, bounds the Euler part of the comparison.
    auto gap_allowance = [&](const GapCheck& d) {
        double theory = d.analytic;
        if (is_risk_sensitive(p.variant)) theory *= d.baseline.mean / *eq.value.exponential_value;
        return std::abs(d.gap - theory) + slack * (1.0 + std::abs(d.analytic));
    };
    auto matches = [](const GapCheck& g, double allow) {
        return std::abs(g.gap - g.analytic) <= 3.0 * g.gap_se + allow;
    };
    if (scale == 0.0) {
        r.line("perturbation checks skipped (perturbation_scale = 0)");
    } else if (!is_robust(p.variant)) {
        const auto g = control_perturbation_check(p, eq, scale, sim);
        const double allow = gap_allowance(control_perturbation_check(p_det, eq, scale, sim_det));
        all &= r.verdict("optimality gap for constant control offset " + short_num(scale),
                         g.resolved && matches(g, allow),
                         gap_detail(g) + ", discretization allowance " + short_num(allow),
                         "gap > 3 SE and |gap - theory| <= 3 SE + allowance");
        r.put("optimality.gap", g.gap);
        r.put("optimality.gap_se", g.gap_se);
    } else {
        const auto sr = saddle_check(p, eq, scale, sim);
        const auto det_sr = saddle_check(p_det, eq, scale, sim_det);
        const double allow_u = gap_allowance(det_sr.control);
        const double allow_v = gap_allowance(det_sr.disturbance);
        r.line("control arm: " + gap_detail(sr.control) + ", discretization allowance " +
               short_num(allow_u));
        r.line("disturbance arm: " + gap_detail(sr.disturbance) + ", discretization allowance " +
               short_num(allow_v));
        r.line(std::string("saddle status: ") + to_string(sr.status));
        const bool pass = sr.status == SaddleStatus::Resolved && matches(sr.control, allow_u) &&
                          matches(sr.disturbance, allow_v);
        all &= r.verdict("saddle ordering cost(u+du,v) > cost(u,v) > cost(u,v+dv)", pass,
                         std::string("status ") + to_string(sr.status) + ", control gap " +
                             short_num(sr.control.gap) + " vs " + short_num(sr.control.analytic) +
                             ", disturbance gap " + short_num(sr.disturbance.gap) + " vs " +
                             short_num(sr.disturbance.analytic),
                         "each gap > 3 combined SE and within 3 SE + allowance of theory");
        r.put("saddle.status", to_string(sr.status));
    }

    emit(r, out_dir, "ensemble.csv",
         trajectory_csv({"mean", "std_error", "m"}, {&ens.node_mean, &ens.node_std_error, &eq.m}));
    if (!ens.dumped_paths.empty()) {
        std::string text = "path";
        const auto& grid = ens.grid;
        for (std::size_t k = 0; k < grid.size(); ++k) text += ",t" + std::to_string(k);
        text += '\n';
        for (std::size_t i = 0; i < ens.dumped_paths.size(); ++i) {
            text += std::to_string(i);
            for (double x : ens.dumped_paths[i]) text += ',' + format_double(x);
            text += '\n';
        }
        emit(r, out_dir, "paths.csv", text);
    }

    r.put("verdict", all ? "PASS" : "FAIL");
    res.exit_code = all ? kOk : kVerifyFailed;
    finish(res, out_dir, "verify");
    return res;
}

ModelParams sweep_instance(const ModelParams& params, const std::string& parameter, double value) {
    ModelParams p = params;
    if (parameter == "theta") {
        p.theta = value;
    } else if (parameter == "c") {
        p.c = value;
    } else if (parameter == "T") {
        p.T = value;
        if (value > 0.0) {
            p.q = p.q.rescaled_to(value);
            p.qbar = p.qbar.rescaled_to(value);
            p.r = p.r.rescaled_to(value);
            p.s = p.s.rescaled_to(value);
        }
    } else if (parameter == "qbar-scale") {
        p.qbar = p.qbar.scaled(value);
        p.qbarT *= value;
    } else {
        throw ConfigError("unknown sweep parameter '" + parameter + "' (theta, c, T, qbar-scale)");
    }
    return p;
}

namespace {

struct SweepRow {
    double value = kNaN;
    bool admissible = false;
    double lipschitz_bound = kNaN;
    bool contraction = false;
    double value_at_0 = kNaN;
    double beta0 = kNaN;
    double blowup_time = kNaN;
    int code = kOk;
    std::string status;
};

SweepRow sweep_row(const RunConfig& cfg, double value) {
    SweepRow row;
    row.value = value;
    const auto p = sweep_instance(cfg.model, cfg.sweep.parameter, value);
    if (!validate(p).ok()) {
        row.code = kConfigError;
        row.status = "invalid";
        return row;
    }
    const TimeGrid grid = cfg.n_steps ? TimeGrid(p.T, *cfg.n_steps) : default_grid(p.T);
    row.admissible = admissibility_margin(p, grid) > 0.0;
    const RiccatiOptions ropts{cfg.solve.blowup_cap};
    const auto beta = solve_beta(p, grid, ropts);
    if (beta.status.blew_up) {
        row.blowup_time = beta.status.blowup_time;
        row.code = kBlowUp;
        row.status = "blowup";
        return row;
    }
    row.beta0 = beta.values.front();
    const auto cond = check_conditions(p, beta.values);
    row.lipschitz_bound = cond.lipschitz_bound;
    row.contraction = cond.contraction;
    PicardOptions popts;
    popts.tol = cfg.solve.tol;
    popts.max_iter = cfg.solve.max_iter;
    popts.riccati = ropts;
    try {
        row.value_at_0 = solve_equilibrium_picard(p, grid, popts).value.value_at_0;
    } catch (const NonConvergenceError&) {
        row.code = kNonConvergence;
        row.status = "nonconvergence";
        return row;
    }
    row.status = "ok";
    return row;
}

}  // namespace

CommandResult cmd_sweep(const RunConfig& cfg, const std::filesystem::path& out_dir) {
    CommandResult res;
    auto& r = res.report;
    r.line("mfg sweep");
    describe_instance(r, cfg);
    const auto& sw = cfg.sweep;
    if (sw.parameter.empty()) throw ConfigError("sweep: no parameter given ([sweep] parameter or --param)");
    sweep_instance(cfg.model, sw.parameter, sw.from);  // rejects unknown names
    if (sw.steps == 0) throw ConfigError("sweep: steps must be >= 1");

    std::vector<double> values(sw.steps);
    for (std::size_t i = 0; i < sw.steps; ++i) {
        values[i] = sw.steps == 1 ? sw.from
                                  : sw.from + (sw.to - sw.from) * static_cast<double>(i) /
                                                  static_cast<double>(sw.steps - 1);
    }
    if (sw.steps > 1) values.back() = sw.to;

    std::vector<SweepRow> rows(values.size());
    std::size_t workers = sw.workers ? sw.workers : std::max(1u, std::thread::hardware_concurrency());
    workers = std::min(workers, values.size());
    std::atomic<std::size_t> next{0};
    auto work = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < values.size();) {
            try {
                rows[i] = sweep_row(cfg, values[i]);
            } catch (const std::exception&) {
                rows[i].value = values[i];
                rows[i].code = kConfigError;
                rows[i].status = "error";
            }
        }
    };
    std::vector<std::jthread> pool;
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(work);
    work();
    pool.clear();

    std::string csv =
        "parameter,value,admissible,lipschitz_bound,contraction,value_at_0,beta0,blowup_time,"
        "status_code,status\n";
    r.section("sweep over " + sw.parameter);
    std::size_t failures = 0;
    for (const auto& row : rows) {
        csv += sw.parameter + ',' + format_double(row.value) + ',' + (row.admissible ? "1" : "0") +
               ',' + format_double(row.lipschitz_bound) + ',' + (row.contraction ? "1" : "0") + ',' +
               format_double(row.value_at_0) + ',' + format_double(row.beta0) + ',' +
               format_double(row.blowup_time) + ',' + std::to_string(row.code) + ',' + row.status +
               '\n';
        r.line(sw.parameter + " = " + short_num(row.value) + ": " + row.status +
               ", admissible " + yes_no(row.admissible) +
               (row.code == kBlowUp ? ", blow-up at t = " + short_num(row.blowup_time)
                                    : ", bound " + short_num(row.lipschitz_bound)));
        if (row.code != kOk) ++failures;
    }
    emit(r, out_dir, "sweep.csv", csv);
    r.put("rows", std::to_string(rows.size()));
    r.put("failed_rows", std::to_string(failures));
    finish(res, out_dir, "sweep");
    return res;
}

}  // namespace mfg::cli
