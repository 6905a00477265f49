#include "mfg/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <random>
#include <stdexcept>
#include <thread>

namespace mfg {

Policy Policy::equilibrium(ValueCoefficients base) {
    return Policy{Kind::Equilibrium, std::move(base), std::nullopt};
}

Policy Policy::perturbed_control(ValueCoefficients base, Trajectory delta_u) {
    return Policy{Kind::PerturbedControl, std::move(base), std::move(delta_u)};
}

Policy Policy::perturbed_disturbance(ValueCoefficients base, Trajectory delta_v) {
    return Policy{Kind::PerturbedDisturbance, std::move(base), std::move(delta_v)};
}

Policy Policy::zero(const TimeGrid& grid) {
    Trajectory zeros(grid);
    ValueCoefficients base{0.0, std::nullopt, zeros, zeros, zeros, zeros, std::nullopt, std::nullopt};
    return Policy{Kind::Zero, std::move(base), std::nullopt};
}

MCEstimate summarize(std::span<const double> per_path, bool antithetic) {
    if (antithetic && per_path.size() % 2 != 0) {
        throw std::invalid_argument("summarize: antithetic data needs an even count");
    }
    const std::size_t stride = antithetic ? 2 : 1;
    const std::size_t n = per_path.size() / stride;
    if (n == 0) throw std::invalid_argument("summarize: no samples");
    // Welford, in path order.
    double mean = 0.0, m2 = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double x = antithetic ? 0.5 * (per_path[2 * i] + per_path[2 * i + 1]) : per_path[i];
        const double delta = x - mean;
        mean += delta / static_cast<double>(i + 1);
        m2 += delta * (x - mean);
    }
    const double var = n > 1 ? m2 / static_cast<double>(n - 1) : 0.0;
    return {mean, std::sqrt(var / static_cast<double>(n)), per_path.size()};
}

namespace {

struct SimTables {
    std::size_t n_sim = 0;
    std::size_t stride = 0;
    double dt = 0.0;
    std::vector<double> m, gain, offset, dgain, doffset, beta, alpha, q, qbar, r, s;
    bool use_disturbance = false;
};

SimTables build_tables(const ModelParams& p, const Policy& policy, const Trajectory& m,
                       const SimConfig& cfg) {
    const auto& grid = m.grid();
    const double T = grid.horizon();
    if (!(cfg.dt_sim > 0.0)) throw std::invalid_argument("dt_sim must be positive");
    if (cfg.n_paths == 0) throw std::invalid_argument("n_paths must be >= 1");
    if (cfg.antithetic && cfg.n_paths % 2 != 0) {
        throw std::invalid_argument("antithetic sampling needs an even n_paths");
    }
    const double ratio = T / cfg.dt_sim;
    const auto n_sim = static_cast<std::size_t>(std::llround(ratio));
    if (n_sim == 0 || std::abs(static_cast<double>(n_sim) * cfg.dt_sim - T) > 1e-12 * T) {
        throw std::invalid_argument("dt_sim must divide the horizon T");
    }
    if (n_sim % grid.n_steps() != 0) {
        throw std::invalid_argument("simulation steps (" + std::to_string(n_sim) +
                                    ") must be a multiple of the grid steps (" +
                                    std::to_string(grid.n_steps()) + ")");
    }
    if (cfg.dump_paths * grid.size() > kMaxDumpValues) {
        throw std::invalid_argument("per-path dump exceeds the 1e6 row limit");
    }
    if (!(policy.base.beta.grid() == grid)) {
        throw std::invalid_argument("policy and mean path must share a grid");
    }

    SimTables tab;
    tab.n_sim = n_sim;
    tab.stride = n_sim / grid.n_steps();
    tab.dt = T / static_cast<double>(n_sim);
    tab.use_disturbance = is_robust(p.variant) && policy.kind != Policy::Kind::Zero;
    const bool zero = policy.kind == Policy::Kind::Zero;
    const auto& base = policy.base;
    if (tab.use_disturbance && !(base.disturbance_gain && base.disturbance_offset)) {
        throw std::invalid_argument("robust policy needs disturbance feedback");
    }

    const std::size_t n = n_sim + 1;
    for (auto* v : {&tab.m, &tab.gain, &tab.offset, &tab.dgain, &tab.doffset, &tab.beta,
                    &tab.alpha, &tab.q, &tab.qbar, &tab.r, &tab.s}) {
        v->assign(n, 0.0);
    }
    for (std::size_t j = 0; j < n; ++j) {
        const double t = j == n_sim ? T : tab.dt * static_cast<double>(j);
        tab.m[j] = m.cubic_at(t);
        tab.beta[j] = base.beta.cubic_at(t);
        tab.alpha[j] = base.alpha.cubic_at(t);
        tab.q[j] = p.q(t);
        tab.qbar[j] = p.qbar(t);
        tab.r[j] = p.r(t);
        tab.s[j] = p.s(t);
        if (!zero) {
            tab.gain[j] = base.feedback_gain.cubic_at(t);
            tab.offset[j] = base.feedback_offset.cubic_at(t);
            if (tab.use_disturbance) {
                tab.dgain[j] = base.disturbance_gain->cubic_at(t);
                tab.doffset[j] = base.disturbance_offset->cubic_at(t);
            }
        }
        if (policy.kind == Policy::Kind::PerturbedControl) tab.offset[j] += policy.delta->at(t);
        if (policy.kind == Policy::Kind::PerturbedDisturbance) {
            if (!tab.use_disturbance) {
                throw std::invalid_argument("disturbance perturbation needs a robust variant");
            }
            tab.doffset[j] += policy.delta->at(t);
        }
    }
    return tab;
}

struct BlockResult {
    std::vector<double> node_sum;
    std::vector<double> node_sumsq;
};

struct PathOutput {
    double cost;
    double noise_integral;
    double noise_quadratic;
};

class Simulator {
public:
    Simulator(const ModelParams& p, const SimTables& tab, const TimeGrid& grid)
        : p_(p), tab_(tab), grid_(grid), sqrt_dt_(std::sqrt(tab.dt)) {}

    // Advances one path (or an antithetic pair sharing `normals`). Records states
    // at grid nodes into `nodes` (size grid.size() per path).
    template <std::size_t Width>
    void run(const double* normals, PathOutput* out, double* nodes) const {
        const auto& t = tab_;
        double x[Width], cost[Width], ni[Width], nq[Width];
        for (std::size_t w = 0; w < Width; ++w) {
            x[w] = p_.x0;
            cost[w] = ni[w] = nq[w] = 0.0;
        }
        const double sign[2] = {1.0, -1.0};
        for (std::size_t j = 0;; ++j) {
            const bool last = j == t.n_sim;
            const double weight = (j == 0 || last) ? 0.5 * t.dt : t.dt;
            for (std::size_t w = 0; w < Width; ++w) {
                if (j % t.stride == 0) nodes[w * grid_.size() + j / t.stride] = x[w];
                const double u = t.gain[j] * x[w] + t.offset[j];
                const double v = t.use_disturbance ? t.dgain[j] * x[w] + t.doffset[j] : 0.0;
                const double dev = x[w] - t.m[j];
                cost[w] += weight * (t.q[j] * x[w] * x[w] + t.qbar[j] * dev * dev +
                                     t.r[j] * u * u - t.s[j] * v * v);
                if (last) continue;
                const double dB = sqrt_dt_ * sign[w] * normals[j];
                const double pv = t.beta[j] * x[w] + t.alpha[j];
                ni[w] += pv * dB;
                nq[w] += pv * pv * t.dt;
                const double cv = t.use_disturbance ? p_.c * v : 0.0;
                x[w] += (p_.a * x[w] + p_.abar * t.m[j] + p_.b * u + cv) * t.dt + p_.sigma * dB;
            }
            if (last) break;
        }
        const double mT = t.m[t.n_sim];
        for (std::size_t w = 0; w < Width; ++w) {
            const double dev = x[w] - mT;
            out[w].cost = 0.5 * (cost[w] + p_.qT * x[w] * x[w] + p_.qbarT * dev * dev);
            out[w].noise_integral = ni[w];
            out[w].noise_quadratic = nq[w];
        }
    }

private:
    const ModelParams& p_;
    const SimTables& tab_;
    const TimeGrid& grid_;
    double sqrt_dt_;
};

std::mt19937_64 block_engine(std::uint64_t seed, std::uint64_t block) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32)};
    return std::mt19937_64(seq);
}

}  // namespace

PathEnsemble simulate_paths(const ModelParams& p, const Policy& policy, const Trajectory& m,
                            const SimConfig& cfg) {
    require_valid(p);
    const auto& grid = m.grid();
    const SimTables tab = build_tables(p, policy, m, cfg);
    const Simulator sim(p, tab, grid);
    const std::size_t n_nodes = grid.size();
    const std::size_t n_blocks = (cfg.n_paths + kPathsPerBlock - 1) / kPathsPerBlock;

    PathEnsemble ens{grid,
                     cfg.n_paths,
                     cfg.antithetic,
                     tab.dt,
                     Trajectory(grid),
                     Trajectory(grid),
                     std::vector<double>(cfg.n_paths),
                     std::vector<double>(cfg.n_paths),
                     std::vector<double>(cfg.n_paths),
                     {}};
    ens.dumped_paths.assign(std::min(cfg.dump_paths, cfg.n_paths), std::vector<double>(n_nodes));

    std::vector<BlockResult> blocks(n_blocks);
    auto run_block = [&](std::size_t b) {
        auto engine = block_engine(cfg.seed, b);
        std::normal_distribution<double> normal(0.0, 1.0);
        BlockResult res{std::vector<double>(n_nodes, 0.0), std::vector<double>(n_nodes, 0.0)};
        std::vector<double> normals(tab.n_sim);
        std::vector<double> nodes(2 * n_nodes);
        const std::size_t begin = b * kPathsPerBlock;
        const std::size_t end = std::min(cfg.n_paths, begin + kPathsPerBlock);
        const std::size_t width = cfg.antithetic ? 2 : 1;
        for (std::size_t path = begin; path < end; path += width) {
            for (auto& z : normals) z = normal(engine);
            PathOutput out[2];
            if (cfg.antithetic) {
                sim.run<2>(normals.data(), out, nodes.data());
            } else {
                sim.run<1>(normals.data(), out, nodes.data());
            }
            for (std::size_t w = 0; w < width; ++w) {
                ens.cost[path + w] = out[w].cost;
                ens.noise_integral[path + w] = out[w].noise_integral;
                ens.noise_quadratic[path + w] = out[w].noise_quadratic;
                if (path + w < ens.dumped_paths.size()) {
                    std::copy_n(nodes.begin() + static_cast<std::ptrdiff_t>(w * n_nodes), n_nodes,
                                ens.dumped_paths[path + w].begin());
                }
            }
            for (std::size_t k = 0; k < n_nodes; ++k) {
                double x = nodes[k];
                if (cfg.antithetic) x = 0.5 * (x + nodes[n_nodes + k]);
                const double d = x - m[k];
                res.node_sum[k] += d;
                res.node_sumsq[k] += d * d;
            }
        }
        blocks[b] = std::move(res);
    };

    std::size_t workers = cfg.workers == 0 ? std::thread::hardware_concurrency() : cfg.workers;
    workers = std::clamp<std::size_t>(workers, 1, n_blocks);
    if (workers == 1) {
        for (std::size_t b = 0; b < n_blocks; ++b) run_block(b);
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t b = next++; b < n_blocks; b = next++) run_block(b);
            });
        }
        for (auto& th : pool) th.join();
    }

    // Order-fixed reduction over blocks.
    std::vector<double> sum(n_nodes, 0.0), sumsq(n_nodes, 0.0);
    for (const auto& blk : blocks) {
        for (std::size_t k = 0; k < n_nodes; ++k) {
            sum[k] += blk.node_sum[k];
            sumsq[k] += blk.node_sumsq[k];
        }
    }
    const auto samples = static_cast<double>(cfg.antithetic ? cfg.n_paths / 2 : cfg.n_paths);
    for (std::size_t k = 0; k < n_nodes; ++k) {
        const double mean_dev = sum[k] / samples;
        ens.node_mean[k] = m[k] + mean_dev;
        double var = 0.0;
        if (samples > 1.0) var = std::max(0.0, (sumsq[k] - samples * mean_dev * mean_dev) / (samples - 1.0));
        ens.node_std_error[k] = std::sqrt(var / samples);
    }
    return ens;
}

MCEstimate estimate_risk_neutral_cost(const PathEnsemble& ens, const ModelParams& p) {
    if (is_risk_sensitive(p.variant)) {
        throw std::invalid_argument("estimate_risk_neutral_cost: risk-sensitive variant");
    }
    return summarize(ens.cost, ens.antithetic);
}

ExponentialCostEstimate estimate_exponential_cost(const PathEnsemble& ens, const ModelParams& p) {
    if (!is_risk_sensitive(p.variant)) {
        throw std::invalid_argument("estimate_exponential_cost: needs a risk-sensitive variant");
    }
    const EffectiveCoefficients eff(p);
    for (std::size_t k = 0; k < ens.grid.size(); ++k) {
        if (!(eff.kappa(ens.grid.node(k)) > 0.0)) {
            throw std::invalid_argument("estimate_exponential_cost: theta outside the admissible range");
        }
    }
    std::vector<double> values(ens.cost.size());
    for (std::size_t i = 0; i < values.size(); ++i) values[i] = std::exp(p.theta * ens.cost[i]);

    ExponentialCostEstimate out;
    out.estimate = summarize(values, ens.antithetic);
    double m2 = 0.0, m4 = 0.0;
    for (double v : values) {
        const double d = v - out.estimate.mean;
        m2 += d * d;
        m4 += d * d * d * d;
    }
    const auto n = static_cast<double>(values.size());
    m2 /= n;
    m4 /= n;
    out.kurtosis = m2 > 0.0 ? m4 / (m2 * m2) : 0.0;
    out.heavy_tailed = out.kurtosis > kHeavyTailKurtosis;
    return out;
}

MCEstimate estimate_girsanov_normalization(const PathEnsemble& ens, const ModelParams& p) {
    if (!is_risk_sensitive(p.variant)) {
        throw std::invalid_argument("estimate_girsanov_normalization: needs a risk-sensitive variant");
    }
    const double ts = p.theta * p.sigma;
    std::vector<double> values(ens.cost.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
        values[i] = std::exp(ts * ens.noise_integral[i] - 0.5 * ts * ts * ens.noise_quadratic[i]);
    }
    return summarize(values, ens.antithetic);
}

MeanConsistencyReport check_mean_consistency(const PathEnsemble& ens, const Trajectory& m,
                                             double n_se, double allowance) {
    return check_mean_consistency(ens, m, n_se, Trajectory(m.grid(), allowance));
}

MeanConsistencyReport check_mean_consistency(const PathEnsemble& ens, const Trajectory& m,
                                             double n_se, const Trajectory& allowance) {
    if (!(m.grid() == ens.grid) || !(allowance.grid() == ens.grid)) {
        throw std::invalid_argument("check_mean_consistency: grid mismatch");
    }
    MeanConsistencyReport rep;
    rep.pass = true;
    for (std::size_t k = 0; k < m.size(); ++k) {
        const double err = std::abs(ens.node_mean[k] - m[k]);
        const double se = ens.node_std_error[k];
        if (err > rep.max_abs_error) rep.max_abs_error = err;
        if (se > 0.0 && err / se > rep.max_z) {
            rep.max_z = err / se;
            rep.worst_node = k;
        }
        if (err > n_se * se + allowance[k]) rep.pass = false;
    }
    return rep;
}

namespace {

double integral_of(const CoefficientFn& fn, const TimeGrid& grid) {
    double total = 0.0;
    for (std::size_t k = 1; k < grid.size(); ++k) {
        total += 0.5 * grid.dt() * (fn(grid.node(k - 1)) + fn(grid.node(k)));
    }
    return total;
}

MCEstimate arm_cost(const ModelParams& p, const PathEnsemble& ens) {
    return is_risk_sensitive(p.variant) ? estimate_exponential_cost(ens, p).estimate
                                        : estimate_risk_neutral_cost(ens, p);
}

GapCheck make_gap(MCEstimate baseline, MCEstimate perturbed, double gap, double analytic) {
    GapCheck g{baseline, perturbed, gap, 0.0, analytic, false, false};
    g.gap_se = std::hypot(baseline.std_error, perturbed.std_error);
    g.resolved = g.gap > 3.0 * g.gap_se;
    g.matches = std::abs(g.gap - analytic) <= 3.0 * g.gap_se;
    return g;
}

}  // namespace

GapCheck control_perturbation_check(const ModelParams& p, const Equilibrium& eq, double delta,
                                    const SimConfig& config) {
    const auto& grid = eq.m.grid();
    const auto base = simulate_paths(p, Policy::equilibrium(eq.value), eq.m, config);
    const auto pert =
        simulate_paths(p, Policy::perturbed_control(eq.value, Trajectory(grid, delta)), eq.m, config);
    const auto c0 = arm_cost(p, base);
    const auto c1 = arm_cost(p, pert);
    const double quad = 0.5 * delta * delta * integral_of(p.r, grid);
    const double analytic = is_risk_sensitive(p.variant)
                                ? std::exp(p.theta * eq.value.value_at_0) * std::expm1(p.theta * quad)
                                : quad;
    return make_gap(c0, c1, c1.mean - c0.mean, analytic);
}

SaddleReport saddle_check(const ModelParams& p, const Equilibrium& eq, double scale,
                          const SimConfig& config) {
    if (!is_robust(p.variant)) throw std::invalid_argument("saddle_check: needs a robust variant");
    const auto& grid = eq.m.grid();
    const auto base = simulate_paths(p, Policy::equilibrium(eq.value), eq.m, config);
    const auto up =
        simulate_paths(p, Policy::perturbed_control(eq.value, Trajectory(grid, scale)), eq.m, config);
    const auto vp = simulate_paths(
        p, Policy::perturbed_disturbance(eq.value, Trajectory(grid, scale)), eq.m, config);
    const auto c0 = arm_cost(p, base);
    const auto cu = arm_cost(p, up);
    const auto cv = arm_cost(p, vp);

    const double qu = 0.5 * scale * scale * integral_of(p.r, grid);
    const double qv = 0.5 * scale * scale * integral_of(p.s, grid);
    double au = qu, av = qv;
    if (is_risk_sensitive(p.variant)) {
        const double level = std::exp(p.theta * eq.value.value_at_0);
        au = level * std::expm1(p.theta * qu);
        av = -level * std::expm1(-p.theta * qv);
    }

    SaddleReport rep;
    rep.control = make_gap(c0, cu, cu.mean - c0.mean, au);
    rep.disturbance = make_gap(c0, cv, c0.mean - cv.mean, av);
    rep.ordering = rep.control.resolved && rep.disturbance.resolved;
    if (scale == 0.0) {
        rep.status = SaddleStatus::ZeroPerturbation;
    } else if (rep.ordering) {
        rep.status = SaddleStatus::Resolved;
    } else if (rep.control.gap < -3.0 * rep.control.gap_se ||
               rep.disturbance.gap < -3.0 * rep.disturbance.gap_se) {
        rep.status = SaddleStatus::Violated;
    } else {
        rep.status = SaddleStatus::InsufficientResolution;
    }
    return rep;
}

const char* to_string(SaddleStatus status) {
    switch (status) {
        case SaddleStatus::Resolved: return "resolved";
        case SaddleStatus::InsufficientResolution: return "insufficient_resolution";
        case SaddleStatus::Violated: return "violated";
        case SaddleStatus::ZeroPerturbation: return "zero_perturbation";
    }
    return "unknown";
}

}  // namespace mfg
