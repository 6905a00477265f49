#include "mfg/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <vector>

namespace mfg::cli {

std::string format_double(double v) {
    if (v == 0.0) v = 0.0;
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

TimeGrid RunConfig::grid() const {
    if (n_steps) return TimeGrid(model.T, *n_steps);
    return default_grid(model.T);
}

namespace {

std::string_view trim(std::string_view s) {
    const auto* ws = " \t\r";
    const auto b = s.find_first_not_of(ws);
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(ws);
    return s.substr(b, e - b + 1);
}

class Parser {
public:
    Parser(std::string_view source) : source_(source) {}

    [[noreturn]] void fail(std::size_t line, const std::string& msg) const {
        std::ostringstream os;
        os << source_ << ':' << line << ": " << msg;
        throw ConfigError(os.str());
    }

    double number(std::string_view v, std::size_t line, const std::string& key) const {
        v = trim(v);
        if (!v.empty() && v.front() == '+') v.remove_prefix(1);
        double out = 0.0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
            fail(line, "'" + key + "' expects a number, got '" + std::string(v) + "'");
        }
        return out;
    }

    std::uint64_t integer(std::string_view v, std::size_t line, const std::string& key) const {
        v = trim(v);
        std::uint64_t out = 0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
            fail(line, "'" + key + "' expects a nonnegative integer, got '" + std::string(v) + "'");
        }
        return out;
    }

    bool boolean(std::string_view v, std::size_t line, const std::string& key) const {
        v = trim(v);
        if (v == "true" || v == "yes" || v == "1") return true;
        if (v == "false" || v == "no" || v == "0") return false;
        fail(line, "'" + key + "' expects true or false, got '" + std::string(v) + "'");
    }

    std::vector<double> list(std::string_view v, std::size_t line, const std::string& key) const {
        std::vector<double> out;
        std::size_t start = 0;
        while (true) {
            const auto comma = v.find(',', start);
            out.push_back(number(v.substr(start, comma - start), line, key));
            if (comma == std::string_view::npos) break;
            start = comma + 1;
        }
        return out;
    }

private:
    std::string_view source_;
};

}  // namespace

RunConfig parse_config(std::string_view text, std::string_view source) {
    Parser P(source);
    RunConfig cfg;
    bool have_variant = false;
    bool have_x0 = false;
    std::map<std::string, std::vector<double>> coeff_values;

    using Setter = std::function<void(std::string_view, std::size_t, const std::string&)>;
    std::map<std::string, Setter> keys;
    auto real = [&](double& dst) {
        return [&P, &dst](std::string_view v, std::size_t line, const std::string& key) {
            dst = P.number(v, line, key);
        };
    };
    auto count = [&](std::size_t& dst) {
        return [&P, &dst](std::string_view v, std::size_t line, const std::string& key) {
            dst = static_cast<std::size_t>(P.integer(v, line, key));
        };
    };
    auto coeff = [&](const char* name) {
        return [&P, &coeff_values, name](std::string_view v, std::size_t line, const std::string& key) {
            coeff_values[name] = P.list(v, line, key);
        };
    };

    auto& m = cfg.model;
    keys["model.variant"] = [&](std::string_view v, std::size_t line, const std::string&) {
        auto parsed = parse_variant(trim(v));
        if (!parsed) {
            P.fail(line, "unknown variant '" + std::string(trim(v)) +
                             "' (risk_neutral, risk_sensitive, robust, robust_risk_sensitive)");
        }
        m.variant = *parsed;
        have_variant = true;
    };
    keys["model.a"] = real(m.a);
    keys["model.abar"] = real(m.abar);
    keys["model.b"] = real(m.b);
    keys["model.c"] = real(m.c);
    keys["model.sigma"] = real(m.sigma);
    keys["model.q"] = coeff("q");
    keys["model.qbar"] = coeff("qbar");
    keys["model.r"] = coeff("r");
    keys["model.s"] = coeff("s");
    keys["model.qT"] = real(m.qT);
    keys["model.qbarT"] = real(m.qbarT);
    keys["model.theta"] = real(m.theta);
    keys["model.T"] = real(m.T);
    keys["model.x0"] = [&](std::string_view v, std::size_t line, const std::string& key) {
        m.x0 = P.number(v, line, key);
        have_x0 = true;
    };
    keys["model.m0"] = real(m.m0);
    keys["grid.n_steps"] = [&](std::string_view v, std::size_t line, const std::string& key) {
        cfg.n_steps = static_cast<std::size_t>(P.integer(v, line, key));
    };
    keys["solve.tol"] = real(cfg.solve.tol);
    keys["solve.max_iter"] = count(cfg.solve.max_iter);
    keys["solve.blowup_cap"] = real(cfg.solve.blowup_cap);
    keys["sim.n_paths"] = count(cfg.sim.n_paths);
    keys["sim.dt_sim"] = real(cfg.sim.dt_sim);
    keys["sim.seed"] = [&](std::string_view v, std::size_t line, const std::string& key) {
        cfg.sim.seed = P.integer(v, line, key);
    };
    keys["sim.antithetic"] = [&](std::string_view v, std::size_t line, const std::string& key) {
        cfg.sim.antithetic = P.boolean(v, line, key);
    };
    keys["sim.workers"] = count(cfg.sim.workers);
    keys["sim.dump_paths"] = count(cfg.sim.dump_paths);
    keys["verify.perturbation_scale"] = real(cfg.verify.perturbation_scale);
    keys["verify.gain_scale"] = real(cfg.verify.gain_scale);
    keys["sweep.parameter"] = [&](std::string_view v, std::size_t, const std::string&) {
        cfg.sweep.parameter = std::string(trim(v));
    };
    keys["sweep.from"] = real(cfg.sweep.from);
    keys["sweep.to"] = real(cfg.sweep.to);
    keys["sweep.steps"] = count(cfg.sweep.steps);
    keys["sweep.workers"] = count(cfg.sweep.workers);

    std::set<std::string> sections;
    for (const auto& [k, _] : keys) sections.insert(k.substr(0, k.find('.')));

    std::string section;
    std::set<std::string> seen;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const auto eol = text.find('\n', pos);
        auto line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
        pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
        ++line_no;

        if (const auto hash = line.find_first_of("#;"); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) continue;

        if (line.front() == '[') {
            if (line.back() != ']') P.fail(line_no, "malformed section header");
            section = std::string(trim(line.substr(1, line.size() - 2)));
            if (!sections.count(section)) P.fail(line_no, "unknown section [" + section + "]");
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string_view::npos) P.fail(line_no, "expected 'key = value'");
        const std::string key(trim(line.substr(0, eq)));
        const auto value = trim(line.substr(eq + 1));
        if (section.empty()) P.fail(line_no, "key '" + key + "' outside of any section");
        const std::string full = section + "." + key;
        auto it = keys.find(full);
        if (it == keys.end()) P.fail(line_no, "unknown key '" + full + "'");
        if (!seen.insert(full).second) P.fail(line_no, "duplicate key '" + full + "'");
        if (value.empty()) P.fail(line_no, "missing value for '" + full + "'");
        it->second(value, line_no, full);
    }

    if (!have_variant) throw ConfigError(std::string(source) + ": missing required key 'model.variant'");
    if (!have_x0) m.x0 = m.m0;

    auto build = [&](const char* name, CoefficientFn& dst) {
        auto it = coeff_values.find(name);
        if (it == coeff_values.end()) return;
        const auto& vals = it->second;
        if (vals.size() == 1) {
            dst = CoefficientFn(vals.front());
        } else {
            if (!(m.T > 0.0)) throw ConfigError(std::string(source) + ": tables need T > 0");
            dst = CoefficientFn(m.T, vals);
        }
    };
    build("q", m.q);
    build("qbar", m.qbar);
    build("r", m.r);
    build("s", m.s);

    if (cfg.n_steps && *cfg.n_steps < 2) {
        throw ConfigError(std::string(source) + ": grid.n_steps must be >= 2");
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError(path + ": cannot open config file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str(), path);
}

namespace {

std::string coeff_text(const CoefficientFn& fn) {
    if (fn.is_constant()) return format_double(fn.constant());
    std::string out;
    for (double v : fn.table().values) {
        if (!out.empty()) out += ", ";
        out += format_double(v);
    }
    return out;
}

}  // namespace

std::string echo_model(const ModelParams& p) {
    std::ostringstream os;
    os << "[model]\n"
       << "variant = " << to_string(p.variant) << '\n'
       << "a = " << format_double(p.a) << '\n'
       << "abar = " << format_double(p.abar) << '\n'
       << "b = " << format_double(p.b) << '\n'
       << "c = " << format_double(p.c) << '\n'
       << "sigma = " << format_double(p.sigma) << '\n'
       << "q = " << coeff_text(p.q) << '\n'
       << "qbar = " << coeff_text(p.qbar) << '\n'
       << "r = " << coeff_text(p.r) << '\n'
       << "s = " << coeff_text(p.s) << '\n'
       << "qT = " << format_double(p.qT) << '\n'
       << "qbarT = " << format_double(p.qbarT) << '\n'
       << "theta = " << format_double(p.theta) << '\n'
       << "T = " << format_double(p.T) << '\n'
       << "x0 = " << format_double(p.x0) << '\n'
       << "m0 = " << format_double(p.m0) << '\n';
    return os.str();
}

std::string echo_config(const RunConfig& c) {
    std::ostringstream os;
    os << echo_model(c.model) << '\n';
    os << "[grid]\nn_steps = " << c.grid().n_steps() << "\n\n";
    os << "[solve]\ntol = " << format_double(c.solve.tol) << "\nmax_iter = " << c.solve.max_iter
       << "\nblowup_cap = " << format_double(c.solve.blowup_cap) << "\n\n";
    os << "[sim]\nn_paths = " << c.sim.n_paths << "\ndt_sim = " << format_double(c.sim.dt_sim)
       << "\nseed = " << c.sim.seed << "\nantithetic = " << (c.sim.antithetic ? "true" : "false")
       << "\nworkers = " << c.sim.workers << "\ndump_paths = " << c.sim.dump_paths << "\n\n";
    os << "[verify]\nperturbation_scale = " << format_double(c.verify.perturbation_scale)
       << "\ngain_scale = " << format_double(c.verify.gain_scale) << '\n';
    if (!c.sweep.parameter.empty()) {
        os << "\n[sweep]\nparameter = " << c.sweep.parameter << "\nfrom = " << format_double(c.sweep.from)
           << "\nto = " << format_double(c.sweep.to) << "\nsteps = " << c.sweep.steps
           << "\nworkers = " << c.sweep.workers << '\n';
    }
    return os.str();
}

}  // namespace mfg::cli
