#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>

#include <gtest/gtest.h>

#include "instances.hpp"
#include "mfg/commands.hpp"
#include "mfg/config.hpp"
#include "mfg/csv.hpp"

namespace mfg::cli {
namespace {

namespace fs = std::filesystem;

const char* kBenchmark = R"(
[model]
variant = risk_neutral
a = -0.5
abar = 0.3
b = 1
sigma = 0.2
q = 1
qbar = 0.5
r = 1
qT = 1
qbarT = 0.5
T = 1
m0 = 1
)";

class TempDir {
public:
    TempDir() {
        path_ = fs::temp_directory_path() /
                ("mfg_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) + "_" +
                 ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(path_);
        fs::create_directories(path_);
    }
    ~TempDir() { fs::remove_all(path_); }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

std::map<std::string, std::string> summary_of(const CommandResult& r) {
    return {r.report.summary.begin(), r.report.summary.end()};
}

std::string error_of(const std::string& text) {
    try {
        parse_config(text, "cfg.ini");
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

TEST(Config, ParsesBenchmark) {
    const auto cfg = parse_config(kBenchmark);
    EXPECT_EQ(cfg.model, testing::benchmark());
    EXPECT_EQ(cfg.grid().n_steps(), 1000u);
    EXPECT_EQ(cfg.sim.n_paths, 100000u);
}

TEST(Config, EchoRoundTripsExactly) {
    auto p = testing::benchmark(Variant::RobustRiskSensitive);
    p.a = 0.1 + 0.2;
    p.sigma = 1.0 / 3.0;
    p.q = CoefficientFn(p.T, {1.0, 0.7, 1.0 / 7.0});
    p.x0 = -2.5e-7;
    const auto cfg = parse_config(echo_model(p));
    EXPECT_EQ(cfg.model, p);

    RunConfig full = cfg;
    full.n_steps = 400;
    full.sim.seed = 7;
    full.sim.antithetic = true;
    full.sweep.parameter = "theta";
    full.sweep.steps = 5;
    const auto again = parse_config(echo_config(full));
    EXPECT_EQ(again.model, full.model);
    EXPECT_EQ(again.n_steps, full.n_steps);
    EXPECT_EQ(again.sim.seed, 7u);
    EXPECT_TRUE(again.sim.antithetic);
    EXPECT_EQ(again.sweep.parameter, "theta");
}

TEST(Config, StrictDiagnosticsCarryLineNumbers) {
    EXPECT_EQ(error_of("[model]\nvariant = robust\nkapa = 1\n"), "cfg.ini:3: unknown key 'model.kapa'");
    EXPECT_EQ(error_of("[model]\nvariant = robust\n[plot]\n"), "cfg.ini:3: unknown section [plot]");
    EXPECT_EQ(error_of("[model]\nvariant = robust\na = 1\na = 2\n"), "cfg.ini:4: duplicate key 'model.a'");
    EXPECT_EQ(error_of("a = 1\n"), "cfg.ini:1: key 'a' outside of any section");
    EXPECT_EQ(error_of("[model]\nvariant = robust\nb = one\n"),
              "cfg.ini:3: 'model.b' expects a number, got 'one'");
    EXPECT_EQ(error_of("[model]\nb = 1\n"), "cfg.ini: missing required key 'model.variant'");
    EXPECT_NE(error_of("[model]\nvariant = bold\n").find("unknown variant"), std::string::npos);
    EXPECT_NE(error_of("[model]\nvariant = robust\n[grid]\nn_steps = 1\n").find("n_steps"),
              std::string::npos);
}

TEST(Config, InitialStateDefaultsToInitialMean) {
    const auto cfg = parse_config("[model]\nvariant = risk_neutral\nm0 = 0.4 # mean\n");
    EXPECT_EQ(cfg.model.x0, 0.4);
    const auto cfg2 = parse_config("[model]\nvariant = risk_neutral\nm0 = 0.4\nx0 = 1\n");
    EXPECT_EQ(cfg2.model.x0, 1.0);
}

TEST(Overrides, SeedPrecedenceIsFlagThenEnvThenConfig) {
    auto cfg = parse_config("[model]\nvariant = risk_neutral\n[sim]\nseed = 5\n");
    Overrides o;
    EXPECT_EQ(apply_overrides(cfg, o, nullptr).sim.seed, 5u);
    EXPECT_EQ(apply_overrides(cfg, o, "9").sim.seed, 9u);
    o.seed = 11;
    EXPECT_EQ(apply_overrides(cfg, o, "9").sim.seed, 11u);
    EXPECT_THROW(apply_overrides(cfg, Overrides{}, "x1"), ConfigError);
}

TEST(Csv, FullPrecisionAndLineFeeds) {
    const std::vector<double> a{0.1, -0.0, 1e-300};
    const std::vector<double> b{1.0 / 3.0, 2.0, 3.0};
    EXPECT_EQ(csv_text({"a", "b"}, {&a, &b}),
              "a,b\n0.10000000000000001,0.33333333333333331\n0,2\n1e-300,3\n");
}

TEST(Solve, ZeroCostInstance) {
    TempDir dir;
    const auto res = cmd_solve(parse_config("[model]\nvariant = risk_neutral\n"), dir.path());
    EXPECT_EQ(res.exit_code, kOk);
    EXPECT_EQ(summary_of(res).at("value_at_0"), "0");
    for (const char* f : {"m.csv", "beta.csv", "alpha.csv", "gamma.csv", "eta.csv", "gains.csv",
                          "solve_report.txt", "solve_summary.txt"}) {
        EXPECT_TRUE(fs::exists(dir.path() / f)) << f;
    }
    std::istringstream beta(slurp(dir.path() / "beta.csv"));
    std::string line;
    std::getline(beta, line);
    EXPECT_EQ(line, "t,beta");
    while (std::getline(beta, line)) EXPECT_EQ(line.substr(line.find(',')), ",0");
}

TEST(Solve, BenchmarkRoutesAgree) {
    TempDir dir;
    const auto res = cmd_solve(parse_config(kBenchmark), dir.path());
    EXPECT_EQ(res.exit_code, kOk);
    const auto s = summary_of(res);
    EXPECT_EQ(s.at("check.route agreement"), "PASS");
    EXPECT_LE(std::stod(s.at("route_gap")), 1e-6);
    EXPECT_NE(res.report.text().find("PASS route agreement"), std::string::npos);
    EXPECT_NE(res.report.text().find("(tol 1e-06)"), std::string::npos);
}

TEST(Solve, ReportEchoReparses) {
    TempDir dir;
    const auto cfg = parse_config(kBenchmark);
    const auto res = cmd_solve(cfg, dir.path());
    const auto text = res.report.text();
    const auto begin = text.find("[model]");
    const auto end = text.find("[grid]");
    EXPECT_EQ(parse_config(text.substr(begin, end - begin)).model, cfg.model);
}

TEST(Solve, BlowUpExitCode) {
    TempDir dir;
    const auto res = cmd_solve(parse_config(R"(
[model]
variant = risk_sensitive
sigma = 1
theta = 2
q = 1
T = 2
)"),
                               dir.path());
    EXPECT_EQ(res.exit_code, kBlowUp);
    EXPECT_NEAR(std::stod(summary_of(res).at("blowup.beta")), 0.42920367320510344, 1e-9);
    EXPECT_NE(res.report.text().find("escapes"), std::string::npos);
}

TEST(Solve, InvalidInstanceExitCode) {
    TempDir dir;
    const auto res = cmd_solve(parse_config("[model]\nvariant = robust\ns = 1, -1, 1\n"), dir.path());
    EXPECT_EQ(res.exit_code, kConfigError);
    EXPECT_NE(res.report.text().find("node 1"), std::string::npos);
}

TEST(Solve, NonConvergenceExitCode) {
    TempDir dir;
    auto cfg = parse_config(kBenchmark);
    cfg.solve.max_iter = 2;
    const auto res = cmd_solve(cfg, dir.path());
    EXPECT_EQ(res.exit_code, kNonConvergence);
    EXPECT_EQ(summary_of(res).at("iterations"), "2");
}

TEST(Solve, CsvOutputIsByteIdentical) {
    TempDir a, b;
    auto cfg = parse_config(kBenchmark);
    cfg.model.variant = Variant::Robust;
    cfg.model.c = 0.3;
    cmd_solve(cfg, a.path());
    cmd_solve(cfg, b.path());
    for (const char* f : {"m.csv", "beta.csv", "alpha.csv", "gamma.csv", "eta.csv", "gains.csv"}) {
        EXPECT_EQ(slurp(a.path() / f), slurp(b.path() / f)) << f;
    }
    EXPECT_NE(slurp(a.path() / "gains.csv").find("disturbance_gain"), std::string::npos);
}

TEST(Check, RiskNeutralMarginLine) {
    TempDir dir;
    const auto res = cmd_check(parse_config(kBenchmark), dir.path());
    EXPECT_EQ(res.exit_code, kOk);
    EXPECT_NE(res.report.text().find("margin: b^2/r = 1 > 0"), std::string::npos);
    EXPECT_EQ(summary_of(res).at("admissible"), "true");
}

TEST(Check, RobustBoundary) {
    TempDir dir;
    auto cfg = parse_config(kBenchmark);
    cfg.model.variant = Variant::Robust;
    cfg.model.c = 1.0;
    const auto res = cmd_check(cfg, dir.path());
    const auto s = summary_of(res);
    EXPECT_EQ(s.at("admissible"), "false");
    EXPECT_EQ(s.at("margin"), "0");
}

TEST(Check, RiskSensitiveListsBothBounds) {
    TempDir dir;
    auto cfg = parse_config(kBenchmark);
    cfg.model.variant = Variant::RiskSensitive;
    cfg.model.theta = 0.25;
    const auto s = summary_of(cmd_check(cfg, dir.path()));
    EXPECT_TRUE(s.count("lipschitz_bound"));
    EXPECT_TRUE(s.count("lipschitz_bound_alt"));
}

struct SweepTable {
    std::vector<std::map<std::string, std::string>> rows;
};

SweepTable read_sweep(const fs::path& file) {
    std::istringstream in(slurp(file));
    std::string line;
    std::getline(in, line);
    std::vector<std::string> header;
    for (std::istringstream h(line); std::getline(h, line, ',');) header.push_back(line);
    SweepTable t;
    for (std::string row; std::getline(in, row);) {
        std::map<std::string, std::string> m;
        std::istringstream cells(row);
        for (const auto& name : header) std::getline(cells, m[name], ',');
        t.rows.push_back(m);
    }
    return t;
}

TEST(Sweep, ThetaFlipsAdmissibilityAtThreshold) {
    TempDir dir;
    auto cfg = parse_config(kBenchmark);
    cfg.model.variant = Variant::RiskSensitive;
    cfg.model.sigma = 1.0;
    cfg.sweep = {"theta", 0.0, 1.2, 25, 2};
    const auto res = cmd_sweep(cfg, dir.path());
    EXPECT_EQ(res.exit_code, kOk);
    const auto t = read_sweep(dir.path() / "sweep.csv");
    ASSERT_EQ(t.rows.size(), 25u);
    for (const auto& row : t.rows) {
        const double theta = std::stod(row.at("value"));
        EXPECT_EQ(row.at("admissible"), theta < 1.0 ? "1" : "0") << theta;
    }
}

TEST(Sweep, FailedRowsCarryCodes) {
    TempDir dir;
    auto cfg = parse_config(kBenchmark);
    cfg.model.variant = Variant::RiskSensitive;
    cfg.model.sigma = 1.0;
    cfg.model.a = 0.0;
    cfg.model.abar = 0.0;
    cfg.model.qbar = 0.0;
    cfg.model.qbarT = 0.0;
    cfg.model.qT = 0.0;
    cfg.model.T = 2.0;
    cfg.sweep = {"theta", -1.0, 2.0, 4, 1};
    cmd_sweep(cfg, dir.path());
    const auto t = read_sweep(dir.path() / "sweep.csv");
    ASSERT_EQ(t.rows.size(), 4u);
    EXPECT_EQ(t.rows[0].at("status"), "invalid");
    EXPECT_EQ(t.rows[0].at("status_code"), "1");
    EXPECT_EQ(t.rows[1].at("status"), "ok");
    EXPECT_EQ(t.rows[3].at("status"), "blowup");
    EXPECT_EQ(t.rows[3].at("status_code"), "2");
    EXPECT_NEAR(std::stod(t.rows[3].at("blowup_time")), 2.0 - 1.5707963267948966, 1e-9);
}

TEST(Sweep, HorizonBoundIncreasesAndContractionFlips) {
    TempDir dir;
    auto cfg = parse_config(kBenchmark);
    cfg.sweep = {"T", 0.1, 1.0, 10, 0};
    cmd_sweep(cfg, dir.path());
    const auto t = read_sweep(dir.path() / "sweep.csv");
    double previous = 0.0;
    bool seen_contraction = false, seen_expansion = false;
    for (const auto& row : t.rows) {
        const double bound = std::stod(row.at("lipschitz_bound"));
        EXPECT_GT(bound, previous);
        previous = bound;
        EXPECT_EQ(row.at("contraction"), bound < 1.0 ? "1" : "0");
        (bound < 1.0 ? seen_contraction : seen_expansion) = true;
    }
    EXPECT_TRUE(seen_contraction);
    EXPECT_TRUE(seen_expansion);
}

TEST(Sweep, DisturbanceRaisesBeta) {
    TempDir dir;
    auto cfg = parse_config(kBenchmark);
    cfg.model.variant = Variant::Robust;
    cfg.sweep = {"c", 0.0, 0.9, 7, 0};
    cmd_sweep(cfg, dir.path());
    const auto t = read_sweep(dir.path() / "sweep.csv");
    double previous = 0.0;
    for (const auto& row : t.rows) {
        const double beta0 = std::stod(row.at("beta0"));
        EXPECT_GT(beta0, previous);
        previous = beta0;
    }
}

TEST(Sweep, RejectsUnknownParameter) {
    TempDir dir;
    auto cfg = parse_config(kBenchmark);
    cfg.sweep = {"sigma", 0.0, 1.0, 3, 0};
    EXPECT_THROW(cmd_sweep(cfg, dir.path()), ConfigError);
}

TEST(Sweep, QbarScaleScalesBothWeights) {
    const auto p = sweep_instance(testing::benchmark(), "qbar-scale", 2.0);
    EXPECT_EQ(p.qbar, CoefficientFn(1.0));
    EXPECT_EQ(p.qbarT, 1.0);
}

TEST(Verify, NoiseFreeInstancePasses) {
    TempDir dir;
    auto cfg = parse_config(kBenchmark);
    cfg.model.sigma = 0.0;
    cfg.sim.n_paths = 64;
    const auto res = cmd_verify(cfg, dir.path());
    EXPECT_EQ(res.exit_code, kOk) << res.report.text();
    EXPECT_EQ(summary_of(res).at("value.std_error"), "0");
}

TEST(Verify, CsvOutputIndependentOfWorkers) {
    TempDir a, b;
    auto cfg = parse_config(kBenchmark);
    cfg.sim.n_paths = 6000;
    cfg.verify.perturbation_scale = 0.0;
    cfg.sim.workers = 1;
    cfg.sim.dump_paths = 4;
    cmd_verify(cfg, a.path());
    cfg.sim.workers = 4;
    cmd_verify(cfg, b.path());
    EXPECT_EQ(slurp(a.path() / "ensemble.csv"), slurp(b.path() / "ensemble.csv"));
    EXPECT_EQ(slurp(a.path() / "paths.csv"), slurp(b.path() / "paths.csv"));
    EXPECT_EQ(slurp(a.path() / "verify_summary.txt"), slurp(b.path() / "verify_summary.txt"));
}

TEST(Verify, CorruptedGainFailsValueIdentity) {
    TempDir dir;
    auto cfg = parse_config(kBenchmark);
    cfg.verify.gain_scale = 1.1;
    cfg.verify.perturbation_scale = 0.0;
    const auto res = cmd_verify(cfg, dir.path());
    EXPECT_EQ(res.exit_code, kVerifyFailed);
    EXPECT_EQ(summary_of(res).at("check.value identity E[L] = value_at_0"), "FAIL");
}

}  // namespace
}  // namespace mfg::cli
