#include <cstdlib>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include <chdbc/errors.hpp>
#include <chdbc/field_io.hpp>

#include "app/commands.hpp"
#include "app/config.hpp"
#include "app/presets.hpp"
#include "oracles.hpp"

using namespace chdbc;
using namespace chdbc::app;

namespace {

RunConfig parse(const std::string& text, const std::vector<std::string>& overrides = {}) {
    std::istringstream in(text);
    return parse_config(in, overrides);
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream is(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(is), {}};
}

std::vector<std::vector<std::string>> read_csv(const std::filesystem::path& p) {
    std::vector<std::vector<std::string>> rows;
    std::istringstream in(slurp(p));
    std::string line;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (!line.empty() && line.back() == ',') cells.emplace_back();
        rows.push_back(cells);
    }
    return rows;
}

int run_cli(const std::string& args) {
    const std::string cmd = std::string(CHDBC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

RunConfig small_run(const std::filesystem::path& dir, const std::string& scheme) {
    RunConfig cfg = parse("N = 8\ndt = 1e-3\nt_final = 0.006\nscheme = " + scheme + "\n");
    cfg.output_dir = dir;
    cfg.output_every = 1;
    return cfg;
}

} // namespace

TEST(Config, ParsesKeysCommentsAndOverrides) {
    const RunConfig cfg = parse("# comment\nN = 16\n dt=2e-3 # trailing\nscheme = bdf2\nN_ladder = 8,16,32\n",
                                {"theta0=3.5", "initial=random:0.2"});
    EXPECT_EQ(cfg.N, 16);
    EXPECT_DOUBLE_EQ(cfg.dt, 2e-3);
    EXPECT_EQ(cfg.scheme, SchemeKind::bdf2);
    EXPECT_EQ(cfg.N_ladder, (std::vector<int>{8, 16, 32}));
    EXPECT_DOUBLE_EQ(cfg.model.theta0, 3.5);
    EXPECT_EQ(cfg.initial, "random:0.2");
    const SchemeParams p = cfg.scheme_params();
    EXPECT_DOUBLE_EQ(p.A, 3.5 * 3.5 / 16);
    EXPECT_DOUBLE_EQ(p.B, 3.5 * 3.5 / 16);
}

TEST(Config, RejectsBadInput) {
    EXPECT_THROW(parse("bogus = 1\n"), ConfigError);
    EXPECT_THROW(parse("N = abc\n"), ConfigError);
    EXPECT_THROW(parse("N = 2\n"), ConfigError);
    EXPECT_THROW(parse("dt = -1\n"), ConfigError);
    EXPECT_THROW(parse("scheme = rk4\n"), ConfigError);
    EXPECT_THROW(parse("just a line\n"), ConfigError);
    EXPECT_THROW(parse("", {"dt_rule=h3"}), ConfigError);
    EXPECT_THROW(load_config("/nonexistent/chdbc.cfg"), ConfigError);
}

TEST(Config, WarnsAboutIgnoredSettings) {
    const RunConfig cfg = parse("scheme = cs1\nA = 1\n");
    EXPECT_FALSE(cfg.warnings.empty());
}

TEST(Config, TotalSteps) {
    RunConfig cfg = parse("dt = 1e-3\nt_final = 0.5\n");
    EXPECT_EQ(cfg.total_steps(), 500);
}

TEST(Presets, RandomStaysWithinAmplitudeAndIsSeeded) {
    const Mesh m(16);
    const State a = make_initial("random:0.4", m, 3);
    const State b = make_initial("random:0.4", m, 3);
    const State c = make_initial("random:0.4", m, 4);
    EXPECT_EQ(a, b);
    EXPECT_FALSE(a == c);
    for (double v : a.phi().values()) EXPECT_LE(std::abs(v), 0.4);
    EXPECT_THROW(make_initial("spiral:1", m, 1), ConfigError);
    EXPECT_THROW(make_initial("cosine", m, 1), ConfigError);
    EXPECT_THROW(make_initial("constant:1.5", m, 1), ConfigError);
}

TEST(Presets, CosineMatchesClosedForm) {
    const Mesh m(8);
    const auto f = analytic_preset("cosine:0.3");
    ASSERT_TRUE(f.has_value());
    const State s = make_initial("cosine:0.3", m, 1);
    EXPECT_DOUBLE_EQ(s.phi()(2, 3), (*f)(m.x_center(2), m.y_node(3)));
    EXPECT_FALSE(analytic_preset("random:0.1").has_value());
}

TEST(CmdRun, MissingOutputDirIsConfigError) {
    RunConfig cfg = parse("N = 8\nt_final = 0.002\n");
    std::ostringstream out, err;
    EXPECT_EQ(cmd_run(cfg, out, err), kConfigError);
}

TEST(CmdRun, ConstantStateGivesIdenticalRows) {
    const auto dir = oracle::scratch_dir("const_run");
    RunConfig cfg = small_run(dir, "cs1");
    cfg.initial = "constant:0.25";
    std::ostringstream out, err;
    ASSERT_EQ(cmd_run(cfg, out, err), kSuccess) << err.str();
    const auto rows = read_csv(dir / "energy.csv");
    ASSERT_EQ(rows.size(), 8u);
    for (std::size_t k = 2; k < rows.size(); ++k) {
        EXPECT_EQ(rows[k][2], rows[1][2]);
        EXPECT_EQ(rows[k][4], rows[1][4]);
    }
    EXPECT_TRUE(std::filesystem::exists(dir / "phi_6.csv"));
}

TEST(CmdRun, CosineEnergyDecreases) {
    const auto dir = oracle::scratch_dir("cos_run");
    RunConfig cfg = small_run(dir, "cs1");
    std::ostringstream out, err;
    ASSERT_EQ(cmd_run(cfg, out, err), kSuccess) << err.str();
    const auto rows = read_csv(dir / "energy.csv");
    ASSERT_EQ(rows.size(), 8u);
    EXPECT_EQ(rows[0][0], "step");
    for (std::size_t k = 2; k < rows.size(); ++k) {
        EXPECT_LT(std::stod(rows[k][2]), std::stod(rows[k - 1][2]));
        EXPECT_TRUE(rows[k][3].empty());
    }
}

TEST(CmdRun, ResumeReproducesUnbrokenRun) {
    for (const std::string scheme : {"cs1", "bdf2"}) {
        const auto full_dir = oracle::scratch_dir("full_" + scheme);
        const auto part_dir = oracle::scratch_dir("part_" + scheme);
        std::ostringstream out, err;
        ASSERT_EQ(cmd_run(small_run(full_dir, scheme), out, err), kSuccess) << err.str();

        RunConfig resumed = small_run(part_dir, scheme);
        resumed.initial = "snapshot:" + (full_dir / "phi_3.csv").string();
        if (scheme == "bdf2") resumed.previous = (full_dir / "phi_2.csv").string();
        resumed.start_step = 3;
        ASSERT_EQ(cmd_run(resumed, out, err), kSuccess) << err.str();

        EXPECT_EQ(slurp(full_dir / "phi_6.csv"), slurp(part_dir / "phi_6.csv")) << scheme;
        const auto a = read_csv(full_dir / "energy.csv");
        const auto b = read_csv(part_dir / "energy.csv");
        ASSERT_EQ(b.size(), 5u);
        for (std::size_t k = 2; k < b.size(); ++k) {
            // Columns after E_h_modified do not depend on the history window.
            EXPECT_EQ(a[k + 3][0], b[k][0]);
            EXPECT_EQ(a[k + 3][1], b[k][1]);
            EXPECT_EQ(a[k + 3][2], b[k][2]);
            EXPECT_EQ(a[k + 3][4], b[k][4]);
        }
    }
}

TEST(CmdVerify, PassesOnDefaultsAndFailsOnLooseNewton) {
    RunConfig cfg = parse("N = 8\nverify_steps = 10\ngradcheck_samples = 2\n");
    std::ostringstream out, err;
    EXPECT_EQ(cmd_verify(cfg, out, err), kSuccess) << out.str() << err.str();
    EXPECT_NE(out.str().find("verify: PASS"), std::string::npos);

    cfg.newton_tol = 1.0;
    std::ostringstream out2, err2;
    EXPECT_EQ(cmd_verify(cfg, out2, err2), kVerificationFailure) << out2.str() << err2.str();
}

TEST(CmdConvergence, SpatialNeedsAnalyticPreset) {
    RunConfig cfg = parse("study = spatial\ninitial = random:0.1\nN_ladder = 8,16\n");
    std::ostringstream out, err;
    EXPECT_EQ(cmd_convergence(cfg, out, err), kConfigError);
}

TEST(Executable, ExitCodes) {
    const auto dir = oracle::scratch_dir("exe");
    const auto cfg = dir / "run.cfg";
    std::ofstream(cfg) << "N = 8\nt_final = 0.002\noutput_dir = " << (dir / "out").string() << "\n";
    EXPECT_EQ(run_cli("run --config " + cfg.string()), 0);
    EXPECT_TRUE(std::filesystem::exists(dir / "out" / "energy.csv"));
    EXPECT_EQ(run_cli("run --config " + cfg.string() + " --override colour=red"), 2);
    EXPECT_EQ(run_cli("run --config " + (dir / "missing.cfg").string()), 2);
    EXPECT_EQ(run_cli("frobnicate"), 2);
    EXPECT_EQ(run_cli("run --config " + cfg.string() + " --override newton_max_iter=1 newton_tol=1e-16 "
                      "initial=cosine:0.9"),
              3);
}
