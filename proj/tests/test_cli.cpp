#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>
#include <json.hpp>

#include "experiments.hpp"

using namespace hamflow::cli;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const fs::path dir = fs::temp_directory_path() / ("hamflow_cli_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

fs::path write_file(const fs::path& path, const std::string& text) {
    std::ofstream(path) << text;
    return path;
}

int run_cli(const std::string& args) {
    const int status = std::system((std::string(HAMFLOW_CLI) + " " + args + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

const Table& table(const ExperimentResult& r, const std::string& name) {
    for (const auto& t : r.tables) {
        if (t.name == name) return t;
    }
    throw std::runtime_error("no table " + name);
}

}  // namespace

TEST(Table, CsvFormatting) {
    Table t{"x", {"a", "b", "c"}, {}};
    t.add({0.1, 3LL, std::string("s")});
    EXPECT_EQ(t.csv(), "a,b,c\n0.10000000000000001,3,s\n");
    EXPECT_THROW(t.add({1.0}), std::logic_error);
}

TEST(Config, DefaultsAndOverrides) {
    auto cfg = parse_config_text("experiment = order_study\n[numeric]\nT = 2\nseed = 5\n[order_study]\nsteps = 4,8,16\n");
    EXPECT_EQ(cfg.experiment, "order_study");
    EXPECT_EQ(cfg.output, "hamflow_order_study");
    EXPECT_DOUBLE_EQ(cfg.params.real("T"), 2.0);
    EXPECT_EQ(cfg.params.seed(), 5u);
    EXPECT_EQ(cfg.params.integers("steps"), (std::vector<int>{4, 8, 16}));
    EXPECT_EQ(cfg.params.str("schemes"), "midpoint,gauss4");
    override_seed(cfg, "18446744073709551615");
    EXPECT_EQ(cfg.params.seed(), 18446744073709551615ull);
    EXPECT_EQ(default_config("pontryagin_lqr").params.seed(), kDefaultSeed);
}

TEST(Config, Rejections) {
    EXPECT_THROW(parse_config_text("output = x\n"), ConfigError);
    EXPECT_THROW(parse_config_text("experiment = nope\n"), ConfigError);
    EXPECT_THROW(parse_config_text("experiment = order_study\ncolour = red\n"), ConfigError);
    EXPECT_THROW(parse_config_text("experiment = order_study\n[order_study]\nbogus = 1\n"), ConfigError);
    EXPECT_THROW(parse_config_text("experiment = order_study\n[type2_bvp]\nsweep_N = 1\n"), ConfigError);
    EXPECT_THROW(parse_config_text("experiment = order_study\n[numeric]\nT = -1\n"), ConfigError);
    EXPECT_THROW(parse_config_text("experiment = order_study\n[numeric]\nT = 1x\n"), ConfigError);
    EXPECT_THROW(parse_config_text("experiment = order_study\n[numeric]\nh = 0.1\n"), ConfigError);
    EXPECT_THROW(parse_config_text("experiment = order_study\n[order_study]\nsteps = 4,-8\n"), ConfigError);
    EXPECT_THROW(parse_config_text("experiment = pontryagin_lqr\n[pontryagin_lqr]\nmethod = rk4\n"), ConfigError);
    EXPECT_THROW(parse_config_text("experiment = order_study\n[numeric]\nseed = -3\n"), ConfigError);
    EXPECT_THROW(parse_config_text("[[[\n"), ConfigError);
    auto cfg = default_config("order_study");
    EXPECT_THROW(override_seed(cfg, "abc"), ConfigError);
}

TEST(Experiments, CompletenessTableHasFiveRows) {
    const auto r = run_experiment(default_config("completeness_table"));
    const auto& t = table(r, "completeness");
    ASSERT_EQ(t.rows.size(), 5u);
    const char* verdicts[] = {"complete", "incomplete", "complete", "complete", "incomplete"};
    for (int i = 0; i < 5; ++i) EXPECT_EQ(std::get<std::string>(t.rows[i][1]), verdicts[i]);
}

TEST(Experiments, MidpointOrderStudySlope) {
    const auto r = run_experiment(parse_config_text("experiment = order_study\n[order_study]\nschemes = midpoint\n"));
    EXPECT_NEAR(r.metrics.at("order_midpoint"), 2.0, 0.05);
    const auto& errs = table(r, "errors");
    EXPECT_EQ(errs.columns, (std::vector<std::string>{"scheme", "N", "h", "error"}));
    EXPECT_GE(errs.rows.size(), 3u);
}

TEST(Experiments, BadSchemeIsAConfigError) {
    EXPECT_THROW(run_experiment(parse_config_text("experiment = order_study\n[order_study]\nschemes = leapfrog\n")),
                 ConfigError);
    EXPECT_THROW(run_experiment(parse_config_text("experiment = hamel_rigid_body\n[hamel_rigid_body]\ninertia = 1,2\n")),
                 ConfigError);
}

TEST(Experiments, SeedChangesRandomizedTables) {
    const auto a = run_experiment(parse_config_text("experiment = symplecticity_scan\n[numeric]\nseed = 1\n"));
    const auto b = run_experiment(parse_config_text("experiment = symplecticity_scan\n[numeric]\nseed = 2\n"));
    EXPECT_NE(table(a, "defects").csv(), table(b, "defects").csv());
    EXPECT_EQ(table(a, "noether").csv(), table(b, "noether").csv());
}

TEST(Cli, RunWritesCsvsAndManifest) {
    const fs::path dir = scratch("run");
    const auto cfg = write_file(dir / "c.ini", "experiment = completeness_table\noutput = " + (dir / "sub/res").string() + "\n");
    ASSERT_EQ(run_cli("run " + cfg.string() + " --seed 9"), 0);
    EXPECT_TRUE(fs::exists(dir / "sub/res_completeness.csv"));
    EXPECT_TRUE(fs::exists(dir / "sub/res_summary.csv"));
    const auto manifest = nlohmann::json::parse(slurp(dir / "sub/res_manifest.json"));
    EXPECT_EQ(manifest["seed"], 9);
    EXPECT_EQ(manifest["experiment"], "completeness_table");
    EXPECT_TRUE(manifest.contains("started_utc"));

    ASSERT_EQ(run_cli("run " + cfg.string() + " --out " + (dir / "other").string()), 0);
    EXPECT_EQ(slurp(dir / "sub/res_completeness.csv"), slurp(dir / "other_completeness.csv"));
}

TEST(Cli, MalformedConfigExitsOneAndWritesNothing) {
    const fs::path dir = scratch("bad");
    for (const std::string text : {"experiment = completeness_table\noutput = " + (dir / "o").string() + "\n[numeric]\nN = zero\n",
                                   "experiment = completeness_table\noutput = " + (dir / "o").string() + "\n[x]\ny = 1\n",
                                   std::string("[[[ not ini\n")}) {
        const auto cfg = write_file(dir / "c.ini", text);
        EXPECT_EQ(run_cli("run " + cfg.string()), 1);
    }
    EXPECT_EQ(run_cli("run " + (dir / "missing.ini").string()), 1);
    EXPECT_EQ(std::distance(fs::directory_iterator(dir), fs::directory_iterator()), 1);  // only c.ini
}

TEST(Cli, SolverFailureExitsTwo) {
    const fs::path dir = scratch("solver");
    const auto cfg = write_file(dir / "c.ini", "experiment = pontryagin_lqr\noutput = " + (dir / "o").string() +
                                                   "\n[pontryagin_lqr]\nmax_sweeps = 2\n");
    EXPECT_EQ(run_cli("run " + cfg.string()), 2);
    EXPECT_FALSE(fs::exists(dir / "o_manifest.json"));
}

TEST(Cli, ListAndUsage) {
    EXPECT_EQ(run_cli("list"), 0);
    EXPECT_NE(run_cli(""), 0);
    EXPECT_EQ(registry().size(), 11u);
}
