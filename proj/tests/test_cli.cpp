#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "spapprox/cli.hpp"

using namespace spapprox;
namespace fs = std::filesystem;

namespace {

json geometric_system() { return {{"mode", "sequence"}, {"rule", {{"family", "geometric"}, {"base", 2}}}}; }

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

fs::path fresh_dir(const std::string& name)
{
    auto d = fs::temp_directory_path() / ("spapprox_test_" + name);
    fs::remove_all(d);
    return d;
}

struct Proc {
    int status;
    std::string out;
};

Proc run_cli(const std::string& args)
{
    std::string cmd = std::string(SPAPPROX_CLI_PATH) + " " + args + " 2>&1";
    FILE* p = popen(cmd.c_str(), "r");
    std::string out;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, p)) out.append(buf, n);
    int st = pclose(p);
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

std::string config(const std::string& name) { return std::string(SPAPPROX_CONFIG_DIR) + "/" + name; }

} // namespace

TEST(Csv, QuotingAndHeader)
{
    cli::Table t{{"a", "b,c"}, {{std::int64_t(1), std::string("x\"y")}, {0.1, cli::Cell()}, {true, inf}}};
    std::ostringstream os;
    cli::write_csv(os, t);
    EXPECT_EQ(os.str(), "a,\"b,c\"\r\n1,\"x\"\"y\"\r\n0.1,\r\ntrue,inf\r\n");
    EXPECT_EQ(cli::format_double(1.0 / 3.0), "0.3333333333333333");
    EXPECT_EQ(cli::format_double(2.0), "2");
    EXPECT_EQ(cli::format_double(-inf), "-inf");
}

TEST(Commands, CharseqHarmonic)
{
    json c = {{"system", {{"mode", "sequence"}, {"rule", {{"family", "power"}, {"r", 1}}}}}, {"levels", 5}};
    auto o = cli::run("charseq", c, {});
    EXPECT_EQ(o.table.columns, (std::vector<std::string>{"n", "epsilon", "delta"}));
    ASSERT_EQ(o.table.rows.size(), 5u);
    for (std::int64_t n = 1; n <= 5; ++n) {
        EXPECT_EQ(std::get<std::int64_t>(o.table.rows[n - 1][0]), n);
        EXPECT_DOUBLE_EQ(std::get<double>(o.table.rows[n - 1][1]), 1.0 / double(n));
        EXPECT_EQ(std::get<std::int64_t>(o.table.rows[n - 1][2]), n);
    }
}

TEST(Commands, NTermGeometricFixture)
{
    json c = {{"system", geometric_system()}, {"n", 1}, {"p", 1}, {"q", 1}};
    auto o = cli::run("extremal nterm", c, {});
    ASSERT_EQ(o.table.rows.size(), 1u);
    EXPECT_NEAR(std::get<double>(o.table.rows[0][1]), 1.0 / 6.0, 1e-16);
    EXPECT_EQ(std::get<std::int64_t>(o.table.rows[0][2]), 2);
    EXPECT_EQ(o.operation, "extremal.nterm");
}

TEST(Commands, JacksonInAtOne)
{
    auto o = cli::run("jackson In", {{"lambda", 1}, {"n", {1, 2, 3}}}, {});
    for (auto& row : o.table.rows) EXPECT_EQ(std::get<double>(row[2]), 2.0);
}

TEST(Commands, SweepsAndRegions)
{
    auto o = cli::run("count", {{"d", 2}, {"r", {1, "inf"}}, {"m", {{"from", 0}, {"to", 2}}}}, {});
    std::vector<std::int64_t> want{1, 5, 13, 1, 9, 25};
    ASSERT_EQ(o.table.rows.size(), want.size());
    for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(std::get<std::int64_t>(o.table.rows[i][3]), want[i]);
    auto r = cli::run("region", {{"dim", 2}, {"region", {{"kind", "cross"}, {"n", 2}}}}, {});
    EXPECT_EQ(r.summary["cardinality"], 21);
    auto g = cli::run("region", {{"system", {{"mode", "sequence"}, {"rule", {{"family", "power"}, {"r", 1}}}}},
                                 {"region", {{"kind", "gn"}, {"n", 3}}}},
                      {});
    ASSERT_EQ(g.table.rows.size(), 3u);
    EXPECT_EQ(std::get<std::int64_t>(g.table.rows[2][0]), 3);
}

TEST(Commands, LinmethodApplyMatchesLibrary)
{
    json el = {{"dim", 2}, {"terms", {{{1, 0}, 1.0, 0.0}, {{2, -1}, 0.5, 0.5}}}};
    auto o = cli::run("linmethod apply", {{"element", el}, {"method", "tap"}, {"rho", 0.5}, {"r", 2}}, {});
    ASSERT_EQ(o.table.rows.size(), 2u);
    EXPECT_DOUBLE_EQ(std::get<double>(o.table.rows[1][2]), tap_lambda_binomial(3, 2, 0.5) * 0.5);
    EXPECT_THROW(cli::run("linmethod apply", {{"element", el}, {"method", "tap"}, {"rho", {0.5, 0.6}}}, {}), error);
}

TEST(Descriptors, FieldLevelMessages)
{
    auto expect_msg = [](const std::string& cmd, const json& c, const std::string& needle) {
        try {
            cli::run(cmd, c, {});
            FAIL() << "expected an error mentioning " << needle;
        } catch (const error& e) {
            EXPECT_EQ(e.code(), errc::invalid_descriptor) << e.what();
            EXPECT_NE(std::string(e.what()).find(needle), std::string::npos) << e.what();
        }
    };
    expect_msg("extremal nterm", {{"n", 1}, {"p", 1}, {"q", 1}}, "system");
    expect_msg("extremal nterm", {{"system", {{"mode", "sequence"}, {"rule", {{"family", "power"}}}}}, {"n", 1}, {"p", 1}, {"q", 1}},
               "system.rule.r");
    expect_msg("extremal nterm", {{"system", {{"mode", "spiral"}}}, {"n", 1}, {"p", 1}, {"q", 1}}, "system.mode");
    expect_msg("extremal nterm", {{"system", geometric_system()}, {"n", "x"}, {"p", 1}, {"q", 1}}, "n: expected a number");
    expect_msg("count", {{"d", 2}, {"r", 1}, {"m", {{"from", 3}, {"to", 1}}}}, "m: empty range");
    expect_msg("jackson In", {{"command", "charseq"}, {"lambda", 1}, {"n", 1}}, "command");
    expect_msg("nonsense", json::object(), "unknown command");
    expect_msg("identity direct", {{"element", {{"dim", 1}, {"file", "/nonexistent/x.txt"}}}}, "element.file");
}

TEST(Pool, OrderAndErrorsIndependentOfJobs)
{
    std::function<int(std::size_t)> sq = [](std::size_t i) { return int(i * i); };
    EXPECT_EQ(cli::parallel_map<int>(100, 1, sq), cli::parallel_map<int>(100, 8, sq));
    std::function<int(std::size_t)> bad = [](std::size_t i) -> int {
        if (i % 7 == 3) fail(errc::parameter_out_of_range, "task " + std::to_string(i));
        return 0;
    };
    for (unsigned j : {1u, 4u}) {
        try {
            cli::parallel_map<int>(50, j, bad);
            FAIL();
        } catch (const error& e) {
            EXPECT_NE(std::string(e.what()).find("task 3"), std::string::npos);
        }
    }
}

TEST(Pool, FixtureTablesIdenticalAcrossJobs)
{
    for (auto& e : fs::directory_iterator(SPAPPROX_CONFIG_DIR)) {
        if (e.path().extension() != ".json") continue;
        auto c = read_config(e.path());
        std::string cmd = c["command"];
        std::ostringstream a, b;
        cli::Context one, many;
        many.jobs = 8;
        cli::write_csv(a, cli::run(cmd, c, one, e.path().parent_path()).table);
        cli::write_csv(b, cli::run(cmd, c, many, e.path().parent_path()).table);
        EXPECT_EQ(a.str(), b.str()) << e.path();
    }
}

TEST(Svg, PolylineWriter)
{
    cli::Table t{{"n", "v"}, {{std::int64_t(1), 1.0}, {std::int64_t(10), 0.1}, {std::int64_t(100), 0.01}}};
    std::ostringstream os;
    cli::write_svg(os, t, {"n", {"v"}});
    auto s = os.str();
    EXPECT_NE(s.find("<polyline"), std::string::npos);
    EXPECT_NE(s.find("50.00,50.00 "), std::string::npos);
    EXPECT_NE(s.find("590.00,350.00 "), std::string::npos);
    EXPECT_THROW(cli::write_svg(os, t, {"n", {"missing"}}), error);
}

TEST(Process, WritesTableManifestAndPlot)
{
    auto dir = fresh_dir("process");
    auto r = run_cli("extremal nterm --config " + config("extremal_nterm.json") + " --out " + dir.string() + " --plot -q --seed 9");
    ASSERT_EQ(r.status, 0) << r.out;
    EXPECT_TRUE(r.out.empty());
    auto csv = slurp(dir / "extremal_nterm.csv");
    EXPECT_EQ(csv.substr(0, csv.find("\r\n")), "n,value,s_star,formula,error");
    EXPECT_TRUE(fs::exists(dir / "extremal_nterm.svg"));
    auto m = json::parse(slurp(dir / "manifest.json"));
    for (auto key : {"version", "command", "config-hash", "tolerances", "seed"}) EXPECT_TRUE(m.contains(key)) << key;
    EXPECT_EQ(m["command"], "extremal nterm");
    EXPECT_EQ(m["seed"], 9);
    EXPECT_EQ(m["config-hash"], cli::config_hash(read_config(config("extremal_nterm.json"))));
    fs::remove_all(dir);
}

TEST(Process, ParamOverridesAndJsonFormat)
{
    auto r = run_cli("jackson In --param lambda=1 --param n=[1,4] --format json");
    ASSERT_EQ(r.status, 0) << r.out;
    auto j = json::parse(r.out);
    EXPECT_EQ(j["operation"], "jackson.In_integral_sine");
    ASSERT_EQ(j["rows"].size(), 2u);
    EXPECT_EQ(j["rows"][1][2], 2.0);
}

TEST(Process, FailuresExitNonzeroWithErrorName)
{
    auto r = run_cli("jackson In --param lambda=-1 --param n=1");
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.out.find("ParameterOutOfRange"), std::string::npos) << r.out;
    r = run_cli("extremal nterm --param n=1");
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.out.find("InvalidDescriptor"), std::string::npos) << r.out;
    r = run_cli("jackson check --config " + config("jackson_check.json") + " --param element.terms=[[[1,-1],1,0]]");
    EXPECT_EQ(r.status, 1);
    EXPECT_NE(r.out.find("SupportViolation"), std::string::npos) << r.out;
    r = run_cli("extremal");
    EXPECT_NE(r.status, 0);
}
