#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "qtrap/cli.hpp"

using namespace qtrap;
namespace fs = std::filesystem;

namespace {

// Runs the body inside a fresh scratch directory and restores the cwd.
class ScratchDir : public ::testing::Test {
protected:
    void SetUp() override {
        old_ = fs::current_path();
        dir_ = fs::temp_directory_path() /
               ("qtrap_test_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        fs::current_path(dir_);
    }
    void TearDown() override {
        fs::current_path(old_);
        fs::remove_all(dir_);
        unsetenv("QTRAP_WORKERS");
    }

    static void write(const fs::path& p, const std::string& text) {
        if (p.has_parent_path()) fs::create_directories(p.parent_path());
        std::ofstream(p) << text;
    }
    static std::string slurp(const fs::path& p) { return read_text(p); }

    int run(const std::string& command, const fs::path& config) {
        out_.str("");
        err_.str("");
        return cli::run(command, config, out_, err_);
    }

    fs::path old_, dir_;
    std::ostringstream out_, err_;
};

const char* shift_oracle = R"(
output = "out/oracle"
[system]
kind = "shift"
dim = 64
[run]
t_max = 31
)";

}  // namespace

TEST(Config, ParsesSectionsArraysAndComments) {
    const Config cfg = Config::parse(R"(
# comment
output = "x # not a comment"
[measure]
type = "atomic"   # trailing
angles = [0.0, 1.5, -2]
weights = [0.25, 0.25, 0.5]
[run]
order = 12
)");
    EXPECT_EQ(cfg.string("output"), "x # not a comment");
    EXPECT_EQ(cfg.string("measure.type"), "atomic");
    EXPECT_EQ(cfg.numbers("measure.angles"), (std::vector<double>{0.0, 1.5, -2.0}));
    EXPECT_EQ(cfg.integer("run.order"), 12);
    EXPECT_EQ(cfg.integer("run.missing", 7), 7);
    EXPECT_TRUE(cfg.has_section("measure"));
    EXPECT_FALSE(cfg.has_section("system"));
    EXPECT_THROW(cfg.reject_unknown(), ConfigError);  // measure.weights never read
    cfg.numbers("measure.weights");
    EXPECT_NO_THROW(cfg.reject_unknown());
}

TEST(Config, Errors) {
    EXPECT_THROW(Config::parse("a = 1\na = 2\n"), ConfigError);
    EXPECT_THROW(Config::parse("[sec\n"), ConfigError);
    EXPECT_THROW(Config::parse("novalue\n"), ConfigError);
    const Config cfg = Config::parse("n = 1.5\ns = \"text\"\narr = [1, 2]\n");
    EXPECT_THROW(cfg.integer("n"), ConfigError);
    EXPECT_THROW(cfg.number("s"), ConfigError);
    EXPECT_THROW(cfg.number("arr"), ConfigError);
    EXPECT_THROW(cfg.number("absent"), ConfigError);
    EXPECT_THROW(cfg.choice("s", {"a", "b"}), ConfigError);
    EXPECT_THROW(Config::load("/nonexistent/qtrap.toml"), ConfigIoError);
}

TEST(Config, ResolvedRecordsDefaultsInKeyOrder) {
    const Config cfg = Config::parse("[run]\nzeta = 2\nalpha = 1\n");
    cfg.integer("run.zeta");
    cfg.integer("run.alpha");
    cfg.number("run.mid", 0.5);
    const std::string dumped = cfg.resolved().dump();
    EXPECT_EQ(dumped, R"({"run.alpha":1,"run.mid":0.5,"run.zeta":2})");
}

TEST(Csv, RoundTrip) {
    CsvTable t({"a", "b"});
    t.add_row({0.1, 1e-300});
    t.add_row({-2.0, 3.0});
    const CsvData d = parse_csv(t.render());
    EXPECT_EQ(d.header, (std::vector<std::string>{"a", "b"}));
    ASSERT_EQ(d.rows.size(), 2u);
    EXPECT_EQ(d.rows[0][0], 0.1);
    EXPECT_EQ(d.rows[0][1], 1e-300);
    EXPECT_EQ(d.column_index("b"), 1u);
    EXPECT_THROW(d.column_index("c"), ValidationError);
}

TEST(Csv, Errors) {
    EXPECT_THROW(parse_csv("a,b\n"), ValidationError);
    EXPECT_THROW(parse_csv("1,2\n3\n"), ValidationError);
    EXPECT_THROW(parse_csv("1,x\n"), ValidationError);
    EXPECT_NO_THROW(parse_csv("1,2\n3,4\n"));
    EXPECT_THROW(read_csv("/nonexistent/file.csv"), IoError);
}

TEST(ParallelMap, OrderAndExceptions) {
    for (unsigned w : {1u, 2u, 4u}) {
        const auto v = parallel_map<int>(100, [](std::size_t i) { return static_cast<int>(i * i); }, w);
        for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], static_cast<int>(i * i));
    }
    EXPECT_THROW(parallel_map<int>(
                     10, [](std::size_t i) -> int { throw ArgumentError("fail " + std::to_string(i)); }, 3),
                 ArgumentError);
}

TEST(Sha256, KnownDigest) {
    EXPECT_EQ(cli::sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}

TEST_F(ScratchDir, OracleCompareWritesArtifactsAndManifest) {
    write("cfg/oracle.toml", shift_oracle);
    ASSERT_EQ(run("oracle-compare", "cfg/oracle.toml"), 0) << err_.str();
    const auto rep = nlohmann::json::parse(slurp("out/oracle_oracle.json"));
    EXPECT_TRUE(rep["pass"].get<bool>());
    EXPECT_LE(rep["max_abs_diff"].get<double>(), 1e-10);
    const auto man = nlohmann::json::parse(slurp("out/oracle_manifest.json"));
    EXPECT_EQ(man["command"], "oracle-compare");
    EXPECT_EQ(man["status"], 0);
    EXPECT_EQ(man["config"]["run.tolerance"], 1e-10);
    ASSERT_EQ(man["artifacts"].size(), 2u);
    EXPECT_EQ(man["artifacts"][0]["file"], "oracle_oracle.csv");
    EXPECT_EQ(man["artifacts"][0]["sha256"], cli::sha256_hex(slurp("out/oracle_oracle.csv")));
}

TEST_F(ScratchDir, ToleranceFailureExitsTwoButStillWrites) {
    write("neg.toml", std::string(shift_oracle) + "tolerance = -1.0\n");
    EXPECT_EQ(run("oracle-compare", "neg.toml"), 1);
    write("d.toml", "output = \"out/oracle\"\n[system]\nkind = \"random\"\ndim = 24\nseed = 5\n"
                    "trap_basis = \"random\"\ntrap_seed = 6\n[run]\ntolerance = 1e-300\n");
    EXPECT_EQ(run("oracle-compare", "d.toml"), 2);
    EXPECT_TRUE(fs::exists("out/oracle_manifest.json"));
    const auto man = nlohmann::json::parse(slurp("out/oracle_manifest.json"));
    EXPECT_EQ(man["status"], 2);
}

TEST_F(ScratchDir, ValidationAndIoFailures) {
    write("unknown.toml", std::string(shift_oracle) + "frobnicate = 1\n");
    EXPECT_EQ(run("oracle-compare", "unknown.toml"), 1);
    EXPECT_NE(err_.str().find("run.frobnicate"), std::string::npos) << err_.str();

    EXPECT_EQ(run("oracle-compare", "missing.toml"), 3);
    EXPECT_EQ(run("no-such-command", "unknown.toml"), 1);

    write("rank2.toml", "[system]\nkind = \"random\"\ndim = 8\nseed = 1\ntrap_weights = [1.0, 1.0]\n");
    EXPECT_EQ(run("oracle-compare", "rank2.toml"), 1);

    write("nocsv.toml", "[measure]\ntype = \"density\"\nvalues_csv = \"data/none.csv\"\n");
    EXPECT_EQ(run("moments", "nocsv.toml"), 3);

    write("blocker", "a file, not a directory");
    write("unwritable.toml", "output = \"blocker/sub/x\"\n[run]\nt_max = 10\n");
    EXPECT_EQ(run("baselines", "unwritable.toml"), 3);
}

TEST_F(ScratchDir, ConfigRelativePathsResolveAgainstConfigDir) {
    write("cfg/data/rho.csv", "1.0\n1.5\n1.0\n0.5\n");
    write("cfg/density.toml", "output = \"dens\"\n[measure]\ntype = \"density\"\nvalues_csv = \"data/rho.csv\"\n[run]\norder = 4\n");
    ASSERT_EQ(run("moments", "cfg/density.toml"), 0) << err_.str();
    const CsvData d = read_csv("dens_moments.csv");
    ASSERT_EQ(d.rows.size(), 5u);
    EXPECT_NEAR(d.rows[0][1], 1.0, 1e-15);
}

TEST_F(ScratchDir, OutputIsIndependentOfWorkerCount) {
    write("scan.toml", "[measure]\ntype = \"bernoulli\"\np = 0.3333333333333333\nlevel = 10\n[run]\nk_min = 3\nk_max = 7\nmesh = 4096\n");
    setenv("QTRAP_WORKERS", "1", 1);
    ASSERT_EQ(run("jtilde-scan", "scan.toml"), 0) << err_.str();
    const std::string one = slurp("qtrap_jtilde-scan_manifest.json");
    setenv("QTRAP_WORKERS", "3", 1);
    ASSERT_EQ(run("jtilde-scan", "scan.toml"), 0) << err_.str();
    EXPECT_EQ(slurp("qtrap_jtilde-scan_manifest.json"), one);
    setenv("QTRAP_WORKERS", "zero", 1);
    EXPECT_EQ(run("jtilde-scan", "scan.toml"), 1);
}

TEST_F(ScratchDir, ExponentCommandReproducesScanFits) {
    write("scan.toml", "output = \"s\"\n[measure]\ntype = \"dirac\"\n");
    EXPECT_EQ(run("jtilde-scan", "scan.toml"), 1);  // unknown measure type

    write("scan.toml", "output = \"s\"\n[measure]\ntype = \"atomic\"\nangles = [0.0]\nweights = [1.0]\n[run]\nwindow_begin = 1\n");
    ASSERT_EQ(run("jtilde-scan", "scan.toml"), 0) << err_.str();
    write("fit.toml",
          "output = \"f\"\n[run]\ninput = \"s_jtilde.csv\"\nx_column = \"one_minus_r\"\ny_column = \"Jtilde_true\"\n"
          "window_begin = 1\n");
    ASSERT_EQ(run("exponent", "fit.toml"), 0) << err_.str();
    const auto fits = nlohmann::json::parse(slurp("s_fits.json"));
    const auto fit = nlohmann::json::parse(slurp("f_exponent.json"));
    EXPECT_NEAR(fit["exponent"].get<double>(), fits["withIm"]["exponent"].get<double>(), 1e-12);
    EXPECT_NEAR(fit["exponent"].get<double>(), 1.0, 0.02);
}
