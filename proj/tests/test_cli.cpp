#include "cli.hpp"

#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

namespace fs = std::filesystem;
using slipflow::cli::run;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result call(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

fs::path temp_dir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("slipflow_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

}  // namespace

TEST(Cli, LaddersCsv) {
  Result r = call({"ladders", "--s", "4", "--n", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("# slipflow "), std::string::npos);
  EXPECT_NE(r.out.find("# seed "), std::string::npos);
  EXPECT_NE(r.out.find("flavor,m,inv_t,t,M,M_first\n"), std::string::npos);
  EXPECT_NE(r.out.find("slip,0,2/3,1.5,1,1\n"), std::string::npos);
  EXPECT_NE(r.out.find("slip,1,5/12,2.4,1,1\n"), std::string::npos);
  Result f = call({"ladders", "--s", "4", "--n", "2", "--q", "3"});
  EXPECT_NE(f.out.find("friction,1,5/12,2.4"), std::string::npos);
}

TEST(Cli, PiolaCheckPasses) {
  Result r = call({"piola-check", "--graph", "sin", "--delta", "0.25", "--s", "4"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("identity,residual,tolerance,pass\n"), std::string::npos);
  EXPECT_EQ(r.out.find(",0\n"), std::string::npos);
}

TEST(Cli, SolveRateTable) {
  Result r = call({"solve", "--case", "square-slip", "--h", "0.25", "--refine", "3"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("\nfit,"), std::string::npos);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(call({}).code, 2);
  EXPECT_EQ(call({"bogus"}).code, 2);
  EXPECT_EQ(call({"ladders", "--bogus", "1"}).code, 2);
  EXPECT_EQ(call({"ladders", "--s", "2", "--n", "2"}).code, 2);
  EXPECT_EQ(call({"ladders", "--s", "x"}).code, 2);
  EXPECT_EQ(call({"mesh", "--domain", "hexagon"}).code, 2);
  EXPECT_EQ(call({"solve", "--case", "nope"}).code, 2);
  EXPECT_EQ(call({"all", "--check", "13"}).code, 2);
  EXPECT_EQ(call({"mesh", "--h", "-1"}).code, 2);
  Result help = call({"--help"});
  EXPECT_EQ(help.code, 0);
  EXPECT_NE(help.out.find("ladders"), std::string::npos);
}

TEST(Cli, RuntimeFailureExitsOne) {
  Result r = call({"solve", "--case", "square-slip", "--h", "1", "--refine", "2"});
  EXPECT_EQ(r.code, 1);
  EXPECT_FALSE(r.err.empty());
}

TEST(Cli, DeterministicBytes) {
  for (std::vector<std::string> args : {std::vector<std::string>{"all", "--check", "2", "--seed", "99"},
                                        {"flatten", "--graph", "poly", "--delta", "0.3"},
                                        {"mesh", "--domain", "bubble", "--h", "0.2", "--refine", "1"}}) {
    Result a = call(args), b = call(args);
    EXPECT_EQ(a.code, 0) << a.err;
    EXPECT_EQ(a.out, b.out);
  }
  EXPECT_NE(call({"all", "--check", "2", "--seed", "99"}).out, call({"all", "--check", "2", "--seed", "98"}).out);
}

TEST(Cli, ConfigOverridesFlags) {
  fs::path d = temp_dir("config");
  {
    std::ofstream f(d / "run.cfg");
    f << "# ladder run\ns = 5\n\nn = 2\n";
  }
  Result r = call({"ladders", "--s", "4", "--config", (d / "run.cfg").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find(" s=5 "), std::string::npos);
  EXPECT_NE(r.out.find("slip,0,5/7,"), std::string::npos);
  {
    std::ofstream f(d / "bad.cfg");
    f << "colour = blue\n";
  }
  EXPECT_EQ(call({"ladders", "--config", (d / "bad.cfg").string()}).code, 2);
  EXPECT_EQ(call({"ladders", "--config", (d / "missing.cfg").string()}).code, 2);
}

TEST(Cli, ApplyConfigParsesValues) {
  slipflow::cli::RunConfig cfg;
  std::istringstream in("h = 0.05\nrefine=3\n  case = zero  \nseed = 7\n");
  slipflow::cli::apply_config(in, cfg);
  EXPECT_EQ(cfg.h, 0.05);
  EXPECT_EQ(cfg.refine, 3);
  EXPECT_EQ(cfg.case_id, "zero");
  EXPECT_EQ(cfg.seed, 7u);
  std::istringstream bad("h 0.05\n");
  EXPECT_THROW(slipflow::cli::apply_config(bad, cfg), std::invalid_argument);
}

TEST(Cli, OutputDirectory) {
  fs::path d = temp_dir("output");
  Result r = call({"mesh", "--domain", "square", "--h", "0.5", "--output", d.string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(d / "mesh.csv"));
  EXPECT_TRUE(fs::exists(d / "mesh.txt"));
  std::ifstream f(d / "mesh.csv");
  std::string first;
  std::getline(f, first);
  EXPECT_EQ(first.rfind("# slipflow", 0), 0u);
}

TEST(Cli, AllSingleCheck) {
  Result r = call({"all", "--check", "11"});
  EXPECT_EQ(r.code, 0) << r.err;
  EXPECT_NE(r.out.find("11,exponent ladders,1,"), std::string::npos);
}
