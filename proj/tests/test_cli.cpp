#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;

namespace {

const fs::path& work_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "fsbcp_cli_test";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

/// Runs the tool with stdout to `stdout_file` (inside the work dir) and
/// returns its exit status.
int run(const std::string& args, const std::string& stdout_file = "stdout.txt") {
  const std::string cmd = std::string("\"") + FSBCP_CLI_PATH + "\" " + args + " > \"" +
                          (work_dir() / stdout_file).string() + "\" 2> \"" + (work_dir() / "stderr.txt").string() +
                          "\"";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

std::string path(const std::string& name) { return (work_dir() / name).string(); }

}  // namespace

TEST(Cli, SimulateThenTest) {
  ASSERT_EQ(run("simulate --dgp far1-bridge:0.245 --n 60 --G 31 --seed 7 --out " + path("data.csv")), 0);
  ASSERT_EQ(run("test --data " + path("data.csv") + " --method nbb --alpha 0.05 --B 100 --seed 3 --out " +
                path("result"), "outcome.txt"), 0);
  const auto j = nlohmann::json::parse(slurp(work_dir() / "outcome.txt"));
  EXPECT_EQ(j["method"], "nbb");
  EXPECT_EQ(j["n"], 60);
  EXPECT_EQ(j["G"], 31);
  EXPECT_EQ(j["B"], 100);
  EXPECT_EQ(j["seed"], 3);
  for (const char* f : {"outcome.json", "replicates.csv", "cusum_profile.csv", "cusum_profile.svg"})
    EXPECT_TRUE(fs::exists(work_dir() / "result" / f)) << f;
  EXPECT_EQ(nlohmann::json::parse(slurp(work_dir() / "result" / "outcome.json")), j);
}

TEST(Cli, SimulateIsSeeded) {
  ASSERT_EQ(run("simulate --n 10 --G 11 --seed 5", "a.csv"), 0);
  ASSERT_EQ(run("simulate --n 10 --G 11 --seed 5", "b.csv"), 0);
  ASSERT_EQ(run("simulate --n 10 --G 11 --seed 6", "c.csv"), 0);
  EXPECT_EQ(slurp(work_dir() / "a.csv"), slurp(work_dir() / "b.csv"));
  EXPECT_NE(slurp(work_dir() / "a.csv"), slurp(work_dir() / "c.csv"));
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run("test --data " + path("missing.csv")), 4);
  {
    std::ofstream bad(path("bad.csv"));
    bad << "1,2,3\n4,5\n";
  }
  EXPECT_EQ(run("test --data " + path("bad.csv")), 2);
  EXPECT_NE(slurp(work_dir() / "stderr.txt").find("line 2"), std::string::npos);
  EXPECT_EQ(run("test --data " + path("bad.csv") + " --method wild"), 2);
  EXPECT_EQ(run("size-study --B 10"), 2);
  EXPECT_EQ(run("size-study --config " + path("missing.cfg")), 4);
  EXPECT_EQ(run("frobnicate"), 2);
  EXPECT_EQ(run(""), 2);
}

TEST(Cli, ConfigFileWithFlagOverride) {
  {
    std::ofstream cfg(path("study.cfg"));
    cfg << "n=30\nG=21\nR=3\nB=100\nmethods=nbb\nalphas=0.05,0.1\nseed=11\nout=" << path("ignored") << "\n";
  }
  ASSERT_EQ(run("size-study --config " + path("study.cfg") + " --R 4 --out " + path("size")), 0);
  EXPECT_FALSE(fs::exists(work_dir() / "ignored"));
  const std::string snapshot = slurp(work_dir() / "size" / "config.snapshot");
  EXPECT_NE(snapshot.find("R=4\n"), std::string::npos);
  EXPECT_NE(snapshot.find("n=30\n"), std::string::npos);
  const std::string table = slurp(work_dir() / "size" / "table.csv");
  EXPECT_EQ(table.rfind("dgp,method,alpha,jump,frequency,mc_se,excluded,m_median,p_median\n", 0), 0u);
  EXPECT_EQ(std::count(table.begin(), table.end(), '\n'), 3);

  ASSERT_EQ(run("report --table " + path("size/table.csv") + " --out " + path("report")), 0);
  EXPECT_TRUE(fs::exists(work_dir() / "report" / "power_curve.svg"));
  EXPECT_NE(slurp(work_dir() / "stdout.txt").find("nbb"), std::string::npos);
}

TEST(Cli, PowerStudyArtifacts) {
  ASSERT_EQ(run("power-study --n 40 --k_star 20 --G 21 --R 5 --B 100 --methods nbb --jumps 0,2 --seed 1 --out " +
                path("power")), 0);
  for (const char* f : {"table.csv", "config.snapshot", "power_curve.svg"})
    EXPECT_TRUE(fs::exists(work_dir() / "power" / f)) << f;
}
