#include <gtest/gtest.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <sys/wait.h>

namespace fs = std::filesystem;

namespace {

struct Outcome {
  int code = -1;
  std::string output;
};

Outcome run_cli(const std::string& args) {
  const std::string cmd = std::string(ECHELON_CLI_PATH) + " " + args + " 2>&1";
  Outcome out;
  FILE* pipe = popen(cmd.c_str(), "r");
  if (!pipe) return out;
  std::array<char, 4096> buf{};
  while (fgets(buf.data(), buf.size(), pipe)) out.output += buf.data();
  const int status = pclose(pipe);
  out.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return out;
}

fs::path fresh_dir(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("echelon_cli_" + name);
  fs::remove_all(dir);
  return dir;
}

}  // namespace

TEST(Cli, UnknownScenarioIsConfigError) {
  const auto r = run_cli("run --scenario const-div --agent base-stock");
  EXPECT_EQ(r.code, 2) << r.output;
}

TEST(Cli, BadFlagIsUsageError) {
  EXPECT_EQ(run_cli("run --episodes many").code, 2);
  EXPECT_EQ(run_cli("frobnicate").code, 2);
}

TEST(Cli, MissingTracesIsIoError) {
  const auto dir = fresh_dir("empty");
  fs::create_directories(dir);
  EXPECT_EQ(run_cli("eval --traces " + dir.string()).code, 5);
}

TEST(Cli, RunThenEval) {
  const auto dir = fresh_dir("run");
  const auto r = run_cli("run --scenario dec-div --agent base-stock --out " + dir.string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("140.36"), std::string::npos) << r.output;
  const auto e = run_cli("eval --traces " + dir.string());
  ASSERT_EQ(e.code, 0) << e.output;
  EXPECT_NE(e.output.find("140.36"), std::string::npos) << e.output;
}

TEST(Cli, SolveExportAndSchedule) {
  const auto dir = fresh_dir("solve");
  fs::create_directories(dir);
  const auto lp = dir / "cu.lp";
  const auto sched = dir / "cu.sched";
  const auto x = run_cli("solve --scenario const-uni --export-ip " + lp.string());
  ASSERT_EQ(x.code, 0) << x.output;
  EXPECT_TRUE(fs::exists(lp));
  const auto r = run_cli("solve --scenario const-uni --schedule-out " + sched.string());
  ASSERT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("-120"), std::string::npos) << r.output;
  const auto again = run_cli("solve --scenario const-uni --import-schedule " + sched.string());
  EXPECT_EQ(again.code, 0) << again.output;
  EXPECT_NE(again.output.find("-120"), std::string::npos) << again.output;
}

TEST(Cli, ScenarioDumpLoadsBack) {
  const auto dir = fresh_dir("scenario");
  fs::create_directories(dir);
  const auto file = dir / "inc.json";
  ASSERT_EQ(run_cli("scenario --scenario inc-uni --out " + file.string()).code, 0);
  const auto r = run_cli("run --scenario " + file.string() + " --agent base-stock");
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_NE(r.output.find("112.12"), std::string::npos) << r.output;
}

TEST(Cli, MklogThenAimRmLog) {
  const auto dir = fresh_dir("mklog");
  fs::create_directories(dir);
  const auto log = dir / "rl.jsonl";
  ASSERT_EQ(run_cli("mklog --scenario const-uni --policy optimal --out " + log.string()).code, 0);
  const auto r = run_cli("run --scenario const-uni --agent aim-rm-log --memory " + log.string());
  EXPECT_EQ(r.code, 0) << r.output;
  EXPECT_EQ(run_cli("run --scenario const-uni --agent aim-rm-log --memory " + (dir / "nope").string()).code, 5);
}
