#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "rbcmarl/cli.hpp"
#include "support.hpp"

using namespace rbcmarl;
using testing_support::TempDir;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  args.insert(args.begin(), "rbcmarl");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_dispatch(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

int run_binary(const std::string& args) {
  const std::string cmd = std::string(RBCMARL_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

const std::string kSmoke = std::string(RBCMARL_SOURCE_DIR) + "/configs/smoke.ini";

}  // namespace

TEST(Cli, TrainHelpListsNoCurriculum) {
  const auto r = run({"train", "--help"});
  EXPECT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("--no-curriculum"), std::string::npos);
}

TEST(Cli, EverySubcommandHasHelp) {
  for (const char* sub : {"train", "rollout", "best-response", "baseline-sweep", "layout", "schedule-dump"}) {
    EXPECT_EQ(run({sub, "--help"}).code, kExitOk) << sub;
  }
}

TEST(Cli, MissingConfigIsExitTwo) {
  EXPECT_EQ(run({"train", "--out", "/tmp/x"}).code, kExitConfig);
  EXPECT_EQ(run({"train", "--config", "/nonexistent.ini", "--out", "/tmp/x"}).code, kExitConfig);
}

TEST(Cli, UnknownSubcommandIsExitTwo) {
  EXPECT_EQ(run({"frobnicate"}).code, kExitConfig);
  EXPECT_EQ(run({}).code, kExitConfig);
}

TEST(Cli, InvalidConfigIsExitTwo) {
  TempDir dir("cli_cfg");
  write_file_atomic(dir.path() / "bad.ini", "[economy]\nnum_firms = -1\n");
  const auto r = run({"layout", "--config", (dir.path() / "bad.ini").string()});
  EXPECT_EQ(r.code, kExitConfig);
  EXPECT_NE(r.err.find("num_firms"), std::string::npos);
}

TEST(Cli, RuntimeFailureIsExitOne) {
  TempDir dir("cli_rt");
  write_file_atomic(dir.path() / "blocker", "a file, not a directory");
  const auto r = run({"train", "--config", kSmoke, "--updates", "1", "--out", (dir.path() / "blocker" / "run").string()});
  EXPECT_EQ(r.code, kExitRuntime);
}

TEST(Cli, ScheduleDumpStartsWithZeroTheta) {
  const auto r = run({"schedule-dump", "--config", kSmoke, "--to", "3"});
  ASSERT_EQ(r.code, kExitOk);
  std::istringstream in(r.out);
  std::string header, first;
  std::getline(in, header);
  std::getline(in, first);
  EXPECT_EQ(header.substr(0, 8), "t,theta,");
  EXPECT_EQ(first.substr(0, 4), "0,0,");
  int rows = 1;
  for (std::string l; std::getline(in, l);) ++rows;
  EXPECT_EQ(rows, 4);
}

TEST(Cli, ScheduleDumpWithoutCurriculumIsFlat) {
  const auto r = run({"schedule-dump", "--config", kSmoke, "--to", "0", "--no-curriculum"});
  ASSERT_EQ(r.code, kExitOk);
  EXPECT_NE(r.out.find("\n0,0.01,1,1,1,0.5,0.5,0.5,6,5,6,6\n"), std::string::npos) << r.out;
}

TEST(Cli, LayoutPrintsJson) {
  const auto r = run({"layout", "--config", kSmoke});
  ASSERT_EQ(r.code, kExitOk);
  const auto j = json::parse(r.out);
  EXPECT_EQ(j["consumer"]["width"].get<int>(), j["global"]["width"].get<int>() + kBudgetDigits + 1);
}

TEST(Cli, ParseRates) {
  EXPECT_EQ(parse_rates("0.2,0.4").size(), 4u);
  EXPECT_EQ(parse_rates("0.2:0.4,0.6:0"), (std::vector<TaxPair>{{0.2, 0.4}, {0.6, 0}}));
  EXPECT_THROW(parse_rates("0.2,0.4:0.6"), ConfigError);
  EXPECT_THROW(parse_rates("x"), ConfigError);
}

TEST(Cli, EndToEndThroughTheBinary) {
  TempDir dir("cli_e2e");
  const auto out = dir.path().string();
  ASSERT_EQ(run_binary("train --config " + kSmoke + " --seed 3 --updates 4 --out " + out), 0);
  const auto ckpt = out + "/checkpoints/" + checkpoint_name(4);
  EXPECT_EQ(run_binary("rollout --checkpoint " + ckpt + " --out " + out + "/r.json --fixed-tax 0.2:0.4"), 0);
  const auto rec = rollout_from_json(read_json(out + "/r.json"));
  EXPECT_EQ(rec.income_tax.back(), 0.2);
  EXPECT_EQ(run_binary("best-response --checkpoint " + ckpt + " --type f --updates 1 --episodes 2 --out " +
                       out + "/br"),
            0);
  EXPECT_EQ(read_json(out + "/br.json")["type"], "firm");
  EXPECT_EQ(run_binary("baseline-sweep --checkpoint " + ckpt + " --rates 0.2:0.2,0.4:0.4 --episodes 2 --out " +
                       out + "/sweep"),
            0);
  EXPECT_EQ(read_json(out + "/sweep.json")["rows"].size(), 2u);
  EXPECT_EQ(run_binary("baseline-sweep --checkpoint " + ckpt + " --rates 0.3 --episodes 2"), 2);
  EXPECT_EQ(run_binary("best-response --checkpoint " + ckpt + " --type x"), 2);
  EXPECT_EQ(run_binary("nonsense"), 2);
}
