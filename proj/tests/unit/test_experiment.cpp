#include "riskprobe/experiment.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#ifdef __unix__
#include <sys/wait.h>
#endif

using namespace riskprobe;
namespace fs = std::filesystem;

namespace {

const char* kSmall = R"({
  "experiment": {"scenario": ["lane_merge", "intersection"], "planner": ["ours", "passive"],
                 "runs": 3, "seed": 11, "t_max": 0.6, "trace_runs": [1]},
  "planner": {"samples": 20, "n_obs": 6}
})";

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("riskprobe_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int exit_code(const std::string& command) {
  const int status = std::system(command.c_str());
#ifdef WEXITSTATUS
  return WEXITSTATUS(status);
#else
  return status;
#endif
}

}  // namespace

TEST(RunSeed, StableAndDistinct) {
  EXPECT_EQ(run_seed(5, 0), run_seed(5, 0));
  EXPECT_NE(run_seed(5, 0), run_seed(5, 1));
  EXPECT_NE(run_seed(5, 0), run_seed(6, 0));
}

TEST(ParallelFor, VisitsEverySlotOnce) {
  for (std::size_t workers : {1u, 2u, 7u}) {
    std::vector<int> hits(50, 0);
    parallel_for(hits.size(), workers, [&](std::size_t i) { ++hits[i]; });
    for (int h : hits) EXPECT_EQ(h, 1);
  }
}

TEST(MakeRunConfig, PairsSeedsAcrossPlanners) {
  const auto cfg = parse_config(kSmall);
  const auto a = make_run_config(cfg, ScenarioKind::LaneMerge, PlannerKind::Ours, 2);
  const auto b = make_run_config(cfg, ScenarioKind::LaneMerge, PlannerKind::Passive, 2);
  EXPECT_EQ(a.seed, b.seed);
  EXPECT_EQ(a.seed, run_seed(cfg.seed, 2));
  EXPECT_DOUBLE_EQ(a.t_max, 0.6);
}

TEST(RunExperiment, ByteIdenticalAcrossWorkerCounts) {
  const auto one = scratch("w1");
  const auto three = scratch("w3");
  const auto again = scratch("w1b");
  const auto o1 = run_experiment(parse_config(kSmall), one);
  run_experiment(parse_config(kSmall, {"experiment.workers=3"}), three);
  run_experiment(parse_config(kSmall), again);
  EXPECT_EQ(o1.batches.size(), 4u);
  for (const char* name : {"results.csv", "summary.csv"}) {
    const auto base = slurp(one / name);
    EXPECT_FALSE(base.empty());
    EXPECT_EQ(base, slurp(three / name)) << name;
    EXPECT_EQ(base, slurp(again / name)) << name;
  }
  std::size_t traces = 0;
  for (const auto& entry : fs::directory_iterator(one / "traces")) {
    ++traces;
    EXPECT_EQ(slurp(entry.path()), slurp(three / "traces" / entry.path().filename()));
  }
  EXPECT_EQ(traces, 4u);
  EXPECT_TRUE(fs::exists(one / "manifest.json"));
  EXPECT_TRUE(fs::exists(one / "summary.txt"));
}

TEST(RunExperiment, ResultsHaveOneRowPerRun) {
  const auto dir = scratch("rows");
  run_experiment(parse_config(kSmall, {"experiment.scenario=lane_merge", "experiment.planner=ours"}), dir);
  std::ifstream in(dir / "results.csv");
  std::string line;
  std::size_t lines = 0;
  while (std::getline(in, line)) ++lines;
  EXPECT_EQ(lines, 1u + 3u);
}

TEST(WriteTrace, HeaderAndRows) {
  RunConfig rc;
  rc.seed = 1;
  rc.t_max = 0.3;
  rc.planner_config.samples = 20;
  const auto out = run(rc);
  std::stringstream s;
  write_trace(s, out);
  std::string header;
  std::getline(s, header);
  EXPECT_NE(header.find("entropy"), std::string::npos);
  std::size_t rows = 0;
  for (std::string line; std::getline(s, line);) ++rows;
  EXPECT_EQ(rows, out.log.size());
}

TEST(Cli, ExitCodes) {
  const std::string cli = RISKPROBE_CLI_PATH;
  if (cli.empty()) GTEST_SKIP() << "CLI not built";
  const auto dir = scratch("cli");
  const auto cfg_path = dir / "small.json";
  std::ofstream(cfg_path) << kSmall;
  const auto bad_path = dir / "bad.json";
  std::ofstream(bad_path) << R"({"experiment": {"scenario": "lane_merge", "planner": "ours", "seed": 1}})";

  const std::string quiet = " >/dev/null 2>&1";
  EXPECT_EQ(exit_code(cli + " run " + cfg_path.string() + " --scenario lane_merge --planner ours --runs 1 --out " +
                      (dir / "ok").string() + quiet),
            0);
  EXPECT_TRUE(fs::exists(dir / "ok" / "results.csv"));
  EXPECT_EQ(exit_code(cli + " run " + bad_path.string() + " --out " + (dir / "bad").string() + quiet), 2);
  EXPECT_EQ(exit_code(cli + " run " + cfg_path.string() + " --set planner.alpha=7 --out " + (dir / "x").string() + quiet),
            2);
  EXPECT_NE(exit_code(cli + " run " + (dir / "missing.json").string() + quiet), 0);
  EXPECT_NE(exit_code(cli + " bogus" + quiet), 0);
  EXPECT_EQ(exit_code(cli + " --version" + quiet), 0);
}
