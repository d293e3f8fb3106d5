#pragma once

#include "riskprobe/config.hpp"

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

namespace riskprobe {

/// One (scenario, planner) cell of an experiment.
struct BatchResult {
  ScenarioKind scenario = ScenarioKind::LaneMerge;
  PlannerKind planner = PlannerKind::Ours;
  std::vector<RunResult> runs;  ///< by run index
  Summary summary;
};

/// Seed of run `index`; shared by every planner so comparisons are paired.
std::uint64_t run_seed(std::uint64_t master_seed, std::size_t index);

RunConfig make_run_config(const ExperimentConfig& cfg, ScenarioKind scenario, PlannerKind planner, std::size_t index);

/// Runs `count` independent jobs on up to `workers` threads; job(i) must
/// only touch slot i of whatever it writes.
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& job);

/// All runs of one cell with optional per-run logs for `traced` indices.
BatchResult run_batch(const ExperimentConfig& cfg, ScenarioKind scenario, PlannerKind planner,
                      std::vector<RunOutput>* traces = nullptr);

void write_results_header(std::ostream& out);
void write_results_rows(std::ostream& out, const BatchResult& batch, std::uint64_t master_seed);
void write_summary_csv(std::ostream& out, const std::vector<BatchResult>& batches);
void write_summary_text(std::ostream& out, const std::vector<BatchResult>& batches);
void write_trace(std::ostream& out, const RunOutput& run);

struct ExperimentOutcome {
  std::vector<BatchResult> batches;
  std::filesystem::path out_dir;
  std::vector<std::filesystem::path> files;
};

/// Runs every scenario x planner cell and writes results.csv, summary.csv,
/// summary.txt, traces/ and manifest.json under `out_dir`.
ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

std::string_view version();

}  // namespace riskprobe
