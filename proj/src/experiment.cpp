#include "riskprobe/experiment.hpp"

#ifdef RISKPROBE_VENDORED_JSON
#include <json.hpp>
#else
#include <nlohmann/json.hpp>
#endif

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <mutex>
#include <ostream>
#include <thread>

#ifndef RISKPROBE_VERSION
#define RISKPROBE_VERSION "0.0.0"
#endif

namespace riskprobe {

namespace {

std::string num(double v) {
  if (std::isnan(v)) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

std::string stat_cells(const MetricStat& s) { return num(s.mean) + "," + num(s.std); }

std::string cell_name(const BatchResult& b) {
  return std::string(to_string(b.scenario)) + "_" + std::string(to_string(b.planner));
}

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  return out;
}

void close_output(std::ofstream& out, const std::filesystem::path& path) {
  out.close();
  if (!out) throw std::runtime_error("failed writing '" + path.string() + "'");
}

}  // namespace

std::string_view version() { return RISKPROBE_VERSION; }

std::uint64_t run_seed(std::uint64_t master_seed, std::size_t index) { return derive_seed(master_seed, index, 0x52554e); }

RunConfig make_run_config(const ExperimentConfig& cfg, ScenarioKind scenario, PlannerKind planner, std::size_t index) {
  RunConfig rc;
  rc.scenario = scenario;
  rc.seed = run_seed(cfg.seed, index);
  rc.t_max = cfg.t_max_for(scenario);
  rc.planner = planner;
  rc.planner_config = cfg.planner;
  rc.human = cfg.human;
  rc.modes = cfg.mode_set(scenario);
  rc.features = cfg.features;
  rc.record_log = std::find(cfg.trace_runs.begin(), cfg.trace_runs.end(), index) != cfg.trace_runs.end();
  return rc;
}

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& job) {
  workers = std::max<std::size_t>(1, std::min(workers, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) job(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) {
        try {
          job(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
}

BatchResult run_batch(const ExperimentConfig& cfg, ScenarioKind scenario, PlannerKind planner,
                      std::vector<RunOutput>* traces) {
  BatchResult batch;
  batch.scenario = scenario;
  batch.planner = planner;
  batch.runs.resize(cfg.runs);
  std::vector<RunOutput> logs(cfg.trace_runs.size());
  const auto modes = cfg.mode_set(scenario);
  parallel_for(cfg.runs, cfg.workers, [&](std::size_t i) {
    RunConfig rc = make_run_config(cfg, scenario, planner, i);
    rc.modes = modes;
    RunOutput out = run(rc);
    batch.runs[i] = out.result;
    if (rc.record_log) {
      for (std::size_t t = 0; t < cfg.trace_runs.size(); ++t) {
        if (cfg.trace_runs[t] == i) logs[t] = out;
      }
    }
  });
  batch.summary = aggregate(batch.runs);
  if (traces != nullptr) {
    for (std::size_t t = 0; t < cfg.trace_runs.size(); ++t) {
      if (cfg.trace_runs[t] < cfg.runs) traces->push_back(std::move(logs[t]));
    }
  }
  return batch;
}

void write_results_header(std::ostream& out) {
  out << "run,seed,scenario,planner,truth_intent,truth_mode,success,termination,completion_time,min_gap,"
         "mean_velocity,mean_abs_long_jerk,mean_abs_ang_jerk,steps,infeasible_steps,degenerate_updates,"
         "final_entropy\n";
}

void write_results_rows(std::ostream& out, const BatchResult& batch, std::uint64_t master_seed) {
  for (std::size_t i = 0; i < batch.runs.size(); ++i) {
    const auto& r = batch.runs[i];
    out << i << ',' << run_seed(master_seed, i) << ',' << to_string(batch.scenario) << ','
        << to_string(batch.planner) << ',' << r.truth_intent << ',' << r.truth_mode << ',' << (r.success ? 1 : 0)
        << ',' << to_string(r.termination) << ',' << (r.success ? num(r.completion_time) : std::string()) << ','
        << num(r.min_gap) << ',' << num(r.mean_velocity) << ',' << num(r.mean_abs_long_jerk) << ','
        << num(r.mean_abs_ang_jerk) << ',' << r.steps << ',' << r.infeasible_steps << ',' << r.degenerate_updates
        << ',' << num(r.final_entropy) << '\n';
  }
}

void write_summary_csv(std::ostream& out, const std::vector<BatchResult>& batches) {
  out << "# std columns are population standard deviations; completion_time over successful runs only\n";
  out << "scenario,planner,runs,successes,violations,timeouts,aborted,success_rate,completion_time_mean,"
         "completion_time_std,min_gap_mean,min_gap_std,mean_velocity_mean,mean_velocity_std,long_jerk_mean,"
         "long_jerk_std,ang_jerk_mean,ang_jerk_std\n";
  for (const auto& b : batches) {
    const auto& s = b.summary;
    out << to_string(b.scenario) << ',' << to_string(b.planner) << ',' << s.runs << ',' << s.successes << ','
        << s.violations << ',' << s.timeouts << ',' << s.aborted << ',' << num(s.success_rate) << ','
        << stat_cells(s.completion_time) << ',' << stat_cells(s.min_gap) << ',' << stat_cells(s.mean_velocity) << ','
        << stat_cells(s.long_jerk) << ',' << stat_cells(s.ang_jerk) << '\n';
  }
}

void write_summary_text(std::ostream& out, const std::vector<BatchResult>& batches) {
  char line[256];
  std::snprintf(line, sizeof line, "%-13s %-13s %6s %8s %16s %16s %16s %16s %16s\n", "scenario", "planner", "runs",
                "success", "time [s]", "min gap [m]", "velocity [m/s]", "long jerk", "ang jerk");
  out << line;
  const auto pm = [](const MetricStat& s) {
    char buf[48];
    if (std::isnan(s.mean)) return std::string("-");
    std::snprintf(buf, sizeof buf, "%.2f +- %.2f", s.mean, s.std);
    return std::string(buf);
  };
  for (const auto& b : batches) {
    const auto& s = b.summary;
    char rate[16];
    std::snprintf(rate, sizeof rate, "%.1f%%", s.success_rate);
    std::snprintf(line, sizeof line, "%-13s %-13s %6zu %8s %16s %16s %16s %16s %16s\n",
                  std::string(to_string(b.scenario)).c_str(), std::string(to_string(b.planner)).c_str(), s.runs, rate,
                  pm(s.completion_time).c_str(), pm(s.min_gap).c_str(), pm(s.mean_velocity).c_str(),
                  pm(s.long_jerk).c_str(), pm(s.ang_jerk).c_str());
    out << line;
  }
  out << "(mean +- population std; time over successful runs only)\n";
}

void write_trace(std::ostream& out, const RunOutput& run) {
  const auto& ms = *run.modes;
  out << "step,t";
  for (const auto& name : ms.intent_names()) out << ",pi_" << name;
  for (const auto& name : ms.intent_names()) out << ",wmax_" << name;
  out << ",entropy";
  for (const auto& m : ms.targets()) out << ",cvar_" << m.intent << '_' << m.mode;
  for (Eigen::Index j = 0; j < ms.observation_dim(); ++j) out << ",z" << j;
  out << ",accel,yaw_rate,u_norm,ego_x,ego_y,ego_v,ego_heading,human_x,human_y,human_v,degenerate,infeasible\n";
  for (const auto& s : run.log) {
    out << s.step << ',' << num(s.t);
    for (double p : s.intent_probs) out << ',' << num(p);
    for (std::size_t i = 0; i < ms.intent_count(); ++i) {
      const auto first = s.mode_weights.begin() + static_cast<std::ptrdiff_t>(ms.flat_index(i, 0));
      out << ',' << num(*std::max_element(first, first + static_cast<std::ptrdiff_t>(ms.mode_count(i))));
    }
    out << ',' << num(s.entropy);
    for (std::size_t n = 0; n < ms.total_modes(); ++n) out << ',' << (n < s.cvar.size() ? num(s.cvar[n]) : "");
    for (Eigen::Index j = 0; j < s.observation.size(); ++j) out << ',' << num(s.observation[j]);
    out << ',' << num(s.control.accel) << ',' << num(s.control.yaw_rate) << ',' << num(s.u_norm) << ','
        << num(s.ego.x) << ',' << num(s.ego.y) << ',' << num(s.ego.v) << ',' << num(s.ego.heading) << ','
        << num(s.human.x) << ',' << num(s.human.y) << ',' << num(s.human.v) << ',' << (s.degenerate ? 1 : 0) << ','
        << (s.infeasible ? 1 : 0) << '\n';
  }
}

ExperimentOutcome run_experiment(const ExperimentConfig& cfg, const std::filesystem::path& out_dir) {
  ExperimentOutcome outcome;
  outcome.out_dir = out_dir;
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw std::runtime_error("cannot create output directory '" + out_dir.string() + "': " + ec.message());

  std::vector<std::pair<std::string, RunOutput>> traces;
  for (auto scenario : cfg.scenarios) {
    for (auto planner : cfg.planners) {
      std::vector<RunOutput> logs;
      outcome.batches.push_back(run_batch(cfg, scenario, planner, &logs));
      std::size_t t = 0;
      for (std::size_t index : cfg.trace_runs) {
        if (index >= cfg.runs) continue;
        traces.emplace_back(cell_name(outcome.batches.back()) + "_run" + std::to_string(index), std::move(logs[t++]));
      }
    }
  }

  const auto results_path = out_dir / "results.csv";
  auto results = open_output(results_path);
  write_results_header(results);
  for (const auto& b : outcome.batches) write_results_rows(results, b, cfg.seed);
  close_output(results, results_path);

  const auto summary_csv_path = out_dir / "summary.csv";
  auto summary_csv = open_output(summary_csv_path);
  write_summary_csv(summary_csv, outcome.batches);
  close_output(summary_csv, summary_csv_path);

  const auto summary_txt_path = out_dir / "summary.txt";
  auto summary_txt = open_output(summary_txt_path);
  write_summary_text(summary_txt, outcome.batches);
  close_output(summary_txt, summary_txt_path);

  outcome.files = {results_path, summary_csv_path, summary_txt_path};
  if (!traces.empty()) {
    std::filesystem::create_directories(out_dir / "traces", ec);
    if (ec) throw std::runtime_error("cannot create trace directory: " + ec.message());
    for (const auto& [name, log] : traces) {
      const auto path = out_dir / "traces" / ("trace_" + name + ".csv");
      auto f = open_output(path);
      write_trace(f, log);
      close_output(f, path);
      outcome.files.push_back(path);
    }
  }

  char hash[17];
  std::snprintf(hash, sizeof hash, "%016llx", static_cast<unsigned long long>(config_hash(cfg)));
  nlohmann::json manifest{
      {"version", std::string(version())},
      {"config_hash", hash},
      {"master_seed", cfg.seed},
      {"runs", cfg.runs},
      {"config", nlohmann::json::parse(canonical_config(cfg))},
  };
  nlohmann::json files = nlohmann::json::array();
  for (const auto& f : outcome.files) files.push_back(std::filesystem::relative(f, out_dir).generic_string());
  manifest["files"] = files;
  const auto manifest_path = out_dir / "manifest.json";
  auto mf = open_output(manifest_path);
  mf << manifest.dump(2) << '\n';
  close_output(mf, manifest_path);
  outcome.files.push_back(manifest_path);
  return outcome;
}

}  // namespace riskprobe
