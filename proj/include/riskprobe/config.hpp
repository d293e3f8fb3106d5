#pragma once

#include "riskprobe/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace riskprobe {

/// Malformed or incomplete experiment configuration. `field()` is the dotted
/// path of the offending entry (empty for syntax errors).
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string field, const std::string& message);
  const std::string& field() const { return field_; }

 private:
  std::string field_;
};

struct ExperimentConfig {
  std::vector<ScenarioKind> scenarios;
  std::vector<PlannerKind> planners;
  std::size_t runs = 0;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  bool comparison_mode = false;
  std::optional<double> t_max;       ///< overrides the per-scenario default
  std::vector<std::size_t> trace_runs;  ///< run indices that get a trace file
  std::string out;                   ///< output directory ("" = caller decides)
  ObservationFeatures features = ObservationFeatures::Speed;
  PlannerConfig planner;
  HumanConfig human;
  std::map<ScenarioKind, ModeSetPtr> modes;  ///< custom mode sets; defaults otherwise

  ModeSetPtr mode_set(ScenarioKind kind) const;
  double t_max_for(ScenarioKind kind) const;
};

/// Parses JSON text. `overrides` are "dotted.path=value" pairs applied before
/// validation; values are read as JSON when possible, else as strings.
ExperimentConfig parse_config(std::string_view text, const std::vector<std::string>& overrides = {});
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

/// Fully resolved configuration as canonical JSON (sorted keys, defaults
/// filled in). Excludes run-placement fields (workers, out).
std::string canonical_config(const ExperimentConfig& cfg);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::uint64_t config_hash(const ExperimentConfig& cfg);

std::string_view to_string(ObservationFeatures f);
std::string_view to_string(EntropyForm f);
std::string_view to_string(ProbeSign s);

}  // namespace riskprobe
