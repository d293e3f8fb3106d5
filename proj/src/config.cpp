#include "riskprobe/config.hpp"

#ifdef RISKPROBE_VENDORED_JSON
#include <json.hpp>
#else
#include <nlohmann/json.hpp>
#endif

#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

namespace riskprobe {

using nlohmann::json;

namespace {

std::string join(const std::string& path, const std::string& key) { return path.empty() ? key : path + "." + key; }

// Walks one JSON object, remembering which keys were read so leftovers can
// be reported as unknown fields.
class Section {
 public:
  Section(const json* node, std::string path) : node_(node), path_(std::move(path)) {
    if (node_ != nullptr && !node_->is_object()) throw ConfigError(path_, "expected an object");
  }

  bool has(const std::string& key) const { return node_ != nullptr && node_->contains(key); }
  const std::string& path() const { return path_; }

  const json& raw(const std::string& key) {
    seen_.insert(key);
    return node_->at(key);
  }

  Section child(const std::string& key) {
    if (!has(key)) return Section(nullptr, join(path_, key));
    return Section(&raw(key), join(path_, key));
  }

  template <typename T>
  T get(const std::string& key, T fallback) {
    if (!has(key)) return fallback;
    return convert<T>(raw(key), join(path_, key));
  }

  template <typename T>
  T require(const std::string& key) {
    if (!has(key)) throw ConfigError(join(path_, key), "required field is missing");
    return convert<T>(raw(key), join(path_, key));
  }

  void finish() const {
    if (node_ == nullptr) return;
    for (const auto& [key, value] : node_->items()) {
      if (!seen_.count(key)) throw ConfigError(join(path_, key), "unknown field");
    }
  }

  template <typename T>
  static T convert(const json& v, const std::string& path) {
    try {
      if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) throw ConfigError(path, "expected a number");
      } else if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        if (!v.is_number_integer() || (std::is_unsigned_v<T> && v.get<std::int64_t>() < 0)) {
          throw ConfigError(path, "expected a non-negative integer");
        }
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) throw ConfigError(path, "expected true or false");
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw ConfigError(path, "expected a string");
      }
      return v.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path, e.what());
    }
  }

 private:
  const json* node_;
  std::string path_;
  std::set<std::string> seen_;
};

template <typename Parse>
auto checked(const std::string& path, Parse parse) {
  try {
    return parse();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    throw ConfigError(path, e.what());
  }
}

Vec read_vector(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a non-empty array of numbers");
  Vec out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t j = 0; j < v.size(); ++j) out[static_cast<Eigen::Index>(j)] = Section::convert<double>(v[j], path);
  return out;
}

Mat read_matrix(const json& v, const std::string& path, Eigen::Index dim) {
  if (!v.is_array() || v.size() != static_cast<std::size_t>(dim)) {
    throw ConfigError(path, "expected a " + std::to_string(dim) + "x" + std::to_string(dim) + " array");
  }
  Mat out(dim, dim);
  for (Eigen::Index r = 0; r < dim; ++r) {
    const Vec row = read_vector(v[static_cast<std::size_t>(r)], path);
    if (row.size() != dim) throw ConfigError(path, "covariance rows must match the mean dimension");
    out.row(r) = row.transpose();
  }
  return out;
}

Gaussian read_gaussian(Section s) {
  const Vec mean = read_vector(s.raw("mean"), join(s.path(), "mean"));
  Mat cov = read_matrix(s.raw("cov"), join(s.path(), "cov"), mean.size());
  s.finish();
  return checked(s.path(), [&] { return Gaussian(mean, std::move(cov)); });
}

std::size_t read_intent(const json& v, const std::string& path) {
  static const std::map<std::string, std::size_t> names{
      {"aggressive", intent::kAggressive}, {"neutral", intent::kNeutral}, {"cooperative", intent::kCooperative}};
  if (v.is_string()) {
    auto it = names.find(v.get<std::string>());
    if (it == names.end()) throw ConfigError(path, "unknown intent '" + v.get<std::string>() + "'");
    return it->second;
  }
  const auto id = Section::convert<std::size_t>(v, path);
  if (id >= intent::kCount) throw ConfigError(path, "intent id out of range");
  return id;
}

ModeSetPtr read_modes(Section s) {
  std::vector<std::string> names;
  if (s.has("intents")) {
    const auto& v = s.raw("intents");
    if (!v.is_array()) throw ConfigError(join(s.path(), "intents"), "expected an array of names");
    for (const auto& n : v) names.push_back(Section::convert<std::string>(n, join(s.path(), "intents")));
  }
  const auto& list = s.raw("targets");
  const std::string list_path = join(s.path(), "targets");
  if (!list.is_array()) throw ConfigError(list_path, "expected an array of mode targets");
  std::vector<ModeTarget> targets;
  for (std::size_t n = 0; n < list.size(); ++n) {
    Section t(&list[n], list_path + "[" + std::to_string(n) + "]");
    ModeTarget m{t.require<std::size_t>("intent"), t.require<std::size_t>("mode"),
                 read_gaussian(t.child("observation")), std::nullopt, t.get<std::string>("label", "")};
    if (t.has("steer")) m.steer = read_gaussian(t.child("steer"));
    t.finish();
    targets.push_back(std::move(m));
  }
  s.finish();
  return checked(s.path(), [&] { return std::make_shared<const ModeSet>(std::move(targets), std::move(names)); });
}

template <typename T, typename Parse>
std::vector<T> read_name_list(Section& s, const std::string& key, Parse parse) {
  const std::string path = join(s.path(), key);
  if (!s.has(key)) throw ConfigError(path, "required field is missing");
  const json& v = s.raw(key);
  std::vector<T> out;
  const auto one = [&](const json& item) {
    const auto name = Section::convert<std::string>(item, path);
    out.push_back(checked(path, [&] { return parse(name); }));
  };
  if (v.is_array()) {
    for (const auto& item : v) one(item);
  } else if (v.is_string() && v.get<std::string>().find(',') != std::string::npos) {
    std::stringstream in(v.get<std::string>());
    for (std::string item; std::getline(in, item, ',');) one(json(item));
  } else {
    one(v);
  }
  if (out.empty()) throw ConfigError(path, "must name at least one entry");
  return out;
}

Control read_control(Section& s, const std::string& key, Control fallback) {
  if (!s.has(key)) return fallback;
  const std::string path = join(s.path(), key);
  const Vec v = read_vector(s.raw(key), path);
  if (v.size() != 2) throw ConfigError(path, "expected [accel, yaw_rate]");
  return {v[0], v[1]};
}

void read_planner(Section s, PlannerConfig& p) {
  p.horizon = s.get("horizon", p.horizon);
  p.dt = s.get("dt", p.dt);
  p.lambda_h = s.get("lambda_h", p.lambda_h);
  p.alpha = s.get("alpha", p.alpha);
  p.samples = s.get("samples", p.samples);
  p.risk_cap = s.get("risk_cap", p.risk_cap);
  p.epsilon = s.get("epsilon", p.epsilon);
  p.u_min = read_control(s, "u_min", p.u_min);
  p.u_max = read_control(s, "u_max", p.u_max);
  p.beta = s.get("beta", p.beta);
  p.accel_noise = s.get("accel_noise", p.accel_noise);
  p.n_obs = s.get("n_obs", p.n_obs);
  p.human_risk_threshold = s.get("human_risk_threshold", p.human_risk_threshold);
  p.human_noise_std = s.get("human_noise_std", p.human_noise_std);
  if (s.has("gamma")) p.cost.discount = s.get("gamma", p.cost.discount);
  const auto form = s.get<std::string>("entropy_form", std::string(to_string(p.entropy_form)));
  if (form == "literal") {
    p.entropy_form = EntropyForm::Literal;
  } else if (form == "intent_weighted") {
    p.entropy_form = EntropyForm::IntentWeighted;
  } else {
    throw ConfigError(join(s.path(), "entropy_form"), "expected literal|intent_weighted");
  }
  const auto sign = s.get<std::string>("probe_sign", std::string(to_string(p.probe_sign)));
  if (sign == "reduce_entropy") {
    p.probe_sign = ProbeSign::ReduceEntropy;
  } else if (sign == "literal") {
    p.probe_sign = ProbeSign::Literal;
  } else {
    throw ConfigError(join(s.path(), "probe_sign"), "expected reduce_entropy|literal");
  }

  Section c = s.child("cost");
  p.cost.proximity_weight = c.get("proximity_weight", p.cost.proximity_weight);
  p.cost.progress_weight = c.get("progress_weight", p.cost.progress_weight);
  p.cost.safe_distance = c.get("safe_distance", p.cost.safe_distance);
  p.cost.proximity_scale = c.get("proximity_scale", p.cost.proximity_scale);
  p.cost.reference_speed = c.get("reference_speed", p.cost.reference_speed);
  c.finish();

  Section v = s.child("solver");
  p.solver.iterations = v.get("iterations", p.solver.iterations);
  p.solver.step_size = v.get("step_size", p.solver.step_size);
  p.solver.init_candidates = v.get("init_candidates", p.solver.init_candidates);
  p.solver.blocks = v.get("blocks", p.solver.blocks);
  p.solver.fd_step = v.get("fd_step", p.solver.fd_step);
  p.solver.penalty = v.get("penalty", p.solver.penalty);
  v.finish();
  s.finish();
  checked(s.path(), [&] {
    validate(p);
    return 0;
  });
}

void read_human(Section s, HumanConfig& h) {
  const auto pinned = [&](const std::string& key, bool is_intent) -> std::optional<std::size_t> {
    if (!s.has(key)) return std::nullopt;
    const json& v = s.raw(key);
    const std::string path = join(s.path(), key);
    if (v.is_string() && v.get<std::string>() == "random") return std::nullopt;
    if (is_intent) return read_intent(v, path);
    const auto id = Section::convert<std::size_t>(v, path);
    if (id >= intent::kModesPerIntent) throw ConfigError(path, "mode id out of range");
    return id;
  };
  h.intent = pinned("intent", true);
  h.mode = pinned("mode", false);
  h.beta = s.get("beta", h.beta);
  h.risk_threshold = s.get("risk_threshold", h.risk_threshold);
  h.observation_noise_std = s.get("observation_noise_std", h.observation_noise_std);
  h.max_accel = s.get("max_accel", h.max_accel);
  s.finish();
  if (!(h.beta > 0.0)) throw ConfigError(join(s.path(), "beta"), "must be positive");
  if (!(h.risk_threshold > 0.0)) throw ConfigError(join(s.path(), "risk_threshold"), "must be positive");
  if (!(h.observation_noise_std >= 0.0)) throw ConfigError(join(s.path(), "observation_noise_std"), "must be >= 0");
  if (!(h.max_accel > 0.0)) throw ConfigError(join(s.path(), "max_accel"), "must be positive");
}

void set_path(json& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError(assignment, "override must look like key.path=value");
  const std::string key = assignment.substr(0, eq);
  const std::string text = assignment.substr(eq + 1);
  json value = json::parse(text, nullptr, false);
  if (value.is_discarded()) value = text;
  json* node = &root;
  std::stringstream parts(key);
  std::string part;
  std::vector<std::string> names;
  while (std::getline(parts, part, '.')) names.push_back(part);
  for (std::size_t n = 0; n + 1 < names.size(); ++n) {
    if (!node->is_object()) throw ConfigError(key, "override path crosses a non-object");
    node = &(*node)[names[n]];
    if (node->is_null()) *node = json::object();
  }
  if (!node->is_object()) throw ConfigError(key, "override path crosses a non-object");
  (*node)[names.back()] = std::move(value);
}

json gaussian_json(const Gaussian& g) {
  json cov = json::array();
  for (Eigen::Index r = 0; r < g.dim(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < g.dim(); ++c) row.push_back(g.cov()(r, c));
    cov.push_back(row);
  }
  json mean = json::array();
  for (Eigen::Index r = 0; r < g.dim(); ++r) mean.push_back(g.mean()[r]);
  return {{"mean", mean}, {"cov", cov}};
}

json modes_json(const ModeSet& ms) {
  json targets = json::array();
  for (const auto& t : ms.targets()) {
    json item{{"intent", t.intent}, {"mode", t.mode}, {"label", t.label}, {"observation", gaussian_json(t.observation)}};
    if (t.steer) item["steer"] = gaussian_json(*t.steer);
    targets.push_back(item);
  }
  return {{"intents", ms.intent_names()}, {"targets", targets}};
}

}  // namespace

ConfigError::ConfigError(std::string field, const std::string& message)
    : std::runtime_error(field.empty() ? "config error: " + message : "config error at '" + field + "': " + message),
      field_(std::move(field)) {}

ModeSetPtr ExperimentConfig::mode_set(ScenarioKind kind) const {
  auto it = modes.find(kind);
  if (it != modes.end()) return it->second;
  return std::make_shared<const ModeSet>(default_mode_set(kind, features));
}

double ExperimentConfig::t_max_for(ScenarioKind kind) const {
  return t_max ? *t_max : default_t_max(kind, comparison_mode);
}

std::string_view to_string(ObservationFeatures f) {
  return f == ObservationFeatures::Speed ? "speed" : "speed_and_gap";
}

std::string_view to_string(EntropyForm f) { return f == EntropyForm::Literal ? "literal" : "intent_weighted"; }

std::string_view to_string(ProbeSign s) { return s == ProbeSign::ReduceEntropy ? "reduce_entropy" : "literal"; }

ExperimentConfig parse_config(std::string_view text, const std::vector<std::string>& overrides) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("", e.what());
  }
  if (!root.is_object()) throw ConfigError("", "top level must be an object");
  for (const auto& o : overrides) set_path(root, o);

  ExperimentConfig cfg;
  Section top(&root, "");
  if (!top.has("experiment")) throw ConfigError("experiment", "required section is missing");
  Section e = top.child("experiment");
  cfg.scenarios = read_name_list<ScenarioKind>(e, "scenario", parse_scenario_kind);
  cfg.planners = read_name_list<PlannerKind>(e, "planner", parse_planner_kind);
  cfg.runs = e.require<std::size_t>("runs");
  cfg.seed = e.require<std::uint64_t>("seed");
  cfg.workers = e.get<std::size_t>("workers", 1);
  cfg.comparison_mode = e.get("comparison_mode", false);
  if (e.has("t_max")) {
    cfg.t_max = e.get("t_max", 0.0);
    if (!(*cfg.t_max > 0.0)) throw ConfigError("experiment.t_max", "must be positive");
  }
  if (e.has("trace_runs")) {
    const auto& v = e.raw("trace_runs");
    if (!v.is_array()) throw ConfigError("experiment.trace_runs", "expected an array of run indices");
    for (const auto& r : v) cfg.trace_runs.push_back(Section::convert<std::size_t>(r, "experiment.trace_runs"));
  }
  cfg.out = e.get<std::string>("out", "");
  e.finish();
  if (cfg.runs == 0) throw ConfigError("experiment.runs", "must be >= 1");
  if (cfg.workers == 0) throw ConfigError("experiment.workers", "must be >= 1");

  read_planner(top.child("planner"), cfg.planner);
  read_human(top.child("human"), cfg.human);

  Section sc = top.child("scenario");
  const auto obs = sc.get<std::string>("observation", "speed");
  if (obs == "speed") {
    cfg.features = ObservationFeatures::Speed;
  } else if (obs == "speed_and_gap") {
    cfg.features = ObservationFeatures::SpeedAndGap;
  } else {
    throw ConfigError("scenario.observation", "expected speed|speed_and_gap");
  }
  sc.finish();

  if (top.has("modes")) {
    Section m = top.child("modes");
    for (const char* name : {"lane_merge", "intersection"}) {
      if (!m.has(name)) continue;
      auto set = read_modes(m.child(name));
      if (set->observation_dim() != ObservationModel{cfg.features, 0.0}.dim()) {
        throw ConfigError(join("modes", name), "observation targets do not match scenario.observation");
      }
      cfg.modes[parse_scenario_kind(name)] = std::move(set);
    }
    m.finish();
  }
  top.finish();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot read config file '" + path.string() + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str(), overrides);
}

std::string canonical_config(const ExperimentConfig& cfg) {
  const auto& p = cfg.planner;
  json scenarios = json::array();
  for (auto k : cfg.scenarios) scenarios.push_back(std::string(to_string(k)));
  json planners = json::array();
  for (auto k : cfg.planners) planners.push_back(std::string(to_string(k)));
  json modes = json::object();
  for (auto k : cfg.scenarios) modes[std::string(to_string(k))] = modes_json(*cfg.mode_set(k));
  json t_max = json::object();
  for (auto k : cfg.scenarios) t_max[std::string(to_string(k))] = cfg.t_max_for(k);

  json root{
      {"experiment",
       {{"scenario", scenarios},
        {"planner", planners},
        {"runs", cfg.runs},
        {"seed", cfg.seed},
        {"comparison_mode", cfg.comparison_mode},
        {"t_max", t_max},
        {"trace_runs", cfg.trace_runs}}},
      {"planner",
       {{"horizon", p.horizon},
        {"dt", p.dt},
        {"lambda_h", p.lambda_h},
        {"alpha", p.alpha},
        {"samples", p.samples},
        {"risk_cap", p.risk_cap},
        {"epsilon", p.epsilon},
        {"u_min", {p.u_min.accel, p.u_min.yaw_rate}},
        {"u_max", {p.u_max.accel, p.u_max.yaw_rate}},
        {"beta", p.beta},
        {"accel_noise", p.accel_noise},
        {"n_obs", p.n_obs},
        {"gamma", p.cost.discount},
        {"human_risk_threshold", p.human_risk_threshold},
        {"human_noise_std", p.human_noise_std},
        {"entropy_form", to_string(p.entropy_form)},
        {"probe_sign", to_string(p.probe_sign)},
        {"cost",
         {{"proximity_weight", p.cost.proximity_weight},
          {"progress_weight", p.cost.progress_weight},
          {"safe_distance", p.cost.safe_distance},
          {"proximity_scale", p.cost.proximity_scale},
          {"reference_speed", p.cost.reference_speed}}},
        {"solver",
         {{"iterations", p.solver.iterations},
          {"step_size", p.solver.step_size},
          {"init_candidates", p.solver.init_candidates},
          {"blocks", p.solver.blocks},
          {"fd_step", p.solver.fd_step},
          {"penalty", p.solver.penalty}}}}},
      {"human",
       {{"intent", cfg.human.intent ? json(*cfg.human.intent) : json("random")},
        {"mode", cfg.human.mode ? json(*cfg.human.mode) : json("random")},
        {"beta", cfg.human.beta},
        {"risk_threshold", cfg.human.risk_threshold},
        {"observation_noise_std", cfg.human.observation_noise_std},
        {"max_accel", cfg.human.max_accel}}},
      {"scenario", {{"observation", to_string(cfg.features)}}},
      {"modes", modes},
  };
  return root.dump();
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t config_hash(const ExperimentConfig& cfg) { return fnv1a64(canonical_config(cfg)); }

}  // namespace riskprobe
