#include "riskprobe/baselines.hpp"
#include "riskprobe/belief.hpp"
#include "riskprobe/config.hpp"
#include "riskprobe/experiment.hpp"
#include "riskprobe/gaussmath.hpp"
#include "riskprobe/human.hpp"
#include "riskprobe/metrics.hpp"
#include "riskprobe/planner.hpp"
#include "riskprobe/risk.hpp"
#include "riskprobe/scenario.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include <sstream>

namespace py = pybind11;
using namespace riskprobe;

namespace {

std::string ss_str(const std::string_view v) { return std::string(v); }

py::dict summary_dict(const Summary& s) {
  auto stat = [](const MetricStat& m) {
    py::dict d;
    d["mean"] = m.mean;
    d["std"] = m.std;
    d["count"] = m.count;
    return d;
  };
  py::dict d;
  d["runs"] = s.runs;
  d["successes"] = s.successes;
  d["violations"] = s.violations;
  d["timeouts"] = s.timeouts;
  d["aborted"] = s.aborted;
  d["success_rate"] = s.success_rate;
  d["completion_time"] = stat(s.completion_time);
  d["min_gap"] = stat(s.min_gap);
  d["mean_velocity"] = stat(s.mean_velocity);
  d["long_jerk"] = stat(s.long_jerk);
  d["ang_jerk"] = stat(s.ang_jerk);
  return d;
}

}  // namespace

PYBIND11_MODULE(_riskprobe, m) {
  m.doc() = "Risk-bounded active intent inference for interactive driving";

  py::register_exception<InvalidInput>(m, "InvalidInput", PyExc_ValueError);
  py::register_exception<DegenerateEvidence>(m, "DegenerateEvidence", PyExc_ArithmeticError);
  static py::exception<ConfigError> config_error(m, "ConfigError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ConfigError& e) {
      const std::string msg = e.field().empty() ? e.what() : e.field() + ": " + e.what();
      PyErr_SetString(config_error.ptr(), msg.c_str());
    }
  });

  m.def("version", [] { return ss_str(version()); });
  m.def("derive_seed", &derive_seed, py::arg("base"), py::arg("a"), py::arg("b") = 0);

  py::enum_<ScenarioKind>(m, "ScenarioKind")
      .value("LANE_MERGE", ScenarioKind::LaneMerge)
      .value("INTERSECTION", ScenarioKind::Intersection);
  py::enum_<PlannerKind>(m, "PlannerKind")
      .value("OURS", PlannerKind::Ours)
      .value("PASSIVE", PlannerKind::Passive)
      .value("CONSERVATIVE", PlannerKind::Conservative);
  py::enum_<EntropyForm>(m, "EntropyForm")
      .value("LITERAL", EntropyForm::Literal)
      .value("INTENT_WEIGHTED", EntropyForm::IntentWeighted);
  py::enum_<Termination>(m, "Termination")
      .value("SUCCESS", Termination::Success)
      .value("VIOLATION", Termination::Violation)
      .value("TIMEOUT", Termination::Timeout)
      .value("ABORTED", Termination::Aborted);

  py::class_<Gaussian>(m, "Gaussian")
      .def(py::init<Vec, Mat>(), py::arg("mean"), py::arg("cov"))
      .def_property_readonly("mean", &Gaussian::mean)
      .def_property_readonly("cov", &Gaussian::cov)
      .def_property_readonly("dim", &Gaussian::dim)
      .def_property_readonly("jitter", &Gaussian::jitter)
      .def("log_density", [](const Gaussian& g, const Vec& x) { return log_density(g, x); })
      .def(
          "sample",
          [](const Gaussian& g, std::uint64_t seed, std::size_t n) {
            Rng rng(seed);
            Mat out(n, g.dim());
            for (std::size_t i = 0; i < n; ++i) out.row(i) = sample(g, rng).transpose();
            return out;
          },
          py::arg("seed"), py::arg("n") = 1);
  m.def("kl_divergence", &kl_divergence, py::arg("p"), py::arg("q"));

  py::class_<ModeTarget>(m, "ModeTarget")
      .def(py::init([](std::size_t i, std::size_t k, Gaussian obs, std::optional<Gaussian> steer, std::string label) {
             return ModeTarget{i, k, std::move(obs), std::move(steer), std::move(label)};
           }),
           py::arg("intent"), py::arg("mode"), py::arg("observation"), py::arg("steer") = std::nullopt,
           py::arg("label") = "")
      .def_readonly("intent", &ModeTarget::intent)
      .def_readonly("mode", &ModeTarget::mode)
      .def_readonly("observation", &ModeTarget::observation)
      .def_readonly("steer", &ModeTarget::steer)
      .def_readonly("label", &ModeTarget::label);

  py::class_<ModeSet, std::shared_ptr<ModeSet>>(m, "ModeSet")
      .def(py::init<std::vector<ModeTarget>, std::vector<std::string>>(), py::arg("targets"),
           py::arg("intent_names") = std::vector<std::string>{})
      .def_property_readonly("intent_count", &ModeSet::intent_count)
      .def_property_readonly("total_modes", &ModeSet::total_modes)
      .def_property_readonly("intent_names", &ModeSet::intent_names)
      .def("mode_count", &ModeSet::mode_count)
      .def("at", &ModeSet::at, py::return_value_policy::reference_internal)
      .def("flat", &ModeSet::flat, py::return_value_policy::reference_internal)
      .def("max_entropy", &ModeSet::max_entropy);
  m.def(
      "default_mode_set",
      [](ScenarioKind kind) { return std::make_shared<ModeSet>(default_mode_set(kind)); }, py::arg("kind"));

  py::class_<HierarchicalBelief>(m, "Belief")
      .def(py::init([](std::shared_ptr<ModeSet> ms, std::vector<double> pi, std::vector<double> w) {
             return HierarchicalBelief(std::move(ms), std::move(pi), std::move(w));
           }),
           py::arg("modes"), py::arg("intent_probs"), py::arg("mode_weights"))
      .def_static(
          "uniform", [](std::shared_ptr<ModeSet> ms) { return uniform_belief(std::move(ms)); }, py::arg("modes"))
      .def_property_readonly("intent_probs",
                             [](const HierarchicalBelief& b) {
                               return std::vector<double>(b.intent_probs().begin(), b.intent_probs().end());
                             })
      .def_property_readonly("mode_weights", &HierarchicalBelief::flat_mode_weights)
      .def("update", [](const HierarchicalBelief& b, const Vec& z) { return update(b, z); })
      .def("joint_weights", [](const HierarchicalBelief& b) { return joint_weights(b); })
      .def(
          "entropy", [](const HierarchicalBelief& b, EntropyForm f) { return entropy(b, f); },
          py::arg("form") = EntropyForm::Literal);

  m.def("cvar", [](const std::vector<double>& costs, double alpha) { return cvar(costs, alpha); }, py::arg("costs"),
        py::arg("alpha"));
  m.def("cvar_tail_count", &cvar_tail_count, py::arg("sample_count"), py::arg("alpha"));

  py::class_<VehicleState>(m, "VehicleState")
      .def(py::init([](double x, double y, double v, double h) { return VehicleState{x, y, v, h}; }), py::arg("x") = 0.0,
           py::arg("y") = 0.0, py::arg("v") = 0.0, py::arg("heading") = 0.0)
      .def_readwrite("x", &VehicleState::x)
      .def_readwrite("y", &VehicleState::y)
      .def_readwrite("v", &VehicleState::v)
      .def_readwrite("heading", &VehicleState::heading)
      .def("__repr__", [](const VehicleState& s) {
        std::ostringstream o;
        o << "VehicleState(x=" << s.x << ", y=" << s.y << ", v=" << s.v << ", heading=" << s.heading << ")";
        return o.str();
      });

  py::class_<Control>(m, "Control")
      .def(py::init([](double a, double r) { return Control{a, r}; }), py::arg("accel") = 0.0,
           py::arg("yaw_rate") = 0.0)
      .def_readwrite("accel", &Control::accel)
      .def_readwrite("yaw_rate", &Control::yaw_rate);
  m.def("step_vehicle", &step_vehicle, py::arg("state"), py::arg("control"), py::arg("dt"));

  py::class_<Geometry>(m, "Geometry")
      .def_static("lane_merge", &Geometry::lane_merge)
      .def_static("intersection", &Geometry::intersection)
      .def_readonly("kind", &Geometry::kind);

  py::class_<HumanParams>(m, "HumanParams")
      .def(py::init<>())
      .def_readwrite("intent", &HumanParams::intent)
      .def_readwrite("mode", &HumanParams::mode)
      .def_readwrite("nominal_speed", &HumanParams::nominal_speed)
      .def_readwrite("beta", &HumanParams::beta)
      .def_readwrite("risk_threshold", &HumanParams::risk_threshold)
      .def_readwrite("observation_noise_std", &HumanParams::observation_noise_std)
      .def_readwrite("max_accel", &HumanParams::max_accel);
  m.def("yield_factor", &yield_factor, py::arg("intent"), py::arg("mode"));
  m.def("human_response", &human_response, py::arg("geometry"), py::arg("human"), py::arg("ego"), py::arg("params"),
        py::arg("dt"));

  py::class_<ScenarioState>(m, "ScenarioState")
      .def_readwrite("ego", &ScenarioState::ego)
      .def_readwrite("human", &ScenarioState::human)
      .def_readonly("geometry", &ScenarioState::geometry)
      .def_readwrite("elapsed", &ScenarioState::elapsed);
  m.def(
      "init_scenario",
      [](ScenarioKind kind, std::uint64_t seed) {
        Rng rng(seed);
        ScenarioState s = init_scenario(kind, rng);
        s.observation.reference_speed = s.human.v;
        return s;
      },
      py::arg("kind"), py::arg("seed"));
  m.def("safety_violation", &safety_violation);
  m.def("success_check", &success_check);

  py::class_<PlannerConfig>(m, "PlannerConfig")
      .def(py::init<>())
      .def_readwrite("horizon", &PlannerConfig::horizon)
      .def_readwrite("dt", &PlannerConfig::dt)
      .def_readwrite("lambda_h", &PlannerConfig::lambda_h)
      .def_readwrite("alpha", &PlannerConfig::alpha)
      .def_readwrite("samples", &PlannerConfig::samples)
      .def_readwrite("risk_cap", &PlannerConfig::risk_cap)
      .def_readwrite("epsilon", &PlannerConfig::epsilon)
      .def_readwrite("n_obs", &PlannerConfig::n_obs);

  py::class_<PlanOutput>(m, "PlanOutput")
      .def_property_readonly("control", [](const PlanOutput& o) { return o.control; })
      .def_property_readonly("u_total", [](const PlanOutput& o) { return o.diagnostics.u_total; })
      .def_property_readonly("entropy_before", [](const PlanOutput& o) { return o.diagnostics.entropy_before; })
      .def_property_readonly("entropy_after", [](const PlanOutput& o) { return o.diagnostics.entropy_after; })
      .def_property_readonly("infeasible", [](const PlanOutput& o) { return o.diagnostics.infeasible; })
      .def_property_readonly("mode_cvar", [](const PlanOutput& o) {
        std::vector<double> v;
        for (const auto& d : o.diagnostics.modes) v.push_back(d.cvar_executed);
        return v;
      });
  m.def(
      "plan",
      [](PlannerKind kind, const ScenarioState& s, const HierarchicalBelief& b, const PlannerConfig& cfg,
         std::uint64_t seed) {
        validate(cfg);
        Rng rng(seed);
        py::gil_scoped_release release;
        switch (kind) {
          case PlannerKind::Passive: return passive_plan(s, b, cfg, rng);
          case PlannerKind::Conservative: return conservative_plan(s, b, cfg, rng);
          default: return plan_step(s, b, cfg, rng);
        }
      },
      py::arg("kind"), py::arg("state"), py::arg("belief"), py::arg("config") = PlannerConfig{}, py::arg("seed") = 0);

  py::class_<RunResult>(m, "RunResult")
      .def_readonly("success", &RunResult::success)
      .def_readonly("completion_time", &RunResult::completion_time)
      .def_readonly("min_gap", &RunResult::min_gap)
      .def_readonly("mean_velocity", &RunResult::mean_velocity)
      .def_readonly("mean_abs_long_jerk", &RunResult::mean_abs_long_jerk)
      .def_readonly("mean_abs_ang_jerk", &RunResult::mean_abs_ang_jerk)
      .def_readonly("termination", &RunResult::termination)
      .def_readonly("steps", &RunResult::steps)
      .def_readonly("truth_intent", &RunResult::truth_intent)
      .def_readonly("truth_mode", &RunResult::truth_mode)
      .def_readonly("final_entropy", &RunResult::final_entropy);

  m.def(
      "run",
      [](ScenarioKind scenario, PlannerKind planner, std::uint64_t seed, std::optional<double> t_max,
         std::optional<std::size_t> intent, std::optional<std::size_t> mode, const PlannerConfig& cfg) {
        RunConfig rc;
        rc.scenario = scenario;
        rc.planner = planner;
        rc.seed = seed;
        rc.t_max = t_max.value_or(default_t_max(scenario));
        rc.human.intent = intent;
        rc.human.mode = mode;
        rc.planner_config = cfg;
        py::gil_scoped_release release;
        const RunOutput out = run(rc);
        std::vector<double> entropies;
        for (const auto& step : out.log) entropies.push_back(step.entropy);
        return std::make_pair(out.result, entropies);
      },
      py::arg("scenario") = ScenarioKind::LaneMerge, py::arg("planner") = PlannerKind::Ours, py::arg("seed") = 0,
      py::arg("t_max") = std::nullopt, py::arg("intent") = std::nullopt, py::arg("mode") = std::nullopt,
      py::arg("config") = PlannerConfig{},
      "Runs one episode; returns (RunResult, per-step belief entropy).");

  m.def(
      "run_experiment",
      [](const std::string& config_text, const std::filesystem::path& out_dir, const std::vector<std::string>& overrides) {
        const ExperimentConfig cfg = parse_config(config_text, overrides);
        ExperimentOutcome outcome;
        {
          py::gil_scoped_release release;
          outcome = run_experiment(cfg, out_dir);
        }
        py::list cells;
        for (const auto& b : outcome.batches) {
          py::dict d = summary_dict(b.summary);
          d["scenario"] = ss_str(to_string(b.scenario));
          d["planner"] = ss_str(to_string(b.planner));
          cells.append(d);
        }
        return cells;
      },
      py::arg("config_text"), py::arg("out_dir"), py::arg("overrides") = std::vector<std::string>{},
      "Runs every scenario x planner cell of a JSON config and writes outputs to out_dir.");
  m.def("config_hash", [](const std::string& text) { return config_hash(parse_config(text)); });
}
