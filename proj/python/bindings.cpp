#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "crn/experiments.hpp"
#include "crn/games.hpp"
#include "crn/oracle.hpp"
#include "crn/radio.hpp"
#include "crn/scenario.hpp"

namespace py = pybind11;
using namespace crn;

namespace {

GameKind to_game(const py::object& g) {
  if (py::isinstance<py::str>(g)) return parse_game_kind(g.cast<std::string>());
  return g.cast<GameKind>();
}

py::list profile_to_list(const std::vector<Strategy>& profile) {
  py::list out;
  for (const Strategy& s : profile) {
    if (s.is_off()) out.append(py::make_tuple(0, py::none()));
    else out.append(py::make_tuple(s.power_level, s.channel));
  }
  return out;
}

// Scenario plus the radio model built over it; the model keeps a pointer to
// the scenario, so both live together.
PyObject* parse_error_type = nullptr;

struct PyScenario {
  explicit PyScenario(Scenario s) : scenario(std::make_unique<Scenario>(std::move(s))), model(*scenario) {}
  std::unique_ptr<Scenario> scenario;
  RadioModel model;
};

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Joint channel and power allocation games for multihop cognitive radio networks";

  py::register_exception<ScenarioError>(m, "ScenarioError", PyExc_RuntimeError);
  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<InvalidStrategyError>(m, "InvalidStrategyError", PyExc_ValueError);
  py::register_exception<oracle::GuardError>(m, "GuardError", PyExc_RuntimeError);
  // tried before the plain ParseError mapping: adds the offending field
  parse_error_type = m.attr("ParseError").ptr();
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const ParseError& e) {
      const std::string where = e.field().empty() ? "" : " [" + e.field() + "]";
      PyErr_SetString(parse_error_type, (std::string(e.what()) + where).c_str());
    }
  });

  m.def("dbm_to_watts", &dbm_to_watts);
  m.def("watts_to_dbm", &watts_to_dbm);
  m.def("db_to_linear", &db_to_linear);
  m.def("linear_to_db", &linear_to_db);

  py::class_<ScenarioParams>(m, "ScenarioParams")
      .def(py::init<>())
      .def_readwrite("n_nodes", &ScenarioParams::n_nodes)
      .def_readwrite("side_length", &ScenarioParams::side_length)
      .def_readwrite("n_channels", &ScenarioParams::n_channels)
      .def_readwrite("region_size", &ScenarioParams::region_size)
      .def_readwrite("channel_subset_min", &ScenarioParams::channel_subset_min)
      .def_readwrite("channel_subset_max", &ScenarioParams::channel_subset_max)
      .def_readwrite("p_max", &ScenarioParams::p_max)
      .def_readwrite("q_levels", &ScenarioParams::q_levels)
      .def_readwrite("path_loss_exp", &ScenarioParams::path_loss_exp)
      .def_readwrite("sinr_threshold", &ScenarioParams::sinr_threshold)
      .def_readwrite("noise_power", &ScenarioParams::noise_power)
      .def_readwrite("max_hops", &ScenarioParams::max_hops)
      .def_readwrite("n_flows", &ScenarioParams::n_flows)
      .def_readwrite("seed", &ScenarioParams::seed)
      .def("max_range", &ScenarioParams::max_range)
      .def("validate", &ScenarioParams::validate)
      .def("__eq__", [](const ScenarioParams& a, const ScenarioParams& b) { return a == b; });

  py::enum_<GameKind>(m, "GameKind")
      .value("LLG", GameKind::LLG)
      .value("LFG", GameKind::LFG)
      .value("PFG", GameKind::PFG)
      .value("CLG", GameKind::CLG);

  py::class_<PyScenario>(m, "Scenario")
      .def_property_readonly("params", [](const PyScenario& s) { return s.scenario->params; })
      .def_property_readonly("n_nodes", [](const PyScenario& s) { return s.scenario->nodes.size(); })
      .def_property_readonly("n_flows", [](const PyScenario& s) { return s.scenario->flows.size(); })
      .def_property_readonly("n_links", [](const PyScenario& s) { return s.scenario->links.size(); })
      .def("route", [](const PyScenario& s, FlowId f) { return s.scenario->route_of(f); })
      .def("position", [](const PyScenario& s, NodeId n) {
        const Position& p = s.scenario->nodes.at(n).position;
        return py::make_tuple(p.x, p.y);
      })
      .def("node_channels", [](const PyScenario& s, NodeId n) { return s.scenario->nodes.at(n).channels; })
      .def("mean_links_per_flow", [](const PyScenario& s) { return s.scenario->mean_links_per_flow(); })
      .def("shortest_route", [](const PyScenario& s, NodeId a, NodeId b) { return shortest_route(*s.scenario, a, b); })
      .def("to_json", [](const PyScenario& s) { return scenario_to_json(*s.scenario); })
      .def("save", [](const PyScenario& s, const std::string& path) { save_scenario(*s.scenario, path); })
      .def_static("from_json", [](const std::string& text) { return PyScenario(scenario_from_json(text)); })
      .def_static("load", [](const std::string& path) { return PyScenario(load_scenario(path)); });

  m.def(
      "generate_scenario",
      [](const ScenarioParams& p) {
        py::gil_scoped_release release;
        return PyScenario(generate_scenario(p));
      },
      py::arg("params"));

  py::class_<RunMetrics>(m, "RunMetrics")
      .def(py::init<>())
      .def_readwrite("instance_id", &RunMetrics::instance_id)
      .def_readwrite("game", &RunMetrics::game)
      .def_readwrite("flows_requested", &RunMetrics::flows_requested)
      .def_readwrite("flows_active", &RunMetrics::flows_active)
      .def_readwrite("mean_links_per_active_flow", &RunMetrics::mean_links_per_active_flow)
      .def_readwrite("normalized_flow_steps", &RunMetrics::normalized_flow_steps)
      .def_readwrite("converged", &RunMetrics::converged)
      .def("__eq__", [](const RunMetrics& a, const RunMetrics& b) { return a == b; })
      .def("__repr__", [](const RunMetrics& r) {
        return "<RunMetrics " + std::string(to_string(r.game)) + " flows=" + std::to_string(r.flows_requested) +
               " active=" + std::to_string(r.flows_active) + (r.converged ? " converged>" : " not-converged>");
      });

  m.def(
      "run_game",
      [](const PyScenario& s, const py::object& game, std::uint32_t max_cycles, std::uint64_t search_cap) {
        const GameConfig cfg{to_game(game), max_cycles, search_cap, s.scenario->params.seed};
        GameResult r;
        {
          py::gil_scoped_release release;
          r = run_game(s.model, cfg);
        }
        py::dict out;
        out["metrics"] = r.metrics;
        out["final_profile"] = profile_to_list(r.final_profile);
        out["cycles"] = r.trajectory.cycles;
        out["converged"] = r.trajectory.converged;
        out["termination"] = std::string(to_string(r.trajectory.termination));
        out["link_steps"] = r.trajectory.link_steps;
        out["flow_steps"] = r.trajectory.flow_steps;
        out["search_nodes"] = r.trajectory.search_nodes;
        out["search_cap_hits"] = r.trajectory.search_cap_hits;
        out["trajectory_jsonl"] = trajectory_to_jsonl(r.trajectory);
        return out;
      },
      py::arg("scenario"), py::arg("game"), py::arg("max_cycles") = 50, py::arg("search_cap") = 1'000'000);

  m.def(
      "run_batch",
      [](const ScenarioParams& base, std::vector<std::uint32_t> flow_counts, std::uint32_t n_instances,
         const std::vector<py::object>& games, std::uint64_t master_seed, std::uint32_t max_cycles,
         std::uint64_t search_cap, unsigned jobs) {
        BatchConfig cfg;
        cfg.base = base;
        cfg.flow_counts = std::move(flow_counts);
        cfg.n_instances = n_instances;
        cfg.games.clear();
        for (const auto& g : games) cfg.games.push_back(to_game(g));
        cfg.master_seed = master_seed;
        cfg.max_cycles = max_cycles;
        cfg.search_node_cap = search_cap;
        cfg.jobs = jobs;
        BatchResult r;
        {
          py::gil_scoped_release release;
          r = run_batch(cfg);
        }
        py::list failures;
        for (const auto& f : r.failures) failures.append(py::make_tuple(f.flows_requested, f.instance_id, f.message));
        return py::make_tuple(r.rows, failures);
      },
      py::arg("params"), py::arg("flow_counts"), py::arg("n_instances"),
      py::arg("games") = std::vector<py::object>{py::str("llg"), py::str("clg"), py::str("lfg"), py::str("pfg")},
      py::arg("master_seed") = 1, py::arg("max_cycles") = 50, py::arg("search_cap") = 1'000'000,
      py::arg("jobs") = 0);

  m.def("derive_seed", &derive_seed);
  m.def("metrics_to_csv", &metrics_to_csv);
  m.def("metrics_from_csv", &metrics_from_csv);

  py::class_<AggregateRow>(m, "AggregateRow")
      .def_readonly("game", &AggregateRow::game)
      .def_readonly("flows_requested", &AggregateRow::flows_requested)
      .def_readonly("metric", &AggregateRow::metric)
      .def_readonly("mean", &AggregateRow::mean)
      .def_readonly("std", &AggregateRow::std)
      .def_readonly("n", &AggregateRow::n);
  m.def("aggregate", &aggregate);
  m.def("aggregate_to_csv", &aggregate_to_csv);

  m.def("global_optimum", [](const PyScenario& s) {
    const auto opt = oracle::global_optimum(*s.scenario);
    return py::make_tuple(opt.max_active, profile_to_list(opt.witness));
  });
  m.def("tiny_params", &oracle::tiny_params, py::arg("seed"), py::arg("n_flows") = 3);
  m.def(
      "verify_tiny_instances",
      [](std::uint64_t seed, std::uint32_t n) {
        oracle::VerifyReport r;
        {
          py::gil_scoped_release release;
          r = oracle::verify_tiny_instances(seed, n);
        }
        py::dict out;
        out["instances"] = r.instances;
        out["checks"] = r.checks;
        out["failures"] = r.failures;
        out["ok"] = r.ok();
        return out;
      },
      py::arg("seed"), py::arg("n_instances") = 10);
}
