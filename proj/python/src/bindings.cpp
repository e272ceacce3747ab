// JSON-string bridge; the Python package converts to and from dicts.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <random>
#include <sstream>

#include "json.hpp"
#include "xlayer/algorithms.hpp"
#include "xlayer/checks.hpp"
#include "xlayer/experiment.hpp"

namespace py = pybind11;
using nlohmann::json;
using namespace xlayer;

namespace {

std::string generate(const std::string& gen) {
  const GenConfig g = gen_from_json(json::parse(gen));
  g.validate();
  const Instance inst = generate_instance(g);
  json pos = json::array();
  for (const auto& p : inst.positions) pos.push_back({p.x, p.y});
  return json{{"generator", to_json(g)},
              {"attempts", inst.attempts},
              {"positions", pos},
              {"network", to_json(inst.net)},
              {"initial", to_json(aodv_route(inst.net))}}
      .dump();
}

std::string min_hop(const std::string& net) { return to_json(aodv_route(network_from_json(json::parse(net)))).dump(); }

std::string eval(const std::string& net_s, const std::string& state_s) {
  const Network net = network_from_json(json::parse(net_s));
  const Evaluation ev = evaluate(net, state_from_json(json::parse(state_s)));
  json j{{"finite", ev.cost.finite()},
         {"link_flow", ev.flow.link_flow},
         {"capacity", ev.radio.capacity},
         {"node_power", ev.radio.node_power}};
  j["cost"] = ev.cost.finite() ? json(ev.cost.value()) : json(nullptr);
  return j.dump();
}

std::string run(const std::string& net_s, const std::string& state_s, const std::string& alg_s,
                const std::string& channel_s) {
  const Network net = network_from_json(json::parse(net_s));
  const NetworkState start = state_from_json(json::parse(state_s));
  OptimizerConfig cfg = optimizer_from_json(json::parse(alg_s));
  const ChannelModel ch = channel_from_json(json::parse(channel_s));
  cfg.scope = ch.scope;
  cfg.validate();
  const Trajectory tr = ch.degenerate() ? run_jopr(net, start, cfg) : run_distributed(net, start, cfg, ch);
  return to_json(tr).dump();
}

py::tuple compare(const std::string& exp_s) {
  ExperimentReport rep;
  {
    py::gil_scoped_release nogil;
    rep = run_experiment(experiment_from_json(json::parse(exp_s)));
  }
  std::ostringstream csv, seeds;
  write_csv(rep, csv);
  write_seed_csv(rep, seeds);
  return py::make_tuple(summary_json(rep).dump(), csv.str(), seeds.str());
}

std::string check(const std::string& net_s, const std::string& state_s, int trials, std::uint64_t seed,
                  bool interior) {
  const Network net = network_from_json(json::parse(net_s));
  NetworkState s = state_from_json(json::parse(state_s));
  if (interior) {
    std::mt19937_64 rng(seed);
    s = interior_state(net, s, rng);
  }
  const InstanceCheck r = check_instance(net, s, trials, seed);
  return json{{"gradient_checks", r.gradient_checks},
              {"worst_gradient_error", r.worst_gradient_error},
              {"identity_residual", r.identity_residual},
              {"hessian_blocks", r.hessian_blocks},
              {"hessian_trials", r.hessian_trials},
              {"hessian_violations", r.hessian_violations},
              {"worst_hessian_gap", r.worst_hessian_gap},
              {"passed", r.passed()}}
      .dump();
}

std::vector<double> project(const std::vector<double>& y, const std::vector<double>& m, double mass) {
  const std::vector<char> fixed(y.size(), 0);
  return weighted_simplex_project(y, m, fixed, mass);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "native core of the xlayer package";
  static py::exception<Error> err(m, "XlayerError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = py::reinterpret_borrow<py::object>(err)(e.what());
      exc.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(err.ptr(), exc.ptr());
    }
  });
  m.def("generate", &generate, py::arg("gen"));
  m.def("min_hop_route", &min_hop, py::arg("network"));
  m.def("evaluate", &eval, py::arg("network"), py::arg("state"));
  m.def("run", &run, py::arg("network"), py::arg("state"), py::arg("algorithm"), py::arg("channel"));
  m.def("compare", &compare, py::arg("experiment"));
  m.def("check", &check, py::arg("network"), py::arg("state"), py::arg("trials"), py::arg("seed"),
        py::arg("interior"));
  m.def("project_simplex", &project, py::arg("y"), py::arg("weights"), py::arg("mass") = 1.0);
}
