// Command-line harness: generate instances, run the optimizers, compare arms, check an instance.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "CLI11.hpp"
#include "json.hpp"
#include "xlayer/checks.hpp"
#include "xlayer/experiment.hpp"

using namespace xlayer;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitInfeasible = 2;
constexpr int kExitGuard = 3;

json read_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::InvalidArgument, "cannot open " + path);
  return json::parse(in);
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::InvalidArgument, "cannot write " + path);
  out << text;
}

// Instance options shared by the verbs that need a network.
struct InstanceArgs {
  std::string instance;  // JSON file written by `generate`
  std::string config;    // JSON with an "instance" section
  std::uint64_t seed = 1;
  int nodes = 0;
  std::string cost;

  void add(CLI::App* app) {
    app->add_option("--instance", instance, "instance JSON written by generate");
    app->add_option("--config", config, "JSON config with an \"instance\" section");
    app->add_option("--seed", seed, "generator seed");
    app->add_option("--nodes", nodes, "node count (default 25)");
    app->add_option("--cost", cost, "link cost: packets or delay")->check(CLI::IsMember({"packets", "delay"}));
  }

  GenConfig gen() const {
    GenConfig g;
    if (!config.empty()) {
      const json j = read_json(config);
      if (j.contains("instance")) g = gen_from_json(j.at("instance"));
    }
    g.seed = seed;
    if (nodes > 0) g.nodes = nodes;
    if (!cost.empty()) g.cost = cost == "delay" ? CostKind::Delay : CostKind::Packets;
    g.validate();
    return g;
  }

  // Network, start state and the generator record when one was used.
  std::pair<Network, NetworkState> load() const {
    if (!instance.empty()) {
      const json j = read_json(instance);
      Network net = network_from_json(j.at("network"));
      NetworkState s = j.contains("initial") ? state_from_json(j.at("initial")) : aodv_route(net);
      return {std::move(net), std::move(s)};
    }
    Instance inst = generate_instance(gen());
    NetworkState s = aodv_route(inst.net);
    return {std::move(inst.net), std::move(s)};
  }
};

// rt=brt|grt|off pa=bpa|gpa|off pc=on|off cr=on|off refined=on|off budget=initial|current
void apply_alg(OptimizerConfig& cfg, const std::vector<std::string>& tokens) {
  for (const std::string& tok : tokens) {
    const auto eq = tok.find('=');
    if (eq == std::string::npos) throw Error(ErrorKind::InvalidArgument, "--alg expects key=value, got " + tok);
    const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    auto on_off = [&] {
      if (val == "on") return true;
      if (val == "off") return false;
      throw Error(ErrorKind::InvalidArgument, "expected on|off for " + key);
    };
    json j;
    if (key == "rt" || key == "pa" || key == "budget") {
      j[key] = val;
      const OptimizerConfig parsed = optimizer_from_json(j);
      if (key == "rt") cfg.routing = parsed.routing;
      if (key == "pa") cfg.power_alloc = parsed.power_alloc;
      if (key == "budget") cfg.budget = parsed.budget;
    } else if (key == "pc") {
      cfg.power_control = on_off();
    } else if (key == "cr") {
      cfg.congestion_control = on_off();
    } else if (key == "refined") {
      cfg.refined_power_alloc = on_off();
    } else {
      throw Error(ErrorKind::InvalidArgument, "unknown --alg key " + key);
    }
  }
}

MsgScope parse_scope(const std::string& s) {
  if (s.empty() || s == "all") return MsgScope::all();
  return MsgScope::k_nearest(std::stoi(s));
}

std::string trajectory_csv(const Trajectory& tr) {
  std::ostringstream out;
  out << "iteration,stage,cost,residual,routing_residual,power_alloc_residual,power_ctrl_residual,admitted\n";
  out.precision(10);
  for (const auto& r : tr.records)
    out << r.iteration << ',' << r.stage << ',' << r.cost << ',' << r.residual << ',' << r.routing_residual << ','
        << r.power_alloc_residual << ',' << r.power_ctrl_residual << ',' << r.admitted_rate << '\n';
  return out.str();
}

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::InitialInfeasible:
    case ErrorKind::ConnectivityFailure:
    case ErrorKind::NoPath:
      return kExitInfeasible;
    case ErrorKind::DescentGuardExhausted:
      return kExitGuard;
    default:
      return kExitFail;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint routing, power control and congestion control experiments"};
  app.require_subcommand(1);

  // generate
  InstanceArgs gen_args;
  std::string gen_out;
  auto* gen = app.add_subcommand("generate", "draw a random instance and write it as JSON");
  gen_args.add(gen);
  gen->add_option("--out", gen_out, "output file (stdout when omitted)");

  // run
  InstanceArgs run_args;
  int run_iters = 500;
  double run_tol = 1e-6;
  std::vector<std::string> run_alg;
  double run_noise = 0;
  bool run_stale = false;
  std::string run_scope;
  std::string run_out;
  auto* run = app.add_subcommand("run", "optimise one instance");
  run_args.add(run);
  run->add_option("--iters", run_iters, "maximum iterations");
  run->add_option("--tol", run_tol, "residual tolerance");
  run->add_option("--alg", run_alg, "rt=brt|grt|off pa=bpa|gpa|off pc=on|off cr=on|off refined=on|off");
  run->add_option("--noise", run_noise, "multiplicative message noise in [0, 1)");
  run->add_flag("--stale", run_stale, "nodes read the last published messages");
  run->add_option("--scope", run_scope, "MSG scope: all or k");
  run->add_option("--out", run_out, "output prefix for <prefix>.csv and <prefix>.json");

  // compare
  std::string cmp_exp = "static", cmp_config, cmp_scenario, cmp_out, cmp_cost;
  int cmp_seeds = 20, cmp_iters = 200, cmp_nodes = 0, cmp_workers = 0, cmp_stride = 1;
  double cmp_tol = 1e-6, cmp_noise = 0.9;
  std::uint64_t cmp_seed = 0;
  auto* cmp = app.add_subcommand("compare", "run an experiment family over many seeds");
  cmp->add_option("--experiment", cmp_exp, "static, topology, demand, pc-scope or noise")
      ->check(CLI::IsMember({"static", "topology", "demand", "pc-scope", "noise"}));
  cmp->add_option("--config", cmp_config, "experiment JSON (overrides --experiment)");
  cmp->add_option("--seeds", cmp_seeds, "number of seeds, 1..n");
  cmp->add_option("--seed", cmp_seed, "run this single seed only");
  cmp->add_option("--iters", cmp_iters, "iterations per arm");
  cmp->add_option("--tol", cmp_tol, "residual tolerance");
  cmp->add_option("--nodes", cmp_nodes, "node count");
  cmp->add_option("--cost", cmp_cost, "link cost: packets or delay")->check(CLI::IsMember({"packets", "delay"}));
  cmp->add_option("--noise", cmp_noise, "noise scale of the noisy arm");
  cmp->add_option("--scenario", cmp_scenario, "none, topology or demand")
      ->check(CLI::IsMember({"none", "topology", "demand"}));
  cmp->add_option("--workers", cmp_workers, "worker threads, 0 for all cores");
  cmp->add_option("--stride", cmp_stride, "row stride of the plot file");
  cmp->add_option("--out", cmp_out, "output prefix")->required();

  // check
  InstanceArgs chk_args;
  int chk_trials = 100;
  std::string chk_out;
  bool chk_start = false;
  auto* chk = app.add_subcommand("check", "finite-difference checks of marginals and curvature bounds");
  chk_args.add(chk);
  chk->add_option("--trials", chk_trials, "random directions per block");
  chk->add_flag("--at-start", chk_start, "check at the start state instead of a random interior one");
  chk->add_option("--out", chk_out, "write the report as JSON");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*gen) {
      const GenConfig g = gen_args.gen();
      const Instance inst = generate_instance(g);
      json pos = json::array();
      for (const auto& p : inst.positions) pos.push_back({p.x, p.y});
      const json j = {{"generator", to_json(g)},
                      {"attempts", inst.attempts},
                      {"positions", pos},
                      {"network", to_json(inst.net)},
                      {"initial", to_json(aodv_route(inst.net))}};
      if (gen_out.empty()) std::cout << j.dump(2) << '\n';
      else write_text(gen_out, j.dump(2) + "\n");
      return kExitOk;
    }

    if (*run) {
      auto [net, start] = run_args.load();
      OptimizerConfig cfg;
      if (!run_args.config.empty()) {
        const json j = read_json(run_args.config);
        if (j.contains("algorithm")) cfg = optimizer_from_json(j.at("algorithm"));
      }
      cfg.max_iterations = run_iters;
      cfg.tolerance = run_tol;
      apply_alg(cfg, run_alg);
      cfg.scope = parse_scope(run_scope);
      cfg.validate();
      ChannelModel ch;
      ch.noise_scale = run_noise;
      ch.staleness = run_stale ? Staleness::Cached : Staleness::Fresh;
      ch.scope = cfg.scope;
      ch.seed = run_args.seed;
      ch.validate();
      const Trajectory tr = ch.degenerate() ? run_jopr(net, start, cfg) : run_distributed(net, start, cfg, ch);
      json summary = to_json(tr);
      summary["algorithm"] = to_json(cfg);
      summary["initial_cost"] = tr.records.front().cost;
      summary["final_cost"] = tr.records.back().cost;
      if (run_out.empty()) {
        std::printf("iterations %d  converged %s  cost %.10g -> %.10g  residual %.3e\n", tr.iterations,
                    tr.converged ? "yes" : "no", tr.records.front().cost, tr.records.back().cost,
                    tr.records.back().residual);
      } else {
        write_text(run_out + ".csv", trajectory_csv(tr));
        write_text(run_out + ".json", summary.dump(2) + "\n");
      }
      return kExitOk;
    }

    if (*cmp) {
      ExperimentConfig c;
      if (!cmp_config.empty()) {
        c = experiment_from_json(read_json(cmp_config));
      } else {
        GenConfig g;
        if (cmp_nodes > 0) g.nodes = cmp_nodes;
        if (!cmp_cost.empty()) g.cost = cmp_cost == "delay" ? CostKind::Delay : CostKind::Packets;
        c = preset_experiment(cmp_exp, g, cmp_seeds, cmp_iters, cmp_tol, cmp_noise);
      }
      if (cmp_seed > 0) c.seeds = {cmp_seed};
      if (!cmp_scenario.empty())
        c.scenario.kind = cmp_scenario == "topology" ? ScenarioKind::TopologyJitter
                          : cmp_scenario == "demand" ? ScenarioKind::RateScaling
                                                     : ScenarioKind::None;
      c.workers = cmp_workers;
      const ExperimentReport rep = run_experiment(c);
      std::ostringstream csv, seeds, dat;
      write_csv(rep, csv);
      write_seed_csv(rep, seeds);
      std::istringstream back(csv.str());
      emit_plots(back, dat, cmp_stride);
      write_text(cmp_out + ".csv", csv.str());
      write_text(cmp_out + "_seeds.csv", seeds.str());
      write_text(cmp_out + ".dat", dat.str());
      write_text(cmp_out + ".json", summary_json(rep).dump(2) + "\n");
      int aborted = 0;
      for (const auto& r : rep.runs)
        for (const auto& a : r.arms)
          if (!a.error.empty()) {
            ++aborted;
            std::fprintf(stderr, "seed %llu arm %s: %s\n", static_cast<unsigned long long>(r.seed), a.name.c_str(),
                         a.error.c_str());
          }
      return aborted ? kExitFail : kExitOk;
    }

    if (*chk) {
      auto [net, start] = chk_args.load();
      std::mt19937_64 rng(chk_args.seed);
      const NetworkState s = chk_start ? start : interior_state(net, start, rng);
      const InstanceCheck r = check_instance(net, s, chk_trials, chk_args.seed);
      const json j = {{"gradient_checks", r.gradient_checks},
                      {"worst_gradient_error", r.worst_gradient_error},
                      {"identity_residual", r.identity_residual},
                      {"hessian_blocks", r.hessian_blocks},
                      {"hessian_trials", r.hessian_trials},
                      {"hessian_violations", r.hessian_violations},
                      {"worst_hessian_gap", r.worst_hessian_gap},
                      {"passed", r.passed()}};
      if (chk_out.empty()) std::cout << j.dump(2) << '\n';
      else write_text(chk_out, j.dump(2) + "\n");
      return r.passed() ? kExitOk : kExitFail;
    }
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFail;
  }
  return kExitOk;
}
