#include "xlayer/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <deque>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

namespace xlayer {

void GenConfig::validate() const {
  if (nodes < 2) throw Error(ErrorKind::InvalidArgument, "need at least two nodes");
  if (!(radius > 0)) throw Error(ErrorKind::InvalidArgument, "radius must be > 0");
  if (!(power_cap > 1)) throw Error(ErrorKind::InvalidArgument, "power cap must exceed 1");
  if (!(noise > 0)) throw Error(ErrorKind::InvalidArgument, "noise must be > 0");
  if (!(session_probability > 0 && session_probability <= 1))
    throw Error(ErrorKind::InvalidArgument, "session probability must lie in (0, 1]");
  if (!(rate_high > rate_low && rate_low >= 0)) throw Error(ErrorKind::InvalidArgument, "bad rate range");
  if (max_retries < 1) throw Error(ErrorKind::InvalidArgument, "max_retries must be >= 1");
}

void assign_gains(Topology& topo, const std::vector<Position>& positions, double exponent) {
  const int n = topo.num_nodes();
  for (NodeId m = 0; m < n; ++m)
    for (NodeId j = 0; j < n; ++j) {
      if (m == j) continue;
      const double d = std::hypot(positions[m].x - positions[j].x, positions[m].y - positions[j].y);
      topo.set_gain(m, j, std::pow(std::max(d, 1e-9), -exponent));
    }
}

NetworkState aodv_route(const Network& net) {
  const Topology& topo = net.topology;
  const int n = topo.num_nodes();
  NetworkState s = make_state(topo, net.num_sessions());
  for (int w = 0; w < net.num_sessions(); ++w) {
    const NodeId dest = net.sessions[w].destination;
    std::vector<int> dist(n, -1);
    std::deque<NodeId> queue{dest};
    dist[dest] = 0;
    while (!queue.empty()) {
      const NodeId v = queue.front();
      queue.pop_front();
      for (LinkId l : topo.in_links(v)) {
        const NodeId u = topo.link(l).from;
        if (dist[u] < 0) {
          dist[u] = dist[v] + 1;
          queue.push_back(u);
        }
      }
    }
    if (dist[net.sessions[w].origin] < 0)
      throw Error(ErrorKind::NoPath, "session " + std::to_string(w) + " has no path to its destination");
    // Every node forwards along its own min-hop tree, so idle nodes also hold a valid split.
    for (NodeId i = 0; i < n; ++i) {
      if (i == dest || dist[i] < 0) continue;
      for (LinkId l : topo.out_links(i))
        if (dist[topo.link(l).to] == dist[i] - 1) {
          s.route(w, l) = 1.0;
          break;
        }
    }
  }
  return s;
}

Instance generate_instance(const GenConfig& cfg) {
  cfg.validate();
  std::mt19937_64 rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int attempt = 1; attempt <= cfg.max_retries; ++attempt) {
    Instance inst;
    inst.attempts = attempt;
    inst.positions.resize(cfg.nodes);
    for (auto& p : inst.positions) {
      const double r = std::sqrt(unit(rng));
      const double a = 2 * std::numbers::pi * unit(rng);
      p = {r * std::cos(a), r * std::sin(a)};
    }
    std::vector<Link> links;
    for (NodeId i = 0; i < cfg.nodes; ++i)
      for (NodeId j = 0; j < cfg.nodes; ++j)
        if (i != j && std::hypot(inst.positions[i].x - inst.positions[j].x,
                                 inst.positions[i].y - inst.positions[j].y) < cfg.radius)
          links.push_back({i, j});
    std::vector<Session> sessions;
    for (NodeId i = 0; i < cfg.nodes; ++i) {
      if (unit(rng) >= cfg.session_probability) continue;
      NodeId d = static_cast<NodeId>(std::uniform_int_distribution<int>(0, cfg.nodes - 2)(rng));
      if (d >= i) ++d;
      double rate = 0;
      while (!(rate > 0)) rate = std::uniform_real_distribution<double>(cfg.rate_low, cfg.rate_high)(rng);
      sessions.push_back({i, d, Inelastic{rate}});
    }
    Topology topo(cfg.nodes, std::move(links), std::vector<double>(cfg.nodes, cfg.noise),
                  std::vector<double>(cfg.nodes, cfg.power_cap));
    if (!topo.strongly_connected() || sessions.empty()) continue;
    assign_gains(topo, inst.positions, cfg.gain_exponent);
    inst.net.topology = std::move(topo);
    inst.net.sessions = std::move(sessions);
    inst.net.capacity = CapacityFn(HighSinrLog{cfg.K, 1.0});
    inst.net.cost = cfg.cost == CostKind::Packets ? LinkCostFn(MM1Packets{cfg.cost_epsilon}) : LinkCostFn(MM1Delay{});
    if (cfg.require_feasible_start && !evaluate(inst.net, aodv_route(inst.net)).cost.finite()) continue;
    return inst;
  }
  throw Error(ErrorKind::ConnectivityFailure,
              "no usable instance after " + std::to_string(cfg.max_retries) + " draws");
}

// ---------------------------------------------------------------- experiments

void ScenarioConfig::validate() const {
  if (period < 1) throw Error(ErrorKind::InvalidArgument, "scenario period must be >= 1");
  if (box < 0 || factor_low < 0 || factor_high < factor_low)
    throw Error(ErrorKind::InvalidArgument, "bad scenario ranges");
}

std::vector<std::uint64_t> ExperimentConfig::seed_list() const {
  if (!seeds.empty()) {
    auto s = seeds;
    std::sort(s.begin(), s.end());
    return s;
  }
  std::vector<std::uint64_t> s(num_seeds);
  for (int k = 0; k < num_seeds; ++k) s[k] = static_cast<std::uint64_t>(k + 1);
  return s;
}

ExperimentConfig preset_experiment(const std::string& name, const GenConfig& gen, int num_seeds, int iterations,
                                   double tolerance, double noise) {
  ExperimentConfig c;
  c.name = name;
  c.gen = gen;
  c.num_seeds = num_seeds;
  c.iterations = iterations;
  OptimizerConfig base;
  base.tolerance = tolerance;
  base.max_iterations = iterations;
  auto arm = [&](std::string arm_name, bool route, bool power) {
    ArmConfig a;
    a.name = std::move(arm_name);
    a.optimizer = base;
    a.optimizer.routing = route ? RoutingAlg::Brt : RoutingAlg::Off;
    a.optimizer.power_alloc = power ? PowerAllocAlg::Bpa : PowerAllocAlg::Off;
    a.optimizer.power_control = power;
    return a;
  };
  if (name == "static") {
    c.arms = {arm("aodv", false, false), arm("brt", true, false), arm("aodv_bpa_pc", false, true),
              arm("brt_bpa_pc", true, true)};
  } else if (name == "topology" || name == "demand") {
    c.scenario.kind = name == "topology" ? ScenarioKind::TopologyJitter : ScenarioKind::RateScaling;
    c.arms = {arm("aodv", false, false), arm("brt", true, false)};
  } else if (name == "pc-scope") {
    c.arms.push_back(arm("full", true, true));
    for (int k = 1; k <= std::min(8, gen.nodes - 1); ++k) {
      ArmConfig a = arm("k" + std::to_string(k), true, true);
      a.channel = ChannelModel{0.0, Staleness::Fresh, MsgScope::k_nearest(k), 1};
      c.arms.push_back(a);
    }
  } else if (name == "noise") {
    c.arms.push_back(arm("clean", true, true));
    ArmConfig stale = arm("stale", true, true);
    stale.channel = ChannelModel{0.0, Staleness::Cached, MsgScope::all(), 1};
    c.arms.push_back(stale);
    ArmConfig noisy = arm("noisy", true, true);
    noisy.channel = ChannelModel{noise, Staleness::Cached, MsgScope::all(), 1};
    c.arms.push_back(noisy);
  } else {
    throw Error(ErrorKind::InvalidArgument, "unknown experiment '" + name + "'");
  }
  return c;
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

IterationRecord frozen_record(const Network& net, const NetworkState& state, int iteration) {
  IterationRecord r;
  r.iteration = iteration;
  const Evaluation ev = evaluate(net, state);
  r.cost = ev.cost.finite() ? ev.cost.value() : kInf;
  for (double a : ev.flow.admitted_rate) r.admitted_rate += a;
  return r;
}

// Runs `iters` sweeps from `state`, appending exactly `iters` records after the
// already present ones.
void run_epoch(const Network& net, NetworkState& state, const ArmConfig& arm, int iters, std::uint64_t seed,
               ArmRun& out) {
  const int start = out.records.empty() ? 0 : static_cast<int>(out.records.size()) - 1;
  if (!evaluate(net, state).cost.finite()) {
    if (out.records.empty()) out.records.push_back(frozen_record(net, state, 0));
    ++out.infeasible_epochs;
    for (int k = 1; k <= iters; ++k) out.records.push_back(frozen_record(net, state, start + k));
    return;
  }
  OptimizerConfig cfg = arm.optimizer;
  cfg.max_iterations = iters;
  cfg.seed = seed;
  Trajectory t;
  if (arm.channel) {
    ChannelModel ch = *arm.channel;
    ch.seed = seed * 1000003ULL + static_cast<std::uint64_t>(start + 1);
    t = run_distributed(net, state, cfg, ch);
  } else {
    t = run_jopr(net, state, cfg);
  }
  if (out.records.empty()) out.records.push_back(t.records.front());
  for (std::size_t k = 1; k < t.records.size(); ++k) {
    IterationRecord r = t.records[k];
    r.iteration = start + static_cast<int>(k);
    out.records.push_back(r);
  }
  // Converged early: the state no longer moves.
  while (static_cast<int>(out.records.size()) - 1 < start + iters) {
    IterationRecord r = out.records.back();
    r.iteration += 1;
    r.guard_halvings = 0;
    out.records.push_back(r);
  }
  out.guard_rejections += t.guard_rejections;
  out.monotonicity_violations += t.monotonicity_violations;
  out.loop_violations += t.loop_violations;
  state = t.final_state;
}

ArmRun run_arm(const ExperimentConfig& config, const Instance& inst, const NetworkState& init, const ArmConfig& arm,
               std::uint64_t seed) {
  ArmRun out;
  out.name = arm.name;
  Network net = inst.net;
  NetworkState state = init;
  const ScenarioConfig& sc = config.scenario;
  // Same perturbation sequence for every arm of a seed.
  std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const int period = sc.kind == ScenarioKind::None ? config.iterations : sc.period;
  try {
    for (int done = 0; done < config.iterations; done += period) {
      if (done > 0 && sc.kind == ScenarioKind::TopologyJitter) {
        auto pos = inst.positions;
        for (auto& p : pos) {
          p.x += (unit(rng) - 0.5) * sc.box;
          p.y += (unit(rng) - 0.5) * sc.box;
        }
        assign_gains(net.topology, pos, config.gen.gain_exponent);
      } else if (done > 0 && sc.kind == ScenarioKind::RateScaling) {
        for (std::size_t w = 0; w < net.sessions.size(); ++w) {
          const double f = sc.factor_low + (sc.factor_high - sc.factor_low) * unit(rng);
          auto& d = std::get<Inelastic>(net.sessions[w].demand);
          d.rate = std::max(1e-12, std::get<Inelastic>(inst.net.sessions[w].demand).rate * f);
        }
      }
      run_epoch(net, state, arm, std::min(period, config.iterations - done), seed, out);
    }
  } catch (const Error& e) {
    out.error = e.what();
  }
  out.final_cost = out.records.empty() ? kInf : out.records.back().cost;
  for (const auto& r : out.records)
    if (r.iteration > 0 && r.residual <= arm.optimizer.tolerance && std::isfinite(r.cost)) {
      out.converged_at = r.iteration;
      break;
    }
  return out;
}

}  // namespace

SeedRun run_seed(const ExperimentConfig& config, std::uint64_t seed) {
  GenConfig gen = config.gen;
  gen.seed = seed;
  const Instance inst = generate_instance(gen);
  const NetworkState init = aodv_route(inst.net);
  SeedRun run;
  run.seed = seed;
  run.attempts = inst.attempts;
  for (const ArmConfig& arm : config.arms) run.arms.push_back(run_arm(config, inst, init, arm, seed));
  return run;
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  config.scenario.validate();
  if (config.iterations < 1) throw Error(ErrorKind::InvalidArgument, "iterations must be >= 1");
  ExperimentReport rep;
  rep.name = config.name;
  for (const auto& a : config.arms) rep.arm_names.push_back(a.name);
  const auto seeds = config.seed_list();
  rep.runs.resize(seeds.size());
  std::vector<std::string> errors(seeds.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k; (k = next.fetch_add(1)) < seeds.size();) {
      try {
        rep.runs[k] = run_seed(config, seeds[k]);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  int n = config.workers > 0 ? config.workers : static_cast<int>(std::thread::hardware_concurrency());
  n = std::clamp(n, 1, static_cast<int>(std::max<std::size_t>(1, seeds.size())));
  std::vector<std::thread> pool;
  for (int t = 1; t < n; ++t) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (std::size_t k = 0; k < seeds.size(); ++k)
    if (!errors[k].empty()) throw Error(ErrorKind::ConnectivityFailure, "seed " + std::to_string(seeds[k]) + ": " + errors[k]);
  return rep;
}

std::vector<std::vector<double>> ExperimentReport::mean_cost() const {
  std::vector<std::vector<double>> out(arm_names.size());
  for (std::size_t a = 0; a < arm_names.size(); ++a) {
    std::size_t len = 0;
    for (const auto& r : runs) len = std::max(len, r.arms[a].records.size());
    out[a].assign(len, 0.0);
    for (std::size_t k = 0; k < len; ++k) {
      double sum = 0;
      int cnt = 0;
      for (const auto& r : runs)
        if (k < r.arms[a].records.size() && std::isfinite(r.arms[a].records[k].cost))
          sum += r.arms[a].records[k].cost, ++cnt;
      out[a][k] = cnt ? sum / cnt : kInf;
    }
  }
  return out;
}

namespace {

std::string num(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double mean_of(const ExperimentReport& rep, std::size_t a, std::size_t k, double IterationRecord::*field) {
  double sum = 0;
  int cnt = 0;
  for (const auto& r : rep.runs)
    if (k < r.arms[a].records.size() && std::isfinite(r.arms[a].records[k].*field))
      sum += r.arms[a].records[k].*field, ++cnt;
  return cnt ? sum / cnt : kInf;
}

}  // namespace

void write_csv(const ExperimentReport& rep, std::ostream& out) {
  out << "iteration";
  for (const auto& a : rep.arm_names) out << ',' << a << "_cost," << a << "_residual," << a << "_admitted";
  out << '\n';
  std::size_t len = 0;
  for (const auto& r : rep.runs)
    for (const auto& a : r.arms) len = std::max(len, a.records.size());
  for (std::size_t k = 0; k < len; ++k) {
    out << k;
    for (std::size_t a = 0; a < rep.arm_names.size(); ++a)
      out << ',' << num(mean_of(rep, a, k, &IterationRecord::cost)) << ','
          << num(mean_of(rep, a, k, &IterationRecord::residual)) << ','
          << num(mean_of(rep, a, k, &IterationRecord::admitted_rate));
    out << '\n';
  }
}

void write_seed_csv(const ExperimentReport& rep, std::ostream& out) {
  out << "seed,arm,iteration,cost,residual,admitted\n";
  for (const auto& r : rep.runs)
    for (const auto& a : r.arms)
      for (const auto& rec : a.records)
        out << r.seed << ',' << a.name << ',' << rec.iteration << ',' << num(rec.cost) << ',' << num(rec.residual)
            << ',' << num(rec.admitted_rate) << '\n';
}

nlohmann::json summary_json(const ExperimentReport& rep) {
  using nlohmann::json;
  auto finite_or_null = [](double v) { return std::isfinite(v) ? json(v) : json(nullptr); };
  json j;
  j["experiment"] = rep.name;
  j["arms"] = rep.arm_names;
  json seeds = json::array();
  for (const auto& r : rep.runs) {
    json s;
    s["seed"] = r.seed;
    s["attempts"] = r.attempts;
    for (const auto& a : r.arms) {
      json arm;
      arm["final_cost"] = finite_or_null(a.final_cost);
      arm["converged_at"] = a.converged_at;
      arm["guard_rejections"] = a.guard_rejections;
      arm["monotonicity_violations"] = a.monotonicity_violations;
      arm["loop_violations"] = a.loop_violations;
      arm["infeasible_epochs"] = a.infeasible_epochs;
      if (!a.error.empty()) arm["error"] = a.error;
      s["arms"][a.name] = arm;
    }
    seeds.push_back(s);
  }
  j["seeds"] = seeds;
  const auto means = rep.mean_cost();
  for (std::size_t a = 0; a < rep.arm_names.size(); ++a)
    j["mean_final_cost"][rep.arm_names[a]] = means[a].empty() ? json(nullptr) : finite_or_null(means[a].back());
  return j;
}

void emit_plots(std::istream& csv, std::ostream& dat, int stride) {
  if (stride < 1) throw Error(ErrorKind::InvalidArgument, "stride must be >= 1");
  std::string line;
  if (!std::getline(csv, line)) {
    dat << "# iteration\n";
    return;
  }
  auto split = [](const std::string& s) {
    std::vector<std::string> f;
    std::stringstream ss(s);
    for (std::string cell; std::getline(ss, cell, ',');) f.push_back(cell);
    return f;
  };
  const auto header = split(line);
  std::vector<std::size_t> cols{0};
  for (std::size_t c = 1; c < header.size(); ++c)
    if (header[c].size() > 5 && header[c].ends_with("_cost")) cols.push_back(c);
  dat << '#';
  for (std::size_t c : cols) dat << ' ' << header[c];
  dat << '\n';
  for (int row = 0; std::getline(csv, line); ++row) {
    if (line.empty() || row % stride != 0) continue;
    const auto f = split(line);
    for (std::size_t k = 0; k < cols.size(); ++k) dat << (k ? " " : "") << (cols[k] < f.size() ? f[cols[k]] : "nan");
    dat << '\n';
  }
}

}  // namespace xlayer
