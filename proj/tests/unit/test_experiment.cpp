#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"

using namespace xlayer;
using doctest::Approx;

namespace {

ExperimentConfig small_static(int seeds, int iters) {
  GenConfig g;
  g.nodes = 8;
  g.cost = CostKind::Delay;
  return preset_experiment("static", g, seeds, iters, 1e-6, 0.0);
}

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_CASE("generator is deterministic per seed") {
  GenConfig g;
  g.nodes = 10;
  g.seed = 42;
  const Instance a = generate_instance(g), b = generate_instance(g);
  CHECK(a.attempts == b.attempts);
  REQUIRE(a.net.topology.num_links() == b.net.topology.num_links());
  for (LinkId l = 0; l < a.net.topology.num_links(); ++l) {
    CHECK(a.net.topology.link(l).from == b.net.topology.link(l).from);
    CHECK(a.net.topology.link(l).to == b.net.topology.link(l).to);
  }
  REQUIRE(a.net.num_sessions() == b.net.num_sessions());
  for (int w = 0; w < a.net.num_sessions(); ++w) CHECK(a.net.sessions[w].source_rate() == b.net.sessions[w].source_rate());
  g.seed = 43;
  const Instance c = generate_instance(g);
  bool differs = c.positions.size() != a.positions.size();
  for (std::size_t k = 0; !differs && k < a.positions.size(); ++k) differs = c.positions[k].x != a.positions[k].x;
  CHECK(differs);
}

TEST_CASE("two nodes inside the radius") {
  GenConfig g;
  g.nodes = 2;
  g.radius = 2.0;
  g.seed = 3;
  const Instance inst = generate_instance(g);
  const Topology& t = inst.net.topology;
  CHECK(t.num_links() == 2);
  const double d = std::hypot(inst.positions[0].x - inst.positions[1].x, inst.positions[0].y - inst.positions[1].y);
  CHECK(t.gain(0, 1) == Approx(std::pow(d, -4.0)));
  CHECK(t.gain(1, 0) == Approx(std::pow(d, -4.0)));
  CHECK(inst.net.num_sessions() >= 1);
}

TEST_CASE("properties: generated instances respect the model") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    GenConfig g;
    g.nodes = 12;
    g.seed = seed;
    const Instance inst = generate_instance(g);
    const Topology& t = inst.net.topology;
    const int n = t.num_nodes();
    for (NodeId i = 0; i < n; ++i) {
      CHECK(inst.positions[i].x * inst.positions[i].x + inst.positions[i].y * inst.positions[i].y <= 1.0);
      CHECK(t.power_cap(i) == 100.0);
      CHECK(t.noise(i) == Approx(0.1));
    }
    int expected_links = 0;
    for (NodeId i = 0; i < n; ++i)
      for (NodeId j = 0; j < n; ++j) {
        if (i == j) continue;
        const double d = std::hypot(inst.positions[i].x - inst.positions[j].x, inst.positions[i].y - inst.positions[j].y);
        CHECK(t.gain(i, j) == Approx(std::pow(d, -4.0)).epsilon(1e-12));
        if (d <= 0.5) ++expected_links;
      }
    CHECK(t.num_links() == expected_links);
    for (const auto& lk : t.links()) {
      const auto& p = inst.positions[lk.from];
      const auto& q = inst.positions[lk.to];
      CHECK(std::hypot(p.x - q.x, p.y - q.y) <= 0.5);
    }
    CHECK(inst.net.num_sessions() >= 1);
    for (const Session& s : inst.net.sessions) {
      CHECK(s.origin != s.destination);
      CHECK(s.source_rate() > 0);
      CHECK(s.source_rate() <= 10);
    }
    CHECK(evaluate(inst.net, aodv_route(inst.net)).cost.finite());
  }
}

TEST_CASE("generator gives up after its retry budget") {
  GenConfig g;
  g.nodes = 10;
  g.radius = 0.01;
  g.max_retries = 5;
  try {
    generate_instance(g);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConnectivityFailure);
  }
  g.radius = 0.5;
  g.nodes = 0;
  CHECK_THROWS_AS(generate_instance(g), Error);
}

TEST_CASE("min-hop routes break ties towards the smaller id") {
  const Network net = fx::diamond();
  const NetworkState s = aodv_route(net);
  CHECK(s.route(0, 0) == 1.0);
  CHECK(s.route(0, 1) == 0.0);
  CHECK(s.route(0, 2) == 1.0);
  for (double g : s.gamma) CHECK(g == 1.0);

  Topology t(3, {{0, 1}, {1, 0}}, {0.1, 0.1, 0.1}, {10, 10, 10});
  for (int m = 0; m < 3; ++m)
    for (int j = 0; j < 3; ++j)
      if (m != j) t.set_gain(m, j, 1.0);
  Network cut;
  cut.topology = t;
  cut.sessions = {{0, 2, Inelastic{1.0}}};
  try {
    aodv_route(cut);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoPath);
  }
}

TEST_CASE("presets") {
  GenConfig g;
  CHECK(preset_experiment("static", g, 2, 5, 1e-6, 0).arms.size() == 4);
  CHECK(preset_experiment("topology", g, 2, 5, 1e-6, 0).scenario.kind == ScenarioKind::TopologyJitter);
  CHECK(preset_experiment("demand", g, 2, 5, 1e-6, 0).scenario.kind == ScenarioKind::RateScaling);
  const auto pc = preset_experiment("pc-scope", g, 2, 5, 1e-6, 0);
  CHECK(pc.arms.size() == 9);
  CHECK(pc.arms[3].channel->scope.k == 3);
  const auto nz = preset_experiment("noise", g, 2, 5, 1e-6, 0.3);
  CHECK(nz.arms[2].channel->noise_scale == 0.3);
  CHECK(nz.arms[1].channel->staleness == Staleness::Cached);
  CHECK_THROWS_AS(preset_experiment("bogus", g, 2, 5, 1e-6, 0), Error);
  CHECK(preset_experiment("static", g, 3, 5, 1e-6, 0).seed_list() == std::vector<std::uint64_t>{1, 2, 3});
}

TEST_CASE("experiment output is independent of the worker count") {
  ExperimentConfig c = small_static(3, 8);
  c.workers = 1;
  const ExperimentReport a = run_experiment(c);
  c.workers = 3;
  const ExperimentReport b = run_experiment(c);
  std::ostringstream ca, cb;
  write_csv(a, ca);
  write_csv(b, cb);
  CHECK(ca.str() == cb.str());
  CHECK(count_lines(ca.str()) == 1 + 9);
  CHECK(ca.str().rfind("iteration,aodv_cost,aodv_residual,aodv_admitted,brt_cost", 0) == 0);

  for (const auto& r : a.runs)
    for (const auto& arm : r.arms) {
      CHECK(arm.error.empty());
      CHECK(arm.records.size() == 9);
      CHECK(arm.monotonicity_violations == 0);
    }
  // routing never loses against the fixed min-hop routes
  const auto mean = a.mean_cost();
  CHECK(mean.back()[1] <= mean.back()[0] * (1 + 1e-12));

  std::ostringstream per_seed;
  write_seed_csv(a, per_seed);
  CHECK(count_lines(per_seed.str()) == 1 + 3 * 4 * 9);

  const auto js = summary_json(a);
  CHECK(js["experiment"] == "static");
}

TEST_CASE("plot output thins rows and keeps cost columns") {
  std::istringstream csv("iteration,a_cost,a_residual,a_admitted,b_cost,b_residual,b_admitted\n"
                         "0,1,2,3,4,5,6\n1,7,8,9,10,11,12\n2,13,14,15,16,17,18\n");
  std::ostringstream dat;
  emit_plots(csv, dat, 2);
  CHECK(dat.str() == "# iteration a_cost b_cost\n0 1 4\n2 13 16\n");
  std::istringstream empty("");
  std::ostringstream out;
  emit_plots(empty, out, 1);
  CHECK(out.str() == "# iteration\n");
  std::istringstream again("x\n");
  CHECK_THROWS_AS(emit_plots(again, out, 0), Error);
}

TEST_CASE("scenarios keep the link set and run every epoch") {
  GenConfig g;
  g.nodes = 8;
  g.cost = CostKind::Delay;
  for (const char* name : {"topology", "demand"}) {
    ExperimentConfig c = preset_experiment(name, g, 1, 25, 1e-6, 0);
    c.scenario.period = 5;
    const SeedRun r = run_seed(c, 2);
    for (const auto& arm : r.arms) {
      CHECK(arm.error.empty());
      CHECK(arm.records.size() == 26);
    }
  }
}

TEST_CASE("JSON round trips") {
  const Instance inst = fx::random_instance(5, 9, CostKind::Delay);
  const NetworkState s = aodv_route(inst.net);
  const Network back = network_from_json(to_json(inst.net));
  const NetworkState sb = state_from_json(to_json(s));
  CHECK(fx::cost_of(back, sb) == fx::cost_of(inst.net, s));
  CHECK(to_json(back) == to_json(inst.net));

  OptimizerConfig cfg;
  cfg.routing = RoutingAlg::Grt;
  cfg.power_alloc = PowerAllocAlg::Gpa;
  cfg.power_control = true;
  cfg.max_iterations = 77;
  cfg.scope = MsgScope::k_nearest(4);
  const OptimizerConfig cb = optimizer_from_json(to_json(cfg));
  CHECK(to_json(cb) == to_json(cfg));
  CHECK(cb.max_iterations == 77);
  CHECK(cb.scope.k == 4);

  GenConfig g;
  g.nodes = 13;
  g.cost = CostKind::Delay;
  CHECK(to_json(gen_from_json(to_json(g))) == to_json(g));

  const auto exp = experiment_from_json(nlohmann::json::parse(R"({
    "name": "custom", "instance": {"nodes": 8}, "seeds": [4, 9], "iterations": 12,
    "arms": [{"name": "a", "algorithm": {"rt": "grt"}},
             {"name": "b", "algorithm": {"rt": "brt"}, "channel": {"noise": 0.2}}]})"));
  CHECK(exp.seed_list() == std::vector<std::uint64_t>{4, 9});
  CHECK(exp.gen.nodes == 8);
  REQUIRE(exp.arms.size() == 2);
  CHECK(exp.arms[0].optimizer.routing == RoutingAlg::Grt);
  CHECK(exp.arms[1].channel.has_value());
  CHECK(exp.arms[1].channel->noise_scale == Approx(0.2));
}

TEST_CASE("min-hop route on a chain is the chain") {
  const Network net = fx::chain(5);
  const NetworkState s = aodv_route(net);
  for (LinkId l = 0; l < net.topology.num_links(); ++l) CHECK(s.route(0, l) == 1.0);
}

TEST_CASE("default instances fall in a sane degree and session band") {
  // independent estimate of the link probability for two uniform points in the unit disc
  std::mt19937_64 rng(99);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto draw = [&] {
    for (;;) {
      const double x = u(rng), y = u(rng);
      if (x * x + y * y <= 1.0) return Position{x, y};
    }
  };
  int close = 0;
  const int pairs = 200000;
  for (int k = 0; k < pairs; ++k) {
    const Position a = draw(), b = draw();
    close += std::hypot(a.x - b.x, a.y - b.y) <= 0.5;
  }
  const double expected_degree = 24.0 * close / pairs;

  double degree = 0, sessions = 0;
  const int seeds = 100;
  for (int s = 1; s <= seeds; ++s) {
    GenConfig g;
    g.seed = s;
    g.require_feasible_start = false;  // connectivity filter only, keeps this fast
    const Instance inst = generate_instance(g);
    degree += static_cast<double>(inst.net.topology.num_links()) / inst.net.topology.num_nodes();
    sessions += inst.net.num_sessions();
  }
  degree /= seeds;
  sessions /= seeds;
  // strong connectivity filtering can only push the degree up
  CHECK(degree >= 0.95 * expected_degree);
  CHECK(degree <= 1.5 * expected_degree);
  CHECK(sessions >= 10.5);
  CHECK(sessions <= 14.5);
}
