// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <chrono>
#include <cstdio>
#include <string>

#include "fixtures.hpp"

using namespace xlayer;

namespace {

// ---- pinned tolerances
constexpr double kGradRelTol = 1e-5;
constexpr double kGradFloor = 1e-3;  // marginals below this are compared absolutely (times the tolerance)
constexpr double kIdentityTol = 1e-9;
constexpr double kHessSlack = 1e-6;
constexpr int kHessTrials = 100;
constexpr double kResidualTol = 1e-4;
constexpr double kRoundoff = 1e-12;  // relative cost increase treated as floating-point noise
constexpr double kFigureTol = 1e-12;  // stop tolerance of the figure runs, effectively never
constexpr int kDescentIters = 500;
constexpr double kInitAgreeRel = 1e-3;
constexpr double kEquivTol = 1e-12;
constexpr double kGridStep = 1e-3;
constexpr double kKktTol = 1e-12;
constexpr double kScopeRel = 0.05;
constexpr double kNoiseRel = 0.10;
constexpr int kNoiseMinSeeds = 18;
constexpr double kNoiseScale = 0.9;
constexpr double kEquilibriumAbs = 1e-4;
constexpr int kSeeds = 20;
constexpr int kNodes = 10;
constexpr int kFigureIters = 500;

int failures = 0;
long total_loop_violations = 0;
long loop_checks = 0;

void report(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("CRITERION %2d %s  %s  [%s]\n", id, ok ? "PASS" : "FAIL", what.c_str(), detail.c_str());
  std::fflush(stdout);
  if (!ok) ++failures;
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// Every session graph of `s` must be acyclic.
void check_loop_free(const Network& net, const NetworkState& s) {
  ++loop_checks;
  try {
    compute_flows(net.topology, net.sessions, s);
  } catch (const RoutingCycleError&) {
    ++total_loop_violations;
  }
}

struct StateSet {
  std::vector<Network> nets;
  std::vector<NetworkState> states;
};

// 8 to 12 node instances, alternating cost kinds; every other instance gets an elastic session.
StateSet random_states(int count) {
  StateSet set;
  for (int k = 0; k < count; ++k) {
    const int nodes = 8 + k % 5;
    Instance inst = fx::random_instance(100 + k, nodes, k % 2 ? CostKind::Delay : CostKind::Packets);
    Network net = inst.net;
    if (k % 2 == 0) net.sessions[0].demand = Elastic{net.sessions[0].source_rate(), LogUtility{1.0, 0.0}};
    std::mt19937_64 rng(1000 + k);
    set.states.push_back(fx::random_interior_state(net, rng));
    set.nets.push_back(std::move(net));
  }
  return set;
}

// ------------------------------------------------------------------ 1, 2

void gradient_oracle(const StateSet& set, double& worst_grad, double& worst_identity, int& checks) {
  const double h = 1e-6;
  auto compare = [&](double fd, double an) {
    worst_grad = std::max(worst_grad, std::abs(fd - an) / std::max(std::abs(an), kGradFloor));
    ++checks;
  };
  for (std::size_t k = 0; k < set.states.size(); ++k) {
    const Network& net = set.nets[k];
    const NetworkState& s = set.states[k];
    const Topology& topo = net.topology;
    const Evaluation ev = evaluate(net, s);
    const MarginalReport m = compute_marginals(net, s, ev);
    auto central = [&](auto&& perturb) {
      NetworkState p = s, q = s;
      perturb(p, h);
      perturb(q, -h);
      return (fx::cost_of(net, p) - fx::cost_of(net, q)) / (2 * h);
    };
    for (int w = 0; w < net.num_sessions(); ++w) {
      const Session& ses = net.sessions[w];
      for (NodeId i = 0; i < topo.num_nodes(); ++i) {
        const double t = ev.flow.rate(w, i);
        if (t <= 0 || i == ses.destination) continue;
        std::vector<LinkId> pos;
        for (LinkId l : topo.out_links(i))
          if (s.route(w, l) > 0) pos.push_back(l);
        for (std::size_t a = 1; a < pos.size(); ++a) {
          const LinkId la = pos[0], lb = pos[a];
          compare(central([&](NetworkState& x, double d) { x.route(w, la) += d, x.route(w, lb) -= d; }),
                  t * (m.dphi(w, la) - m.dphi(w, lb)));
        }
        if (ses.elastic() && i == ses.origin && !pos.empty() && s.phi_overflow[w] > 0) {
          const LinkId la = pos[0];
          compare(central([&](NetworkState& x, double d) { x.route(w, la) += d, x.phi_overflow[w] -= d; }),
                  t * (m.dphi(w, la) - m.delta_phi_overflow[w]));
        }
      }
    }
    for (NodeId i = 0; i < topo.num_nodes(); ++i) {
      const auto out = topo.out_links(i);
      for (std::size_t a = 1; a < out.size(); ++a) {
        const LinkId la = out[0], lb = out[a];
        compare(central([&](NetworkState& x, double d) { x.eta[la] += d, x.eta[lb] -= d; }),
                ev.radio.node_power[i] * (m.delta_eta[la] - m.delta_eta[lb]));
      }
      compare(central([&](NetworkState& x, double d) { x.gamma[i] += d; }),
              std::log(topo.power_cap(i)) * m.delta_gamma[i]);
    }
    worst_identity =
        std::max(worst_identity, potential_identity_residual(net, ev.flow, ev.radio, node_potentials(net, s, ev.flow, ev.radio)));
  }
}

// ------------------------------------------------------------------ 3

struct BoundTally {
  int blocks = 0;
  int trials = 0;
  int violations = 0;
  double worst = -1e300;

  void add(const BoundCheck& b) {
    ++blocks;
    trials += b.trials;
    violations += b.violations;
    worst = std::max(worst, b.max_relative_gap);
  }
  std::string text(const char* name) const {
    return fmt("%s: %d blocks, %d dirs, %d over, worst rel gap %.2e", name, blocks, trials, violations, worst);
  }
};

void hessian_suite(BoundTally& l2, BoundTally& l3, BoundTally& l4, BoundTally& l6) {
  for (int k = 0; k < 6; ++k) {
    const CostKind kind = k % 2 ? CostKind::Delay : CostKind::Packets;
    const Instance inst = fx::random_instance(200 + k, 8 + k % 5, kind);
    const Network& net = inst.net;
    std::mt19937_64 rng(300 + k);
    const NetworkState s = fx::random_interior_state(net, rng);
    const Evaluation ev = evaluate(net, s);
    const double D = ev.cost.value();
    const std::uint64_t seed = 400 + k;

    for (int w = 0; w < net.num_sessions(); ++w)
      for (NodeId i = 0; i < net.topology.num_nodes(); ++i) {
        if (ev.flow.rate(w, i) <= 0 || i == net.sessions[w].destination) continue;
        const fx::BlockBound bb = fx::routing_block_bound(net, s, ev, i, w, D);
        std::vector<LinkId> links;
        std::vector<double> diag, x0;
        for (std::size_t c = 0; c < bb.links.size(); ++c)
          if (s.route(w, bb.links[c]) > 0)
            links.push_back(bb.links[c]), diag.push_back(bb.diag[c]), x0.push_back(s.route(w, bb.links[c]));
        if (links.size() < 2) continue;
        l2.add(hessian_bound_check(fx::routing_fn(net, s, w, links), x0, diag, TangentKind::ZeroSum, kHessTrials,
                                   seed, 1e-5, kHessSlack));
      }

    Network precise = net;
    precise.capacity = PreciseLog{net.capacity.K()};
    const Evaluation evp = evaluate(precise, s);
    for (NodeId i = 0; i < net.topology.num_nodes(); ++i) {
      const auto out = net.topology.out_links(i);
      if (out.size() < 2) continue;
      std::vector<double> x0;
      for (LinkId l : out) x0.push_back(s.eta[l]);
      l3.add(hessian_bound_check(fx::power_fn(net, s, i), x0, pa_scaling(net, s, ev, i).beta_link,
                                 TangentKind::ZeroSum, kHessTrials, seed, 1e-5, kHessSlack));
      if (evp.cost.finite())
        l6.add(hessian_bound_check(fx::power_fn(precise, s, i), x0, refined_pa_scaling(precise, s, evp, i).beta_link,
                                   TangentKind::ZeroSum, kHessTrials, seed, 1e-5, kHessSlack));
    }

    const auto hb = pc_hessian_bound(net.topology, curvature_bounds(net, ev.radio, D, true));
    l4.add(hessian_bound_check(fx::gamma_fn(net, s), s.gamma, hb, TangentKind::Free, kHessTrials, seed, 1e-5,
                               kHessSlack));
  }
}

// ------------------------------------------------------------------ 4

struct DescentResult {
  int monotone_failures = 0;
  int residual_failures = 0;
  int agreement_failures = 0;
  double worst_residual = 0;
  double best_residual = 1e300;
  double worst_gap = 0;
  int errors = 0;
};

DescentResult descent_suite() {
  DescentResult r;
  OptimizerConfig cfg;
  cfg.routing = RoutingAlg::Brt;
  cfg.power_alloc = PowerAllocAlg::Bpa;
  cfg.max_iterations = kDescentIters;
  cfg.tolerance = kResidualTol;
  for (int seed = 1; seed <= kSeeds; ++seed) {
    const Instance inst = fx::random_instance(seed, kNodes);
    const Network& net = inst.net;
    std::mt19937_64 rng(seed);
    const NetworkState starts[2] = {aodv_route(net), fx::random_interior_state(net, rng, 1.0)};
    double finals[2] = {0, 0};
    bool residual_ok = true, monotone_ok = true;
    for (int v = 0; v < 2; ++v) {
      try {
        const Trajectory tr = run_jopr(net, starts[v], cfg);
        total_loop_violations += tr.loop_violations;
        check_loop_free(net, tr.final_state);
        monotone_ok &= tr.monotonicity_violations == 0;
        for (std::size_t k = 1; k < tr.records.size(); ++k) monotone_ok &= tr.records[k].cost <= tr.records[k - 1].cost * (1 + kRoundoff);
        double best = 1e300;
        for (const auto& rec : tr.records) best = std::min(best, rec.residual);
        residual_ok &= best < kResidualTol;
        r.worst_residual = std::max(r.worst_residual, best);
        r.best_residual = std::min(r.best_residual, best);
        finals[v] = tr.records.back().cost;
      } catch (const Error& e) {
        std::printf("  seed %d start %d: %s\n", seed, v, e.what());
        ++r.errors;
        residual_ok = monotone_ok = false;
      }
    }
    const double gap = std::abs(finals[0] - finals[1]) / std::max(std::abs(finals[0]), std::abs(finals[1]));
    r.worst_gap = std::max(r.worst_gap, gap);
    r.monotone_failures += !monotone_ok;
    r.residual_failures += !residual_ok;
    r.agreement_failures += !(gap <= kInitAgreeRel);
  }
  return r;
}

// ------------------------------------------------------------------ 5

// BRT along its own trajectory, comparing every node step with GRT under the equivalent scaling.
double brt_grt_gap(const Network& net, NetworkState s, int sweeps) {
  const Topology& topo = net.topology;
  double worst = 0;
  for (int k = 0; k < sweeps; ++k)
    for (NodeId i = 0; i < topo.num_nodes(); ++i)
      for (int w = 0; w < net.num_sessions(); ++w) {
        const Evaluation ev = evaluate(net, s);
        const double t = ev.flow.rate(w, i);
        if (t <= 0 || i == net.sessions[w].destination) continue;
        const MarginalReport m = compute_marginals(net, s, ev);
        const auto blocked = blocked_links(net, s, m.node_potential, w);
        std::vector<double> dphi(topo.num_links());
        for (LinkId l = 0; l < topo.num_links(); ++l) dphi[l] = m.dphi(w, l);
        const SimplexBlock blk = routing_block(net, s, dphi, m.delta_phi_overflow[w], blocked, i, w, false);
        const auto hops = hop_counts(topo, net.sessions[w].destination, w, [&](LinkId l) { return !blocked[l]; });
        const auto A = flow_curvature_bounds(net, ev.radio, ev.cost.value());
        const double A_glob = *std::max_element(A.begin(), A.end());
        std::vector<double> a_coord;
        std::vector<int> h;
        for (LinkId l : topo.out_links(i))
          if (!blocked[l]) a_coord.push_back(A[l]), h.push_back(hops[topo.link(l).to]);
        if (a_coord.empty()) continue;
        const double alpha = routing_scaling(a_coord, A_glob, h, t).alpha;
        const auto x1 = brt_step(blk, alpha, t);
        const auto x2 = grt_step(blk, brt_equivalent_scaling(blk, alpha, t));
        for (std::size_t c = 0; c < x1.size(); ++c) worst = std::max(worst, std::abs(x1[c] - x2[c]));
        apply_routing_block(s, net, i, w, x1, false);
      }
  check_loop_free(net, s);
  return worst;
}

// ------------------------------------------------------------------ 6

double objective(std::span<const double> x, std::span<const double> y, std::span<const double> m) {
  double s = 0;
  for (std::size_t k = 0; k < x.size(); ++k) s += m[k] * (x[k] - y[k]) * (x[k] - y[k]);
  return s;
}

struct ProjectionResult {
  int grid_problems = 0;
  int grid_failures = 0;
  int kkt_problems = 0;
  int kkt_failures = 0;
  double worst_kkt = 0;
};

ProjectionResult projection_suite() {
  ProjectionResult r;
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> uy(-1.0, 2.0), um(0.2, 5.0);
  const int steps = static_cast<int>(std::lround(1.0 / kGridStep));
  for (int p = 0; p < 200; ++p) {
    const std::size_t d = p < 100 ? 2 : 3;
    std::vector<double> y(d), m(d);
    for (std::size_t k = 0; k < d; ++k) y[k] = uy(rng), m[k] = um(rng);
    const auto x = weighted_simplex_project(y, m, std::vector<char>(d, 0));
    double best = 1e300;
    std::vector<double> arg(d), z(d);
    for (int a = 0; a <= steps; ++a) {
      if (d == 2) {
        z = {a * kGridStep, (steps - a) * kGridStep};
        const double f = objective(z, y, m);
        if (f < best) best = f, arg = z;
        continue;
      }
      for (int b = 0; a + b <= steps; ++b) {
        z = {a * kGridStep, b * kGridStep, (steps - a - b) * kGridStep};
        const double f = objective(z, y, m);
        if (f < best) best = f, arg = z;
      }
    }
    // strong convexity on the simplex puts the grid minimiser within sqrt(2 d kappa) h of the optimum
    const double kappa = *std::max_element(m.begin(), m.end()) / *std::min_element(m.begin(), m.end());
    double dist = 0;
    for (std::size_t k = 0; k < d; ++k) dist += (x[k] - arg[k]) * (x[k] - arg[k]);
    const bool ok = objective(x, y, m) <= best + 1e-12 && std::sqrt(dist) <= std::sqrt(2.0 * d * kappa) * kGridStep;
    ++r.grid_problems;
    r.grid_failures += !ok;
  }
  std::uniform_int_distribution<int> dim(2, 8);
  for (int p = 0; p < 1000; ++p) {
    const int d = dim(rng);
    std::vector<double> y(d), m(d);
    for (int k = 0; k < d; ++k) y[k] = uy(rng), m[k] = um(rng);
    const auto x = weighted_simplex_project(y, m, std::vector<char>(d, 0));
    double sum = 0, theta = 0;
    int support = 0;
    for (int k = 0; k < d; ++k) {
      sum += x[k];
      if (x[k] > 0) theta += m[k] * (y[k] - x[k]), ++support;
    }
    theta /= support;
    const double scale = std::max(1.0, std::abs(theta));
    double err = std::abs(sum - 1.0);
    for (int k = 0; k < d; ++k) {
      if (x[k] < 0) err = std::max(err, -x[k]);
      if (x[k] > 0) err = std::max(err, std::abs(m[k] * (y[k] - x[k]) - theta) / scale);
      else err = std::max(err, (m[k] * y[k] - theta) / scale);
    }
    ++r.kkt_problems;
    r.worst_kkt = std::max(r.worst_kkt, err);
    r.kkt_failures += !(err <= kKktTol);
  }
  return r;
}

// ------------------------------------------------------------------ 7, 8, 9

GenConfig figure_gen() {
  GenConfig g;
  g.nodes = kNodes;
  return g;
}

double final_cost(const ArmRun& a) { return a.records.empty() ? INFINITY : a.records.back().cost; }

ExperimentReport run_figure(ExperimentConfig c) {
  const ExperimentReport rep = run_experiment(c);
  for (const auto& run : rep.runs)
    for (const auto& arm : run.arms) {
      total_loop_violations += arm.loop_violations;
      if (!arm.error.empty()) std::printf("  seed %llu arm %s: %s\n", (unsigned long long)run.seed, arm.name.c_str(),
                                          arm.error.c_str());
    }
  return rep;
}

std::size_t arm_index(const ExperimentReport& rep, const std::string& name) {
  return static_cast<std::size_t>(std::find(rep.arm_names.begin(), rep.arm_names.end(), name) - rep.arm_names.begin());
}

// ------------------------------------------------------------------ 10

double equilibrium_gap(int& loops) {
  Topology t(2, {{0, 1}, {1, 0}}, {0.1, 0.1}, {10, 10});
  t.set_gain(0, 1, 1.0);
  t.set_gain(1, 0, 1.0);
  Network net;
  net.topology = t;
  net.sessions = {{0, 1, Elastic{8.0, LogUtility{1.0, 0.0}}}};
  net.capacity = HighSinrLog{1e5, 1.0};
  net.cost = MM1Packets{0.0};
  NetworkState s = make_state(t, 1);
  s.gamma[1] = 0.0;
  s.route(0, 0) = 0.5;
  s.phi_overflow[0] = 0.5;
  const double C = evaluate(net, s).radio.capacity[0];
  // B'(F) = U'(rbar - F) = 1/r must equal dD/dF = C/(C - r)^2 on the link
  double lo = 0, hi = C;
  for (int it = 0; it < 200; ++it) {
    const double r = 0.5 * (lo + hi);
    (C / ((C - r) * (C - r)) > 1.0 / r ? hi : lo) = r;
  }
  OptimizerConfig cfg;
  cfg.congestion_control = true;
  cfg.max_iterations = 20000;
  cfg.tolerance = 1e-10;
  const Trajectory tr = run_jopr(net, s, cfg);
  loops += tr.loop_violations;
  check_loop_free(net, tr.final_state);
  return std::abs(tr.records.back().admitted_rate - 0.5 * (lo + hi));
}

}  // namespace

int main() {
  std::printf("acceptance suite: %d seeds, N=%d\n", kSeeds, kNodes);

  // 1, 2
  {
    const auto t0 = std::chrono::steady_clock::now();
    const StateSet set = random_states(50);
    double worst = 0, identity = 0;
    int checks = 0;
    gradient_oracle(set, worst, identity, checks);
    const double secs = seconds_since(t0);
    report(1, worst <= kGradRelTol && secs < 60.0, "analytic marginals match central differences",
           fmt("50 states, %d directional checks, worst rel err %.2e (tol %.0e), %.1f s", checks, worst, kGradRelTol,
               secs));
    report(2, identity <= kIdentityTol, "marginal identity holds",
           fmt("worst residual %.2e (tol %.0e)", identity, kIdentityTol));
  }

  // 3
  {
    BoundTally l2, l3, l4, l6;
    hessian_suite(l2, l3, l4, l6);
    const bool ok = l2.violations + l3.violations + l4.violations + l6.violations == 0 && l2.blocks && l3.blocks &&
                    l4.blocks && l6.blocks;
    report(3, ok, "Hessian bounds dominate finite-difference curvature",
           l2.text("routing") + "; " + l3.text("power alloc") + "; " + l4.text("power ctrl") + "; " +
               l6.text("refined alloc"));
  }

  // 4
  {
    const auto t0 = std::chrono::steady_clock::now();
    const DescentResult r = descent_suite();
    const double secs = seconds_since(t0);
    const bool ok = r.monotone_failures == 0 && r.residual_failures == 0 && r.agreement_failures == 0 &&
                    r.errors == 0 && secs < 300.0;
    report(4, ok, "descent and convergence of routing plus power allocation",
           fmt("non-monotone seeds %d; seeds missing residual %.0e in %d iters: %d (best residual per run ranges "
               "%.2e..%.2e); seeds whose two starts differ by more than %.0e: %d (worst %.2e); errors %d; %.1f s",
               r.monotone_failures, kResidualTol, kDescentIters, r.residual_failures, r.best_residual,
               r.worst_residual, kInitAgreeRel, r.agreement_failures, r.worst_gap, r.errors, secs));
  }

  // 5
  {
    Network dia = fx::diamond(0.6);
    dia.topology.set_gain(1, 3, 0.3);
    double worst = brt_grt_gap(dia, fx::diamond_state(dia, 0.9), 30);
    for (int k = 0; k < 5; ++k) {
      const Instance inst = fx::random_instance(500 + k, kNodes);
      worst = std::max(worst, brt_grt_gap(inst.net, aodv_route(inst.net), 10));
    }
    report(5, worst <= kEquivTol, "basic and scaled routing steps coincide under the equivalent scaling",
           fmt("diamond + 5 instances, worst iterate difference %.2e (tol %.0e)", worst, kEquivTol));
  }

  // 6
  {
    const ProjectionResult r = projection_suite();
    report(6, r.grid_failures == 0 && r.kkt_failures == 0, "weighted simplex projection",
           fmt("grid mismatches %d/%d at step %.0e; KKT failures %d/%d, worst %.2e (tol %.0e)", r.grid_failures,
               r.grid_problems, kGridStep, r.kkt_failures, r.kkt_problems, r.worst_kkt, kKktTol));
  }

  // 7
  {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentReport rep = run_figure(preset_experiment("static", figure_gen(), kSeeds, kFigureIters, kFigureTol, 0.0));
    const auto ia = arm_index(rep, "aodv"), ib = arm_index(rep, "brt"), iap = arm_index(rep, "aodv_bpa_pc"),
               ibp = arm_index(rep, "brt_bpa_pc");
    int brt_bad = 0, chain_bad = 0;
    double worst_ratio = 0;
    for (const auto& run : rep.runs) {
      const double a = final_cost(run.arms[ia]), b = final_cost(run.arms[ib]), ap = final_cost(run.arms[iap]),
                   bp = final_cost(run.arms[ibp]);
      brt_bad += !(b < a);
      chain_bad += !(bp <= ap * (1 + kRoundoff) && ap <= a * (1 + kRoundoff));
      worst_ratio = std::max(worst_ratio, b / a);
    }
    report(7, brt_bad == 0 && chain_bad == 0, "routing and joint power control beat min-hop routing",
           fmt("seeds with brt >= aodv: %d; seeds breaking brt+pa+pc <= aodv+pa+pc <= aodv: %d; worst brt/aodv %.6f; "
               "%.1f s",
               brt_bad, chain_bad, worst_ratio, seconds_since(t0)));
  }

  // 8
  {
    const auto t0 = std::chrono::steady_clock::now();
    ExperimentConfig c = preset_experiment("pc-scope", figure_gen(), kSeeds, kFigureIters, kFigureTol, 0.0);
    c.arms.resize(3);  // full, k1, k2
    const ExperimentReport rep = run_figure(c);
    int bad = 0, k1_over = 0;
    double worst2 = 0, worst1 = 0;
    for (const auto& run : rep.runs) {
      const double full = final_cost(run.arms[0]);
      const double r1 = std::abs(final_cost(run.arms[1]) - full) / full;
      const double r2 = std::abs(final_cost(run.arms[2]) - full) / full;
      bad += !(r2 <= kScopeRel);
      k1_over += r1 > kScopeRel;
      worst1 = std::max(worst1, r1), worst2 = std::max(worst2, r2);
    }
    report(8, bad == 0, "two-neighbour power control scope tracks the full scope",
           fmt("seeds beyond %.0f%%: %d (worst %.3e); k=1 for the record: %d seeds beyond, worst %.3e; %.1f s",
               100 * kScopeRel, bad, worst2, k1_over, worst1, seconds_since(t0)));

    // Not asserted: the packet cost above leaves power control nearly frozen, so repeat
    // with the delay cost where it moves.
    GenConfig dg = figure_gen();
    dg.cost = CostKind::Delay;
    ExperimentConfig cd = preset_experiment("pc-scope", dg, kSeeds, kFigureIters, kFigureTol, 0.0);
    cd.arms.resize(3);
    const ExperimentReport rd = run_figure(cd);
    double d1 = 0, d2 = 0, moved = 0;
    for (const auto& run : rd.runs) {
      const double full = final_cost(run.arms[0]);
      d1 = std::max(d1, std::abs(final_cost(run.arms[1]) - full) / full);
      d2 = std::max(d2, std::abs(final_cost(run.arms[2]) - full) / full);
      moved = std::max(moved, 1.0 - full / run.arms[0].records.front().cost);
    }
    std::printf("   note 8: delay cost, not asserted: worst k=2 gap %.3e, worst k=1 gap %.3e, largest full-scope "
                "reduction %.3e\n",
                d2, d1, moved);
  }

  // 9
  {
    const auto t0 = std::chrono::steady_clock::now();
    const ExperimentReport rep =
        run_figure(preset_experiment("noise", figure_gen(), kSeeds, kFigureIters, kFigureTol, kNoiseScale));
    const auto ic = arm_index(rep, "clean"), in = arm_index(rep, "noisy");
    int good = 0, aborted = 0;
    double worst = 0;
    for (const auto& run : rep.runs) {
      aborted += !run.arms[in].error.empty();
      const double clean = final_cost(run.arms[ic]);
      const double rel = std::abs(final_cost(run.arms[in]) - clean) / clean;
      good += rel <= kNoiseRel;
      worst = std::max(worst, rel);
    }
    report(9, good >= kNoiseMinSeeds && aborted == 0, "noisy stale messages stay near the clean optimum",
           fmt("seeds within %.0f%%: %d/%d (need %d), worst %.3e, aborted %d; %.1f s", 100 * kNoiseRel, good, kSeeds,
               kNoiseMinSeeds, worst, aborted, seconds_since(t0)));
  }

  // 10
  {
    int loops = 0;
    const double gap = equilibrium_gap(loops);
    total_loop_violations += loops;
    report(10, gap <= kEquilibriumAbs, "congestion control reaches the closed-form admitted rate",
           fmt("|r - r*| = %.2e (tol %.0e)", gap, kEquilibriumAbs));
  }

  // 11
  report(11, total_loop_violations == 0, "no routing loops in any run",
         fmt("%ld loop violations over all runs, %ld final-state acyclicity checks", total_loop_violations,
             loop_checks));

  std::printf("%d criteria failed\n", failures);
  return failures ? 1 : 0;
}
