#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

#include "xlayer/engine.hpp"

namespace xlayer {

void OptimizerConfig::validate() const {
  if (!(tolerance > 0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be > 0");
  if (max_iterations < 1) throw Error(ErrorKind::InvalidArgument, "iteration budget must be >= 1");
  if (!(pc_subset_fraction > 0 && pc_subset_fraction <= 1))
    throw Error(ErrorKind::InvalidArgument, "pc subset fraction must lie in (0, 1]");
  if (guard_halvings < 0) throw Error(ErrorKind::InvalidArgument, "guard halvings must be >= 0");
}

void ExactSource::begin(const Network& net, const NetworkState&, const Evaluation&, const std::vector<double>&) {
  num_nodes_ = net.topology.num_nodes();
}

void ExactSource::routing_inputs(const std::vector<double>& true_potentials, NodeId, int w,
                                 std::vector<double>& priced, std::vector<double>& blocking) {
  const auto first = true_potentials.begin() + static_cast<std::ptrdiff_t>(w) * num_nodes_;
  priced.assign(first, first + num_nodes_);
  blocking = priced;
}

std::vector<double> ExactSource::delta_gamma(const Network& net, const NetworkState& state, const RadioState& radio,
                                             const std::vector<double>& true_msgs,
                                             const std::vector<double>& delta_eta, MsgScope scope) {
  return marginal_power_control_costs(net.topology, true_msgs, delta_eta, state, radio, scope);
}

namespace {

NetworkState lerp(const NetworkState& a, const NetworkState& b, double s) {
  NetworkState out = b;
  auto mix = [s](const std::vector<double>& x, std::vector<double>& y) {
    for (std::size_t k = 0; k < y.size(); ++k) y[k] = x[k] + s * (y[k] - x[k]);
  };
  mix(a.phi, out.phi);
  mix(a.phi_overflow, out.phi_overflow);
  mix(a.eta, out.eta);
  mix(a.gamma, out.gamma);
  return out;
}

class Engine {
 public:
  Engine(const Network& net, const OptimizerConfig& cfg, MarginalSource& src, const Network* alt)
      : net_(net), cfg_(cfg), src_(src), alt_(alt), rng_(cfg.seed) {}

  Trajectory run(const NetworkState& initial);

 private:
  // Accepts `candidate` if it does not raise the cost, halving toward the current point
  // otherwise. Returns false when the step had to be dropped.
  bool accept(NetworkState candidate);
  void routing_step(NodeId i, int w, int iteration);
  void power_alloc_step(NodeId i);
  void power_control_step(int iteration);
  double budget() const { return cfg_.budget == BudgetPolicy::Initial ? d0_ : ev_.cost.value(); }
  IterationRecord record(int iteration);

  const Network& net_;
  const OptimizerConfig& cfg_;
  MarginalSource& src_;
  const Network* alt_;
  std::mt19937_64 rng_;
  NetworkState state_;
  Evaluation ev_;
  Trajectory traj_;
  double d0_ = 0;
  std::vector<double> v_;  // power-control scaling, fixed under the initial budget
  int halvings_ = 0;
};

bool Engine::accept(NetworkState candidate) {
  const double c0 = ev_.cost.value();
  const double slack = cfg_.guard_tolerance * std::max(1.0, std::abs(c0));
  for (int h = 0; h <= cfg_.guard_halvings; ++h) {
    if (h > 0) {
      candidate = lerp(state_, candidate, 0.5);
      ++halvings_;
    }
    Evaluation ev;
    try {
      ev = evaluate(net_, candidate);
    } catch (const RoutingCycleError&) {
      ++traj_.loop_violations;
      if (src_.strict()) throw;
      return false;
    }
    if (ev.cost.finite() && ev.cost.value() <= c0 + slack) {
      state_ = std::move(candidate);
      ev_ = std::move(ev);
      return true;
    }
  }
  if (src_.strict()) throw Error(ErrorKind::DescentGuardExhausted, "cost still rises after the last halving");
  ++traj_.guard_rejections;
  return false;
}

void Engine::routing_step(NodeId i, int w, int iteration) {
  const Session& s = net_.sessions[w];
  const double t = ev_.flow.rate(w, i);
  const auto pots = node_potentials(net_, state_, ev_.flow, ev_.radio);
  const bool with_overflow = cfg_.congestion_control && s.elastic() && i == s.origin;
  // Idle nodes still publish what they know.
  if (i == s.destination || t <= 0 ||
      (!with_overflow && s.elastic() && i == s.origin && state_.phi_overflow[w] >= 1.0)) {
    src_.routing_done(pots, i, w, iteration);
    return;
  }

  std::vector<double> priced, blocking;
  src_.routing_inputs(pots, i, w, priced, blocking);

  const Topology& topo = net_.topology;
  const int n = topo.num_nodes();
  std::vector<double> session_pots(static_cast<std::size_t>(net_.num_sessions()) * n, 0.0);
  std::copy(blocking.begin(), blocking.end(), session_pots.begin() + static_cast<std::ptrdiff_t>(w) * n);
  const auto blocked = blocked_links(net_, state_, session_pots, w);
  const auto hops = hop_counts(topo, s.destination, w, [&](LinkId l) { return !blocked[l]; });

  std::vector<double> dphi(topo.num_links(), 0.0);
  for (LinkId l : topo.out_links(i))
    dphi[l] = net_.cost.dF(ev_.radio.capacity[l], ev_.flow.link_flow[l]) + priced[topo.link(l).to];
  const double dphi_overflow =
      s.elastic() ? s.utility()->loss_d1(ev_.flow.overflow_rate[w], s.source_rate()) : 0.0;
  SimplexBlock block = routing_block(net_, state_, dphi, dphi_overflow, blocked, i, w, with_overflow);

  const double b = budget();
  std::vector<double> A_coord;
  std::vector<int> h_coord;
  std::vector<std::size_t> coord_of;
  const auto out = topo.out_links(i);
  double A_global = 0;
  for (LinkId l = 0; l < topo.num_links(); ++l)
    A_global = std::max(A_global, cost_curvature_extrema(net_.cost, b, {CurvatureMode::FlowAtCapacity,
                                                                        ev_.radio.capacity[l]})
                                      .max_second);
  for (std::size_t k = 0; k < out.size(); ++k) {
    if (blocked[out[k]]) continue;
    A_coord.push_back(
        cost_curvature_extrema(net_.cost, b, {CurvatureMode::FlowAtCapacity, ev_.radio.capacity[out[k]]})
            .max_second);
    h_coord.push_back(hops[topo.link(out[k]).to]);
    coord_of.push_back(k);
  }
  if (with_overflow) {
    A_coord.push_back(s.utility()->max_loss_curvature(s.source_rate(), b));
    h_coord.push_back(0);
    coord_of.push_back(out.size());
  }
  const RoutingScaling rs = routing_scaling(A_coord, A_global, h_coord, t);

  std::vector<double> next;
  if (cfg_.routing == RoutingAlg::Brt) {
    next = brt_step(block, rs.alpha, t);
  } else {
    std::vector<double> M(block.x.size(), 0.0);
    for (std::size_t k = 0; k < coord_of.size(); ++k) M[coord_of[k]] = rs.diag[k];
    next = grt_step(block, M);
  }
  NetworkState cand = state_;
  apply_routing_block(cand, net_, i, w, next, with_overflow);
  accept(std::move(cand));
  src_.routing_done(node_potentials(net_, state_, ev_.flow, ev_.radio), i, w, iteration);
}

void Engine::power_alloc_step(NodeId i) {
  if (net_.topology.out_links(i).size() < 2) return;
  const auto deta = marginal_power_alloc_costs(net_, ev_.radio, ev_.flow, cfg_.refined_power_alloc);
  const SimplexBlock block = power_block(net_, state_, deta, i);
  const PowerAllocScaling ps = cfg_.refined_power_alloc ? refined_pa_scaling(net_, state_, ev_, i)
                                                        : pa_scaling(net_, state_, ev_, i);
  const auto next = cfg_.power_alloc == PowerAllocAlg::Bpa ? bpa_step(block, ps.beta, ev_.radio.node_power[i])
                                                           : gpa_step(block, ps.diag);
  NetworkState cand = state_;
  apply_power_block(cand, net_, i, next);
  accept(std::move(cand));
}

void Engine::power_control_step(int iteration) {
  const int n = net_.topology.num_nodes();
  if (cfg_.budget == BudgetPolicy::Current)
    v_ = pc_scaling(net_.topology, curvature_bounds(net_, ev_.radio, budget(), true));
  const int m = std::max(1, static_cast<int>(std::ceil(cfg_.pc_subset_fraction * n)));
  std::vector<NodeId> nodes;
  for (int r = 0; r < std::min(m, n); ++r) nodes.push_back(static_cast<NodeId>((iteration * m + r) % n));
  if (m >= n) {
    nodes.resize(n);
    std::iota(nodes.begin(), nodes.end(), 0);
  }
  const auto msgs = power_control_messages(net_, ev_.radio, ev_.flow);
  const auto deta = marginal_power_alloc_costs(net_, ev_.radio, ev_.flow, false);
  const auto dgamma = src_.delta_gamma(net_, state_, ev_.radio, msgs, deta, cfg_.scope);
  NetworkState cand = state_;
  cand.gamma = pc_step(state_.gamma, dgamma, v_, nodes);
  accept(std::move(cand));
  src_.power_control_done(power_control_messages(net_, ev_.radio, ev_.flow), iteration);
}

IterationRecord Engine::record(int iteration) {
  const MarginalReport marg = compute_marginals(net_, state_, ev_, {cfg_.refined_power_alloc, MsgScope::all()});
  const OptimalityResidual res =
      optimality_residuals(net_, state_, ev_, marg, {cfg_.congestion_control, net_.eta_floor});
  IterationRecord r;
  r.iteration = iteration;
  r.cost = ev_.cost.value();
  r.routing_residual = std::max(res.routing_max, cfg_.congestion_control ? res.congestion_max : 0.0);
  r.power_alloc_residual = res.power_alloc_max;
  r.power_ctrl_residual = res.power_ctrl_max;
  if (cfg_.routing != RoutingAlg::Off) r.residual = std::max(r.residual, r.routing_residual);
  if (cfg_.power_alloc != PowerAllocAlg::Off) r.residual = std::max(r.residual, r.power_alloc_residual);
  if (cfg_.power_control) r.residual = std::max(r.residual, r.power_ctrl_residual);
  r.admitted_rate = std::accumulate(ev_.flow.admitted_rate.begin(), ev_.flow.admitted_rate.end(), 0.0);
  if (alt_) {
    const Cost c = evaluate(*alt_, state_).cost;
    r.alt_cost = c.finite() ? c.value() : std::numeric_limits<double>::infinity();
  }
  r.guard_halvings = halvings_;
  halvings_ = 0;
  return r;
}

Trajectory Engine::run(const NetworkState& initial) {
  cfg_.validate();
  if (cfg_.power_control && !net_.capacity.log_concave_power())
    throw Error(ErrorKind::CapacityModelMismatch, "power control needs a capacity concave in log power");
  state_ = initial;
  ev_ = evaluate(net_, state_);
  if (!ev_.cost.finite()) throw Error(ErrorKind::InitialInfeasible, "initial state has infinite cost");
  d0_ = ev_.cost.value();
  if (cfg_.power_control) v_ = pc_scaling(net_.topology, curvature_bounds(net_, ev_.radio, d0_, true));
  src_.begin(net_, state_, ev_, node_potentials(net_, state_, ev_.flow, ev_.radio));

  const int n = net_.topology.num_nodes();
  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), 0);
  traj_.records.push_back(record(0));
  for (int k = 1; k <= cfg_.max_iterations; ++k) {
    if (cfg_.order == NodeOrder::RandomPermutation) std::shuffle(order.begin(), order.end(), rng_);
    const double before = ev_.cost.value();
    for (NodeId i : order) {
      if (cfg_.routing != RoutingAlg::Off)
        for (int w = 0; w < net_.num_sessions(); ++w) routing_step(i, w, k);
      if (cfg_.power_alloc != PowerAllocAlg::Off) power_alloc_step(i);
    }
    if (cfg_.power_control) power_control_step(k);
    if (ev_.cost.value() > before + cfg_.guard_tolerance * std::max(1.0, std::abs(before)))
      ++traj_.monotonicity_violations;
    traj_.records.push_back(record(k));
    traj_.iterations = k;
    if (cfg_.snapshot_every > 0 && k % cfg_.snapshot_every == 0) traj_.snapshots.push_back(state_);
    if (traj_.records.back().residual <= cfg_.tolerance) {
      traj_.converged = true;
      break;
    }
  }
  traj_.final_state = state_;
  return std::move(traj_);
}

}  // namespace

Trajectory run_engine(const Network& net, const NetworkState& initial, const OptimizerConfig& config,
                      MarginalSource& source, const Network* alt) {
  Engine e(net, config, source, alt);
  return e.run(initial);
}

Trajectory run_jopr(const Network& net, const NetworkState& initial, const OptimizerConfig& config) {
  ExactSource src;
  return run_engine(net, initial, config, src);
}

Trajectory run_two_stage_jopar(const Network& net, const NetworkState& initial, const TwoStageConfig& config) {
  const double K = net.capacity.K();
  Network precise = net;
  precise.capacity = CapacityFn(PreciseLog{K});
  Network approx = net;
  approx.capacity = CapacityFn(HighSinrLog{K, 1.0});

  OptimizerConfig s1 = config.stage1;
  s1.power_control = false;
  s1.refined_power_alloc = true;
  OptimizerConfig s2 = config.stage2;
  s2.routing = RoutingAlg::Off;
  s2.power_alloc = PowerAllocAlg::Off;
  s2.power_control = true;
  s2.refined_power_alloc = false;

  Trajectory out;
  NetworkState state = initial;
  {
    const RadioState radio = compute_radio(precise.topology, precise.capacity, state);
    for (char ok : interference_limited_check(precise.topology, radio, K)) out.infeasible_links_at_entry += !ok;
  }
  int offset = 0;
  auto append = [&](Trajectory&& t, int stage) {
    for (std::size_t k = (out.records.empty() ? 0 : 1); k < t.records.size(); ++k) {
      IterationRecord r = t.records[k];
      r.iteration += offset;
      r.stage = stage;
      out.records.push_back(r);
    }
    offset += t.iterations;
    out.iterations += t.iterations;
    out.guard_rejections += t.guard_rejections;
    out.monotonicity_violations += t.monotonicity_violations;
    out.loop_violations += t.loop_violations;
    state = t.final_state;
    return t.converged;
  };
  for (int c = 0; c < std::max(1, config.cycles); ++c) {
    ExactSource src1, src2;
    append(run_engine(precise, state, s1, src1, &approx), 1);
    if (!config.stage2_enabled) break;
    if (!evaluate(approx, state).cost.finite()) break;
    out.converged = append(run_engine(approx, state, s2, src2, &precise), 2);
  }
  if (!config.stage2_enabled) out.converged = true;
  out.final_state = state;
  return out;
}

}  // namespace xlayer
