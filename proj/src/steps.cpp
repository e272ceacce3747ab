#include <algorithm>
#include <cmath>

#include "xlayer/algorithms.hpp"

namespace xlayer {

// ---------------------------------------------------------------- blocking

std::vector<char> blocked_links(const Network& net, const NetworkState& state,
                                const std::vector<double>& potentials, int w) {
  const Topology& topo = net.topology;
  const int n = topo.num_nodes();
  const NodeId dest = net.sessions[w].destination;
  const double* p = potentials.data() + static_cast<std::size_t>(w) * n;

  // A node is tainted when some positive-flow path out of it uses a link that does not
  // go strictly downhill in potential.
  std::vector<char> tainted(n, 0);
  const auto order = session_order(topo, net.sessions, state, w);
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const NodeId v = *it;
    if (v == dest) continue;
    for (LinkId l : topo.out_links(v)) {
      if (state.route(w, l) <= 0) continue;
      const NodeId j = topo.link(l).to;
      if (p[j] >= p[v] || tainted[j]) tainted[v] = 1;
    }
  }

  std::vector<char> blocked(topo.num_links(), 0);
  for (LinkId l = 0; l < topo.num_links(); ++l) {
    const auto [i, j] = topo.link(l);
    if (i == dest) blocked[l] = 1;
    else if (state.route(w, l) <= 0 && (p[j] >= p[i] || tainted[j])) blocked[l] = 1;
  }

  try {
    hop_counts(topo, dest, w, [&](LinkId l) { return !blocked[l]; });
  } catch (const RoutingCycleError& e) {
    throw Error(ErrorKind::InternalAssertion, std::string("allowed graph is cyclic: ") + e.what());
  }
  return blocked;
}

BlockedSets blocked_sets(const Network& net, const NetworkState& state, const std::vector<double>& potentials) {
  BlockedSets b;
  b.num_links = net.topology.num_links();
  for (int w = 0; w < net.num_sessions(); ++w) {
    auto bl = blocked_links(net, state, potentials, w);
    b.blocked.insert(b.blocked.end(), bl.begin(), bl.end());
  }
  return b;
}

// ---------------------------------------------------------------- routing

SimplexBlock routing_block(const Network& net, const NetworkState& state, std::span<const double> dphi,
                           double dphi_overflow, std::span<const char> blocked, NodeId i, int w,
                           bool with_overflow) {
  SimplexBlock b;
  for (LinkId l : net.topology.out_links(i)) {
    b.x.push_back(state.route(w, l));
    b.grad.push_back(dphi[l]);
    b.fixed_zero.push_back(blocked[l]);
  }
  const Session& s = net.sessions[w];
  const bool source_of_elastic = s.elastic() && i == s.origin;
  if (with_overflow) {
    b.x.push_back(state.phi_overflow[w]);
    b.grad.push_back(dphi_overflow);
    b.fixed_zero.push_back(0);
  } else if (source_of_elastic) {
    b.mass = 1.0 - state.phi_overflow[w];
  }
  return b;
}

void apply_routing_block(NetworkState& state, const Network& net, NodeId i, int w, std::span<const double> values,
                         bool with_overflow) {
  std::size_t k = 0;
  for (LinkId l : net.topology.out_links(i)) state.route(w, l) = values[k++];
  if (with_overflow) state.phi_overflow[w] = values[k];
}

std::vector<double> brt_step(const SimplexBlock& block, double alpha, double t) {
  if (!(t > 0)) return block.x;
  return basic_step(block, alpha / t);
}

std::vector<double> grt_step(const SimplexBlock& block, std::span<const double> M) {
  return scaled_simplex_step(block.x, block.grad, M, block.fixed_zero, block.mass);
}

std::vector<double> brt_equivalent_scaling(const SimplexBlock& block, double alpha, double t) {
  std::vector<double> m(block.x.size(), t / alpha);
  m[steepest_coordinate(block)] = 0.0;
  return m;
}

// ---------------------------------------------------------------- power

SimplexBlock power_block(const Network& net, const NetworkState& state, std::span<const double> delta_eta,
                         NodeId i) {
  SimplexBlock b;
  const auto out = net.topology.out_links(i);
  for (LinkId l : out) {
    b.x.push_back(std::max(0.0, state.eta[l] - net.eta_floor));
    b.grad.push_back(delta_eta[l]);
    b.fixed_zero.push_back(0);
  }
  b.mass = 1.0 - static_cast<double>(out.size()) * net.eta_floor;
  return b;
}

void apply_power_block(NetworkState& state, const Network& net, NodeId i, std::span<const double> values) {
  std::size_t k = 0;
  for (LinkId l : net.topology.out_links(i)) state.eta[l] = net.eta_floor + values[k++];
}

std::vector<double> bpa_step(const SimplexBlock& block, double beta, double node_power) {
  return basic_step(block, beta / node_power);
}

std::vector<double> gpa_step(const SimplexBlock& block, std::span<const double> Q) {
  return scaled_simplex_step(block.x, block.grad, Q, block.fixed_zero, block.mass);
}

std::vector<double> pc_step(std::span<const double> gamma, std::span<const double> delta_gamma,
                            std::span<const double> v, std::span<const NodeId> nodes) {
  std::vector<double> out(gamma.begin(), gamma.end());
  for (NodeId i : nodes) out[i] = std::min(1.0, gamma[i] - delta_gamma[i] / v[i]);
  return out;
}

std::vector<char> interference_limited_check(const Topology& topo, const RadioState& radio, double K) {
  if (!(K > 2)) throw Error(ErrorKind::InvalidArgument, "interference-limited check needs K > 2");
  std::vector<char> ok(topo.num_links());
  for (LinkId l = 0; l < topo.num_links(); ++l) {
    const auto [i, j] = topo.link(l);
    ok[l] = K * topo.gain(i, j) * radio.link_power[l] <= (K - 2.0) * radio.interference[l];
  }
  return ok;
}

// ---------------------------------------------------------------- residuals

double OptimalityResidual::overall() const {
  return std::max({routing_max, power_alloc_max, power_ctrl_max, congestion_max});
}

OptimalityResidual optimality_residuals(const Network& net, const NetworkState& state, const Evaluation& ev,
                                        const MarginalReport& marg, ResidualOptions opts) {
  const Topology& topo = net.topology;
  const int n = topo.num_nodes();
  OptimalityResidual r;
  r.routing.assign(static_cast<std::size_t>(net.num_sessions()) * n, 0.0);
  r.congestion.assign(net.num_sessions(), 0.0);
  r.power_alloc.assign(n, 0.0);
  r.power_ctrl.assign(n, 0.0);

  for (int w = 0; w < net.num_sessions(); ++w) {
    const Session& s = net.sessions[w];
    for (NodeId i = 0; i < n; ++i) {
      if (i == s.destination || ev.flow.rate(w, i) <= 0) continue;
      const bool overflow = opts.include_overflow && s.elastic() && i == s.origin;
      double lambda = overflow ? marg.delta_phi_overflow[w] : std::numeric_limits<double>::infinity();
      for (LinkId l : topo.out_links(i)) lambda = std::min(lambda, marg.dphi(w, l));
      double res = 0;
      for (LinkId l : topo.out_links(i))
        if (state.route(w, l) > 0) res = std::max(res, marg.dphi(w, l) - lambda);
      if (overflow && state.phi_overflow[w] > 0) {
        r.congestion[w] = marg.delta_phi_overflow[w] - lambda;
        res = std::max(res, r.congestion[w]);
      }
      r.routing[static_cast<std::size_t>(w) * n + i] = res;
      r.routing_max = std::max(r.routing_max, res);
      r.congestion_max = std::max(r.congestion_max, r.congestion[w]);
    }
  }

  for (NodeId i = 0; i < n; ++i) {
    const auto out = topo.out_links(i);
    if (out.size() >= 2) {
      double nu = std::numeric_limits<double>::infinity();
      for (LinkId l : out) nu = std::min(nu, marg.delta_eta[l]);
      double res = 0;
      for (LinkId l : out)
        if (state.eta[l] > opts.eta_floor * (1.0 + 1e-9)) res = std::max(res, marg.delta_eta[l] - nu);
      r.power_alloc[i] = res;
      r.power_alloc_max = std::max(r.power_alloc_max, res);
    }
    const double g = ev.radio.node_power[i] > 0 ? marg.delta_gamma[i] / ev.radio.node_power[i] : 0.0;
    r.power_ctrl[i] = state.gamma[i] < 1.0 ? std::abs(g) : std::max(0.0, g);
    r.power_ctrl_max = std::max(r.power_ctrl_max, r.power_ctrl[i]);
  }
  return r;
}

}  // namespace xlayer
