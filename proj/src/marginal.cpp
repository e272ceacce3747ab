#include "xlayer/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace xlayer {

std::vector<double> node_potentials(const Network& net, const NetworkState& state, const FlowState& flow,
                                    const RadioState& radio) {
  const Topology& topo = net.topology;
  const int n = topo.num_nodes();
  const int ns = net.num_sessions();
  std::vector<double> link_marginal(topo.num_links());
  for (LinkId l = 0; l < topo.num_links(); ++l) link_marginal[l] = net.cost.dF(radio.capacity[l], flow.link_flow[l]);

  std::vector<double> pot(static_cast<std::size_t>(ns) * n, 0.0);
  for (int w = 0; w < ns; ++w) {
    const Session& s = net.sessions[w];
    double* p = pot.data() + static_cast<std::size_t>(w) * n;
    const auto order = session_order(topo, net.sessions, state, w);
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const NodeId i = *it;
      if (i == s.destination) continue;
      double v = 0;
      for (LinkId l : topo.out_links(i)) {
        const double phi = state.route(w, l);
        if (phi > 0) v += phi * (link_marginal[l] + p[topo.link(l).to]);
      }
      if (i == s.origin && s.elastic() && state.phi_overflow[w] > 0)
        v += state.phi_overflow[w] * s.utility()->loss_d1(flow.overflow_rate[w], s.source_rate());
      p[i] = v;
    }
  }
  return pot;
}

RoutingMarginals marginal_routing_costs(const Network& net, const std::vector<double>& potentials,
                                        const FlowState& flow, const RadioState& radio) {
  const Topology& topo = net.topology;
  const int n = topo.num_nodes();
  const int e = topo.num_links();
  const int ns = net.num_sessions();
  RoutingMarginals out;
  out.delta_phi.assign(static_cast<std::size_t>(ns) * e, 0.0);
  out.delta_phi_overflow.assign(ns, 0.0);
  for (LinkId l = 0; l < e; ++l) {
    const double m = net.cost.dF(radio.capacity[l], flow.link_flow[l]);
    const auto [i, j] = topo.link(l);
    for (int w = 0; w < ns; ++w) {
      if (i == net.sessions[w].destination) continue;
      out.delta_phi[static_cast<std::size_t>(w) * e + l] = m + potentials[static_cast<std::size_t>(w) * n + j];
    }
  }
  for (int w = 0; w < ns; ++w)
    if (const UtilityFn* u = net.sessions[w].utility())
      out.delta_phi_overflow[w] = u->loss_d1(flow.overflow_rate[w], net.sessions[w].source_rate());
  return out;
}

double link_power_alloc_cost(const Network& net, const RadioState& radio, const FlowState& flow, LinkId l,
                             bool refined) {
  const Topology& topo = net.topology;
  const auto [i, j] = topo.link(l);
  const double dC = net.cost.dC(radio.capacity[l], flow.link_flow[l]);
  if (dC == 0) return 0.0;
  const double g = topo.gain(i, j);
  const double in = radio.interference[l];
  if (refined) {
    const double K = net.capacity.K();
    return dC * ((K - 1.0) * g / (K * g * radio.link_power[l] + in) + g / in);
  }
  const double x = radio.sinr[l];
  return dC * net.capacity.d1(x) * (g / in) * (1.0 + x);
}

std::vector<double> marginal_power_alloc_costs(const Network& net, const RadioState& radio, const FlowState& flow,
                                               bool refined) {
  std::vector<double> out(net.topology.num_links());
  for (LinkId l = 0; l < net.topology.num_links(); ++l) out[l] = link_power_alloc_cost(net, radio, flow, l, refined);
  return out;
}

std::vector<double> power_control_messages(const Network& net, const RadioState& radio, const FlowState& flow) {
  const Topology& topo = net.topology;
  std::vector<double> msg(topo.num_nodes(), 0.0);
  for (LinkId l = 0; l < topo.num_links(); ++l) {
    const double dC = net.cost.dC(radio.capacity[l], flow.link_flow[l]);
    if (dC == 0) continue;
    const double x = radio.sinr[l];
    // x^2 / (G P) written as x / IN
    msg[topo.link(l).to] += -dC * net.capacity.d1(x) * x / radio.interference[l];
  }
  return msg;
}

std::vector<NodeId> nearest_nodes(const Topology& topo, NodeId i, int k) {
  std::vector<NodeId> cand;
  for (NodeId n = 0; n < topo.num_nodes(); ++n)
    if (n != i && topo.has_gain(i, n)) cand.push_back(n);
  std::ranges::stable_sort(cand, [&](NodeId a, NodeId b) { return topo.gain(i, a) > topo.gain(i, b); });
  if (k >= 0 && static_cast<int>(cand.size()) > k) cand.resize(k);
  return cand;
}

double node_power_control_cost(const Topology& topo, const std::vector<double>& msgs,
                               const std::vector<double>& delta_eta, const NetworkState& state,
                               const RadioState& radio, NodeId i, MsgScope scope) {
  double sum = 0;
  if (scope.is_all()) {
    for (NodeId n = 0; n < topo.num_nodes(); ++n)
      if (topo.has_gain(i, n)) sum += topo.gain(i, n) * msgs[n];
  } else {
    if (topo.has_gain(i, i)) sum += topo.gain(i, i) * msgs[i];
    for (NodeId n : nearest_nodes(topo, i, scope.k)) sum += topo.gain(i, n) * msgs[n];
  }
  for (LinkId l : topo.out_links(i)) sum += delta_eta[l] * state.eta[l];
  return radio.node_power[i] * sum;
}

std::vector<double> marginal_power_control_costs(const Topology& topo, const std::vector<double>& msgs,
                                                 const std::vector<double>& delta_eta, const NetworkState& state,
                                                 const RadioState& radio, MsgScope scope) {
  if (!scope.is_all() && scope.k > topo.num_nodes() - 1)
    throw Error(ErrorKind::ScopeTooLarge, "k = " + std::to_string(scope.k) + " exceeds |N| - 1");
  std::vector<double> out(topo.num_nodes());
  for (NodeId i = 0; i < topo.num_nodes(); ++i)
    out[i] = node_power_control_cost(topo, msgs, delta_eta, state, radio, i, scope);
  return out;
}

std::vector<int> hop_counts(const Topology& topo, NodeId destination, int session,
                            const std::function<bool(LinkId)>& counted) {
  const int n = topo.num_nodes();
  // Kahn on the reversed counted graph, seeded at sinks; the longest path then
  // follows from processing nodes after all their counted successors.
  std::vector<int> outdeg(n, 0);
  for (LinkId l = 0; l < topo.num_links(); ++l)
    if (topo.link(l).from != destination && counted(l)) ++outdeg[topo.link(l).from];
  std::vector<NodeId> queue;
  for (int i = 0; i < n; ++i)
    if (outdeg[i] == 0) queue.push_back(i);
  std::vector<int> h(n, -1);
  h[destination] = 0;
  for (std::size_t head = 0; head < queue.size(); ++head) {
    const NodeId v = queue[head];
    if (v != destination) {
      for (LinkId l : topo.out_links(v))
        if (counted(l) && h[topo.link(l).to] >= 0) h[v] = std::max(h[v], h[topo.link(l).to] + 1);
    }
    for (LinkId l : topo.in_links(v)) {
      const NodeId u = topo.link(l).from;
      if (u != destination && counted(l) && --outdeg[u] == 0) queue.push_back(u);
    }
  }
  if (static_cast<int>(queue.size()) != n) {
    std::vector<NodeId> cyc;
    for (int i = 0; i < n; ++i)
      if (outdeg[i] > 0) cyc.push_back(i);
    throw RoutingCycleError(session, std::move(cyc));
  }
  return h;
}

std::vector<int> hop_counts(const Topology& topo, const std::vector<Session>& sessions,
                            const NetworkState& state) {
  const int n = topo.num_nodes();
  std::vector<int> out;
  out.reserve(sessions.size() * n);
  for (int w = 0; w < static_cast<int>(sessions.size()); ++w) {
    auto h = hop_counts(topo, sessions[w].destination, w, [&](LinkId l) { return state.route(w, l) > 0; });
    out.insert(out.end(), h.begin(), h.end());
  }
  return out;
}

double potential_identity_residual(const Network& net, const FlowState& flow, const RadioState& radio,
                       const std::vector<double>& potentials) {
  double lhs = 0;
  for (LinkId l = 0; l < net.topology.num_links(); ++l)
    if (flow.link_flow[l] > 0) lhs += net.cost.dF(radio.capacity[l], flow.link_flow[l]) * flow.link_flow[l];
  double rhs = 0;
  const int n = net.topology.num_nodes();
  for (int w = 0; w < net.num_sessions(); ++w) {
    const Session& s = net.sessions[w];
    if (const UtilityFn* u = s.utility())
      lhs += u->loss_d1(flow.overflow_rate[w], s.source_rate()) * flow.overflow_rate[w];
    rhs += potentials[static_cast<std::size_t>(w) * n + s.origin] * s.source_rate();
  }
  return std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs));
}

MarginalReport compute_marginals(const Network& net, const NetworkState& state, const Evaluation& ev,
                                 MarginalOptions opts) {
  MarginalReport r;
  r.num_nodes = net.topology.num_nodes();
  r.num_links = net.topology.num_links();
  r.node_potential = node_potentials(net, state, ev.flow, ev.radio);
  auto rm = marginal_routing_costs(net, r.node_potential, ev.flow, ev.radio);
  r.delta_phi = std::move(rm.delta_phi);
  r.delta_phi_overflow = std::move(rm.delta_phi_overflow);
  r.delta_eta = marginal_power_alloc_costs(net, ev.radio, ev.flow, opts.refined_power_alloc);
  r.msg = power_control_messages(net, ev.radio, ev.flow);
  r.delta_gamma = marginal_power_control_costs(net.topology, r.msg, r.delta_eta, state, ev.radio, opts.scope);
  return r;
}

}  // namespace xlayer
