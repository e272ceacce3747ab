#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <span>
#include <numeric>
#include <random>
#include <vector>

#include "xlayer/checks.hpp"
#include "xlayer/experiment.hpp"

namespace fx {

using namespace xlayer;

// 0 -> {1, 2} -> 3, one session 0 -> 3 at rate 1, even split, unit gains on the links
// and weak cross gains everywhere else.
inline Network diamond(double rate = 1.0) {
  Topology t(4, {{0, 1}, {0, 2}, {1, 3}, {2, 3}}, {0.1, 0.1, 0.1, 0.1}, {10, 10, 10, 10});
  for (int m = 0; m < 4; ++m)
    for (int j = 0; j < 4; ++j)
      if (m != j) t.set_gain(m, j, 0.01);
  t.set_gain(0, 1, 1.0);
  t.set_gain(0, 2, 1.0);
  t.set_gain(1, 3, 1.0);
  t.set_gain(2, 3, 1.0);
  Network net;
  net.topology = std::move(t);
  net.sessions = {{0, 3, Inelastic{rate}}};
  net.capacity = HighSinrLog{1e5, 1.0};
  net.cost = MM1Packets{0.0};
  return net;
}

inline NetworkState diamond_state(const Network& net, double split = 0.5) {
  NetworkState s = make_state(net.topology, 1);
  s.route(0, 0) = split;
  s.route(0, 1) = 1.0 - split;
  s.route(0, 2) = 1.0;
  s.route(0, 3) = 1.0;
  return s;
}

// Radio with every capacity pinned to `c`; only capacities matter to the marginals.
inline RadioState flat_radio(const Network& net, double c) {
  RadioState r = compute_radio(net.topology, net.capacity, make_state(net.topology, net.num_sessions()));
  std::fill(r.capacity.begin(), r.capacity.end(), c);
  return r;
}

// 0 -> 1 -> ... -> n-1 with unit gains on the chain.
inline Network chain(int n, double rate = 1.0) {
  std::vector<Link> links;
  for (int i = 0; i + 1 < n; ++i) links.push_back({i, i + 1});
  Topology t(n, links, std::vector<double>(n, 0.1), std::vector<double>(n, 10.0));
  for (int m = 0; m < n; ++m)
    for (int j = 0; j < n; ++j)
      if (m != j) t.set_gain(m, j, std::abs(m - j) == 1 ? 1.0 : 0.001);
  Network net;
  net.topology = std::move(t);
  net.sessions = {{0, n - 1, Inelastic{rate}}};
  net.capacity = HighSinrLog{1e5, 1.0};
  net.cost = MM1Packets{1e-9};
  return net;
}

inline NetworkState chain_state(const Network& net) {
  NetworkState s = make_state(net.topology, net.num_sessions());
  for (LinkId l = 0; l < net.topology.num_links(); ++l) s.route(0, l) = 1.0;
  return s;
}

// Small generated instance (8 to 12 nodes).
inline Instance random_instance(std::uint64_t seed, int nodes = 10, CostKind cost = CostKind::Packets) {
  GenConfig g;
  g.nodes = nodes;
  g.seed = seed;
  g.cost = cost;
  return generate_instance(g);
}

// Interior state around the min-hop routes, see interior_state.
inline NetworkState random_interior_state(const Network& net, std::mt19937_64& rng, double gamma_low = 0.6) {
  return interior_state(net, aodv_route(net), rng, gamma_low);
}

inline double cost_of(const Network& net, const NetworkState& s) {
  const Cost c = evaluate(net, s).cost;
  return c.finite() ? c.value() : std::numeric_limits<double>::infinity();
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({1.0, std::abs(a), std::abs(b)}); }


// Bound diagonal of the routing Hessian at (i, w) over the allowed coordinates, and
// the link ids of those coordinates.
struct BlockBound {
  std::vector<LinkId> links;
  std::vector<double> diag;
};

inline BlockBound routing_block_bound(const Network& net, const NetworkState& s, const Evaluation& ev, NodeId i, int w,
                               double budget) {
  const Topology& topo = net.topology;
  const auto pots = node_potentials(net, s, ev.flow, ev.radio);
  const auto blocked = blocked_links(net, s, pots, w);
  const auto hops = hop_counts(topo, net.sessions[w].destination, w, [&](LinkId l) { return !blocked[l]; });
  const auto A = flow_curvature_bounds(net, ev.radio, budget);
  const double A_glob = *std::max_element(A.begin(), A.end());
  BlockBound b;
  for (LinkId l : topo.out_links(i))
    if (!blocked[l]) b.links.push_back(l);
  const double an = static_cast<double>(b.links.size());
  const double t = ev.flow.rate(w, i);
  for (LinkId l : b.links) b.diag.push_back(t * t * (A[l] + an * hops[topo.link(l).to] * A_glob));
  return b;
}

// Total cost as a function of one node's routing block.
inline std::function<double(std::span<const double>)> routing_fn(const Network& net, const NetworkState& s, int w,
                                                                 std::vector<LinkId> links) {
  return [&net, s, w, links](std::span<const double> x) {
    NetworkState t = s;
    for (std::size_t k = 0; k < links.size(); ++k) t.route(w, links[k]) = x[k];
    return cost_of(net, t);
  };
}

inline std::function<double(std::span<const double>)> power_fn(const Network& net, const NetworkState& s, NodeId i) {
  return [&net, s, i](std::span<const double> x) {
    NetworkState t = s;
    std::size_t k = 0;
    for (LinkId l : net.topology.out_links(i)) t.eta[l] = x[k++];
    return cost_of(net, t);
  };
}

inline std::function<double(std::span<const double>)> gamma_fn(const Network& net, const NetworkState& s) {
  return [&net, s](std::span<const double> x) {
    NetworkState t = s;
    t.gamma.assign(x.begin(), x.end());
    return cost_of(net, t);
  };
}

}  // namespace fx
