#pragma once

#include <functional>
#include <vector>

#include "xlayer/model.hpp"

namespace xlayer {

// Which MSG(n) terms a node sums when forming its power-control marginal.
struct MsgScope {
  int k = -1;  // negative: every node; otherwise the k nodes with largest G_in

  static MsgScope all() { return {}; }
  static MsgScope k_nearest(int k) { return {k}; }
  bool is_all() const { return k < 0; }
};

struct MarginalReport {
  int num_nodes = 0;
  int num_links = 0;
  std::vector<double> node_potential;      // dD/dr_i(w) at [w * N + i]
  std::vector<double> delta_phi;           // at [w * E + l]
  std::vector<double> delta_phi_overflow;  // per session; B'(F_wb) for elastic ones
  std::vector<double> delta_eta;           // per link
  std::vector<double> msg;                 // MSG(n) per node
  std::vector<double> delta_gamma;         // per node

  double potential(int w, NodeId i) const { return node_potential[static_cast<std::size_t>(w) * num_nodes + i]; }
  double dphi(int w, LinkId l) const { return delta_phi[static_cast<std::size_t>(w) * num_links + l]; }
};

// dD/dr_i(w) for every session, computed backwards along each active DAG.
std::vector<double> node_potentials(const Network& net, const NetworkState& state, const FlowState& flow,
                                    const RadioState& radio);

struct RoutingMarginals {
  std::vector<double> delta_phi;           // [w * E + l], zero on links out of D(w)
  std::vector<double> delta_phi_overflow;  // per session
};

RoutingMarginals marginal_routing_costs(const Network& net, const std::vector<double>& potentials,
                                        const FlowState& flow, const RadioState& radio);

std::vector<double> marginal_power_alloc_costs(const Network& net, const RadioState& radio, const FlowState& flow,
                                               bool refined);

// Same quantity for a single link from its own measurements.
double link_power_alloc_cost(const Network& net, const RadioState& radio, const FlowState& flow, LinkId l,
                             bool refined);

std::vector<double> power_control_messages(const Network& net, const RadioState& radio, const FlowState& flow);

// Nodes n != i ranked by decreasing G_in (ties to the smaller id), truncated to k.
std::vector<NodeId> nearest_nodes(const Topology& topo, NodeId i, int k);

// delta_gamma_i = P_i (sum_n G_in MSG(n) + sum_j delta_eta_ij eta_ij) over the scoped n.
double node_power_control_cost(const Topology& topo, const std::vector<double>& msgs,
                               const std::vector<double>& delta_eta, const NetworkState& state,
                               const RadioState& radio, NodeId i, MsgScope scope);

std::vector<double> marginal_power_control_costs(const Topology& topo, const std::vector<double>& msgs,
                                                 const std::vector<double>& delta_eta, const NetworkState& state,
                                                 const RadioState& radio, MsgScope scope);

// Longest hop count to `destination` over the edges for which counted(l) holds.
// Nodes that cannot reach the destination get -1. Throws RoutingCycleError.
std::vector<int> hop_counts(const Topology& topo, NodeId destination, int session,
                            const std::function<bool(LinkId)>& counted);

// Hop counts over each session's active edges, laid out as [w * N + i].
std::vector<int> hop_counts(const Topology& topo, const std::vector<Session>& sessions,
                            const NetworkState& state);

double potential_identity_residual(const Network& net, const FlowState& flow, const RadioState& radio,
                       const std::vector<double>& potentials);

struct MarginalOptions {
  bool refined_power_alloc = false;
  MsgScope scope = MsgScope::all();
};

MarginalReport compute_marginals(const Network& net, const NetworkState& state, const Evaluation& ev,
                                 MarginalOptions opts = {});

}  // namespace xlayer
