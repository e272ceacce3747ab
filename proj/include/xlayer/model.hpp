#pragma once

#include <compare>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "xlayer/error.hpp"
#include "xlayer/functions.hpp"

namespace xlayer {

using NodeId = int;
using LinkId = int;

struct Link {
  NodeId from = 0;
  NodeId to = 0;
};

class Topology {
 public:
  Topology() = default;
  Topology(int num_nodes, std::vector<Link> links, std::vector<double> noise,
           std::vector<double> power_cap);

  int num_nodes() const { return n_; }
  int num_links() const { return static_cast<int>(links_.size()); }
  const Link& link(LinkId l) const { return links_[l]; }
  const std::vector<Link>& links() const { return links_; }

  // Out-links are ordered by receiver id, in-links by transmitter id.
  std::span<const LinkId> out_links(NodeId i) const { return out_[i]; }
  std::span<const LinkId> in_links(NodeId j) const { return in_[j]; }
  std::optional<LinkId> find_link(NodeId i, NodeId j) const;

  void set_gain(NodeId m, NodeId j, double g);
  void clear_gain(NodeId m, NodeId j);
  bool has_gain(NodeId m, NodeId j) const { return gain_[m * n_ + j] > 0; }
  double gain(NodeId m, NodeId j) const;  // throws MissingGain

  double noise(NodeId j) const { return noise_[j]; }
  double power_cap(NodeId i) const { return power_cap_[i]; }

  bool strongly_connected() const;

 private:
  int n_ = 0;
  std::vector<Link> links_;
  std::vector<std::vector<LinkId>> out_, in_;
  std::vector<double> gain_;
  std::vector<double> noise_;
  std::vector<double> power_cap_;
};

struct Inelastic {
  double rate = 0;
};

struct Elastic {
  double max_rate = 0;
  UtilityFn utility;
};

struct Session {
  NodeId origin = 0;
  NodeId destination = 0;
  std::variant<Inelastic, Elastic> demand;

  bool elastic() const { return std::holds_alternative<Elastic>(demand); }
  // r_w for inelastic sessions, rbar_w for elastic ones.
  double source_rate() const;
  const UtilityFn* utility() const;
};

// Everything that stays fixed while the decision vector moves.
struct Network {
  Topology topology;
  std::vector<Session> sessions;
  CapacityFn capacity;
  LinkCostFn cost;
  double eta_floor = 1e-6;

  int num_sessions() const { return static_cast<int>(sessions.size()); }
};

struct NetworkState {
  int num_links = 0;
  std::vector<double> phi;           // phi[w * num_links + l]
  std::vector<double> phi_overflow;  // per session, zero for inelastic ones
  std::vector<double> eta;           // per link
  std::vector<double> gamma;         // per node

  double& route(int w, LinkId l) { return phi[static_cast<std::size_t>(w) * num_links + l]; }
  double route(int w, LinkId l) const { return phi[static_cast<std::size_t>(w) * num_links + l]; }
};

// Zero routing, uniform power allocation, full power.
NetworkState make_state(const Topology& topo, int num_sessions);

struct RadioState {
  std::vector<double> link_power;    // P_ij
  std::vector<double> node_power;    // P_i
  std::vector<double> interference;  // IN_ij
  std::vector<double> sinr;          // x_ij
  std::vector<double> capacity;      // C_ij
};

struct FlowState {
  int num_nodes = 0;
  std::vector<double> node_rate;      // t_i(w) at [w * num_nodes + i]
  std::vector<double> link_flow;      // F_ij
  std::vector<double> overflow_rate;  // F_wb
  std::vector<double> admitted_rate;  // rbar_w - F_wb (r_w for inelastic)

  double rate(int w, NodeId i) const { return node_rate[static_cast<std::size_t>(w) * num_nodes + i]; }
};

// Extended real cost. Infinity marks infeasibility and only supports comparison.
class Cost {
 public:
  constexpr Cost() = default;
  constexpr explicit Cost(double v) : v_(v) {}
  static constexpr Cost infinite() { return Cost(std::numeric_limits<double>::infinity()); }

  bool finite() const { return v_ < std::numeric_limits<double>::infinity(); }
  double value() const;  // throws InvalidArgument on the sentinel
  friend auto operator<=>(const Cost&, const Cost&) = default;

 private:
  double v_ = 0;
};

RadioState compute_radio(const Topology& topo, const CapacityFn& capacity, const NetworkState& state);

// sum_{m != i} G_mj P_m + N_j for link l = (i, j): what the receiver hears from
// everyone except its own transmitter.
double external_interference(const Topology& topo, const RadioState& radio, LinkId l);

FlowState compute_flows(const Topology& topo, const std::vector<Session>& sessions,
                        const NetworkState& state);

Cost total_cost(const FlowState& flow, const RadioState& radio, const LinkCostFn& cost,
                const std::vector<Session>& sessions);

// Topological order of the active DAG of session w. Throws RoutingCycleError.
std::vector<NodeId> session_order(const Topology& topo, const std::vector<Session>& sessions,
                                  const NetworkState& state, int w);

enum class DiagnosticKind {
  SizeMismatch,
  NegativeFraction,
  SimplexViolation,
  DestinationRouting,
  OverflowOnInelastic,
  PowerSimplexViolation,
  PowerFloorViolation,
  GammaBound,
  RoutingCycle,
};

struct Diagnostic {
  DiagnosticKind kind;
  int node = -1;
  int session = -1;
  int link = -1;
  std::string message;
};

std::string_view to_string(DiagnosticKind kind);

std::vector<Diagnostic> validate_state(const Topology& topo, const std::vector<Session>& sessions,
                                       const NetworkState& state, double eta_floor = 0.0,
                                       double tol = 1e-9);

struct Evaluation {
  RadioState radio;
  FlowState flow;
  Cost cost;
};

Evaluation evaluate(const Network& net, const NetworkState& state);

}  // namespace xlayer
