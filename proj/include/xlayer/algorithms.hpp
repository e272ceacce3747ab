#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "xlayer/marginal.hpp"
#include "xlayer/model.hpp"
#include "xlayer/scaling.hpp"

namespace xlayer {

// ---------------------------------------------------------------- blocking

struct BlockedSets {
  int num_links = 0;
  std::vector<char> blocked;  // [w * E + l]

  bool is_blocked(int w, LinkId l) const { return blocked[static_cast<std::size_t>(w) * num_links + l] != 0; }
};

// Blocked out-links of session w. A zero-flow link (i, j) is blocked when j's potential
// is not below i's, or when j forwards w's traffic, directly or further downstream,
// over a positive-flow link whose head does not have a lower potential than its tail.
// Links out of D(w) are always blocked. Throws InternalAssertion if the allowed graph
// turns out cyclic.
std::vector<char> blocked_links(const Network& net, const NetworkState& state,
                                const std::vector<double>& potentials, int w);

BlockedSets blocked_sets(const Network& net, const NetworkState& state, const std::vector<double>& potentials);

// ---------------------------------------------------------------- simplex kernels

// argmin sum_j m_j (x_j - y_j)^2  s.t.  x >= 0, sum x = mass, x_j = 0 where fixed_zero.
std::vector<double> weighted_simplex_project(std::span<const double> y, std::span<const double> m,
                                             std::span<const char> fixed_zero, double mass = 1.0);

// argmin g'(z - x) + 1/2 sum_j m_j (z_j - x_j)^2 over the same set. Zero weights are
// allowed; such coordinates are linear and absorb whatever mass is left at the
// multiplier cap.
std::vector<double> scaled_simplex_step(std::span<const double> x, std::span<const double> g,
                                        std::span<const double> m, std::span<const char> fixed_zero,
                                        double mass);

// A node's decision block: routing fractions of one session (optionally followed by the
// overflow fraction) or the power split with its floor subtracted.
struct SimplexBlock {
  std::vector<double> x;
  std::vector<double> grad;
  std::vector<char> fixed_zero;
  double mass = 1.0;
};

// Gallager-type step: move min(x_j, step * (g_j - g_min)) off every coordinate onto the
// first minimiser. Fixed coordinates are emptied onto the minimiser.
std::vector<double> basic_step(const SimplexBlock& block, double step);

// Index of the first minimal-gradient free coordinate.
int steepest_coordinate(const SimplexBlock& block);

// ---------------------------------------------------------------- node steps

// dphi holds session w's marginals per link; the overflow coordinate goes last.
SimplexBlock routing_block(const Network& net, const NetworkState& state, std::span<const double> dphi,
                           double dphi_overflow, std::span<const char> blocked, NodeId i, int w,
                           bool with_overflow);

void apply_routing_block(NetworkState& state, const Network& net, NodeId i, int w, std::span<const double> values,
                         bool with_overflow);

// BRT: a_j = dphi_j - min over allowed, dphi_j -= min(phi_j, alpha a_j / t).
std::vector<double> brt_step(const SimplexBlock& block, double alpha, double t);

// GRT: minimise dphi'(phi - phi^k) + 1/2 (phi - phi^k)' M (phi - phi^k).
std::vector<double> grt_step(const SimplexBlock& block, std::span<const double> M);

// The matrix (t / alpha) diag(1, .., 0, .., 1) with the zero at the steepest coordinate.
std::vector<double> brt_equivalent_scaling(const SimplexBlock& block, double alpha, double t);

SimplexBlock power_block(const Network& net, const NetworkState& state, std::span<const double> delta_eta,
                         NodeId i);

void apply_power_block(NetworkState& state, const Network& net, NodeId i, std::span<const double> values);

// BPA on the floor-shifted block: b_j = deta_j - min, deta_j -= min(eta_j - floor, beta b_j / P).
std::vector<double> bpa_step(const SimplexBlock& block, double beta, double node_power);

// GPA: scaled projection with diagonal Q on the floor-shifted block.
std::vector<double> gpa_step(const SimplexBlock& block, std::span<const double> Q);

// gamma_i <- min(1, gamma_i - dgamma_i / v_i) for the listed nodes.
std::vector<double> pc_step(std::span<const double> gamma, std::span<const double> delta_gamma,
                            std::span<const double> v, std::span<const NodeId> nodes);

std::vector<char> interference_limited_check(const Topology& topo, const RadioState& radio, double K);

// ---------------------------------------------------------------- residuals

struct OptimalityResidual {
  std::vector<double> routing;      // [w * N + i], zero where t_i(w) = 0
  std::vector<double> power_alloc;  // per node
  std::vector<double> power_ctrl;   // per node
  std::vector<double> congestion;   // per session
  double routing_max = 0;
  double power_alloc_max = 0;
  double power_ctrl_max = 0;
  double congestion_max = 0;

  double overall() const;
};

struct ResidualOptions {
  bool include_overflow = true;  // treat phi_wb as a decision variable
  double eta_floor = 0;
};

OptimalityResidual optimality_residuals(const Network& net, const NetworkState& state, const Evaluation& ev,
                                        const MarginalReport& marg, ResidualOptions opts = {});

// ---------------------------------------------------------------- drivers

enum class RoutingAlg { Off, Brt, Grt };
enum class PowerAllocAlg { Off, Bpa, Gpa };
enum class NodeOrder { RoundRobin, RandomPermutation };
enum class BudgetPolicy { Initial, Current };

struct OptimizerConfig {
  RoutingAlg routing = RoutingAlg::Brt;
  PowerAllocAlg power_alloc = PowerAllocAlg::Off;
  bool power_control = false;
  bool congestion_control = false;
  bool refined_power_alloc = false;  // precise-capacity marginals and their scaling
  int max_iterations = 500;
  double tolerance = 1e-6;
  NodeOrder order = NodeOrder::RoundRobin;
  std::uint64_t seed = 1;
  double pc_subset_fraction = 1.0;  // share of nodes running PC per sweep, cycled
  int guard_halvings = 40;
  double guard_tolerance = 1e-12;   // relative cost increase tolerated as rounding
  BudgetPolicy budget = BudgetPolicy::Initial;
  MsgScope scope = MsgScope::all();
  int snapshot_every = 0;           // 0 keeps only the final state
  bool check_loops = true;

  void validate() const;
};

struct IterationRecord {
  int iteration = 0;
  int stage = 0;  // 1 or 2 in two-stage runs
  double cost = 0;
  double residual = 0;
  double routing_residual = 0;
  double power_alloc_residual = 0;
  double power_ctrl_residual = 0;
  double admitted_rate = 0;
  double alt_cost = 0;  // cost under the other capacity model (two-stage runs)
  int guard_halvings = 0;
};

struct Trajectory {
  std::vector<IterationRecord> records;
  std::vector<NetworkState> snapshots;
  NetworkState final_state;
  bool converged = false;
  int iterations = 0;
  int guard_rejections = 0;  // steps discarded by the descent guard (distributed runs)
  int monotonicity_violations = 0;
  int loop_violations = 0;
  int infeasible_links_at_entry = 0;  // interference-limited check failures (two-stage)
};

Trajectory run_jopr(const Network& net, const NetworkState& initial, const OptimizerConfig& config);

struct TwoStageConfig {
  OptimizerConfig stage1;  // routing + refined power allocation, gamma frozen
  OptimizerConfig stage2;  // power control only, phi and eta frozen
  int cycles = 3;
  bool stage2_enabled = true;
};

// `net` carries the precise capacity; stage 2 swaps in the high-SINR form with the same K.
Trajectory run_two_stage_jopar(const Network& net, const NetworkState& initial, const TwoStageConfig& config);

}  // namespace xlayer
