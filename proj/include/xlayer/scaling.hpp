#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "xlayer/model.hpp"

namespace xlayer {

enum class CurvatureMode {
  FlowAtCapacity,  // max d2D/dF2 over F with D <= budget, C held fixed
  CapacityGlobal,  // max d2D/dC2, min dD/dC over (C, F) with D <= budget, C >= floor
  CapacityAtFlow,  // max d2D/dC2, min dD/dC over C with D <= budget, F held fixed
};

struct CurvatureQuery {
  CurvatureMode mode = CurvatureMode::FlowAtCapacity;
  double capacity = 0;        // FlowAtCapacity
  double flow = 0;            // CapacityAtFlow
  double capacity_floor = 0;  // CapacityGlobal
};

struct CurvatureExtrema {
  double max_second = 0;  // max of the requested second partial
  double min_first = 0;   // min dD/dC (capacity modes only)
};

CurvatureExtrema cost_curvature_extrema(const LinkCostFn& cost, double budget, const CurvatureQuery& query);

// kappa = max C'^2 x^2 and phi = min C'' x^2 over [0, x_cap].
struct CapacityCurvature {
  double kappa = 0;
  double phi = 0;
  double x_cap = 0;
};

CapacityCurvature capacity_curvature(const CapacityFn& capacity, double x_cap);

// Largest SINR any link can reach: G_ij Pbar_i / N_j with no interference.
double sinr_cap(const Topology& topo);

// Lowest capacity compatible with total cost <= budget: the larger of what the power
// floor and the implied gamma lower bound allow, and what the cost function itself
// forces on the sublevel set.
double capacity_floor(const Network& net, double budget);

struct CurvatureBounds {
  double budget = 0;
  double A = 0;          // max over links of A_ij
  double B_bar = 0;      // max d2D/dC2 on the sublevel set
  double B_low = 0;      // min dD/dC on the sublevel set
  double capacity_floor = 0;
  CapacityCurvature capacity;
};

// A_ij(budget) at the current capacities.
std::vector<double> flow_curvature_bounds(const Network& net, const RadioState& radio, double budget);

// Global bounds. B terms are only computed when with_power_control is set, since the
// MM1Packets variant needs a capacity floor.
CurvatureBounds curvature_bounds(const Network& net, const RadioState& radio, double budget,
                                 bool with_power_control);

struct RoutingScaling {
  std::vector<double> diag;  // M_i(w) per coordinate
  double alpha = 0;
};

// Coordinates are the allowed neighbours (plus the overflow link for CR, passed with
// its curvature bound and a hop count of 0).
RoutingScaling routing_scaling(std::span<const double> A_coord, double A_global, std::span<const int> hops,
                               double t);

struct PowerAllocScaling {
  std::vector<double> diag;        // Q_i per out-link
  double beta = 0;                 // BPA stepsize
  std::vector<double> beta_link;   // bound matrix entries
  std::vector<double> eta_low;     // lowest eta within the local budget (empty for the refined form)
  double local_cost = 0;           // D_i
  bool bracket_failed = false;     // some eta_low had to fall back to the floor
};

double local_cost(const Network& net, const Evaluation& ev, NodeId i);

PowerAllocScaling pa_scaling(const Network& net, const NetworkState& state, const Evaluation& ev, NodeId i);

PowerAllocScaling refined_pa_scaling(const Network& net, const NetworkState& state, const Evaluation& ev,
                                     NodeId i);

// v_i = (ln Pbar_i / 2) |N| |E| [B_bar kappa + B_low phi].
std::vector<double> pc_scaling(const Topology& topo, const CurvatureBounds& bounds);

// Diagonal of the Hessian bound in gamma coordinates (2 v_i ln Pbar_i).
std::vector<double> pc_hessian_bound(const Topology& topo, const CurvatureBounds& bounds);

enum class TangentKind { ZeroSum, Free };

struct BoundCheck {
  double max_gap = 0;           // max over trials of v'Hv - v'Mv, unit v
  double max_relative_gap = 0;  // the same divided by max_j M_jj
  int trials = 0;
  int violations = 0;           // trials whose relative gap exceeded `slack`
};

// Second-order central differences of f along random unit tangent directions.
BoundCheck hessian_bound_check(const std::function<double(std::span<const double>)>& f, std::span<const double> x0,
                               std::span<const double> bound_diag, TangentKind kind, int trials,
                               std::uint64_t seed, double step = 1e-4, double slack = 1e-6);

}  // namespace xlayer
