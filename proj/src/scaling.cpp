#include "xlayer/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace xlayer {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double epsilon_of(const LinkCostFn& cost) {
  if (const auto* p = std::get_if<MM1Packets>(&cost.variant())) return p->epsilon;
  return 0.0;
}

bool is_delay(const LinkCostFn& cost) { return std::holds_alternative<MM1Delay>(cost.variant()); }

}  // namespace

CurvatureExtrema cost_curvature_extrema(const LinkCostFn& cost, double budget, const CurvatureQuery& q) {
  if (!(budget > 0) || !std::isfinite(budget)) throw Error(ErrorKind::InvalidArgument, "budget must be finite and > 0");
  const double b = budget;
  if (is_delay(cost)) {
    // D <= b  <=>  C - F >= 1/b
    return {2.0 * b * b * b, q.mode == CurvatureMode::FlowAtCapacity ? 0.0 : -b * b};
  }
  const double e = epsilon_of(cost);
  switch (q.mode) {
    case CurvatureMode::FlowAtCapacity: {
      // C - F >= (C + e)/(1 + b), and d2D/dF2 = 2(C + e)/(C - F)^3
      const double c = q.capacity + e;
      if (!(c > 0)) throw Error(ErrorKind::UnboundedCurvature, "capacity + epsilon must be > 0");
      return {2.0 * std::pow(1.0 + b, 3) / (c * c), 0.0};
    }
    case CurvatureMode::CapacityAtFlow: {
      // C - F >= (F + e)/b, d2D/dC2 = 2(F + e)/(C - F)^3, dD/dC = -(F + e)/(C - F)^2
      const double f = q.flow + e;
      if (!(f > 0)) throw Error(ErrorKind::UnboundedCurvature, "zero flow with zero epsilon");
      return {2.0 * b * b * b / (f * f), -b * b / f};
    }
    case CurvatureMode::CapacityGlobal: {
      // C - F >= (C + e)/(1 + b) >= (floor + e)/(1 + b) and d2D/dC2 = 2D/(C - F)^2.
      const double c = q.capacity_floor + e;
      if (!(c > 0)) throw Error(ErrorKind::UnboundedCurvature, "d2D/dC2 is unbounded without a capacity floor");
      return {2.0 * b * (1.0 + b) * (1.0 + b) / (c * c), -b * (1.0 + b) / c};
    }
  }
  return {};
}

CapacityCurvature capacity_curvature(const CapacityFn& capacity, double x_cap) {
  const ProductExtrema p = capacity.extrema(0.0, x_cap);
  return {p.max_c1sq_x2, p.min_c2_x2, x_cap};
}

double sinr_cap(const Topology& topo) {
  double x = 0;
  for (const Link& lk : topo.links())
    x = std::max(x, topo.gain(lk.from, lk.to) * topo.power_cap(lk.from) / topo.noise(lk.to));
  return x;
}

double capacity_floor(const Network& net, double budget) {
  const Topology& topo = net.topology;
  const double e = epsilon_of(net.cost);
  // What the cost alone forces: D(C, 0) <= budget.
  const double c_star = is_delay(net.cost) ? 1.0 / budget : e / budget;

  // Lowest total power each node can use without one of its links exceeding the budget
  // on its own, then the weakest capacity that power admits.
  double realizable = kInf;
  for (NodeId i = 0; i < topo.num_nodes(); ++i) {
    const double log_cap = std::log(topo.power_cap(i));
    double gamma_low = -kInf;
    for (LinkId l : topo.out_links(i)) {
      const NodeId j = topo.link(l).to;
      const double x = net.capacity.inverse(c_star);
      gamma_low = std::max(gamma_low, std::log(x * topo.noise(j) / topo.gain(i, j)) / log_cap);
    }
    const double p = std::pow(topo.power_cap(i), std::min(1.0, gamma_low));
    for (LinkId l : topo.out_links(i)) {
      const NodeId j = topo.link(l).to;
      double others = topo.noise(j);
      for (NodeId m = 0; m < topo.num_nodes(); ++m)
        if (m != i && topo.has_gain(m, j)) others += topo.gain(m, j) * topo.power_cap(m);
      const double g = topo.gain(i, j);
      const double x = g * p * net.eta_floor / (g * p * (1.0 - net.eta_floor) + others);
      realizable = std::min(realizable, x > 0 ? net.capacity.value(x) : -kInf);
    }
  }
  return std::max(realizable, c_star);
}

std::vector<double> flow_curvature_bounds(const Network& net, const RadioState& radio, double budget) {
  std::vector<double> a(net.topology.num_links());
  for (LinkId l = 0; l < net.topology.num_links(); ++l)
    a[l] = cost_curvature_extrema(net.cost, budget, {CurvatureMode::FlowAtCapacity, radio.capacity[l]}).max_second;
  return a;
}

CurvatureBounds curvature_bounds(const Network& net, const RadioState& radio, double budget,
                                 bool with_power_control) {
  CurvatureBounds cb;
  cb.budget = budget;
  for (double a : flow_curvature_bounds(net, radio, budget)) cb.A = std::max(cb.A, a);
  if (with_power_control) {
    cb.capacity_floor = capacity_floor(net, budget);
    CurvatureQuery q{CurvatureMode::CapacityGlobal};
    q.capacity_floor = cb.capacity_floor;
    const auto ext = cost_curvature_extrema(net.cost, budget, q);
    cb.B_bar = ext.max_second;
    cb.B_low = ext.min_first;
    cb.capacity = capacity_curvature(net.capacity, sinr_cap(net.topology));
  }
  return cb;
}

RoutingScaling routing_scaling(std::span<const double> A_coord, double A_global, std::span<const int> hops,
                               double t) {
  if (A_coord.empty()) throw Error(ErrorKind::EmptyAllowedSet, "no allowed neighbour");
  if (!(t > 0)) throw Error(ErrorKind::InvalidArgument, "routing scaling needs t > 0");
  const double an = static_cast<double>(A_coord.size());
  RoutingScaling rs;
  rs.diag.resize(A_coord.size());
  double worst = 0;
  for (std::size_t k = 0; k < A_coord.size(); ++k) {
    const double entry = A_coord[k] + an * hops[k] * A_global;
    rs.diag[k] = 0.5 * t * entry;
    worst = std::max(worst, entry);
  }
  rs.alpha = 2.0 / (an * worst);
  return rs;
}

double local_cost(const Network& net, const Evaluation& ev, NodeId i) {
  double d = 0;
  for (LinkId l : net.topology.out_links(i)) d += net.cost.value(ev.radio.capacity[l], ev.flow.link_flow[l]);
  return d;
}

PowerAllocScaling pa_scaling(const Network& net, const NetworkState& state, const Evaluation& ev, NodeId i) {
  const Topology& topo = net.topology;
  const auto out = topo.out_links(i);
  PowerAllocScaling ps;
  ps.local_cost = local_cost(net, ev, i);
  const double P = ev.radio.node_power[i];
  double worst = 0;
  for (LinkId l : out) {
    const double g = topo.gain(i, topo.link(l).to);
    const double R = external_interference(topo, ev.radio, l);
    const double F = ev.flow.link_flow[l];
    auto sinr_at = [&](double eta) { return g * P * eta / (g * P * (1.0 - eta) + R); };
    auto excess = [&](double eta) { return net.cost.value(net.capacity.value(sinr_at(eta)), F) - ps.local_cost; };

    // Smallest eta keeping this link's cost within the local budget.
    double lo = net.eta_floor;
    double hi = std::max(state.eta[l], lo);
    double eta_low = lo;
    if (excess(lo) > 0) {
      for (int it = 0; it < 60 && hi - lo > 1e-12; ++it) {
        const double mid = 0.5 * (lo + hi);
        (excess(mid) > 0 ? lo : hi) = mid;
      }
      eta_low = hi;
    } else {
      ps.bracket_failed = true;
    }
    ps.eta_low.push_back(eta_low);

    CurvatureQuery q{CurvatureMode::CapacityAtFlow};
    q.flow = F;
    const auto ext = cost_curvature_extrema(net.cost, ps.local_cost, q);
    const ProductExtrema pe = net.capacity.extrema(sinr_at(eta_low), sinr_at(1.0));
    const double b = (ext.max_second * pe.max_c1sq_x2_1px2 + ext.min_first * pe.min_c2_x2_1px2) / (eta_low * eta_low);
    ps.beta_link.push_back(b);
    worst = std::max(worst, b);
  }
  for (double b : ps.beta_link) ps.diag.push_back(b / (2.0 * P));
  ps.beta = 2.0 * P * P / (static_cast<double>(out.size()) * worst);
  return ps;
}

PowerAllocScaling refined_pa_scaling(const Network& net, const NetworkState&, const Evaluation& ev, NodeId i) {
  const Topology& topo = net.topology;
  const auto out = topo.out_links(i);
  const double K = net.capacity.K();
  PowerAllocScaling ps;
  ps.local_cost = local_cost(net, ev, i);
  const double P = ev.radio.node_power[i];
  double worst = 0;
  for (LinkId l : out) {
    const double nr = topo.gain(i, topo.link(l).to) * P / external_interference(topo, ev.radio, l);
    CurvatureQuery q{CurvatureMode::CapacityAtFlow};
    q.flow = ev.flow.link_flow[l];
    const auto ext = cost_curvature_extrema(net.cost, ps.local_cost, q);
    const double b = (ext.max_second * K * K - ext.min_first * (K - 1.0) * (K - 1.0)) * nr * nr;
    ps.beta_link.push_back(b);
    worst = std::max(worst, b);
  }
  for (double b : ps.beta_link) ps.diag.push_back(b / (2.0 * P));
  ps.beta = 2.0 * P * P / (static_cast<double>(out.size()) * worst);
  return ps;
}

std::vector<double> pc_scaling(const Topology& topo, const CurvatureBounds& b) {
  const double bracket = b.B_bar * b.capacity.kappa + b.B_low * b.capacity.phi;
  if (topo.num_links() == 0 || !(bracket > 0) || !std::isfinite(bracket))
    throw Error(ErrorKind::DegenerateBound, "power control bracket is not a positive finite number");
  const double scale = 0.5 * topo.num_nodes() * static_cast<double>(topo.num_links()) * bracket;
  std::vector<double> v(topo.num_nodes());
  for (NodeId i = 0; i < topo.num_nodes(); ++i) v[i] = std::log(topo.power_cap(i)) * scale;
  return v;
}

std::vector<double> pc_hessian_bound(const Topology& topo, const CurvatureBounds& b) {
  auto v = pc_scaling(topo, b);
  for (NodeId i = 0; i < topo.num_nodes(); ++i) v[i] *= 2.0 * std::log(topo.power_cap(i));
  return v;
}

BoundCheck hessian_bound_check(const std::function<double(std::span<const double>)>& f, std::span<const double> x0,
                               std::span<const double> bound_diag, TangentKind kind, int trials,
                               std::uint64_t seed, double step, double slack) {
  const std::size_t n = x0.size();
  BoundCheck out;
  out.max_gap = -kInf;
  out.max_relative_gap = -kInf;
  const double mnorm = *std::ranges::max_element(bound_diag);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::vector<double> v(n), xp(n), xm(n);
  const double f0 = f(x0);
  // cancellation in the second difference, a few ulps of |f| over step^2
  const double roundoff = 8.0 * std::numeric_limits<double>::epsilon() * std::abs(f0) / (step * step);
  for (int t = 0; t < trials; ++t) {
    double mean = 0;
    for (auto& c : v) mean += (c = gauss(rng));
    if (kind == TangentKind::ZeroSum) {
      mean /= static_cast<double>(n);
      for (auto& c : v) c -= mean;
    }
    double norm = 0;
    for (double c : v) norm += c * c;
    norm = std::sqrt(norm);
    if (norm == 0) continue;
    for (auto& c : v) c /= norm;
    for (std::size_t k = 0; k < n; ++k) xp[k] = x0[k] + step * v[k], xm[k] = x0[k] - step * v[k];
    const double vhv = (f(xp) - 2.0 * f0 + f(xm)) / (step * step);
    double vmv = 0;
    for (std::size_t k = 0; k < n; ++k) vmv += bound_diag[k] * v[k] * v[k];
    const double gap = vhv - vmv;
    out.max_gap = std::max(out.max_gap, gap);
    out.max_relative_gap = std::max(out.max_relative_gap, gap / mnorm);
    if (gap > slack * mnorm + roundoff) ++out.violations;
    ++out.trials;
  }
  return out;
}

}  // namespace xlayer
