#include "xlayer/checks.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xlayer/algorithms.hpp"

namespace xlayer {

namespace {

double cost_or_inf(const Network& net, const NetworkState& s) {
  const Cost c = evaluate(net, s).cost;
  return c.finite() ? c.value() : std::numeric_limits<double>::infinity();
}

}  // namespace

NetworkState interior_state(const Network& net, const NetworkState& base, std::mt19937_64& rng, double gamma_low) {
  const Topology& topo = net.topology;
  const int n = topo.num_nodes();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int attempt = 0; attempt < 200; ++attempt) {
    NetworkState s = make_state(topo, net.num_sessions());
    for (int w = 0; w < net.num_sessions(); ++w) {
      const auto hops =
          hop_counts(topo, net.sessions[w].destination, w, [&](LinkId l) { return base.route(w, l) > 0; });
      std::vector<double> rank(n);
      for (int i = 0; i < n; ++i) rank[i] = hops[i] + 0.9 * u(rng);
      for (NodeId i = 0; i < n; ++i) {
        if (i == net.sessions[w].destination) continue;
        double sum = 0;
        for (LinkId l : topo.out_links(i))
          if (rank[topo.link(l).to] < rank[i]) sum += (s.route(w, l) = 0.2 + u(rng));
        if (sum > 0)
          for (LinkId l : topo.out_links(i)) s.route(w, l) /= sum;
      }
    }
    for (NodeId i = 0; i < n; ++i) {
      const auto out = topo.out_links(i);
      double sum = 0;
      for (LinkId l : out) sum += (s.eta[l] = 0.3 + u(rng));
      for (LinkId l : out) s.eta[l] /= sum;
      s.gamma[i] = gamma_low + (1.0 - gamma_low) * 0.95 * u(rng);
    }
    for (int w = 0; w < net.num_sessions(); ++w)
      if (net.sessions[w].elastic()) s.phi_overflow[w] = 0.1 + 0.3 * u(rng);
    if (evaluate(net, s).cost.finite()) return s;
  }
  throw Error(ErrorKind::InitialInfeasible, "no finite interior state found");
}

InstanceCheck check_instance(const Network& net, const NetworkState& s, int trials, std::uint64_t seed) {
  const Topology& topo = net.topology;
  const int n = topo.num_nodes();
  const Evaluation ev = evaluate(net, s);
  if (!ev.cost.finite()) throw Error(ErrorKind::InitialInfeasible, "state has infinite cost");
  const MarginalReport m = compute_marginals(net, s, ev);
  const double D = ev.cost.value();
  InstanceCheck out;

  const double h = 1e-6;
  auto central = [&](auto&& perturb) {
    NetworkState p = s, q = s;
    perturb(p, h);
    perturb(q, -h);
    return (cost_or_inf(net, p) - cost_or_inf(net, q)) / (2 * h);
  };
  auto compare = [&](double fd, double an) {
    out.worst_gradient_error = std::max(out.worst_gradient_error, std::abs(fd - an) / std::max(std::abs(an), 1e-3));
    ++out.gradient_checks;
  };
  auto add = [&](const BoundCheck& b) {
    ++out.hessian_blocks;
    out.hessian_trials += b.trials;
    out.hessian_violations += b.violations;
    out.worst_hessian_gap = out.hessian_blocks == 1 ? b.max_relative_gap : std::max(out.worst_hessian_gap, b.max_relative_gap);
  };

  // routing
  const auto A = flow_curvature_bounds(net, ev.radio, D);
  const double A_glob = A.empty() ? 0.0 : *std::max_element(A.begin(), A.end());
  for (int w = 0; w < net.num_sessions(); ++w) {
    const auto blocked = blocked_links(net, s, m.node_potential, w);
    const auto hops =
        hop_counts(topo, net.sessions[w].destination, w, [&](LinkId l) { return !blocked[l]; });
    for (NodeId i = 0; i < n; ++i) {
      const double t = ev.flow.rate(w, i);
      if (t <= 0 || i == net.sessions[w].destination) continue;
      int allowed = 0;
      for (LinkId l : topo.out_links(i)) allowed += !blocked[l];
      std::vector<LinkId> pos;
      std::vector<double> diag, x0;
      for (LinkId l : topo.out_links(i))
        if (s.route(w, l) > 0 && !blocked[l]) {
          pos.push_back(l);
          x0.push_back(s.route(w, l));
          diag.push_back(t * t * (A[l] + allowed * hops[topo.link(l).to] * A_glob));
        }
      for (std::size_t a = 1; a < pos.size(); ++a)
        compare(central([&](NetworkState& x, double d) { x.route(w, pos[0]) += d, x.route(w, pos[a]) -= d; }),
                t * (m.dphi(w, pos[0]) - m.dphi(w, pos[a])));
      if (pos.size() < 2) continue;
      auto f = [&](std::span<const double> x) {
        NetworkState z = s;
        for (std::size_t k = 0; k < pos.size(); ++k) z.route(w, pos[k]) = x[k];
        return cost_or_inf(net, z);
      };
      add(hessian_bound_check(f, x0, diag, TangentKind::ZeroSum, trials, seed, 1e-5));
    }
  }

  // power allocation and control
  for (NodeId i = 0; i < n; ++i) {
    const auto out_links = topo.out_links(i);
    for (std::size_t a = 1; a < out_links.size(); ++a)
      compare(central([&](NetworkState& x, double d) { x.eta[out_links[0]] += d, x.eta[out_links[a]] -= d; }),
              ev.radio.node_power[i] * (m.delta_eta[out_links[0]] - m.delta_eta[out_links[a]]));
    compare(central([&](NetworkState& x, double d) { x.gamma[i] += d; }), std::log(topo.power_cap(i)) * m.delta_gamma[i]);
    if (out_links.size() < 2) continue;
    std::vector<double> x0;
    for (LinkId l : out_links) x0.push_back(s.eta[l]);
    auto f = [&](std::span<const double> x) {
      NetworkState z = s;
      for (std::size_t k = 0; k < out_links.size(); ++k) z.eta[out_links[k]] = x[k];
      return cost_or_inf(net, z);
    };
    const auto ps = net.capacity.log_concave_power() ? pa_scaling(net, s, ev, i) : refined_pa_scaling(net, s, ev, i);
    add(hessian_bound_check(f, x0, ps.beta_link, TangentKind::ZeroSum, trials, seed, 1e-5));
  }
  if (net.capacity.log_concave_power() && topo.num_links() > 0) {
    const auto hb = pc_hessian_bound(topo, curvature_bounds(net, ev.radio, D, true));
    auto f = [&](std::span<const double> x) {
      NetworkState z = s;
      z.gamma.assign(x.begin(), x.end());
      return cost_or_inf(net, z);
    };
    add(hessian_bound_check(f, s.gamma, hb, TangentKind::Free, trials, seed, 1e-5));
  }

  out.identity_residual = potential_identity_residual(net, ev.flow, ev.radio, node_potentials(net, s, ev.flow, ev.radio));
  return out;
}

}  // namespace xlayer
