#include "xlayer/model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace xlayer {

namespace {

std::string str(auto&&... parts) {
  std::ostringstream os;
  (os << ... << parts);
  return os.str();
}

}  // namespace

// ---------------------------------------------------------------- topology

Topology::Topology(int num_nodes, std::vector<Link> links, std::vector<double> noise,
                   std::vector<double> power_cap)
    : n_(num_nodes), links_(std::move(links)), noise_(std::move(noise)), power_cap_(std::move(power_cap)) {
  if (n_ <= 0) throw Error(ErrorKind::InvalidArgument, "topology needs at least one node");
  if (static_cast<int>(noise_.size()) != n_ || static_cast<int>(power_cap_.size()) != n_)
    throw Error(ErrorKind::InvalidArgument, "noise and power_cap need one entry per node");
  for (int i = 0; i < n_; ++i) {
    if (!(noise_[i] > 0)) throw Error(ErrorKind::InvalidArgument, str("noise at node ", i, " must be > 0"));
    if (!(power_cap_[i] > 1)) throw Error(ErrorKind::InvalidArgument, str("power cap at node ", i, " must be > 1"));
  }
  out_.assign(n_, {});
  in_.assign(n_, {});
  for (LinkId l = 0; l < num_links(); ++l) {
    const auto [i, j] = links_[l];
    if (i < 0 || i >= n_ || j < 0 || j >= n_ || i == j)
      throw Error(ErrorKind::InvalidArgument, str("bad link ", i, "->", j));
    out_[i].push_back(l);
    in_[j].push_back(l);
  }
  for (int i = 0; i < n_; ++i) {
    std::ranges::sort(out_[i], {}, [this](LinkId l) { return links_[l].to; });
    std::ranges::sort(in_[i], {}, [this](LinkId l) { return links_[l].from; });
    for (std::size_t k = 1; k < out_[i].size(); ++k)
      if (links_[out_[i][k]].to == links_[out_[i][k - 1]].to)
        throw Error(ErrorKind::InvalidArgument, str("duplicate link ", i, "->", links_[out_[i][k]].to));
  }
  gain_.assign(static_cast<std::size_t>(n_) * n_, 0.0);
}

std::optional<LinkId> Topology::find_link(NodeId i, NodeId j) const {
  for (LinkId l : out_[i])
    if (links_[l].to == j) return l;
  return std::nullopt;
}

void Topology::set_gain(NodeId m, NodeId j, double g) {
  if (!(g > 0) || !std::isfinite(g)) throw Error(ErrorKind::InvalidArgument, str("gain ", m, "->", j, " must be > 0"));
  gain_[m * n_ + j] = g;
}

void Topology::clear_gain(NodeId m, NodeId j) { gain_[m * n_ + j] = 0.0; }

double Topology::gain(NodeId m, NodeId j) const {
  const double g = gain_[m * n_ + j];
  if (!(g > 0)) throw Error(ErrorKind::MissingGain, str("no gain for ", m, "->", j));
  return g;
}

bool Topology::strongly_connected() const {
  auto reach = [this](bool forward) {
    std::vector<char> seen(n_, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      for (LinkId l : forward ? out_[v] : in_[v]) {
        const int u = forward ? links_[l].to : links_[l].from;
        if (!seen[u]) seen[u] = 1, stack.push_back(u);
      }
    }
    return std::ranges::all_of(seen, [](char c) { return c != 0; });
  };
  return reach(true) && reach(false);
}

// ---------------------------------------------------------------- sessions

double Session::source_rate() const {
  if (const auto* e = std::get_if<Elastic>(&demand)) return e->max_rate;
  return std::get<Inelastic>(demand).rate;
}

const UtilityFn* Session::utility() const {
  if (const auto* e = std::get_if<Elastic>(&demand)) return &e->utility;
  return nullptr;
}

double Cost::value() const {
  if (!finite()) throw Error(ErrorKind::InvalidArgument, "infinite cost has no value");
  return v_;
}

NetworkState make_state(const Topology& topo, int num_sessions) {
  NetworkState s;
  s.num_links = topo.num_links();
  s.phi.assign(static_cast<std::size_t>(num_sessions) * topo.num_links(), 0.0);
  s.phi_overflow.assign(num_sessions, 0.0);
  s.eta.assign(topo.num_links(), 0.0);
  s.gamma.assign(topo.num_nodes(), 1.0);
  for (int i = 0; i < topo.num_nodes(); ++i) {
    const auto out = topo.out_links(i);
    for (LinkId l : out) s.eta[l] = 1.0 / static_cast<double>(out.size());
  }
  return s;
}

// ---------------------------------------------------------------- radio

RadioState compute_radio(const Topology& topo, const CapacityFn& capacity, const NetworkState& state) {
  const int n = topo.num_nodes();
  const int e = topo.num_links();
  RadioState r;
  r.link_power.resize(e);
  r.node_power.assign(n, 0.0);
  r.interference.resize(e);
  r.sinr.resize(e);
  r.capacity.resize(e);
  for (int i = 0; i < n; ++i) {
    const double total = std::pow(topo.power_cap(i), state.gamma[i]);
    for (LinkId l : topo.out_links(i)) {
      r.link_power[l] = total * state.eta[l];
      r.node_power[i] += r.link_power[l];
    }
  }
  for (LinkId l = 0; l < e; ++l) {
    const auto [i, j] = topo.link(l);
    const double g = topo.gain(i, j);
    double own = 0;  // sum_{k != j} P_ik
    for (LinkId k : topo.out_links(i))
      if (k != l) own += r.link_power[k];
    r.interference[l] = g * own + external_interference(topo, r, l);
    r.sinr[l] = g * r.link_power[l] / r.interference[l];
    r.capacity[l] = capacity.value(r.sinr[l]);
  }
  return r;
}

double external_interference(const Topology& topo, const RadioState& radio, LinkId l) {
  const auto [i, j] = topo.link(l);
  double sum = topo.noise(j);
  for (int m = 0; m < topo.num_nodes(); ++m)
    if (m != i && radio.node_power[m] > 0 && topo.has_gain(m, j)) sum += topo.gain(m, j) * radio.node_power[m];
  return sum;
}

// ---------------------------------------------------------------- flows

std::vector<NodeId> session_order(const Topology& topo, const std::vector<Session>& sessions,
                                  const NetworkState& state, int w) {
  const int n = topo.num_nodes();
  const NodeId dest = sessions[w].destination;
  auto active = [&](LinkId l) { return topo.link(l).from != dest && state.route(w, l) > 0; };

  std::vector<int> indeg(n, 0);
  for (LinkId l = 0; l < topo.num_links(); ++l)
    if (active(l)) ++indeg[topo.link(l).to];
  std::vector<NodeId> order;
  order.reserve(n);
  for (int i = 0; i < n; ++i)
    if (indeg[i] == 0) order.push_back(i);
  for (std::size_t head = 0; head < order.size(); ++head)
    for (LinkId l : topo.out_links(order[head]))
      if (active(l) && --indeg[topo.link(l).to] == 0) order.push_back(topo.link(l).to);
  if (static_cast<int>(order.size()) == n) return order;

  // Every leftover node has an active in-edge from another leftover node, so walking
  // backwards must revisit a node.
  std::vector<int> seen_at(n, -1);
  std::vector<NodeId> walk;
  NodeId v = static_cast<NodeId>(std::ranges::find_if(indeg, [](int d) { return d > 0; }) - indeg.begin());
  while (seen_at[v] < 0) {
    seen_at[v] = static_cast<int>(walk.size());
    walk.push_back(v);
    for (LinkId l : topo.in_links(v))
      if (active(l) && indeg[topo.link(l).from] > 0) {
        v = topo.link(l).from;
        break;
      }
  }
  std::vector<NodeId> cycle(walk.begin() + seen_at[v], walk.end());
  std::ranges::reverse(cycle);
  throw RoutingCycleError(w, std::move(cycle));
}

FlowState compute_flows(const Topology& topo, const std::vector<Session>& sessions,
                        const NetworkState& state) {
  const int n = topo.num_nodes();
  const int ns = static_cast<int>(sessions.size());
  FlowState f;
  f.num_nodes = n;
  f.node_rate.assign(static_cast<std::size_t>(ns) * n, 0.0);
  f.link_flow.assign(topo.num_links(), 0.0);
  f.overflow_rate.assign(ns, 0.0);
  f.admitted_rate.assign(ns, 0.0);
  for (int w = 0; w < ns; ++w) {
    const Session& s = sessions[w];
    double* t = f.node_rate.data() + static_cast<std::size_t>(w) * n;
    t[s.origin] = s.source_rate();
    for (NodeId i : session_order(topo, sessions, state, w)) {
      if (i == s.destination || t[i] == 0) continue;
      for (LinkId l : topo.out_links(i)) {
        const double phi = state.route(w, l);
        if (phi <= 0) continue;
        const double fl = t[i] * phi;
        t[topo.link(l).to] += fl;
        f.link_flow[l] += fl;
      }
    }
    if (s.elastic()) f.overflow_rate[w] = t[s.origin] * state.phi_overflow[w];
    f.admitted_rate[w] = s.source_rate() - f.overflow_rate[w];
  }
  return f;
}

Cost total_cost(const FlowState& flow, const RadioState& radio, const LinkCostFn& cost,
                const std::vector<Session>& sessions) {
  double sum = 0;
  for (std::size_t l = 0; l < flow.link_flow.size(); ++l) {
    if (flow.link_flow[l] >= radio.capacity[l]) return Cost::infinite();
    sum += cost.value(radio.capacity[l], flow.link_flow[l]);
  }
  for (std::size_t w = 0; w < sessions.size(); ++w) {
    if (const UtilityFn* u = sessions[w].utility()) {
      const double b = u->loss(flow.overflow_rate[w], sessions[w].source_rate());
      if (!std::isfinite(b)) return Cost::infinite();
      sum += b;
    }
  }
  return Cost(sum);
}

Evaluation evaluate(const Network& net, const NetworkState& state) {
  Evaluation ev;
  ev.radio = compute_radio(net.topology, net.capacity, state);
  ev.flow = compute_flows(net.topology, net.sessions, state);
  ev.cost = total_cost(ev.flow, ev.radio, net.cost, net.sessions);
  return ev;
}

// ---------------------------------------------------------------- validation

std::string_view to_string(DiagnosticKind kind) {
  switch (kind) {
    case DiagnosticKind::SizeMismatch: return "SizeMismatch";
    case DiagnosticKind::NegativeFraction: return "NegativeFraction";
    case DiagnosticKind::SimplexViolation: return "SimplexViolation";
    case DiagnosticKind::DestinationRouting: return "DestinationRouting";
    case DiagnosticKind::OverflowOnInelastic: return "OverflowOnInelastic";
    case DiagnosticKind::PowerSimplexViolation: return "PowerSimplexViolation";
    case DiagnosticKind::PowerFloorViolation: return "PowerFloorViolation";
    case DiagnosticKind::GammaBound: return "GammaBound";
    case DiagnosticKind::RoutingCycle: return "RoutingCycle";
  }
  return "Unknown";
}

std::vector<Diagnostic> validate_state(const Topology& topo, const std::vector<Session>& sessions,
                                       const NetworkState& state, double eta_floor, double tol) {
  std::vector<Diagnostic> out;
  const int n = topo.num_nodes();
  const int e = topo.num_links();
  const int ns = static_cast<int>(sessions.size());
  if (state.num_links != e || state.phi.size() != static_cast<std::size_t>(ns) * e ||
      state.phi_overflow.size() != static_cast<std::size_t>(ns) || state.eta.size() != static_cast<std::size_t>(e) ||
      state.gamma.size() != static_cast<std::size_t>(n)) {
    out.push_back({DiagnosticKind::SizeMismatch, -1, -1, -1, "state dimensions do not match the network"});
    return out;
  }

  for (int w = 0; w < ns; ++w) {
    const Session& s = sessions[w];
    const double ov = state.phi_overflow[w];
    if (!s.elastic() && ov != 0)
      out.push_back({DiagnosticKind::OverflowOnInelastic, s.origin, w, -1, "overflow fraction on inelastic session"});
    if (ov < 0) out.push_back({DiagnosticKind::NegativeFraction, s.origin, w, -1, "negative overflow fraction"});
    for (int i = 0; i < n; ++i) {
      double sum = (i == s.origin && s.elastic()) ? ov : 0.0;
      for (LinkId l : topo.out_links(i)) {
        const double p = state.route(w, l);
        if (p < 0) out.push_back({DiagnosticKind::NegativeFraction, i, w, l, str("phi = ", p)});
        if (i == s.destination && p != 0)
          out.push_back({DiagnosticKind::DestinationRouting, i, w, l, "destination forwards its own session"});
        sum += p;
      }
      if (i != s.destination && std::abs(sum - 1.0) > tol)
        out.push_back({DiagnosticKind::SimplexViolation, i, w, -1, str("routing fractions sum to ", sum)});
    }
    try {
      session_order(topo, sessions, state, w);
    } catch (const RoutingCycleError& err) {
      out.push_back({DiagnosticKind::RoutingCycle, err.cycle().front(), w, -1, err.what()});
    }
  }

  for (int i = 0; i < n; ++i) {
    const auto links = topo.out_links(i);
    if (state.gamma[i] > 1.0 || !std::isfinite(state.gamma[i]))
      out.push_back({DiagnosticKind::GammaBound, i, -1, -1, str("gamma = ", state.gamma[i])});
    if (links.empty()) continue;
    double sum = 0;
    for (LinkId l : links) {
      if (state.eta[l] < eta_floor || state.eta[l] <= 0)
        out.push_back({DiagnosticKind::PowerFloorViolation, i, -1, l, str("eta = ", state.eta[l])});
      sum += state.eta[l];
    }
    if (std::abs(sum - 1.0) > tol)
      out.push_back({DiagnosticKind::PowerSimplexViolation, i, -1, -1, str("power fractions sum to ", sum)});
  }
  return out;
}

}  // namespace xlayer
