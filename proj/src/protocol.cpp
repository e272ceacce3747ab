#include "xlayer/protocol.hpp"

#include <cmath>

namespace xlayer {

void ChannelModel::validate() const {
  if (!(noise_scale >= 0 && noise_scale < 1))
    throw Error(ErrorKind::InvalidArgument, "noise scale must lie in [0, 1)");
}

MessageLedger::MessageLedger(int num_nodes, int num_sessions)
    : n_(num_nodes),
      s_(num_sessions),
      pot_(static_cast<std::size_t>(num_nodes) * num_sessions, 0.0),
      msg_(num_nodes, 0.0),
      pot_stamp_(static_cast<std::size_t>(num_nodes) * num_sessions, 0),
      msg_stamp_(num_nodes, 0) {}

void MessageLedger::publish_potential(NodeId i, int w, double value, int iteration) {
  pot_[idx(w, i)] = value;
  pot_stamp_[idx(w, i)] = iteration;
}

void MessageLedger::publish_potentials(NodeId i, const std::vector<double>& all_potentials, int iteration) {
  for (int w = 0; w < s_; ++w) publish_potential(i, w, all_potentials[idx(w, i)], iteration);
}

void MessageLedger::publish_msg(NodeId i, double value, int iteration) {
  msg_[i] = value;
  msg_stamp_[i] = iteration;
}

namespace {

double factor(double s, std::mt19937_64& rng) {
  if (s == 0) return 1.0;
  return std::uniform_real_distribution<double>(1.0 - s, 1.0 + s)(rng);
}

}  // namespace

std::vector<double> deliver(const std::vector<double>& values, double noise_scale, std::mt19937_64& rng, int own) {
  std::vector<double> out = values;
  for (std::size_t k = 0; k < out.size(); ++k)
    if (static_cast<int>(k) != own) out[k] *= factor(noise_scale, rng);
  return out;
}

std::vector<double> deliver_msgs(const Topology& topo, const MessageLedger& ledger, NodeId consumer,
                                 const ChannelModel& channel, std::mt19937_64& rng) {
  const int n = topo.num_nodes();
  std::vector<double> out(n, 0.0);
  out[consumer] = ledger.msg(consumer);
  if (channel.scope.is_all()) {
    for (NodeId m = 0; m < n; ++m)
      if (m != consumer && topo.has_gain(consumer, m)) out[m] = ledger.msg(m) * factor(channel.noise_scale, rng);
  } else {
    for (NodeId m : nearest_nodes(topo, consumer, channel.scope.k))
      out[m] = ledger.msg(m) * factor(channel.noise_scale, rng);
  }
  return out;
}

LedgerSource::LedgerSource(ChannelModel channel) : channel_(channel), rng_(channel.seed) { channel_.validate(); }

void LedgerSource::begin(const Network& net, const NetworkState&, const Evaluation& ev,
                         const std::vector<double>& potentials) {
  topo_ = &net.topology;
  ledger_ = MessageLedger(net.topology.num_nodes(), net.num_sessions());
  for (NodeId i = 0; i < net.topology.num_nodes(); ++i) ledger_.publish_potentials(i, potentials, 0);
  const auto msgs = power_control_messages(net, ev.radio, ev.flow);
  for (NodeId i = 0; i < net.topology.num_nodes(); ++i) ledger_.publish_msg(i, msgs[i], 0);
}

void LedgerSource::routing_inputs(const std::vector<double>& true_potentials, NodeId i, int w,
                                  std::vector<double>& priced, std::vector<double>& blocking) {
  const int n = topo_->num_nodes();
  const auto& src = channel_.staleness == Staleness::Fresh ? true_potentials : ledger_.potentials();
  const auto first = src.begin() + static_cast<std::ptrdiff_t>(w) * n;
  blocking.assign(first, first + n);
  // The node's own potential is local knowledge.
  blocking[i] = true_potentials[static_cast<std::size_t>(w) * n + i];
  priced = blocking;
  for (LinkId l : topo_->out_links(i)) {
    priced[topo_->link(l).to] *= factor(channel_.noise_scale, rng_);
    ++deliveries_;
  }
}

void LedgerSource::routing_done(const std::vector<double>& true_potentials, NodeId i, int w, int iteration) {
  ledger_.publish_potential(i, w, true_potentials[static_cast<std::size_t>(w) * topo_->num_nodes() + i], iteration);
}

std::vector<double> LedgerSource::delta_gamma(const Network& net, const NetworkState& state,
                                              const RadioState& radio, const std::vector<double>& true_msgs,
                                              const std::vector<double>& delta_eta, MsgScope) {
  const Topology& topo = net.topology;
  const int n = topo.num_nodes();
  if (!channel_.scope.is_all() && channel_.scope.k > n - 1)
    throw Error(ErrorKind::ScopeTooLarge, "k = " + std::to_string(channel_.scope.k) + " exceeds |N| - 1");
  MessageLedger view = ledger_;
  if (channel_.staleness == Staleness::Fresh)
    for (NodeId m = 0; m < n; ++m) view.publish_msg(m, true_msgs[m], ledger_.msg_stamp(m));
  std::vector<double> out(n);
  for (NodeId i = 0; i < n; ++i) {
    auto msgs = deliver_msgs(topo, view, i, channel_, rng_);
    msgs[i] = true_msgs[i];
    deliveries_ += channel_.scope.is_all() ? n - 1 : channel_.scope.k;
    out[i] = node_power_control_cost(topo, msgs, delta_eta, state, radio, i, channel_.scope);
  }
  return out;
}

void LedgerSource::power_control_done(const std::vector<double>& true_msgs, int iteration) {
  for (NodeId i = 0; i < topo_->num_nodes(); ++i) ledger_.publish_msg(i, true_msgs[i], iteration);
}

Trajectory run_distributed(const Network& net, const NetworkState& initial, const OptimizerConfig& config,
                           const ChannelModel& channel) {
  OptimizerConfig cfg = config;
  cfg.scope = channel.scope;
  LedgerSource src(channel);
  return run_engine(net, initial, cfg, src);
}

}  // namespace xlayer
