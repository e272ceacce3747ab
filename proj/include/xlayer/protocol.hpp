#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "xlayer/engine.hpp"

namespace xlayer {

enum class Staleness {
  Fresh,   // every read sees the current exact value
  Cached,  // reads see what the producer published at its last update
};

struct ChannelModel {
  double noise_scale = 0;  // received values are scaled by U[1 - s, 1 + s]
  Staleness staleness = Staleness::Fresh;
  MsgScope scope = MsgScope::all();
  std::uint64_t seed = 1;

  void validate() const;
  bool degenerate() const { return noise_scale == 0 && staleness == Staleness::Fresh && scope.is_all(); }
};

// Last published value of every cross-node message with its publication stamp.
class MessageLedger {
 public:
  MessageLedger() = default;
  MessageLedger(int num_nodes, int num_sessions);

  int num_nodes() const { return n_; }
  int num_sessions() const { return s_; }

  // Replaces node i's potential for session w.
  void publish_potential(NodeId i, int w, double value, int iteration);
  // Replaces every session's potential of node i.
  void publish_potentials(NodeId i, const std::vector<double>& all_potentials, int iteration);
  void publish_msg(NodeId i, double value, int iteration);

  double potential(NodeId i, int w) const { return pot_[idx(w, i)]; }
  double msg(NodeId i) const { return msg_[i]; }
  int potential_stamp(NodeId i, int w) const { return pot_stamp_[idx(w, i)]; }
  int msg_stamp(NodeId i) const { return msg_stamp_[i]; }

  const std::vector<double>& potentials() const { return pot_; }  // [w * N + i]
  const std::vector<double>& msgs() const { return msg_; }

 private:
  std::size_t idx(int w, NodeId i) const { return static_cast<std::size_t>(w) * n_ + i; }

  int n_ = 0;
  int s_ = 0;
  std::vector<double> pot_, msg_;
  std::vector<int> pot_stamp_, msg_stamp_;
};

// Received copy of `values` with independent factors on every entry except `own`.
std::vector<double> deliver(const std::vector<double>& values, double noise_scale, std::mt19937_64& rng,
                            int own = -1);

// A node's view of the MSG values: scaled by noise, with entries outside its top-k
// gain set zeroed. The consumer's own entry is read locally when present.
std::vector<double> deliver_msgs(const Topology& topo, const MessageLedger& ledger, NodeId consumer,
                                 const ChannelModel& channel, std::mt19937_64& rng);

// Feeds the engine through the ledger and the channel.
class LedgerSource final : public MarginalSource {
 public:
  explicit LedgerSource(ChannelModel channel);

  void begin(const Network& net, const NetworkState& state, const Evaluation& ev,
             const std::vector<double>& potentials) override;
  void routing_inputs(const std::vector<double>& true_potentials, NodeId i, int w, std::vector<double>& priced,
                      std::vector<double>& blocking) override;
  void routing_done(const std::vector<double>& true_potentials, NodeId i, int w, int iteration) override;
  std::vector<double> delta_gamma(const Network& net, const NetworkState& state, const RadioState& radio,
                                  const std::vector<double>& true_msgs, const std::vector<double>& delta_eta,
                                  MsgScope scope) override;
  void power_control_done(const std::vector<double>& true_msgs, int iteration) override;
  bool strict() const override { return channel_.degenerate(); }

  const MessageLedger& ledger() const { return ledger_; }
  std::uint64_t deliveries() const { return deliveries_; }

 private:
  ChannelModel channel_;
  std::mt19937_64 rng_;
  MessageLedger ledger_;
  const Topology* topo_ = nullptr;
  std::uint64_t deliveries_ = 0;
};

// The optimizer loop with every cross-node input routed through the channel. The
// channel's scope overrides config.scope.
Trajectory run_distributed(const Network& net, const NetworkState& initial, const OptimizerConfig& config,
                           const ChannelModel& channel);

}  // namespace xlayer
