#pragma once

#include <vector>

#include "xlayer/algorithms.hpp"

namespace xlayer {

// Supplies the cross-node quantities a node reads during its steps. The driver owns the
// true state; a source decides what each node gets to see of other nodes' messages.
class MarginalSource {
 public:
  virtual ~MarginalSource() = default;

  virtual void begin(const Network& net, const NetworkState& state, const Evaluation& ev,
                     const std::vector<double>& potentials) = 0;

  // Session-w potentials as seen by node i: `priced` feeds delta_phi, `blocking` feeds
  // the blocked-set and hop-count rules. Both have one entry per node.
  virtual void routing_inputs(const std::vector<double>& true_potentials, NodeId i, int w,
                              std::vector<double>& priced, std::vector<double>& blocking) = 0;

  // Called after node i finished its routing step for session w.
  virtual void routing_done(const std::vector<double>& true_potentials, NodeId i, int w, int iteration) = 0;

  virtual std::vector<double> delta_gamma(const Network& net, const NetworkState& state, const RadioState& radio,
                                          const std::vector<double>& true_msgs,
                                          const std::vector<double>& delta_eta, MsgScope scope) = 0;

  virtual void power_control_done(const std::vector<double>& true_msgs, int iteration) = 0;

  // Exact sources treat guard exhaustion as an error; simulated channels record it.
  virtual bool strict() const = 0;
};

// Reads every marginal exactly.
class ExactSource final : public MarginalSource {
 public:
  void begin(const Network& net, const NetworkState&, const Evaluation&, const std::vector<double>&) override;
  void routing_inputs(const std::vector<double>& true_potentials, NodeId i, int w, std::vector<double>& priced,
                      std::vector<double>& blocking) override;
  void routing_done(const std::vector<double>&, NodeId, int, int) override {}
  std::vector<double> delta_gamma(const Network& net, const NetworkState& state, const RadioState& radio,
                                  const std::vector<double>& true_msgs, const std::vector<double>& delta_eta,
                                  MsgScope scope) override;
  void power_control_done(const std::vector<double>&, int) override {}
  bool strict() const override { return true; }

 private:
  int num_nodes_ = 0;
};

// The sweep loop shared by the exact and the simulated drivers. When `alt` is given,
// every record also carries the cost of the same state under that model.
Trajectory run_engine(const Network& net, const NetworkState& initial, const OptimizerConfig& config,
                      MarginalSource& source, const Network* alt = nullptr);

}  // namespace xlayer
