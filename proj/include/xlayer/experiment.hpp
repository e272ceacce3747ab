#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "xlayer/protocol.hpp"

namespace xlayer {

// ---------------------------------------------------------------- instances

enum class CostKind { Packets, Delay };

struct GenConfig {
  int nodes = 25;
  double radius = 0.5;
  double gain_exponent = 4.0;
  double K = 1e5;
  double power_cap = 100.0;
  double noise = 0.1;
  double session_probability = 0.5;
  double rate_low = 0.0;
  double rate_high = 10.0;
  CostKind cost = CostKind::Packets;
  double cost_epsilon = 1e-9;
  // Also redraw until the min-hop start with full power has finite cost.
  bool require_feasible_start = true;
  int max_retries = 20000;
  std::uint64_t seed = 1;

  void validate() const;
};

struct Position {
  double x = 0;
  double y = 0;
};

struct Instance {
  Network net;
  std::vector<Position> positions;
  int attempts = 1;  // draws needed to satisfy the connectivity/feasibility filters
};

Instance generate_instance(const GenConfig& config);

// Gains d^-exponent between every ordered pair of distinct nodes.
void assign_gains(Topology& topo, const std::vector<Position>& positions, double exponent);

// One min-hop path per session (BFS, ties to the smaller node id), full power and
// uniform allocation. Elastic sessions start fully admitted. Throws NoPath.
NetworkState aodv_route(const Network& net);

// ---------------------------------------------------------------- experiments

enum class ScenarioKind { None, TopologyJitter, RateScaling };

struct ScenarioConfig {
  ScenarioKind kind = ScenarioKind::None;
  int period = 10;
  double box = 0.1;           // jitter square side, centred on the original position
  double factor_low = 0.0;    // demand multiplier range
  double factor_high = 2.0;

  void validate() const;
};

struct ArmConfig {
  std::string name;
  OptimizerConfig optimizer;      // routing Off keeps the min-hop routes
  std::optional<ChannelModel> channel;  // set: run through the protocol simulator
};

struct ExperimentConfig {
  std::string name = "static";
  GenConfig gen;
  std::vector<std::uint64_t> seeds;  // empty: 1..num_seeds
  int num_seeds = 20;
  int iterations = 200;
  ScenarioConfig scenario;
  std::vector<ArmConfig> arms;
  int workers = 0;  // 0: hardware concurrency

  std::vector<std::uint64_t> seed_list() const;
};

// The arm sets of the five experiment families. `name` is one of static, topology,
// demand, pc-scope, noise.
ExperimentConfig preset_experiment(const std::string& name, const GenConfig& gen, int num_seeds, int iterations,
                                   double tolerance, double noise);

struct ArmRun {
  std::string name;
  std::vector<IterationRecord> records;  // one per iteration, 0 = start
  double final_cost = 0;
  int converged_at = -1;  // first iteration whose residual met the tolerance
  int guard_rejections = 0;
  int monotonicity_violations = 0;
  int loop_violations = 0;
  int infeasible_epochs = 0;
  std::string error;  // set when the arm aborted
};

struct SeedRun {
  std::uint64_t seed = 0;
  int attempts = 0;
  std::vector<ArmRun> arms;
};

struct ExperimentReport {
  std::string name;
  std::vector<std::string> arm_names;
  std::vector<SeedRun> runs;  // sorted by seed

  // Mean cost per iteration and arm over seeds with a finite value.
  std::vector<std::vector<double>> mean_cost() const;
};

// Runs one seed: generates the instance, starts every arm from the min-hop state and
// applies the scenario perturbations.
SeedRun run_seed(const ExperimentConfig& config, std::uint64_t seed);

ExperimentReport run_experiment(const ExperimentConfig& config);

// Columns: iteration, then <arm>_cost, <arm>_residual, <arm>_admitted per arm.
void write_csv(const ExperimentReport& report, std::ostream& out);
// Per-seed rows: seed, arm, iteration, cost, residual, admitted.
void write_seed_csv(const ExperimentReport& report, std::ostream& out);
nlohmann::json summary_json(const ExperimentReport& report);

// Plot-ready copy of a mean-cost CSV: every `stride`-th row of the cost columns,
// whitespace separated with a commented header.
void emit_plots(std::istream& csv, std::ostream& dat, int stride = 1);

// ---------------------------------------------------------------- JSON

nlohmann::json to_json(const Network& net);
Network network_from_json(const nlohmann::json& j);
nlohmann::json to_json(const NetworkState& state);
NetworkState state_from_json(const nlohmann::json& j);
nlohmann::json to_json(const GenConfig& gen);
GenConfig gen_from_json(const nlohmann::json& j);
nlohmann::json to_json(const OptimizerConfig& config);
OptimizerConfig optimizer_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Trajectory& traj);
// {"noise", "staleness": fresh|cached, "scope": "all" | k, "seed"}
ChannelModel channel_from_json(const nlohmann::json& j);

// Experiment config: {"name", "instance": GenConfig, "seeds" | "num_seeds",
// "iterations", "scenario": {...}, "arms": [{"name", "algorithm": {...}, "channel": {...}}]}.
ExperimentConfig experiment_from_json(const nlohmann::json& j);

}  // namespace xlayer
