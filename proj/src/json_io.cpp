#include <cmath>

#include "xlayer/experiment.hpp"

namespace xlayer {

using nlohmann::json;

namespace {

json utility_json(const UtilityFn& u) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, LogUtility>) return {{"kind", "log"}, {"weight", v.weight}, {"epsilon", v.epsilon}};
        else return {{"kind", "quadcap"}, {"slope", v.slope}, {"curvature", v.curvature}};
      },
      u.variant());
}

UtilityFn utility_from(const json& j) {
  const std::string k = j.value("kind", "log");
  if (k == "log") return LogUtility{j.value("weight", 1.0), j.value("epsilon", 0.0)};
  if (k == "quadcap") return QuadCapUtility{j.value("slope", 1.0), j.value("curvature", 0.1)};
  throw Error(ErrorKind::InvalidArgument, "unknown utility '" + k + "'");
}

json capacity_json(const CapacityFn& c) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, HighSinrLog>) return {{"kind", "highsinr"}, {"K", v.K}, {"scale", v.scale}};
        else if constexpr (std::is_same_v<T, MQam>)
          return {{"kind", "mqam"}, {"K", v.K}, {"symbol_rate", v.symbol_rate}, {"target_error", v.target_error}};
        else return {{"kind", "precise"}, {"K", v.K}};
      },
      c.variant());
}

CapacityFn capacity_from(const json& j) {
  const std::string k = j.value("kind", "highsinr");
  if (k == "highsinr") return HighSinrLog{j.value("K", 1e5), j.value("scale", 1.0)};
  if (k == "mqam") return MQam{j.value("K", 1e5), j.value("symbol_rate", 1.0), j.value("target_error", 1e-5)};
  if (k == "precise") return PreciseLog{j.value("K", 1e5)};
  throw Error(ErrorKind::InvalidArgument, "unknown capacity '" + k + "'");
}

json cost_json(const LinkCostFn& c) {
  return std::visit(
      [](const auto& v) -> json {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, MM1Packets>) return {{"kind", "packets"}, {"epsilon", v.epsilon}};
        else return {{"kind", "delay"}};
      },
      c.variant());
}

LinkCostFn cost_from(const json& j) {
  const std::string k = j.value("kind", "packets");
  if (k == "packets") return MM1Packets{j.value("epsilon", 1e-9)};
  if (k == "delay") return MM1Delay{};
  throw Error(ErrorKind::InvalidArgument, "unknown cost '" + k + "'");
}

template <class E>
E enum_from(const json& j, const char* key, std::initializer_list<std::pair<const char*, E>> table, E fallback) {
  if (!j.contains(key)) return fallback;
  const std::string s = j.at(key).get<std::string>();
  for (const auto& [name, e] : table)
    if (s == name) return e;
  throw Error(ErrorKind::InvalidArgument, std::string("bad value '") + s + "' for " + key);
}

json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

ChannelModel channel_from(const json& j) {
  ChannelModel c;
  c.noise_scale = j.value("noise", 0.0);
  c.staleness = enum_from<Staleness>(j, "staleness", {{"fresh", Staleness::Fresh}, {"cached", Staleness::Cached}},
                                     Staleness::Fresh);
  if (j.contains("scope") && j.at("scope").is_number_integer() && j.at("scope").get<int>() >= 0)
    c.scope = MsgScope::k_nearest(j.at("scope").get<int>());
  else if (j.contains("scope") && j.at("scope") != "all" && j.at("scope") != -1)
    throw Error(ErrorKind::InvalidArgument, "channel scope must be \"all\" or k >= 0");
  c.seed = j.value("seed", std::uint64_t{1});
  c.validate();
  return c;
}

}  // namespace

ChannelModel channel_from_json(const json& j) { return channel_from(j); }

json to_json(const Network& net) {
  const Topology& t = net.topology;
  json j;
  j["nodes"] = t.num_nodes();
  json links = json::array();
  for (const Link& l : t.links()) links.push_back({l.from, l.to});
  j["links"] = links;
  std::vector<double> noise, cap;
  for (NodeId i = 0; i < t.num_nodes(); ++i) noise.push_back(t.noise(i)), cap.push_back(t.power_cap(i));
  j["noise"] = noise;
  j["power_cap"] = cap;
  json gains = json::array();
  for (NodeId m = 0; m < t.num_nodes(); ++m)
    for (NodeId n = 0; n < t.num_nodes(); ++n)
      if (t.has_gain(m, n)) gains.push_back({m, n, t.gain(m, n)});
  j["gains"] = gains;
  json sessions = json::array();
  for (const Session& s : net.sessions) {
    json js{{"origin", s.origin}, {"destination", s.destination}};
    if (s.elastic()) {
      js["max_rate"] = s.source_rate();
      js["utility"] = utility_json(*s.utility());
    } else {
      js["rate"] = s.source_rate();
    }
    sessions.push_back(js);
  }
  j["sessions"] = sessions;
  j["capacity"] = capacity_json(net.capacity);
  j["cost"] = cost_json(net.cost);
  j["eta_floor"] = net.eta_floor;
  return j;
}

Network network_from_json(const json& j) {
  const int n = j.at("nodes").get<int>();
  std::vector<Link> links;
  for (const auto& l : j.at("links")) links.push_back({l.at(0).get<int>(), l.at(1).get<int>()});
  auto per_node = [&](const char* key, double fallback) {
    if (!j.contains(key)) return std::vector<double>(n, fallback);
    if (j.at(key).is_number()) return std::vector<double>(n, j.at(key).get<double>());
    return j.at(key).get<std::vector<double>>();
  };
  Network net;
  net.topology = Topology(n, std::move(links), per_node("noise", 0.1), per_node("power_cap", 100.0));
  for (const auto& g : j.value("gains", json::array()))
    net.topology.set_gain(g.at(0).get<int>(), g.at(1).get<int>(), g.at(2).get<double>());
  for (const auto& s : j.at("sessions")) {
    Session ses{s.at("origin").get<int>(), s.at("destination").get<int>(), Inelastic{}};
    if (s.contains("max_rate"))
      ses.demand = Elastic{s.at("max_rate").get<double>(), utility_from(s.value("utility", json::object()))};
    else
      ses.demand = Inelastic{s.at("rate").get<double>()};
    if (ses.origin == ses.destination || !(ses.source_rate() > 0))
      throw Error(ErrorKind::InvalidArgument, "session needs distinct endpoints and a positive rate");
    net.sessions.push_back(ses);
  }
  net.capacity = capacity_from(j.value("capacity", json::object()));
  net.cost = cost_from(j.value("cost", json::object()));
  net.eta_floor = j.value("eta_floor", 1e-6);
  return net;
}

json to_json(const NetworkState& s) {
  return {{"num_links", s.num_links}, {"phi", s.phi}, {"phi_overflow", s.phi_overflow}, {"eta", s.eta},
          {"gamma", s.gamma}};
}

NetworkState state_from_json(const json& j) {
  NetworkState s;
  s.num_links = j.at("num_links").get<int>();
  s.phi = j.at("phi").get<std::vector<double>>();
  s.phi_overflow = j.at("phi_overflow").get<std::vector<double>>();
  s.eta = j.at("eta").get<std::vector<double>>();
  s.gamma = j.at("gamma").get<std::vector<double>>();
  return s;
}

json to_json(const GenConfig& g) {
  return {{"nodes", g.nodes},
          {"radius", g.radius},
          {"gain_exponent", g.gain_exponent},
          {"K", g.K},
          {"power_cap", g.power_cap},
          {"noise", g.noise},
          {"session_probability", g.session_probability},
          {"rate_low", g.rate_low},
          {"rate_high", g.rate_high},
          {"cost", g.cost == CostKind::Packets ? "packets" : "delay"},
          {"cost_epsilon", g.cost_epsilon},
          {"require_feasible_start", g.require_feasible_start},
          {"max_retries", g.max_retries},
          {"seed", g.seed}};
}

GenConfig gen_from_json(const json& j) {
  GenConfig g;
  g.nodes = j.value("nodes", g.nodes);
  g.radius = j.value("radius", g.radius);
  g.gain_exponent = j.value("gain_exponent", g.gain_exponent);
  g.K = j.value("K", g.K);
  g.power_cap = j.value("power_cap", g.power_cap);
  g.noise = j.value("noise", g.noise);
  g.session_probability = j.value("session_probability", g.session_probability);
  g.rate_low = j.value("rate_low", g.rate_low);
  g.rate_high = j.value("rate_high", g.rate_high);
  g.cost = enum_from<CostKind>(j, "cost", {{"packets", CostKind::Packets}, {"delay", CostKind::Delay}}, g.cost);
  g.cost_epsilon = j.value("cost_epsilon", g.cost_epsilon);
  g.require_feasible_start = j.value("require_feasible_start", g.require_feasible_start);
  g.max_retries = j.value("max_retries", g.max_retries);
  g.seed = j.value("seed", g.seed);
  g.validate();
  return g;
}

json to_json(const OptimizerConfig& c) {
  const char* rt[] = {"off", "brt", "grt"};
  const char* pa[] = {"off", "bpa", "gpa"};
  return {{"rt", rt[static_cast<int>(c.routing)]},
          {"pa", pa[static_cast<int>(c.power_alloc)]},
          {"pc", c.power_control},
          {"cr", c.congestion_control},
          {"refined_pa", c.refined_power_alloc},
          {"max_iterations", c.max_iterations},
          {"tolerance", c.tolerance},
          {"order", c.order == NodeOrder::RoundRobin ? "round-robin" : "random"},
          {"seed", c.seed},
          {"pc_subset_fraction", c.pc_subset_fraction},
          {"guard_halvings", c.guard_halvings},
          {"guard_tolerance", c.guard_tolerance},
          {"budget", c.budget == BudgetPolicy::Initial ? "initial" : "current"},
          {"scope", c.scope.k}};
}

OptimizerConfig optimizer_from_json(const json& j) {
  OptimizerConfig c;
  c.routing = enum_from<RoutingAlg>(j, "rt", {{"off", RoutingAlg::Off}, {"brt", RoutingAlg::Brt}, {"grt", RoutingAlg::Grt}},
                                    c.routing);
  c.power_alloc = enum_from<PowerAllocAlg>(
      j, "pa", {{"off", PowerAllocAlg::Off}, {"bpa", PowerAllocAlg::Bpa}, {"gpa", PowerAllocAlg::Gpa}}, c.power_alloc);
  c.power_control = j.value("pc", c.power_control);
  c.congestion_control = j.value("cr", c.congestion_control);
  c.refined_power_alloc = j.value("refined_pa", c.refined_power_alloc);
  c.max_iterations = j.value("max_iterations", c.max_iterations);
  c.tolerance = j.value("tolerance", c.tolerance);
  c.order = enum_from<NodeOrder>(j, "order", {{"round-robin", NodeOrder::RoundRobin}, {"random", NodeOrder::RandomPermutation}},
                                 c.order);
  c.seed = j.value("seed", c.seed);
  c.pc_subset_fraction = j.value("pc_subset_fraction", c.pc_subset_fraction);
  c.guard_halvings = j.value("guard_halvings", c.guard_halvings);
  c.guard_tolerance = j.value("guard_tolerance", c.guard_tolerance);
  c.budget = enum_from<BudgetPolicy>(j, "budget", {{"initial", BudgetPolicy::Initial}, {"current", BudgetPolicy::Current}},
                                     c.budget);
  const int k = j.value("scope", -1);
  c.scope = k < 0 ? MsgScope::all() : MsgScope::k_nearest(k);
  c.validate();
  return c;
}

json to_json(const Trajectory& t) {
  json recs = json::array();
  for (const auto& r : t.records)
    recs.push_back({{"iteration", r.iteration},
                    {"stage", r.stage},
                    {"cost", num_or_null(r.cost)},
                    {"residual", num_or_null(r.residual)},
                    {"routing_residual", num_or_null(r.routing_residual)},
                    {"power_alloc_residual", num_or_null(r.power_alloc_residual)},
                    {"power_ctrl_residual", num_or_null(r.power_ctrl_residual)},
                    {"admitted_rate", r.admitted_rate},
                    {"alt_cost", num_or_null(r.alt_cost)},
                    {"guard_halvings", r.guard_halvings}});
  return {{"records", recs},
          {"converged", t.converged},
          {"iterations", t.iterations},
          {"guard_rejections", t.guard_rejections},
          {"monotonicity_violations", t.monotonicity_violations},
          {"loop_violations", t.loop_violations},
          {"infeasible_links_at_entry", t.infeasible_links_at_entry},
          {"final_state", to_json(t.final_state)}};
}

ExperimentConfig experiment_from_json(const json& j) {
  ExperimentConfig c;
  c.name = j.value("name", c.name);
  if (j.contains("instance")) c.gen = gen_from_json(j.at("instance"));
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  c.num_seeds = j.value("num_seeds", c.num_seeds);
  c.iterations = j.value("iterations", c.iterations);
  c.workers = j.value("workers", c.workers);
  if (j.contains("scenario")) {
    const json& s = j.at("scenario");
    c.scenario.kind = enum_from<ScenarioKind>(
        s, "kind", {{"none", ScenarioKind::None}, {"topology", ScenarioKind::TopologyJitter}, {"demand", ScenarioKind::RateScaling}},
        ScenarioKind::None);
    c.scenario.period = s.value("period", c.scenario.period);
    c.scenario.box = s.value("box", c.scenario.box);
    c.scenario.factor_low = s.value("factor_low", c.scenario.factor_low);
    c.scenario.factor_high = s.value("factor_high", c.scenario.factor_high);
    c.scenario.validate();
  }
  for (const auto& a : j.value("arms", json::array())) {
    ArmConfig arm;
    arm.name = a.at("name").get<std::string>();
    arm.optimizer = optimizer_from_json(a.value("algorithm", json::object()));
    if (a.contains("channel")) arm.channel = channel_from(a.at("channel"));
    c.arms.push_back(arm);
  }
  if (c.arms.empty()) throw Error(ErrorKind::InvalidArgument, "experiment has no arms");
  return c;
}

}  // namespace xlayer
