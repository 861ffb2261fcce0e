#include "psslab/json_io.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace psslab {

namespace {

using nlohmann::json;

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string activity_label(const SystemConfig& config, int j) {
  const Activity& act = config.activities[j];
  return "(" + std::to_string(act.class_id + 1) + "," + std::to_string(act.server_id + 1) + ")";
}

json parse_checked(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& err) {
    throw ParseError(err.what());  // the message carries line and column
  }
}

SchedulingSpec parse_scheduling(const json& spec_json, const SystemConfig& config) {
  const std::string type = spec_json.at("type").get<std::string>();
  if (type == "hlpps") {
    std::vector<double> weights;
    if (spec_json.contains("weights")) {
      weights = spec_json.at("weights").get<std::vector<double>>();
      if (static_cast<int>(weights.size()) != config.num_activities()) {
        throw ParseError("hlpps weights length must equal the number of activities");
      }
      for (double w : weights) {
        if (!(w > 0.0)) throw ParseError("hlpps weights must be positive");
      }
    }
    return SchedulingSpec::hlpps(std::move(weights));
  }
  if (type == "sbp" || type == "class_priority") {
    std::vector<std::vector<int>> order;
    if (spec_json.contains("order")) {
      order.resize(config.num_servers);
      for (const auto& [key, value] : spec_json.at("order").items()) {
        const int server = std::stoi(key) - 1;
        if (server < 0 || server >= config.num_servers) {
          throw ParseError("priority order names unknown server " + key);
        }
        for (const auto& class_json : value) {
          order[server].push_back(class_json.get<int>() - 1);
        }
      }
    } else if (type == "sbp") {
      return SchedulingSpec::sbp_smp_first(config);
    } else {
      throw ParseError("class_priority requires an order");
    }
    return type == "sbp" ? SchedulingSpec::sbp(std::move(order))
                         : SchedulingSpec::class_priority(std::move(order));
  }
  if (type == "maxweight") return SchedulingSpec::maxweight();
  throw ParseError("unknown scheduling type: " + type);
}

PolicyChoice parse_policy(const json& policy_json, const SystemConfig& config) {
  PolicyChoice policy;
  if (policy_json.contains("routing")) {
    const std::string routing = policy_json.at("routing").get<std::string>();
    if (routing == "wwta") {
      policy.routing = RoutingKind::kWwta;
    } else if (routing == "jsq") {
      policy.routing = RoutingKind::kJsq;
    } else {
      throw ParseError("unknown routing policy: " + routing);
    }
  }
  policy.scheduling = parse_scheduling(policy_json.at("scheduling"), config);
  policy.delayed = policy.scheduling.kind == SchedulingSpec::Kind::kMaxWeight ||
                   policy.scheduling.kind == SchedulingSpec::Kind::kClassPriority;
  if (policy_json.contains("architecture")) {
    policy.delayed = policy_json.at("architecture").get<std::string>() == "delayed";
  }
  if (policy_json.contains("tie_break")) {
    policy.tie_break = policy_json.at("tie_break").get<std::string>() == "random"
                           ? TieBreak::kRandom
                           : TieBreak::kSmallestIndex;
  }
  if (policy_json.contains("idle_assign")) {
    const std::string rule = policy_json.at("idle_assign").get<std::string>();
    if (rule == "largest_rate") {
      policy.idle_assign = IdleAssign::kLargestRate;
    } else if (rule == "smallest_index") {
      policy.idle_assign = IdleAssign::kSmallestIndex;
    } else {
      throw ParseError("unknown idle_assign rule: " + rule);
    }
  }
  if (policy_json.contains("label")) {
    policy.label = policy_json.at("label").get<std::string>();
  } else {
    switch (policy.scheduling.kind) {
      case SchedulingSpec::Kind::kHlpps:
        policy.label = policy.routing == RoutingKind::kWwta ? "wwta_hlpps" : "jsq_hlpps";
        break;
      case SchedulingSpec::Kind::kSbp:
        policy.label = policy.routing == RoutingKind::kWwta ? "wwta_sbp" : "jsq_sbp";
        break;
      case SchedulingSpec::Kind::kMaxWeight:
        policy.label = "maxweight";
        break;
      case SchedulingSpec::Kind::kClassPriority:
        policy.label = "class_priority";
        break;
    }
  }
  return policy;
}

json mean_ci_json(const MeanCi& ci) {
  return json{{"mean", ci.mean}, {"ci_half_width", ci.half_width}, {"n", ci.n}};
}

}  // namespace

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open file: " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

void atomic_write(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.parent_path() / (target.filename().string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write file: " + tmp.string());
    out << content;
  }
  fs::rename(tmp, target);
}

uint64_t fnv1a64(std::string_view bytes, uint64_t hash) {
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hash_hex(uint64_t hash) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(hash));
  return buf;
}

SystemConfig parse_topology(const std::string& text) {
  const json topo = parse_checked(text);
  SystemConfig config;
  try {
    config.num_classes = topo.at("num_classes").get<int>();
    config.num_servers = topo.at("num_servers").get<int>();
    config.arrival_rates = topo.at("arrival_rates").get<std::vector<double>>();
    for (const auto& act_json : topo.at("activities")) {
      Activity act;
      act.class_id = act_json.at("class").get<int>() - 1;
      act.server_id = act_json.at("server").get<int>() - 1;
      act.rate = act_json.at("rate").get<double>();
      config.activities.push_back(act);
    }
    if (topo.contains("architecture")) {
      const std::string arch = topo.at("architecture").get<std::string>();
      if (arch == "immediate") {
        config.architecture = Architecture::kImmediate;
      } else if (arch == "delayed") {
        config.architecture = Architecture::kDelayed;
      } else {
        throw ParseError("unknown architecture: " + arch);
      }
    }
  } catch (const json::exception& err) {
    throw ParseError(std::string("topology: ") + err.what());
  }
  return config;
}

PolicyChoice parse_policy_json(const std::string& text, const SystemConfig& config) {
  return parse_policy(parse_checked(text), config);
}

ExperimentSpec parse_experiment(const std::string& text, SystemConfig base_config) {
  const json exp = parse_checked(text);
  ExperimentSpec spec;
  spec.base_config = std::move(base_config);
  try {
    if (exp.contains("name")) spec.name = exp.at("name").get<std::string>();
    if (exp.contains("policies")) {
      for (const auto& policy_json : exp.at("policies")) {
        spec.policies.push_back(parse_policy(policy_json, spec.base_config));
      }
    }
    if (exp.contains("r_values")) {
      spec.r_values = exp.at("r_values").get<std::vector<double>>();
    } else if (exp.contains("loads")) {
      spec.r_values.clear();
      for (double load : exp.at("loads").get<std::vector<double>>()) {
        spec.r_values.push_back(1.0 - load);
      }
    }
    for (double r : spec.r_values) {
      if (!(r > 0.0 && r < 1.0)) throw ParseError("r values must lie in (0, 1)");
    }
    if (exp.contains("horizon")) {
      spec.scale_horizon = false;
      spec.fixed_horizon = exp.at("horizon").get<double>();
    }
    if (exp.contains("horizon_scale")) {
      spec.scale_horizon = true;
      spec.horizon_scale = exp.at("horizon_scale").get<double>();
    }
    if (exp.contains("warmup_fraction")) {
      spec.warmup_fraction = exp.at("warmup_fraction").get<double>();
    }
    if (exp.contains("replications")) spec.replications = exp.at("replications").get<int>();
    if (exp.contains("reservoir_capacity")) {
      spec.reservoir_capacity = exp.at("reservoir_capacity").get<int>();
    }
    if (exp.contains("probe")) {
      const json& probe = exp.at("probe");
      if (probe.contains("base_horizon")) {
        spec.probe_base_horizon = probe.at("base_horizon").get<double>();
      }
      if (probe.contains("doublings")) spec.probe_doublings = probe.at("doublings").get<int>();
      if (probe.contains("replications")) {
        spec.probe_replications = probe.at("replications").get<int>();
      }
    }
  } catch (const json::exception& err) {
    throw ParseError(std::string("experiment: ") + err.what());
  }
  if (spec.policies.empty()) {
    PolicyChoice fallback;
    fallback.label = "wwta_hlpps";
    fallback.routing = RoutingKind::kWwta;
    fallback.scheduling = SchedulingSpec::hlpps();
    spec.policies.push_back(std::move(fallback));
  }
  if (spec.replications < 2) throw ParseError("replications must be at least 2");
  return spec;
}

std::string analysis_to_json(const AnalysisReport& report, const SystemConfig& config) {
  json out;
  if (!report.violations.empty()) {
    out["violations"] = report.violations;
    return out.dump(2) + "\n";
  }
  out["rho_star"] = report.primal.rho;
  out["x_star"] = report.primal.x;
  out["relaxed_heavy_traffic"] = report.heavy_traffic.holds;
  out["max_min_utilization"] = report.heavy_traffic.max_min_utilization;
  if (!report.heavy_traffic.holds) return out.dump(2) + "\n";

  out["x_witness"] = report.heavy_traffic.witness;
  json activities = json::array();
  json non_basic = json::array();
  for (size_t j = 0; j < report.activities.size(); ++j) {
    const ActivityEntry& entry = report.activities[j];
    const bool strictly = entry.status == ActivityStatus::kStrictlyNonBasic;
    activities.push_back(json{
        {"activity", activity_label(config, static_cast<int>(j))},
        {"class", config.activities[j].class_id + 1},
        {"server", config.activities[j].server_id + 1},
        {"max_x", entry.max_x},
        {"status", strictly ? "strictly_non_basic" : "basic_capable"},
        {"d", entry.d},
    });
    if (strictly) non_basic.push_back(activity_label(config, static_cast<int>(j)));
  }
  out["activity_report"] = activities;
  out["non_basic"] = non_basic;
  out["crp"] = report.crp;
  json edges = json::array();
  for (size_t e = 0; e < report.graph.edges.size(); ++e) {
    edges.push_back(json{{"servers", {report.graph.edges[e].first + 1,
                                      report.graph.edges[e].second + 1}},
                         {"class", report.graph.edge_class[e] + 1}});
  }
  out["communication_edges"] = edges;
  out["u"] = report.dual.u;
  out["v"] = report.dual.v;
  out["d"] = report.dual.d;
  if (report.crp) {
    out["prediction"] = json{{"m", report.prediction.m},
                             {"x_mean", report.prediction.x_mean},
                             {"per_server_mean", report.prediction.per_server_mean},
                             {"total_weighted_mean", report.prediction.total_weighted_mean}};
  }
  return out.dump(2) + "\n";
}

std::string MetricsReport::to_json() const {
  json out;
  out["horizon"] = horizon;
  out["warmup"] = warmup;
  out["measured_time"] = measured_time;
  out["num_replications"] = num_replications;
  out["queue_time"] = queue_time;
  out["workload_time"] = workload_time;
  out["idle_time"] = idle_time;
  out["effort_time"] = effort_time;
  out["weighted_total_time"] = weighted_total_time;
  out["gap_time"] = gap_time;
  out["gap_sq_time"] = gap_sq_time;
  out["tmax_time"] = tmax_time;
  out["arrivals"] = arrivals;
  out["routings"] = routings;
  out["departures"] = departures;
  out["sojourn_sum"] = sojourn_sum;
  out["sojourn_sum_sq"] = sojourn_sum_sq;
  out["sojourn_count"] = sojourn_count;
  out["final_total_jobs"] = final_total_jobs;
  out["sojourn_mean"] = sojourn_mean();
  out["queue_avg_total"] = queue_avg_total();
  return out.dump(2) + "\n";
}

std::string verification_to_json(const VerificationReport& report) {
  json out;
  out["experiment"] = report.experiment;
  out["policy"] = report.policy;
  out["u"] = report.u;
  out["v"] = report.v;
  out["d"] = report.d;
  out["prediction"] = json{{"m", report.prediction.m},
                           {"x_mean", report.prediction.x_mean},
                           {"per_server_mean", report.prediction.per_server_mean},
                           {"total_weighted_mean", report.prediction.total_weighted_mean}};
  json nonbasic = json::array();
  for (int j : report.nonbasic_activities) nonbasic.push_back(j + 1);
  out["non_basic_activity_ids"] = nonbasic;
  json points = json::array();
  for (const SweepPoint& point : report.points) {
    json per_server = json::array();
    for (const MeanCi& ci : point.scaled_per_server) per_server.push_back(mean_ci_json(ci));
    points.push_back(json{
        {"r", point.r},
        {"horizon", point.horizon},
        {"replications", point.replications},
        {"scaled_weighted_total", mean_ci_json(point.scaled_weighted_total)},
        {"scaled_per_server", per_server},
        {"ks_distance", point.ks_distance},
        {"idle_residual", mean_ci_json(point.idle_residual)},
        {"flow_residuals", point.flow_residuals},
        {"gap_mean", point.gap_mean},
        {"gap_sq_mean", point.gap_sq_mean},
        {"tmax_mean", point.tmax_mean},
        {"nonbasic_effort_frac", point.nonbasic_effort_frac},
        {"nonbasic_route_frac", point.nonbasic_route_frac},
    });
  }
  out["points"] = points;
  out["warnings"] = report.warnings;
  return out.dump(2) + "\n";
}

std::string verdict_to_json(const StabilityVerdict& verdict, const std::string& policy,
                            double load) {
  json out;
  out["policy"] = policy;
  out["load"] = load;
  out["verdict"] = verdict.divergent ? "divergent" : "stable";
  out["evidence"] = json{{"horizons", verdict.evidence.horizons},
                         {"end_queue_means", verdict.evidence.end_queue_means},
                         {"time_avg_queues", verdict.evidence.time_avg_queues},
                         {"slope", verdict.evidence.slope},
                         {"r_squared", verdict.evidence.r_squared},
                         {"timeavg_rel_change", verdict.evidence.timeavg_rel_change}};
  return out.dump(2) + "\n";
}

std::string sweep_point_to_csv(const VerificationReport& report, size_t point_index) {
  const SweepPoint& point = report.points[point_index];
  std::ostringstream out;
  out << "policy,r,load,metric,mean,ci_half_width\n";
  const std::string prefix =
      report.policy + "," + format_double(point.r) + "," + format_double(1.0 - point.r) + ",";
  auto row = [&](const std::string& metric, double mean, double ci) {
    out << prefix << metric << "," << format_double(mean) << "," << format_double(ci) << "\n";
  };
  row("scaled_weighted_total", point.scaled_weighted_total.mean,
      point.scaled_weighted_total.half_width);
  for (size_t k = 0; k < point.scaled_per_server.size(); ++k) {
    row("scaled_workload_server_" + std::to_string(k + 1), point.scaled_per_server[k].mean,
        point.scaled_per_server[k].half_width);
  }
  row("ks_distance", point.ks_distance, 0.0);
  row("idle_residual", point.idle_residual.mean, point.idle_residual.half_width);
  for (size_t j = 0; j < point.flow_residuals.size(); ++j) {
    row("flow_residual_activity_" + std::to_string(j + 1), point.flow_residuals[j], 0.0);
  }
  row("ssc_gap_mean", point.gap_mean, 0.0);
  row("ssc_gap_sq_mean", point.gap_sq_mean, 0.0);
  row("ssc_tmax_mean", point.tmax_mean, 0.0);
  for (size_t n = 0; n < report.nonbasic_activities.size(); ++n) {
    const std::string id = std::to_string(report.nonbasic_activities[n] + 1);
    row("nonbasic_effort_frac_activity_" + id, point.nonbasic_effort_frac[n], 0.0);
    row("nonbasic_route_frac_activity_" + id, point.nonbasic_route_frac[n], 0.0);
  }
  return out.str();
}

std::string compare_to_csv(const std::vector<CompareRow>& rows) {
  std::ostringstream out;
  out << "policy,load,metric,mean,ci_half_width\n";
  for (const CompareRow& row : rows) {
    out << row.policy << "," << format_double(row.load) << ",completion_time,"
        << format_double(row.completion_time.mean) << ","
        << format_double(row.completion_time.half_width) << "\n";
  }
  return out.str();
}

std::string metrics_to_csv(const MetricsReport& metrics, const SystemConfig& config,
                           const std::string& policy_label, double r) {
  std::ostringstream out;
  out << "policy,r,metric,value\n";
  const std::string prefix = policy_label + "," + format_double(r) + ",";
  auto row = [&](const std::string& metric, double value) {
    out << prefix << metric << "," << format_double(value) << "\n";
  };
  row("queue_avg_total", metrics.queue_avg_total());
  row("sojourn_mean", metrics.sojourn_mean());
  for (int k = 0; k < config.num_servers; ++k) {
    row("workload_avg_server_" + std::to_string(k + 1), metrics.workload_avg(k));
    row("idle_frac_server_" + std::to_string(k + 1), metrics.idle_frac(k));
  }
  for (int j = 0; j < config.num_activities(); ++j) {
    row("effort_frac_activity_" + std::to_string(j + 1), metrics.effort_frac(j));
    row("route_frac_activity_" + std::to_string(j + 1),
        metrics.route_frac(j, config.activities[j].class_id));
  }
  return out.str();
}

std::string reservoir_to_csv(const WeightedReservoir& reservoir) {
  std::ostringstream out;
  out << "value,weight\n";
  std::vector<WeightedReservoir::Item> items = reservoir.items();
  std::sort(items.begin(), items.end(),
            [](const auto& a, const auto& b) { return a.value < b.value; });
  for (const auto& item : items) {
    out << format_double(item.value) << "," << format_double(item.weight) << "\n";
  }
  return out.str();
}

std::string manifest_to_json(const std::string& command, uint64_t seed,
                             const std::string& config_hash,
                             const std::vector<ManifestEntry>& artifacts,
                             const std::string& summary_json) {
  json out;
  out["command"] = command;
  out["seed"] = seed;
  out["config_hash"] = config_hash;
  json files = json::array();
  for (const ManifestEntry& entry : artifacts) {
    files.push_back(json{{"path", entry.path}, {"bytes", entry.bytes}});
  }
  out["artifacts"] = files;
  if (!summary_json.empty()) out["summary"] = json::parse(summary_json);
  return out.dump(2) + "\n";
}

}  // namespace psslab
