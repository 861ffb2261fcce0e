#include "psslab/model.hpp"

#include <algorithm>
#include <set>
#include <stdexcept>

namespace psslab {

int SystemMatrices::class_of(int j) const {
  for (int i = 0; i < constituency.rows; ++i) {
    if (constituency(i, j) != 0.0) return i;
  }
  return -1;
}

int SystemMatrices::server_of(int j) const {
  for (int k = 0; k < consumption.rows; ++k) {
    if (consumption(k, j) != 0.0) return k;
  }
  return -1;
}

std::vector<std::string> validate_config(const SystemConfig& config) {
  std::vector<std::string> violations;
  const int num_classes = config.num_classes;
  const int num_servers = config.num_servers;

  if (num_classes <= 0) violations.push_back("num_classes must be positive");
  if (num_servers <= 0) violations.push_back("num_servers must be positive");

  if (static_cast<int>(config.arrival_rates.size()) != num_classes) {
    violations.push_back("arrival_rates length must equal num_classes");
  }
  for (size_t i = 0; i < config.arrival_rates.size(); ++i) {
    if (!(config.arrival_rates[i] > 0.0)) {
      violations.push_back("arrival rate must be positive (class " +
                           std::to_string(i + 1) + ")");
    }
  }

  if (config.activities.empty()) violations.push_back("at least one activity required");

  std::set<std::pair<int, int>> seen;
  std::vector<int> class_cover(std::max(num_classes, 0), 0);
  std::vector<int> server_cover(std::max(num_servers, 0), 0);
  for (size_t j = 0; j < config.activities.size(); ++j) {
    const Activity& act = config.activities[j];
    const std::string where = " (activity " + std::to_string(j + 1) + ")";
    if (act.class_id < 0 || act.class_id >= num_classes) {
      violations.push_back("class id out of range" + where);
      continue;
    }
    if (act.server_id < 0 || act.server_id >= num_servers) {
      violations.push_back("server id out of range" + where);
      continue;
    }
    if (!(act.rate > 0.0)) {
      violations.push_back("service rate must be positive" + where);
    }
    if (!seen.insert({act.class_id, act.server_id}).second) {
      violations.push_back("duplicate activity" + where);
    }
    class_cover[act.class_id] = 1;
    server_cover[act.server_id] = 1;
  }
  for (int i = 0; i < num_classes; ++i) {
    if (!class_cover[i]) {
      violations.push_back("class " + std::to_string(i + 1) + " has no activity");
    }
  }
  for (int k = 0; k < num_servers; ++k) {
    if (!server_cover[k]) {
      violations.push_back("server " + std::to_string(k + 1) + " has no activity");
    }
  }
  return violations;
}

SystemMatrices build_matrices(const SystemConfig& config) {
  const int num_classes = config.num_classes;
  const int num_servers = config.num_servers;
  const int num_activities = config.num_activities();

  SystemMatrices m;
  m.constituency = Matrix(num_classes, num_activities);
  m.consumption = Matrix(num_servers, num_activities);
  m.output = Matrix(num_classes, num_activities);

  for (int j = 0; j < num_activities; ++j) {
    const Activity& act = config.activities[j];
    m.constituency(act.class_id, j) = 1.0;
    m.consumption(act.server_id, j) = 1.0;
    m.output(act.class_id, j) = act.rate;
  }
  return m;
}

SystemConfig scale_arrivals(const SystemConfig& config, double r) {
  if (!(r > 0.0 && r < 1.0)) {
    throw std::invalid_argument("scale_arrivals: r must lie in (0, 1)");
  }
  SystemConfig scaled = config;
  for (double& rate : scaled.arrival_rates) rate *= (1.0 - r);
  return scaled;
}

ActivityIndex build_activity_index(const SystemConfig& config) {
  ActivityIndex idx;
  idx.num_servers = config.num_servers;
  idx.of_class.resize(config.num_classes);
  idx.of_server.resize(config.num_servers);
  idx.class_of.resize(config.activities.size());
  idx.server_of.resize(config.activities.size());
  idx.rate.resize(config.activities.size());
  idx.mean_service.resize(config.activities.size());
  idx.lookup.assign(static_cast<size_t>(config.num_classes) * config.num_servers, -1);

  for (int j = 0; j < config.num_activities(); ++j) {
    const Activity& act = config.activities[j];
    idx.of_class[act.class_id].push_back(j);
    idx.of_server[act.server_id].push_back(j);
    idx.class_of[j] = act.class_id;
    idx.server_of[j] = act.server_id;
    idx.rate[j] = act.rate;
    idx.mean_service[j] = 1.0 / act.rate;
    idx.lookup[static_cast<size_t>(act.class_id) * config.num_servers + act.server_id] = j;
  }
  // Eligible-server and eligible-class lists sorted by id so smallest-index
  // tie-breaking falls out of plain left-to-right scans.
  for (auto& acts : idx.of_class) {
    std::sort(acts.begin(), acts.end(),
              [&](int a, int b) { return idx.server_of[a] < idx.server_of[b]; });
  }
  for (auto& acts : idx.of_server) {
    std::sort(acts.begin(), acts.end(),
              [&](int a, int b) { return idx.class_of[a] < idx.class_of[b]; });
  }
  return idx;
}

}  // namespace psslab
