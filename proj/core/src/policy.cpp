#include "psslab/policy.hpp"

#include <algorithm>

namespace psslab {

namespace {

// Smallest-index argmin over candidate ids, with optional uniform random
// tie-breaking among exact ties (reservoir pick, one pass).
template <typename Score>
int pick_min(const std::vector<int>& candidates, Score score, TieBreak tie_break,
             RngStream* rng) {
  int best = candidates.front();
  double best_score = score(best);
  int num_tied = 1;
  for (size_t n = 1; n < candidates.size(); ++n) {
    const int cand = candidates[n];
    const double s = score(cand);
    if (s < best_score) {
      best = cand;
      best_score = s;
      num_tied = 1;
    } else if (s == best_score && tie_break == TieBreak::kRandom && rng != nullptr) {
      ++num_tied;
      if (rng->next_double() * num_tied < 1.0) best = cand;
    }
  }
  return best;
}

}  // namespace

SchedulingSpec SchedulingSpec::hlpps(std::vector<double> weights) {
  SchedulingSpec spec;
  spec.kind = Kind::kHlpps;
  spec.hlpps_weights = std::move(weights);
  return spec;
}

SchedulingSpec SchedulingSpec::sbp_smp_first(const SystemConfig& config) {
  SchedulingSpec spec;
  spec.kind = Kind::kSbp;
  spec.priority_order.resize(config.num_servers);
  const ActivityIndex index = build_activity_index(config);
  for (int k = 0; k < config.num_servers; ++k) {
    std::vector<int> acts = index.of_server[k];
    std::sort(acts.begin(), acts.end(), [&](int a, int b) {
      if (index.mean_service[a] != index.mean_service[b]) {
        return index.mean_service[a] < index.mean_service[b];
      }
      return index.class_of[a] < index.class_of[b];
    });
    for (int j : acts) spec.priority_order[k].push_back(index.class_of[j]);
  }
  return spec;
}

SchedulingSpec SchedulingSpec::sbp(std::vector<std::vector<int>> order) {
  SchedulingSpec spec;
  spec.kind = Kind::kSbp;
  spec.priority_order = std::move(order);
  return spec;
}

SchedulingSpec SchedulingSpec::maxweight() {
  SchedulingSpec spec;
  spec.kind = Kind::kMaxWeight;
  return spec;
}

SchedulingSpec SchedulingSpec::class_priority(std::vector<std::vector<int>> order) {
  SchedulingSpec spec;
  spec.kind = Kind::kClassPriority;
  spec.priority_order = std::move(order);
  return spec;
}

double workload(std::span<const int> z, int server, const ActivityIndex& index) {
  double w = 0.0;
  for (int j : index.of_server[server]) w += index.mean_service[j] * z[j];
  return w;
}

int wwta_route(std::span<const int> z, int class_id, const ActivityIndex& index,
               TieBreak tie_break, RngStream* rng) {
  const int j = pick_min(
      index.of_class[class_id],
      [&](int a) { return index.mean_service[a] * workload(z, index.server_of[a], index); },
      tie_break, rng);
  return index.server_of[j];
}

int jsq_route(std::span<const int> z, int class_id, const ActivityIndex& index,
              TieBreak tie_break, RngStream* rng) {
  const int j = pick_min(
      index.of_class[class_id],
      [&](int a) {
        int total = 0;
        for (int b : index.of_server[index.server_of[a]]) total += z[b];
        return static_cast<double>(total);
      },
      tie_break, rng);
  return index.server_of[j];
}

void effort_shares(std::span<const int> z, int server, const SchedulingSpec& spec,
                   const ActivityIndex& index, std::span<double> shares) {
  const std::vector<int>& acts = index.of_server[server];
  for (int j : acts) shares[j] = 0.0;

  switch (spec.kind) {
    case SchedulingSpec::Kind::kHlpps: {
      double denom = 0.0;
      for (int j : acts) {
        const double c = spec.hlpps_weights.empty() ? 1.0 : spec.hlpps_weights[j];
        denom += c * z[j];
      }
      if (denom <= 0.0) return;  // 0/0 = 0: empty server idles
      for (int j : acts) {
        const double c = spec.hlpps_weights.empty() ? 1.0 : spec.hlpps_weights[j];
        shares[j] = c * z[j] / denom;
      }
      return;
    }
    case SchedulingSpec::Kind::kSbp: {
      for (int class_id : spec.priority_order[server]) {
        const int j = index.at(class_id, server);
        if (j >= 0 && z[j] > 0) {
          shares[j] = 1.0;
          return;
        }
      }
      return;
    }
    default:
      return;  // MaxWeight / ClassPriority allocate via picks, not shares
  }
}

int maxweight_pick(std::span<const int> class_queues, int server,
                   const SystemConfig& config, const ActivityIndex& index,
                   TieBreak tie_break, RngStream* rng) {
  (void)config;
  std::vector<int> nonempty;
  for (int j : index.of_server[server]) {
    if (class_queues[index.class_of[j]] > 0) nonempty.push_back(j);
  }
  if (nonempty.empty()) return -1;
  const int j = pick_min(
      nonempty,
      [&](int a) { return -index.rate[a] * class_queues[index.class_of[a]]; },
      tie_break, rng);
  return index.class_of[j];
}

int class_priority_pick(std::span<const int> class_queues, int server,
                        const SchedulingSpec& spec, const ActivityIndex& index) {
  for (int class_id : spec.priority_order[server]) {
    if (index.at(class_id, server) >= 0 && class_queues[class_id] > 0) return class_id;
  }
  return -1;
}

}  // namespace psslab
