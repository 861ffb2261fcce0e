#include "psslab/engine.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace psslab {

namespace {

constexpr uint64_t kReservoirStreamKey = 0x7265736572ULL;

void check_options(const SystemConfig& config, const RunOptions& options) {
  if (!(options.horizon > 0.0)) throw std::invalid_argument("horizon must be positive");
  const double warmup = options.warmup < 0.0 ? 0.2 * options.horizon : options.warmup;
  if (warmup >= options.horizon) throw std::invalid_argument("warmup must precede horizon");
  if (!options.gap_weights.empty() &&
      static_cast<int>(options.gap_weights.size()) != config.num_servers) {
    throw std::invalid_argument("gap_weights length must equal num_servers");
  }
}

MetricsReport empty_report(const SystemConfig& config, const RunOptions& options,
                           double warmup, int queue_slots) {
  MetricsReport acc;
  acc.horizon = options.horizon;
  acc.warmup = warmup;
  acc.queue_time.assign(queue_slots, 0.0);
  acc.workload_time.assign(config.num_servers, 0.0);
  acc.idle_time.assign(config.num_servers, 0.0);
  acc.effort_time.assign(config.num_activities(), 0.0);
  acc.arrivals.assign(config.num_classes, 0);
  acc.routings.assign(config.num_activities(), 0);
  acc.departures.assign(config.num_activities(), 0);
  acc.reservoir = WeightedReservoir(options.gap_weights.empty() ? 0 : options.reservoir_capacity);
  return acc;
}

}  // namespace

EventRates event_rates(std::span<const int> z, const PolicyBundle& policies,
                       const SystemConfig& config, const ActivityIndex& index) {
  EventRates rates;
  rates.arrival = config.arrival_rates;
  rates.completion.assign(config.num_activities(), 0.0);
  std::vector<double> shares(config.num_activities(), 0.0);
  for (int k = 0; k < config.num_servers; ++k) {
    effort_shares(z, k, policies.scheduling, index, shares);
  }
  for (int j = 0; j < config.num_activities(); ++j) {
    rates.completion[j] = index.rate[j] * shares[j];
  }
  for (double r : rates.arrival) rates.total += r;
  for (double r : rates.completion) rates.total += r;
  return rates;
}

Simulator::Simulator(const SystemConfig& config, const PolicyBundle& policies,
                     const RunOptions& options)
    : config_(config),
      index_(build_activity_index(config)),
      policies_(policies),
      options_(options),
      rng_(options.seed, options.stream),
      reservoir_rng_(rng_.split(kReservoirStreamKey)) {
  check_options(config, options);
  warmup_ = options.warmup < 0.0 ? 0.2 * options.horizon : options.warmup;
  z_.assign(config.num_activities(), 0);
  buffers_.resize(config.num_activities());
  server_workload_.assign(config.num_servers, 0.0);
  server_jobs_.assign(config.num_servers, 0);
  shares_.assign(config.num_activities(), 0.0);
  rates_.assign(config.num_activities(), 0.0);
  server_dirty_.assign(config.num_servers, 1);
  for (double rate : config.arrival_rates) sum_lambda_ += rate;
  has_gap_stats_ = !options.gap_weights.empty();
  gap_u_ = options.gap_weights;
  gap_inv_u_.resize(gap_u_.size());
  for (size_t k = 0; k < gap_u_.size(); ++k) gap_inv_u_[k] = 1.0 / gap_u_[k];
  acc_ = empty_report(config, options, warmup_, config.num_activities());
}

void Simulator::refresh_rates() {
  // Only servers whose buffers changed need their shares recomputed.
  for (int k = 0; k < config_.num_servers; ++k) {
    if (!server_dirty_[k]) continue;
    for (int j : index_.of_server[k]) sum_completion_ -= rates_[j];
    effort_shares(z_, k, policies_.scheduling, index_, shares_);
    for (int j : index_.of_server[k]) {
      rates_[j] = index_.rate[j] * shares_[j];
      sum_completion_ += rates_[j];
    }
    server_dirty_[k] = 0;
  }
  if (sum_completion_ < 0.0) sum_completion_ = 0.0;  // fp dust from the running sum
}

void Simulator::integrate(double t0, double t1) {
  const double lo = std::max(t0, warmup_);
  const double w = t1 - lo;
  if (w <= 0.0) return;
  acc_.measured_time += w;
  for (int j = 0; j < config_.num_activities(); ++j) {
    acc_.queue_time[j] += z_[j] * w;
    acc_.effort_time[j] += shares_[j] * w;
  }
  for (int k = 0; k < config_.num_servers; ++k) {
    acc_.workload_time[k] += server_workload_[k] * w;
    if (server_jobs_[k] == 0) acc_.idle_time[k] += w;
  }
  if (has_gap_stats_) {
    double weighted_total = 0.0;
    double tmax = -1.0, tmin = 0.0;
    for (int k = 0; k < config_.num_servers; ++k) {
      weighted_total += gap_u_[k] * server_workload_[k];
      const double t = server_workload_[k] * gap_inv_u_[k];
      if (tmax < 0.0) {
        tmax = tmin = t;
      } else {
        tmax = std::max(tmax, t);
        tmin = std::min(tmin, t);
      }
    }
    const double gap = tmax - tmin;
    acc_.weighted_total_time += weighted_total * w;
    acc_.gap_time += gap * w;
    acc_.gap_sq_time += gap * gap * w;
    acc_.tmax_time += tmax * w;
    acc_.reservoir.add(weighted_total, w, reservoir_rng_);
    if (options_.weighted_sample_sink) {
      options_.weighted_sample_sink->push_back({weighted_total, w});
    }
  }
}

bool Simulator::step() {
  if (clock_ >= options_.horizon) return false;
  refresh_rates();
  const double total = sum_lambda_ + sum_completion_;
  const double dt = rng_.exponential(total);
  const double t_next = clock_ + dt;

  integrate(clock_, std::min(t_next, options_.horizon));
  if (t_next >= options_.horizon) {
    clock_ = options_.horizon;
    acc_.final_total_jobs = 0;
    for (int count : z_) acc_.final_total_jobs += count;
    return false;
  }
  clock_ = t_next;
  const bool counted = clock_ >= warmup_;

  double pick = rng_.next_double() * total;
  if (pick < sum_lambda_) {
    int class_id = config_.num_classes - 1;
    for (int i = 0; i < config_.num_classes; ++i) {
      pick -= config_.arrival_rates[i];
      if (pick < 0.0) {
        class_id = i;
        break;
      }
    }
    const int server = policies_.routing == RoutingKind::kWwta
                           ? wwta_route(z_, class_id, index_, options_.tie_break, &rng_)
                           : jsq_route(z_, class_id, index_, options_.tie_break, &rng_);
    const int j = index_.at(class_id, server);
    buffers_[j].push_back(Job{class_id, clock_});
    ++z_[j];
    server_workload_[server] += index_.mean_service[j];
    ++server_jobs_[server];
    server_dirty_[server] = 1;
    if (counted) {
      ++acc_.arrivals[class_id];
      ++acc_.routings[j];
    }
  } else {
    pick -= sum_lambda_;
    int j = -1;
    for (int cand = 0; cand < config_.num_activities(); ++cand) {
      if (rates_[cand] <= 0.0) continue;
      j = cand;
      pick -= rates_[cand];
      if (pick < 0.0) break;
    }
    const Job job = buffers_[j].front();
    buffers_[j].pop_front();
    --z_[j];
    const int server = index_.server_of[j];
    server_workload_[server] -= index_.mean_service[j];
    if (--server_jobs_[server] == 0) server_workload_[server] = 0.0;  // kill fp drift
    server_dirty_[server] = 1;
    if (counted) {
      ++acc_.departures[j];
      const double sojourn = clock_ - job.arrival_time;
      acc_.sojourn_sum += sojourn;
      acc_.sojourn_sum_sq += sojourn * sojourn;
      ++acc_.sojourn_count;
    }
  }
  return true;
}

void Simulator::run_to_horizon() {
  while (step()) {
  }
}

MetricsReport Simulator::report() const { return acc_; }

DelayedSimulator::DelayedSimulator(const SystemConfig& config,
                                   const SchedulingSpec& scheduling,
                                   const RunOptions& options)
    : config_(config),
      index_(build_activity_index(config)),
      scheduling_(scheduling),
      options_(options),
      rng_(options.seed, options.stream) {
  check_options(config, options);
  if (config.architecture != Architecture::kDelayed) {
    throw std::invalid_argument("delayed simulator requires a delayed-architecture config");
  }
  warmup_ = options.warmup < 0.0 ? 0.2 * options.horizon : options.warmup;
  class_queues_.resize(config.num_classes);
  waiting_.assign(config.num_classes, 0);
  in_system_.assign(config.num_classes, 0);
  servers_.resize(config.num_servers);
  acc_ = empty_report(config, options, warmup_, config.num_classes);
}

std::optional<int> DelayedSimulator::in_service_class(int server) const {
  if (!servers_[server].busy) return std::nullopt;
  return servers_[server].job.class_id;
}

void DelayedSimulator::integrate(double t0, double t1) {
  const double lo = std::max(t0, warmup_);
  const double w = t1 - lo;
  if (w <= 0.0) return;
  acc_.measured_time += w;
  for (int i = 0; i < config_.num_classes; ++i) acc_.queue_time[i] += in_system_[i] * w;
  for (int k = 0; k < config_.num_servers; ++k) {
    if (!servers_[k].busy) {
      acc_.idle_time[k] += w;
      continue;
    }
    const int j = index_.at(servers_[k].job.class_id, k);
    acc_.effort_time[j] += w;
  }
}

void DelayedSimulator::start_service(int server, const Job& job) {
  servers_[server].busy = true;
  servers_[server].job = job;
  if (clock_ >= warmup_) ++acc_.routings[index_.at(job.class_id, server)];
}

bool DelayedSimulator::step() {
  if (clock_ >= options_.horizon) return false;
  double total = 0.0;
  for (double rate : config_.arrival_rates) total += rate;
  for (int k = 0; k < config_.num_servers; ++k) {
    if (servers_[k].busy) total += index_.rate[index_.at(servers_[k].job.class_id, k)];
  }
  const double dt = rng_.exponential(total);
  const double t_next = clock_ + dt;

  integrate(clock_, std::min(t_next, options_.horizon));
  if (t_next >= options_.horizon) {
    clock_ = options_.horizon;
    acc_.final_total_jobs = 0;
    for (int count : in_system_) acc_.final_total_jobs += count;
    return false;
  }
  clock_ = t_next;
  const bool counted = clock_ >= warmup_;

  double sum_lambda = 0.0;
  for (double rate : config_.arrival_rates) sum_lambda += rate;
  double pick = rng_.next_double() * total;
  if (pick < sum_lambda) {
    int class_id = config_.num_classes - 1;
    for (int i = 0; i < config_.num_classes; ++i) {
      pick -= config_.arrival_rates[i];
      if (pick < 0.0) {
        class_id = i;
        break;
      }
    }
    if (counted) ++acc_.arrivals[class_id];
    ++in_system_[class_id];
    // An idle eligible server starts the job now; which one is picked by the
    // configured rule (largest service rate by default).
    int best = -1;
    for (int j : index_.of_class[class_id]) {
      const int k = index_.server_of[j];
      if (servers_[k].busy) continue;
      if (best < 0) {
        best = k;
      } else if (options_.idle_assign == IdleAssign::kLargestRate &&
                 index_.rate[j] > index_.rate[index_.at(class_id, best)]) {
        best = k;
      }
    }
    if (best >= 0) {
      start_service(best, Job{class_id, clock_});
    } else {
      class_queues_[class_id].push_back(Job{class_id, clock_});
      ++waiting_[class_id];
    }
  } else {
    pick -= sum_lambda;
    int server = -1;
    for (int k = 0; k < config_.num_servers; ++k) {
      if (!servers_[k].busy) continue;
      server = k;
      pick -= index_.rate[index_.at(servers_[k].job.class_id, k)];
      if (pick < 0.0) break;
    }
    const Job done = servers_[server].job;
    servers_[server].busy = false;
    const int j = index_.at(done.class_id, server);
    --in_system_[done.class_id];
    if (counted) {
      ++acc_.departures[j];
      const double sojourn = clock_ - done.arrival_time;
      acc_.sojourn_sum += sojourn;
      acc_.sojourn_sum_sq += sojourn * sojourn;
      ++acc_.sojourn_count;
    }
    const int next_class =
        scheduling_.kind == SchedulingSpec::Kind::kMaxWeight
            ? maxweight_pick(waiting_, server, config_, index_, options_.tie_break, &rng_)
            : class_priority_pick(waiting_, server, scheduling_, index_);
    if (next_class >= 0) {
      const Job next = class_queues_[next_class].front();
      class_queues_[next_class].pop_front();
      --waiting_[next_class];
      start_service(server, next);
    }
  }
  return true;
}

void DelayedSimulator::run_to_horizon() {
  while (step()) {
  }
}

MetricsReport DelayedSimulator::report() const { return acc_; }

MetricsReport run(const SystemConfig& config, const PolicyBundle& policies,
                  const RunOptions& options) {
  Simulator sim(config, policies, options);
  sim.run_to_horizon();
  return sim.report();
}

MetricsReport run_arch2(const SystemConfig& config, const SchedulingSpec& scheduling,
                        const RunOptions& options) {
  DelayedSimulator sim(config, scheduling, options);
  sim.run_to_horizon();
  return sim.report();
}

}  // namespace psslab
