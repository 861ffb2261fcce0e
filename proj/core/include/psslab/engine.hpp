#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <utility>
#include <vector>

#include "psslab/metrics.hpp"
#include "psslab/model.hpp"
#include "psslab/policy.hpp"
#include "psslab/rng.hpp"

namespace psslab {

struct Job {
  int class_id = 0;
  double arrival_time = 0.0;
};

struct PolicyBundle {
  RoutingKind routing = RoutingKind::kWwta;
  SchedulingSpec scheduling;
};

// Delayed architecture only: which idle eligible server an arrival starts on.
enum class IdleAssign { kLargestRate, kSmallestIndex };

struct RunOptions {
  double horizon = 0.0;
  double warmup = -1.0;  // negative = default 20% of horizon
  uint64_t seed = 0;
  uint64_t stream = 0;  // replication substream index
  // Server weights u for the balance statistics (gap of W_k/u_k, weighted
  // total workload, sample reservoir). Empty skips those statistics.
  std::vector<double> gap_weights;
  int reservoir_capacity = 4096;
  TieBreak tie_break = TieBreak::kSmallestIndex;
  IdleAssign idle_assign = IdleAssign::kLargestRate;
  // Test hook: records every (sum_k u_k W_k, holding time) pair.
  std::vector<std::pair<double, double>>* weighted_sample_sink = nullptr;
};

struct EventRates {
  double total = 0.0;
  std::vector<double> arrival;     // per class
  std::vector<double> completion;  // per activity
};

// Per-event rates of the jump chain in a given state: arrivals at lambda_i,
// completions at mu_j P_j(z).
EventRates event_rates(std::span<const int> z, const PolicyBundle& policies,
                       const SystemConfig& config, const ActivityIndex& index);

// Event-driven simulator for the immediate-routing architecture. The clock
// advances by exponential holding times at the total event rate and one event
// fires per jump; every service distribution is exponential, so resampling
// after each jump leaves the law of the chain unchanged.
class Simulator {
 public:
  Simulator(const SystemConfig& config, const PolicyBundle& policies,
            const RunOptions& options);

  // Advances one jump; returns false once the horizon is reached.
  bool step();
  void run_to_horizon();

  double clock() const { return clock_; }
  const std::vector<int>& buffer_counts() const { return z_; }
  MetricsReport report() const;

 private:
  void integrate(double t0, double t1);
  void refresh_rates();

  const SystemConfig config_;
  const ActivityIndex index_;
  const PolicyBundle policies_;
  const RunOptions options_;
  double warmup_ = 0.0;

  RngStream rng_;
  RngStream reservoir_rng_;

  double clock_ = 0.0;
  std::vector<int> z_;
  std::vector<std::deque<Job>> buffers_;
  std::vector<double> server_workload_;
  std::vector<int> server_jobs_;
  std::vector<double> shares_;
  std::vector<double> rates_;
  std::vector<char> server_dirty_;  // shares stale since the last state change
  double sum_lambda_ = 0.0;
  double sum_completion_ = 0.0;
  bool has_gap_stats_ = false;
  std::vector<double> gap_u_;
  std::vector<double> gap_inv_u_;

  MetricsReport acc_;
};

// Simulator for the delayed-routing architecture: per-class FIFO queues, one
// job in service per server. Arrivals start immediately at an idle eligible
// server (largest service rate, smallest index on ties); on completion the
// freed server picks via MaxWeight or a fixed class priority.
class DelayedSimulator {
 public:
  DelayedSimulator(const SystemConfig& config, const SchedulingSpec& scheduling,
                   const RunOptions& options);

  bool step();
  void run_to_horizon();

  double clock() const { return clock_; }
  const std::vector<int>& waiting_counts() const { return waiting_; }
  // Class in service at the server, or nullopt when idle.
  std::optional<int> in_service_class(int server) const;
  MetricsReport report() const;

 private:
  void integrate(double t0, double t1);
  void start_service(int server, const Job& job);

  const SystemConfig config_;
  const ActivityIndex index_;
  const SchedulingSpec scheduling_;
  const RunOptions options_;
  double warmup_ = 0.0;

  RngStream rng_;

  struct InService {
    bool busy = false;
    Job job;
  };

  double clock_ = 0.0;
  std::vector<std::deque<Job>> class_queues_;
  std::vector<int> waiting_;    // per class, excluding in-service jobs
  std::vector<int> in_system_;  // per class, including in-service jobs
  std::vector<InService> servers_;

  MetricsReport acc_;
};

// Runs the immediate-architecture chain from empty over [0, horizon),
// discarding statistics before the warmup. Deterministic in
// (config, policies, seed, stream).
MetricsReport run(const SystemConfig& config, const PolicyBundle& policies,
                  const RunOptions& options);

// Delayed-architecture counterpart.
MetricsReport run_arch2(const SystemConfig& config, const SchedulingSpec& scheduling,
                        const RunOptions& options);

}  // namespace psslab
