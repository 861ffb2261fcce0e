#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "psslab/allocation.hpp"
#include "psslab/engine.hpp"
#include "psslab/metrics.hpp"
#include "psslab/model.hpp"
#include "psslab/stats.hpp"

namespace psslab {

// One policy under test. Delayed policies run on the delayed-routing
// dynamics regardless of the topology file's architecture tag.
struct PolicyChoice {
  std::string label;
  bool delayed = false;
  RoutingKind routing = RoutingKind::kWwta;
  SchedulingSpec scheduling;
  TieBreak tie_break = TieBreak::kSmallestIndex;
  IdleAssign idle_assign = IdleAssign::kLargestRate;  // delayed architecture only
};

struct ExperimentSpec {
  std::string name = "experiment";
  SystemConfig base_config;  // rates at the critical load (rho* = 1)
  std::vector<PolicyChoice> policies;
  std::vector<double> r_values = {0.1, 0.05, 0.02};
  bool scale_horizon = true;     // horizon = horizon_scale / r
  double horizon_scale = 5e4;    // keeps relaxation-time coverage roughly flat
  double fixed_horizon = 5e4;    // used when scale_horizon is false
  double warmup_fraction = 0.2;
  int replications = 30;
  uint64_t base_seed = 0;
  int reservoir_capacity = 16384;
  int jobs = 0;  // replication workers; 0 = hardware concurrency

  // Stability-probe knobs.
  double probe_base_horizon = 12500.0;
  int probe_doublings = 3;
  int probe_replications = 3;

  double horizon_for(double r) const {
    return scale_horizon ? horizon_scale / r : fixed_horizon;
  }
};

struct ReplicationSet {
  std::vector<MetricsReport> reps;
  MetricsReport pooled;
};

// Runs n replications on disjoint substreams (optionally across threads) and
// reduces them in replication order. Deterministic in (config, policy, seed).
ReplicationSet replicate(const SystemConfig& config, const PolicyChoice& policy,
                         double horizon, double warmup, uint64_t seed,
                         uint64_t stream_base, int n,
                         const std::vector<double>& gap_weights,
                         int reservoir_capacity, int jobs);

// Mean and 95% Student-t half-width of a per-replication scalar.
template <typename Extract>
MeanCi ci_over_reps(const std::vector<MetricsReport>& reps, Extract extract) {
  std::vector<double> values;
  values.reserve(reps.size());
  for (const MetricsReport& rep : reps) values.push_back(extract(rep));
  return mean_ci(values);
}

struct BarResiduals {
  double idle_residual = 0.0;           // sum_k u_k idleFrac_k + sum_j d_j effortFrac_j - r
  std::vector<double> flow_residuals;   // lambda_i^(r) routeFrac_j - mu_j effortFrac_j
};

BarResiduals bar_residuals(const MetricsReport& metrics, const SystemConfig& scaled_config,
                           const DualSolution& dual, double r);

struct SweepPoint {
  double r = 0.0;
  double horizon = 0.0;
  int replications = 0;
  MeanCi scaled_weighted_total;           // r * E[sum_k u_k W_k]
  std::vector<MeanCi> scaled_per_server;  // r * E[W_k]
  double ks_distance = 0.0;               // pooled, against Exp(x_mean)
  MeanCi idle_residual;
  std::vector<double> flow_residuals;     // pooled
  double gap_mean = 0.0;
  double gap_sq_mean = 0.0;
  double tmax_mean = 0.0;
  std::vector<double> nonbasic_effort_frac;  // aligned with nonbasic_activities
  std::vector<double> nonbasic_route_frac;
};

struct VerificationReport {
  std::string experiment;
  std::string policy;
  std::vector<double> u, v, d;
  LimitPrediction prediction;
  std::vector<int> nonbasic_activities;
  std::vector<SweepPoint> points;  // in the sweep's r order
  std::vector<std::string> warnings;
};

// Replicated sweep over the spec's r values for one policy, filling the
// empirical counterparts of every limit prediction and identity. Requires a
// CRP analysis of the base config.
VerificationReport sweep_heavy_traffic(const ExperimentSpec& spec,
                                       const PolicyChoice& policy,
                                       const AnalysisReport& analysis);

struct SscRow {
  double r = 0.0;
  double gap_mean = 0.0;
  double gap_sq_mean = 0.0;
  double tmax_mean = 0.0;
  double gap_over_tmax = 0.0;
};

std::vector<SscRow> ssc_report(const VerificationReport& report);

struct CompareRow {
  std::string policy;
  double load = 0.0;  // 1 - r
  MeanCi completion_time;
};

// Mean completion time (arrival to departure) per policy and load.
std::vector<CompareRow> compare_policies(const ExperimentSpec& spec);

struct StabilityEvidence {
  std::vector<double> horizons;
  std::vector<double> end_queue_means;    // jobs in system at each horizon
  std::vector<double> time_avg_queues;
  double slope = 0.0;  // fitted end-queue growth, jobs per time unit
  double r_squared = 0.0;
  double timeavg_rel_change = 0.0;  // across the last doubling
};

struct StabilityVerdict {
  bool divergent = false;
  StabilityEvidence evidence;
};

// Doubling-horizon probe: divergent when the end-of-run queue grows
// linearly in the horizon (slope > 0.01 jobs/time with R^2 > 0.9).
StabilityVerdict stability_probe(const ExperimentSpec& spec, const PolicyChoice& policy,
                                 double r);

}  // namespace psslab
