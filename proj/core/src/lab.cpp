#include "psslab/lab.hpp"

#include <atomic>
#include <cmath>
#include <thread>

namespace psslab {

namespace {

constexpr double kDivergenceSlope = 0.01;  // jobs per time unit
constexpr double kDivergenceR2 = 0.9;

MetricsReport run_policy(const SystemConfig& config, const PolicyChoice& policy,
                         const RunOptions& options) {
  if (policy.delayed) {
    SystemConfig delayed = config;
    delayed.architecture = Architecture::kDelayed;
    return run_arch2(delayed, policy.scheduling, options);
  }
  return run(config, PolicyBundle{policy.routing, policy.scheduling}, options);
}

}  // namespace

ReplicationSet replicate(const SystemConfig& config, const PolicyChoice& policy,
                         double horizon, double warmup, uint64_t seed,
                         uint64_t stream_base, int n,
                         const std::vector<double>& gap_weights,
                         int reservoir_capacity, int jobs) {
  ReplicationSet out;
  out.reps.resize(n);

  auto run_one = [&](int rep) {
    RunOptions options;
    options.horizon = horizon;
    options.warmup = warmup;
    options.seed = seed;
    options.stream = stream_base + static_cast<uint64_t>(rep);
    options.gap_weights = gap_weights;
    options.reservoir_capacity = reservoir_capacity;
    options.tie_break = policy.tie_break;
    options.idle_assign = policy.idle_assign;
    out.reps[rep] = run_policy(config, policy, options);
  };

  int workers = jobs > 0 ? jobs : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::min(std::max(workers, 1), n);
  if (workers <= 1) {
    for (int rep = 0; rep < n; ++rep) run_one(rep);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (int rep = next.fetch_add(1); rep < n; rep = next.fetch_add(1)) run_one(rep);
      });
    }
    for (std::thread& t : pool) t.join();
  }

  // Reduce in replication order so the pooled report is seed-deterministic.
  out.pooled = out.reps[0];
  for (int rep = 1; rep < n; ++rep) out.pooled.merge_from(out.reps[rep]);
  return out;
}

BarResiduals bar_residuals(const MetricsReport& metrics, const SystemConfig& scaled_config,
                           const DualSolution& dual, double r) {
  BarResiduals out;
  const int num_servers = scaled_config.num_servers;
  for (int k = 0; k < num_servers; ++k) {
    out.idle_residual += dual.u[k] * metrics.idle_frac(k);
  }
  for (int j = 0; j < scaled_config.num_activities(); ++j) {
    out.idle_residual += dual.d[j] * metrics.effort_frac(j);
  }
  out.idle_residual -= r;

  out.flow_residuals.resize(scaled_config.num_activities());
  for (int j = 0; j < scaled_config.num_activities(); ++j) {
    const Activity& act = scaled_config.activities[j];
    const double inflow = scaled_config.arrival_rates[act.class_id] *
                          metrics.route_frac(j, act.class_id);
    const double outflow = act.rate * metrics.effort_frac(j);
    out.flow_residuals[j] = inflow - outflow;
  }
  return out;
}

VerificationReport sweep_heavy_traffic(const ExperimentSpec& spec,
                                       const PolicyChoice& policy,
                                       const AnalysisReport& analysis) {
  if (!analysis.crp) {
    throw std::invalid_argument("sweep_heavy_traffic requires a CRP config");
  }
  VerificationReport report;
  report.experiment = spec.name;
  report.policy = policy.label;
  report.u = analysis.dual.u;
  report.v = analysis.dual.v;
  report.d = analysis.dual.d;
  report.prediction = analysis.prediction;
  for (size_t j = 0; j < analysis.activities.size(); ++j) {
    if (analysis.activities[j].status == ActivityStatus::kStrictlyNonBasic) {
      report.nonbasic_activities.push_back(static_cast<int>(j));
    }
  }

  double u_sq = 0.0;
  for (double u : analysis.dual.u) u_sq += u * u;

  uint64_t stream_base = 0;
  for (double r : spec.r_values) {
    const SystemConfig scaled = scale_arrivals(spec.base_config, r);
    const double horizon = spec.horizon_for(r);
    const double warmup = spec.warmup_fraction * horizon;
    const ReplicationSet runs =
        replicate(scaled, policy, horizon, warmup, spec.base_seed, stream_base,
                  spec.replications, analysis.dual.u, spec.reservoir_capacity, spec.jobs);
    stream_base += static_cast<uint64_t>(spec.replications);

    SweepPoint point;
    point.r = r;
    point.horizon = horizon;
    point.replications = spec.replications;
    point.scaled_weighted_total =
        ci_over_reps(runs.reps, [&](const MetricsReport& m) { return r * m.weighted_total_avg(); });
    for (int k = 0; k < spec.base_config.num_servers; ++k) {
      point.scaled_per_server.push_back(
          ci_over_reps(runs.reps, [&](const MetricsReport& m) { return r * m.workload_avg(k); }));
    }

    std::vector<double> scaled_samples = runs.pooled.reservoir.sorted_values();
    for (double& v : scaled_samples) v = r * v / u_sq;
    point.ks_distance = ks_distance_exponential(std::move(scaled_samples),
                                                analysis.prediction.x_mean);

    point.idle_residual = ci_over_reps(runs.reps, [&](const MetricsReport& m) {
      return bar_residuals(m, scaled, analysis.dual, r).idle_residual;
    });
    point.flow_residuals = bar_residuals(runs.pooled, scaled, analysis.dual, r).flow_residuals;

    point.gap_mean = runs.pooled.gap_mean();
    point.gap_sq_mean = runs.pooled.gap_sq_mean();
    point.tmax_mean = runs.pooled.tmax_mean();

    for (int j : report.nonbasic_activities) {
      point.nonbasic_effort_frac.push_back(runs.pooled.effort_frac(j));
      point.nonbasic_route_frac.push_back(
          runs.pooled.route_frac(j, spec.base_config.activities[j].class_id));
    }
    report.points.push_back(std::move(point));
  }

  // Convergence is asserted only as a trend; flag non-monotone behaviour.
  for (size_t p = 1; p < report.points.size(); ++p) {
    const double prev =
        std::fabs(report.points[p - 1].scaled_weighted_total.mean - analysis.prediction.m);
    const double cur =
        std::fabs(report.points[p].scaled_weighted_total.mean - analysis.prediction.m);
    if (cur > prev) {
      report.warnings.push_back("scaled weighted workload error increased from r=" +
                                std::to_string(report.points[p - 1].r) + " to r=" +
                                std::to_string(report.points[p].r));
    }
  }
  return report;
}

std::vector<SscRow> ssc_report(const VerificationReport& report) {
  std::vector<SscRow> rows;
  for (const SweepPoint& point : report.points) {
    SscRow row;
    row.r = point.r;
    row.gap_mean = point.gap_mean;
    row.gap_sq_mean = point.gap_sq_mean;
    row.tmax_mean = point.tmax_mean;
    row.gap_over_tmax = point.tmax_mean > 0.0 ? point.gap_mean / point.tmax_mean : 0.0;
    rows.push_back(row);
  }
  return rows;
}

std::vector<CompareRow> compare_policies(const ExperimentSpec& spec) {
  std::vector<CompareRow> rows;
  uint64_t stream_base = 0;
  for (const PolicyChoice& policy : spec.policies) {
    for (double r : spec.r_values) {
      const SystemConfig scaled = scale_arrivals(spec.base_config, r);
      const double horizon = spec.horizon_for(r);
      const double warmup = spec.warmup_fraction * horizon;
      const ReplicationSet runs =
          replicate(scaled, policy, horizon, warmup, spec.base_seed, stream_base,
                    spec.replications, {}, 0, spec.jobs);
      stream_base += static_cast<uint64_t>(spec.replications);

      CompareRow row;
      row.policy = policy.label;
      row.load = 1.0 - r;
      row.completion_time =
          ci_over_reps(runs.reps, [](const MetricsReport& m) { return m.sojourn_mean(); });
      rows.push_back(row);
    }
  }
  return rows;
}

StabilityVerdict stability_probe(const ExperimentSpec& spec, const PolicyChoice& policy,
                                 double r) {
  const SystemConfig scaled = scale_arrivals(spec.base_config, r);
  StabilityVerdict verdict;
  uint64_t stream_base = 0;
  double horizon = spec.probe_base_horizon;
  for (int d = 0; d <= spec.probe_doublings; ++d, horizon *= 2.0) {
    const ReplicationSet runs =
        replicate(scaled, policy, horizon, /*warmup=*/0.0, spec.base_seed, stream_base,
                  spec.probe_replications, {}, 0, spec.jobs);
    stream_base += static_cast<uint64_t>(spec.probe_replications);
    verdict.evidence.horizons.push_back(horizon);
    verdict.evidence.end_queue_means.push_back(
        static_cast<double>(runs.pooled.final_total_jobs) / spec.probe_replications);
    verdict.evidence.time_avg_queues.push_back(runs.pooled.queue_avg_total());
  }

  const LinearFit fit =
      linear_fit(verdict.evidence.horizons, verdict.evidence.end_queue_means);
  verdict.evidence.slope = fit.slope;
  verdict.evidence.r_squared = fit.r_squared;
  const size_t last = verdict.evidence.time_avg_queues.size() - 1;
  const double prev = verdict.evidence.time_avg_queues[last - 1];
  verdict.evidence.timeavg_rel_change =
      prev > 0.0 ? std::fabs(verdict.evidence.time_avg_queues[last] - prev) / prev : 0.0;

  verdict.divergent = fit.slope > kDivergenceSlope && fit.r_squared > kDivergenceR2;
  return verdict;
}

}  // namespace psslab
