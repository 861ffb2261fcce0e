// Acceptance suite: one pass/fail line per criterion, nonzero exit when any
// criterion fails. Heavy simulations reuse one sweep per policy; every
// tolerance is pinned here in code.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "psslab/allocation.hpp"
#include "psslab/engine.hpp"
#include "psslab/json_io.hpp"
#include "psslab/lab.hpp"
#include "psslab/lp.hpp"
#include "psslab/stats.hpp"
#include "support/oracle.hpp"
#include "support/random_instances.hpp"
#include "support/test_configs.hpp"

using namespace psslab;
namespace fs = std::filesystem;

namespace {

int g_failures = 0;

void report(int id, const std::string& name, bool pass, const std::string& detail) {
  std::cout << (pass ? "[PASS] " : "[FAIL] ") << "criterion " << id << ": " << name;
  if (!detail.empty()) std::cout << " — " << detail;
  std::cout << std::endl;
  if (!pass) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

int worker_count() {
  if (const char* env = std::getenv("PSSLAB_ACCEPT_JOBS")) return std::atoi(env);
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

std::string fmt(double v) {
  std::ostringstream out;
  out.precision(5);
  out << v;
  return out.str();
}

bool close_rel(double value, double target, double rel) {
  return std::fabs(value - target) <= rel * std::fabs(target);
}

// ---------------------------------------------------------------------------

void criterion_1_lp_dual() {
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;
  std::string detail;

  struct Expect {
    SystemConfig config;
    std::vector<double> u, v;
    std::vector<int> nonbasic;
  };
  const std::vector<Expect> cases = {
      {testcfg::n_model(), {2.0 / 3.0, 1.0 / 3.0}, {2.0 / 3.0, 1.0 / 3.0}, {}},
      {testcfg::w_model(), {0.8, 0.2}, {0.1, 0.4, 0.2}, {4, 5}},
      {testcfg::x_model(), {2.0 / 3.0, 1.0 / 3.0}, {2.0 / 3.0, 1.0 / 3.0}, {3}},
  };
  for (const Expect& expect : cases) {
    const SystemMatrices matrices = build_matrices(expect.config);
    const std::vector<double>& lambda = expect.config.arrival_rates;
    const PrimalSolution primal = solve_primal(matrices, lambda);
    if (std::fabs(primal.rho - 1.0) > 1e-9) pass = false;

    const ActivityReport activity = build_activity_report(matrices, lambda);
    std::vector<int> nonbasic;
    for (size_t j = 0; j < activity.size(); ++j) {
      if (activity[j].status == ActivityStatus::kStrictlyNonBasic) {
        nonbasic.push_back(static_cast<int>(j));
      }
    }
    if (nonbasic != expect.nonbasic) pass = false;

    const CommunicationGraph graph = communication_graph(matrices, lambda);
    const DualSolution prop = dual_by_propagation(matrices, lambda, activity, graph);
    const DualSolution lp = dual_by_lp(matrices, lambda);
    for (size_t k = 0; k < expect.u.size(); ++k) {
      if (std::fabs(prop.u[k] - expect.u[k]) > 1e-9) pass = false;
      if (std::fabs(prop.u[k] - lp.u[k]) > 1e-9) pass = false;
    }
    for (size_t i = 0; i < expect.v.size(); ++i) {
      if (std::fabs(prop.v[i] - expect.v[i]) > 1e-9) pass = false;
      if (std::fabs(prop.v[i] - lp.v[i]) > 1e-9) pass = false;
    }
    for (size_t j = 0; j < activity.size(); ++j) {
      if (std::fabs(prop.d[j] - lp.d[j]) > 1e-9) pass = false;
    }
  }
  const double elapsed = seconds_since(start);
  if (elapsed >= 1.0) pass = false;
  report(1, "LP/dual correctness on N, W, X", pass, fmt(elapsed) + " s");
}

void criterion_2_oracle_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  bool pass = true;
  double worst_gap = 0.0;
  RngStream rng(424242);
  for (int instance = 0; instance < 200; ++instance) {
    const SystemConfig config = testgen::random_instance(rng);
    const SystemMatrices matrices = build_matrices(config);
    const StandardLp lp = oracle::primal_standard_form(matrices, config.arrival_rates);
    const oracle::OracleOptimum expected = oracle::minimize(lp);
    if (!expected.feasible) {
      pass = false;
      continue;
    }
    const LpSolution sol = solve_lp(lp);
    if (sol.status != LpStatus::kOptimal) {
      pass = false;
      continue;
    }
    const double primal_gap = std::fabs(sol.objective - expected.objective);
    double dual_obj = 0.0;
    for (size_t r = 0; r < lp.rhs.size(); ++r) dual_obj += sol.dual[r] * lp.rhs[r];
    const double duality_gap = std::fabs(dual_obj - sol.objective);
    worst_gap = std::max({worst_gap, primal_gap, duality_gap});
    if (primal_gap > 1e-8 || duality_gap > 1e-8) pass = false;
  }
  const double elapsed = seconds_since(start);
  if (elapsed >= 10.0) pass = false;
  report(2, "simplex matches vertex enumeration on 200 random instances", pass,
         "worst gap " + fmt(worst_gap) + ", " + fmt(elapsed) + " s");
}

void criterion_3_engine_calibration() {
  const auto start = std::chrono::steady_clock::now();
  const int jobs = worker_count();

  PolicyChoice fifo;
  fifo.label = "wwta_hlpps";
  fifo.scheduling = SchedulingSpec::hlpps();

  const SystemConfig mm1 = scale_arrivals(testcfg::mm1(), 0.5);
  const ReplicationSet mm1_runs = replicate(mm1, fifo, 1e5, 2e4, 7, 0, 10, {}, 0, jobs);
  const double queue = mm1_runs.pooled.queue_avg_total();
  const double sojourn = mm1_runs.pooled.sojourn_mean();

  PolicyChoice mw;
  mw.label = "maxweight";
  mw.delayed = true;
  mw.scheduling = SchedulingSpec::maxweight();
  const SystemConfig mm2 = scale_arrivals(testcfg::mm2(), 0.5);
  const ReplicationSet mm2_runs = replicate(mm2, mw, 1e5, 2e4, 7, 0, 10, {}, 0, jobs);
  const double mm2_queue = mm2_runs.pooled.queue_avg_total();
  // M/M/2 at lambda = 1, mu = 1: L = Lq + a = 1/3 + 1 = 4/3.
  const double mm2_expected = 4.0 / 3.0;

  const double elapsed = seconds_since(start);
  const bool pass = close_rel(queue, 1.0, 0.05) && close_rel(sojourn, 2.0, 0.05) &&
                    close_rel(mm2_queue, mm2_expected, 0.05) && elapsed < 30.0;
  report(3, "M/M/1 and M/M/2 calibration", pass,
         "queue " + fmt(queue) + " (1.0), sojourn " + fmt(sojourn) + " (2.0), M/M/2 " +
             fmt(mm2_queue) + " (" + fmt(mm2_expected) + "), " + fmt(elapsed) + " s");
}

void criterion_4_steady_state_identities(const AnalysisReport& analysis) {
  const double r = 0.05;
  const SystemConfig scaled = scale_arrivals(testcfg::w_model(), r);
  PolicyChoice policy;
  policy.label = "wwta_hlpps";
  policy.scheduling = SchedulingSpec::hlpps();
  const ReplicationSet runs =
      replicate(scaled, policy, 1e6, 2e5, 11, 0, 8, {}, 0, worker_count());

  const BarResiduals residuals = bar_residuals(runs.pooled, scaled, analysis.dual, r);
  bool pass = std::fabs(residuals.idle_residual) < 0.1 * r;
  double worst_flow = 0.0;
  for (size_t j = 0; j < residuals.flow_residuals.size(); ++j) {
    const double lambda_j = scaled.arrival_rates[scaled.activities[j].class_id];
    const double rel = std::fabs(residuals.flow_residuals[j]) / lambda_j;
    worst_flow = std::max(worst_flow, rel);
    if (rel >= 0.02) pass = false;
  }
  report(4, "steady-state identities at r=0.05 (W model)", pass,
         "idle residual " + fmt(residuals.idle_residual) + " (tol " + fmt(0.1 * r) +
             "), worst flow residual " + fmt(100 * worst_flow) + "% of lambda");
}

void criterion_5_theorem1_trend(const VerificationReport& sweep) {
  const double m = sweep.prediction.m;
  const std::vector<SweepPoint>& pts = sweep.points;
  bool pass = pts.size() == 3;

  std::vector<double> errors;
  for (const SweepPoint& p : pts) {
    errors.push_back(std::fabs(p.scaled_weighted_total.mean - m));
  }
  for (size_t p = 1; p < errors.size(); ++p) {
    if (errors[p] > errors[p - 1]) pass = false;
  }
  const SweepPoint& finest = pts.back();
  if (!close_rel(finest.scaled_weighted_total.mean, m, 0.15)) pass = false;
  for (size_t k = 0; k < finest.scaled_per_server.size(); ++k) {
    if (!close_rel(finest.scaled_per_server[k].mean, sweep.prediction.per_server_mean[k], 0.15)) {
      pass = false;
    }
  }
  for (size_t p = 1; p < pts.size(); ++p) {
    if (pts[p].ks_distance > pts[p - 1].ks_distance) pass = false;
  }
  std::ostringstream detail;
  detail << "r*E[sum u W] = {";
  for (const SweepPoint& p : pts) detail << " " << fmt(p.scaled_weighted_total.mean);
  detail << " } -> " << fmt(m) << ", ks = {";
  for (const SweepPoint& p : pts) detail << " " << fmt(p.ks_distance);
  detail << " }";
  report(5, "Theorem-1 workload trend on the W model", pass, detail.str());
}

void criterion_6_scheduling_invariance(const VerificationReport& hlpps,
                                       const VerificationReport& sbp) {
  const MeanCi& a = hlpps.points.back().scaled_weighted_total;
  const MeanCi& b = sbp.points.back().scaled_weighted_total;
  const bool overlap = std::fabs(a.mean - b.mean) <= a.half_width + b.half_width;
  report(6, "scheduling invariance at r=0.02 (HLPPS vs SBP)", overlap,
         "hlpps " + fmt(a.mean) + " +- " + fmt(a.half_width) + ", sbp " + fmt(b.mean) +
             " +- " + fmt(b.half_width));
}

void criterion_7_state_space_collapse(const VerificationReport& sweep) {
  const std::vector<SscRow> rows = ssc_report(sweep);
  bool pass = rows.size() == 3;
  // Gap stays bounded (no growth beyond 25% of its coarsest value) while
  // T_(K) grows as the load rises.
  if (pass) {
    pass = rows.back().gap_mean <= 1.25 * rows.front().gap_mean;
    for (size_t p = 1; p < rows.size(); ++p) {
      if (rows[p].tmax_mean <= rows[p - 1].tmax_mean) pass = false;
    }
    if (!(rows.back().gap_over_tmax < 0.25 * rows.front().gap_over_tmax)) pass = false;
  }
  std::ostringstream detail;
  detail << "gap = {";
  for (const SscRow& row : rows) detail << " " << fmt(row.gap_mean);
  detail << " }, gap/E[T_(K)] = {";
  for (const SscRow& row : rows) detail << " " << fmt(row.gap_over_tmax);
  detail << " }";
  report(7, "state-space collapse gap statistics", pass, detail.str());
}

void criterion_8_nonbasic_negligibility(const VerificationReport& sweep) {
  std::vector<double> rs;
  for (const SweepPoint& p : sweep.points) rs.push_back(p.r);
  bool pass = sweep.nonbasic_activities == std::vector<int>{4, 5};
  std::ostringstream detail;
  detail << "exponents:";
  if (pass) {
    // Effort fractions of (3,1) and (1,2), plus the class-3 -> server-1
    // routing fraction, all O(r): fitted exponents in [0.7, 1.5].
    for (size_t n = 0; n < sweep.nonbasic_activities.size(); ++n) {
      std::vector<double> effort;
      for (const SweepPoint& p : sweep.points) effort.push_back(p.nonbasic_effort_frac[n]);
      const double exponent = loglog_exponent(rs, effort);
      detail << " effort" << n << "=" << fmt(exponent);
      if (exponent < 0.7 || exponent > 1.5) pass = false;
    }
    std::vector<double> route31;
    for (const SweepPoint& p : sweep.points) route31.push_back(p.nonbasic_route_frac[0]);
    const double exponent = loglog_exponent(rs, route31);
    detail << " route(3,1)=" << fmt(exponent);
    if (exponent < 0.7 || exponent > 1.5) pass = false;
  }
  report(8, "non-basic activity fractions scale like r", pass, detail.str());
}

void criterion_9_policy_comparison() {
  const int jobs = worker_count();

  const auto make_policy = [](const std::string& label, bool delayed,
                              const SystemConfig& config) {
    PolicyChoice policy;
    policy.label = label;
    policy.delayed = delayed;
    if (label == "wwta_sbp") {
      policy.scheduling = SchedulingSpec::sbp_smp_first(config);
    } else if (label == "wwta_hlpps") {
      policy.scheduling = SchedulingSpec::hlpps();
    } else {
      policy.scheduling = SchedulingSpec::maxweight();
    }
    return policy;
  };

  ExperimentSpec w_spec;
  w_spec.name = "wmodel_compare";
  w_spec.base_config = testcfg::w_model();
  w_spec.policies = {make_policy("wwta_sbp", false, w_spec.base_config),
                     make_policy("wwta_hlpps", false, w_spec.base_config),
                     make_policy("maxweight", true, w_spec.base_config)};
  w_spec.r_values = {0.04, 0.03, 0.02, 0.01, 0.005};
  w_spec.scale_horizon = false;
  w_spec.fixed_horizon = 50000.0;
  w_spec.warmup_fraction = 0.0;  // the figure protocol starts cold
  w_spec.replications = 30;
  w_spec.base_seed = 0;
  w_spec.jobs = jobs;
  const std::vector<CompareRow> w_rows = compare_policies(w_spec);

  const auto row_of = [](const std::vector<CompareRow>& rows, const std::string& label,
                         double load) -> const CompareRow& {
    for (const CompareRow& row : rows) {
      if (row.policy == label && std::fabs(row.load - load) < 1e-12) return row;
    }
    throw std::logic_error("missing comparison row");
  };

  int w_good = 0;
  std::ostringstream detail;
  for (double load : {0.96, 0.97, 0.98, 0.99, 0.995}) {
    const CompareRow& sbp = row_of(w_rows, "wwta_sbp", load);
    const CompareRow& hlpps = row_of(w_rows, "wwta_hlpps", load);
    const CompareRow& mw = row_of(w_rows, "maxweight", load);
    const bool ordered = sbp.completion_time.mean <= hlpps.completion_time.mean &&
                         hlpps.completion_time.mean < mw.completion_time.mean;
    const double wwta_upper =
        std::max(sbp.completion_time.mean + sbp.completion_time.half_width,
                 hlpps.completion_time.mean + hlpps.completion_time.half_width);
    const bool separated = wwta_upper < mw.completion_time.mean - mw.completion_time.half_width;
    if (ordered && separated) ++w_good;
  }
  detail << "W ordered+separated at " << w_good << "/5 loads";

  ExperimentSpec n_spec = w_spec;
  n_spec.name = "nmodel_compare";
  n_spec.base_config = testcfg::n_model();
  n_spec.policies = {make_policy("wwta_sbp", false, n_spec.base_config),
                     make_policy("maxweight", true, n_spec.base_config)};
  const std::vector<CompareRow> n_rows = compare_policies(n_spec);
  int n_good = 0;
  for (double load : {0.96, 0.97, 0.98, 0.99, 0.995}) {
    const CompareRow& wwta = row_of(n_rows, "wwta_sbp", load);
    const CompareRow& mw = row_of(n_rows, "maxweight", load);
    const bool separated = wwta.completion_time.mean + wwta.completion_time.half_width <
                           mw.completion_time.mean - mw.completion_time.half_width;
    if (wwta.completion_time.mean < mw.completion_time.mean && separated) ++n_good;
  }
  detail << ", N separated at " << n_good << "/5 loads";

  report(9, "completion-time ordering vs MaxWeight (figures 6 and 3 protocol)",
         w_good >= 4 && n_good >= 4, detail.str());
}

void criterion_10_x_model_stability() {
  ExperimentSpec spec;
  spec.base_config = testcfg::x_model();
  spec.base_seed = 0;
  spec.jobs = worker_count();

  const SchedulingSpec priority = SchedulingSpec::sbp({{1, 0}, {1, 0}});

  PolicyChoice jsq;
  jsq.label = "jsq_priority";
  jsq.routing = RoutingKind::kJsq;
  jsq.scheduling = priority;

  PolicyChoice wwta;
  wwta.label = "wwta_priority";
  wwta.routing = RoutingKind::kWwta;
  wwta.scheduling = priority;

  PolicyChoice mw;
  mw.label = "maxweight";
  mw.delayed = true;
  mw.scheduling = SchedulingSpec::maxweight();

  const double r = 0.05;  // 95% load
  const StabilityVerdict jsq_verdict = stability_probe(spec, jsq, r);
  const StabilityVerdict wwta_verdict = stability_probe(spec, wwta, r);
  const StabilityVerdict mw_verdict = stability_probe(spec, mw, r);

  const bool pass = jsq_verdict.divergent && !wwta_verdict.divergent && !mw_verdict.divergent;
  report(10, "X-model stability probe at 95% load", pass,
         "jsq slope " + fmt(jsq_verdict.evidence.slope) + " (r2 " +
             fmt(jsq_verdict.evidence.r_squared) + "), wwta slope " +
             fmt(wwta_verdict.evidence.slope) + ", maxweight slope " +
             fmt(mw_verdict.evidence.slope));
}

void criterion_11_cli_determinism() {
  const std::string cli = PSSLAB_CLI_PATH;
  const std::string source_dir = PSSLAB_SOURCE_DIR;
  const fs::path scratch = fs::temp_directory_path() / "psslab_acceptance_cli";
  fs::remove_all(scratch);
  fs::create_directories(scratch);

  const std::string experiment = (scratch / "exp.json").string();
  {
    std::ofstream out(experiment);
    out << R"({
      "name": "determinism",
      "policies": [{"routing":"wwta","scheduling":{"type":"hlpps"}}],
      "r_values": [0.1],
      "horizon": 5000,
      "replications": 3
    })";
  }

  bool pass = true;
  std::string detail;
  const auto run_cli = [&](const std::string& args) {
    const std::string cmd = cli + " " + args + " >/dev/null 2>&1";
    return WEXITSTATUS(std::system(cmd.c_str()));
  };

  for (const std::string command : {"verify", "compare", "probe"}) {
    const std::string out_a = (scratch / (command + "_a")).string();
    const std::string out_b = (scratch / (command + "_b")).string();
    const std::string base = command + " --topology " + source_dir +
                             "/topologies/wmodel.json --experiment " + experiment +
                             " --seed 123 --jobs 2 --out ";
    if (run_cli(base + out_a) != 0 || run_cli(base + out_b) != 0) {
      pass = false;
      detail += command + " failed; ";
      continue;
    }
    for (const auto& entry : fs::directory_iterator(out_a)) {
      const std::string name = entry.path().filename().string();
      if (read_file(entry.path().string()) != read_file(out_b + "/" + name)) {
        pass = false;
        detail += command + "/" + name + " differs; ";
      }
    }
  }
  fs::remove_all(scratch);
  report(11, "CLI artifacts are byte-identical under a fixed seed", pass, detail);
}

}  // namespace

int main() {
  std::cout << "psslab acceptance suite (" << worker_count() << " workers)\n";
  const auto start = std::chrono::steady_clock::now();

  criterion_1_lp_dual();
  criterion_2_oracle_equivalence();
  criterion_3_engine_calibration();

  const AnalysisReport w_analysis = analyze(testcfg::w_model());
  criterion_4_steady_state_identities(w_analysis);

  ExperimentSpec sweep_spec;
  sweep_spec.name = "wmodel_verify";
  sweep_spec.base_config = testcfg::w_model();
  sweep_spec.r_values = {0.1, 0.05, 0.02};
  sweep_spec.horizon_scale = 5e4;
  sweep_spec.warmup_fraction = 0.2;
  sweep_spec.replications = 30;
  sweep_spec.base_seed = 0;
  sweep_spec.jobs = worker_count();

  PolicyChoice hlpps;
  hlpps.label = "wwta_hlpps";
  hlpps.scheduling = SchedulingSpec::hlpps();
  std::cout << "running W-model sweep (WWTA+HLPPS, 30 reps x r in {0.1,0.05,0.02})...\n";
  const VerificationReport hlpps_sweep = sweep_heavy_traffic(sweep_spec, hlpps, w_analysis);

  PolicyChoice sbp;
  sbp.label = "wwta_sbp";
  sbp.scheduling = SchedulingSpec::sbp_smp_first(testcfg::w_model());
  ExperimentSpec sbp_spec = sweep_spec;
  sbp_spec.r_values = {0.02};
  std::cout << "running W-model sweep (WWTA+SBP at r=0.02)...\n";
  const VerificationReport sbp_sweep = sweep_heavy_traffic(sbp_spec, sbp, w_analysis);

  criterion_5_theorem1_trend(hlpps_sweep);
  criterion_6_scheduling_invariance(hlpps_sweep, sbp_sweep);
  criterion_7_state_space_collapse(hlpps_sweep);
  criterion_8_nonbasic_negligibility(hlpps_sweep);
  criterion_9_policy_comparison();
  criterion_10_x_model_stability();
  criterion_11_cli_determinism();

  std::cout << (g_failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES: ")
            << (g_failures == 0 ? std::string() : std::to_string(g_failures))
            << " (total " << fmt(seconds_since(start)) << " s)\n";
  return g_failures == 0 ? 0 : 1;
}
