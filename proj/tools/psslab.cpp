// Command-line front end: analyze a topology via the static allocation LP,
// simulate it as a CTMC, and run the verification/comparison/stability
// experiments. All randomness flows from the single --seed value.

#include <cstdint>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "psslab/allocation.hpp"
#include "psslab/json_io.hpp"
#include "psslab/lab.hpp"

namespace {

using namespace psslab;

constexpr int kExitOk = 0;
constexpr int kExitError = 1;            // parse/IO/engine errors
constexpr int kExitNoHeavyTraffic = 2;   // analyze: relaxed heavy traffic fails
constexpr int kExitNoCrp = 3;            // analyze: CRP fails

struct CliOptions {
  std::string topology_path;
  std::string experiment_path;
  std::string out_dir = "out";
  uint64_t seed = 0;
  bool seed_given = false;
  int jobs = 0;
  std::string format = "both";  // csv|json|both
};

std::string trim_r(double r) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", r);
  return buf;
}

class ArtifactWriter {
 public:
  ArtifactWriter(std::string out_dir, std::string command, uint64_t seed,
                 std::string config_hash)
      : out_dir_(std::move(out_dir)),
        command_(std::move(command)),
        seed_(seed),
        config_hash_(std::move(config_hash)) {}

  void write(const std::string& name, const std::string& content) {
    const std::string path = out_dir_ + "/" + name;
    atomic_write(path, content);
    entries_.push_back(ManifestEntry{name, content.size()});
  }

  void finish(const std::string& summary_json = "") {
    atomic_write(out_dir_ + "/manifest.json",
                 manifest_to_json(command_, seed_, config_hash_, entries_, summary_json));
  }

 private:
  std::string out_dir_;
  std::string command_;
  uint64_t seed_;
  std::string config_hash_;
  std::vector<ManifestEntry> entries_;
};

uint64_t resolve_seed(const CliOptions& cli) {
  if (cli.seed_given) return cli.seed;
  if (const char* env = std::getenv("PSSLAB_SEED")) {
    return std::strtoull(env, nullptr, 10);
  }
  return 0;  // documented default
}

ExperimentSpec load_experiment(const CliOptions& cli, const SystemConfig& config,
                               std::string* experiment_text) {
  ExperimentSpec spec;
  if (!cli.experiment_path.empty()) {
    *experiment_text = read_file(cli.experiment_path);
    spec = parse_experiment(*experiment_text, config);
    spec.name = spec.name.empty()
                    ? std::filesystem::path(cli.experiment_path).stem().string()
                    : spec.name;
  } else {
    spec.base_config = config;
    PolicyChoice fallback;
    fallback.label = "wwta_hlpps";
    fallback.scheduling = SchedulingSpec::hlpps();
    spec.policies.push_back(std::move(fallback));
    spec.name = "default";
  }
  spec.base_seed = resolve_seed(cli);
  spec.jobs = cli.jobs;
  return spec;
}

int cmd_analyze(const CliOptions& cli) {
  const std::string text = read_file(cli.topology_path);
  const SystemConfig config = parse_topology(text);
  const AnalysisReport report = analyze(config);
  const std::string rendered = analysis_to_json(report, config);
  std::cout << rendered;
  if (!cli.out_dir.empty()) {
    ArtifactWriter writer(cli.out_dir, "analyze", resolve_seed(cli),
                          hash_hex(fnv1a64(text)));
    writer.write("analysis.json", rendered);
    writer.finish();
  }
  if (!report.violations.empty()) return kExitError;
  if (!report.heavy_traffic.holds) return kExitNoHeavyTraffic;
  if (!report.crp) return kExitNoCrp;
  return kExitOk;
}

int cmd_simulate(const CliOptions& cli) {
  const std::string topo_text = read_file(cli.topology_path);
  const SystemConfig config = parse_topology(topo_text);
  std::string experiment_text;
  const ExperimentSpec spec = load_experiment(cli, config, &experiment_text);

  const PolicyChoice& policy = spec.policies.front();
  const double r = spec.r_values.front();
  const SystemConfig scaled = scale_arrivals(spec.base_config, r);
  const double horizon = spec.horizon_for(r);

  // Workload-balance statistics need the dual weights; skip them when the
  // topology is not CRP (e.g. delayed-architecture baselines).
  const AnalysisReport analysis = analyze(spec.base_config);
  std::vector<double> gap_weights;
  if (analysis.crp && !policy.delayed) gap_weights = analysis.dual.u;

  const ReplicationSet runs = replicate(
      scaled, policy, horizon, spec.warmup_fraction * horizon, spec.base_seed,
      /*stream_base=*/0, spec.replications, gap_weights, spec.reservoir_capacity, spec.jobs);

  const uint64_t hash = fnv1a64(experiment_text, fnv1a64(topo_text));
  ArtifactWriter writer(cli.out_dir, "simulate", spec.base_seed, hash_hex(hash));
  if (cli.format != "csv") writer.write("metrics.json", runs.pooled.to_json());
  if (cli.format != "json") {
    writer.write("metrics.csv", metrics_to_csv(runs.pooled, scaled, policy.label, r));
    if (!gap_weights.empty()) {
      writer.write("weighted_samples.csv", reservoir_to_csv(runs.pooled.reservoir));
    }
  }
  writer.finish();
  return kExitOk;
}

int run_sweep(const CliOptions& cli, const char* command) {
  const std::string topo_text = read_file(cli.topology_path);
  const SystemConfig config = parse_topology(topo_text);
  std::string experiment_text;
  const ExperimentSpec spec = load_experiment(cli, config, &experiment_text);

  const AnalysisReport analysis = analyze(spec.base_config);
  if (!analysis.heavy_traffic.holds) {
    std::cerr << "topology violates the relaxed heavy-traffic condition\n";
    return kExitNoHeavyTraffic;
  }
  if (!analysis.crp) {
    std::cerr << "topology violates the relaxed CRP condition\n";
    return kExitNoCrp;
  }

  const uint64_t hash = fnv1a64(experiment_text, fnv1a64(topo_text));
  ArtifactWriter writer(cli.out_dir, command, spec.base_seed, hash_hex(hash));
  for (const PolicyChoice& policy : spec.policies) {
    if (policy.delayed) {
      std::cerr << "skipping delayed policy " << policy.label
                << ": workload sweeps apply to immediate routing\n";
      continue;
    }
    const VerificationReport report = sweep_heavy_traffic(spec, policy, analysis);
    if (cli.format != "csv") {
      writer.write("verification_" + policy.label + ".json", verification_to_json(report));
    }
    if (cli.format != "json") {
      for (size_t p = 0; p < report.points.size(); ++p) {
        writer.write(spec.name + "_" + policy.label + "_" + trim_r(report.points[p].r) + ".csv",
                     sweep_point_to_csv(report, p));
      }
    }
    for (const SweepPoint& point : report.points) {
      std::cout << policy.label << " r=" << point.r
                << " r*E[sum u_k W_k]=" << point.scaled_weighted_total.mean
                << " (predicted " << report.prediction.m << ")"
                << " idle_residual=" << point.idle_residual.mean
                << " ks=" << point.ks_distance << "\n";
    }
  }
  writer.finish();
  return kExitOk;
}

int cmd_compare(const CliOptions& cli) {
  const std::string topo_text = read_file(cli.topology_path);
  const SystemConfig config = parse_topology(topo_text);
  std::string experiment_text;
  const ExperimentSpec spec = load_experiment(cli, config, &experiment_text);

  const std::vector<CompareRow> rows = compare_policies(spec);
  const uint64_t hash = fnv1a64(experiment_text, fnv1a64(topo_text));
  ArtifactWriter writer(cli.out_dir, "compare", spec.base_seed, hash_hex(hash));
  writer.write(spec.name + "_compare.csv", compare_to_csv(rows));
  writer.finish();
  for (const CompareRow& row : rows) {
    std::cout << row.policy << " load=" << row.load
              << " completion_time=" << row.completion_time.mean << " +- "
              << row.completion_time.half_width << "\n";
  }
  return kExitOk;
}

int cmd_probe(const CliOptions& cli) {
  const std::string topo_text = read_file(cli.topology_path);
  const SystemConfig config = parse_topology(topo_text);
  std::string experiment_text;
  const ExperimentSpec spec = load_experiment(cli, config, &experiment_text);

  const PolicyChoice& policy = spec.policies.front();
  const double r = spec.r_values.front();
  const StabilityVerdict verdict = stability_probe(spec, policy, r);
  const std::string rendered = verdict_to_json(verdict, policy.label, 1.0 - r);

  const uint64_t hash = fnv1a64(experiment_text, fnv1a64(topo_text));
  ArtifactWriter writer(cli.out_dir, "probe", spec.base_seed, hash_hex(hash));
  writer.write("verdict_" + policy.label + ".json", rendered);
  writer.finish(rendered);
  std::cout << policy.label << " load=" << 1.0 - r << " verdict="
            << (verdict.divergent ? "divergent" : "stable")
            << " slope=" << verdict.evidence.slope
            << " r2=" << verdict.evidence.r_squared << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parallel-server-system laboratory"};
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  CliOptions cli;
  app.add_option("--seed", cli.seed, "base RNG seed (default 0; PSSLAB_SEED overrides)")
      ->each([&](const std::string&) { cli.seed_given = true; });
  app.add_option("--out", cli.out_dir, "output directory");
  app.add_option("--jobs", cli.jobs, "replication workers (0 = all cores)");
  app.add_option("--format", cli.format, "artifact formats: csv, json or both")
      ->check(CLI::IsMember({"csv", "json", "both"}));

  auto add_common = [&](CLI::App* sub, bool experiment) {
    sub->add_option("--topology", cli.topology_path, "topology JSON file")->required();
    if (experiment) {
      sub->add_option("--experiment", cli.experiment_path, "experiment JSON file");
    }
    return sub;
  };

  CLI::App* analyze_cmd =
      add_common(app.add_subcommand("analyze", "solve the static allocation LP and its dual"),
                 false);
  CLI::App* simulate_cmd = add_common(
      app.add_subcommand("simulate", "replicated simulation at one load"), true);
  CLI::App* sweep_cmd = add_common(
      app.add_subcommand("sweep", "heavy-traffic sweep over r values"), true);
  CLI::App* compare_cmd = add_common(
      app.add_subcommand("compare", "completion-time comparison across policies"), true);
  CLI::App* verify_cmd = add_common(
      app.add_subcommand("verify", "sweep plus limit and identity verification"), true);
  CLI::App* probe_cmd =
      add_common(app.add_subcommand("probe", "doubling-horizon stability probe"), true);

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(analyze_cmd)) return cmd_analyze(cli);
    if (app.got_subcommand(simulate_cmd)) return cmd_simulate(cli);
    if (app.got_subcommand(sweep_cmd)) return run_sweep(cli, "sweep");
    if (app.got_subcommand(verify_cmd)) return run_sweep(cli, "verify");
    if (app.got_subcommand(compare_cmd)) return cmd_compare(cli);
    if (app.got_subcommand(probe_cmd)) return cmd_probe(cli);
  } catch (const ParseError& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitError;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
