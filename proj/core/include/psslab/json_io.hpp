#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "psslab/allocation.hpp"
#include "psslab/lab.hpp"
#include "psslab/metrics.hpp"
#include "psslab/model.hpp"

namespace psslab {

struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const std::string& path);

// Writes via a temp file in the same directory plus rename, so readers never
// observe a partial artifact.
void atomic_write(const std::string& path, const std::string& content);

uint64_t fnv1a64(std::string_view bytes, uint64_t hash = 0xcbf29ce484222325ULL);
std::string hash_hex(uint64_t hash);

// Topology file: num_classes, num_servers, arrival_rates, activities
// [{class, server, rate}], architecture "immediate"|"delayed". Ids are
// 1-based in files. Throws ParseError with line/column on bad input.
SystemConfig parse_topology(const std::string& text);

// {"routing": "wwta"|"jsq", "scheduling": {"type": ...}} plus optional
// label / architecture / tie_break fields.
PolicyChoice parse_policy_json(const std::string& text, const SystemConfig& config);

// Experiment file; missing fields fall back to the defaults in
// ExperimentSpec (r sweep {0.1, 0.05, 0.02}, horizon 5e4/r, 30 replications,
// 20% warmup). "loads" entries are converted to r = 1 - load.
ExperimentSpec parse_experiment(const std::string& text, SystemConfig base_config);

std::string analysis_to_json(const AnalysisReport& report, const SystemConfig& config);
std::string verification_to_json(const VerificationReport& report);
std::string verdict_to_json(const StabilityVerdict& verdict, const std::string& policy,
                            double load);

// One row per (policy, r/load, metric, mean, ci_half_width).
std::string sweep_point_to_csv(const VerificationReport& report, size_t point_index);
std::string compare_to_csv(const std::vector<CompareRow>& rows);
std::string metrics_to_csv(const MetricsReport& metrics, const SystemConfig& config,
                           const std::string& policy_label, double r);
std::string reservoir_to_csv(const WeightedReservoir& reservoir);

struct ManifestEntry {
  std::string path;
  size_t bytes = 0;
};

std::string manifest_to_json(const std::string& command, uint64_t seed,
                             const std::string& config_hash,
                             const std::vector<ManifestEntry>& artifacts,
                             const std::string& summary_json = "");

}  // namespace psslab
