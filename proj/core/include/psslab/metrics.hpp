#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "psslab/rng.hpp"

namespace psslab {

// Fixed-capacity weighted reservoir: each observation survives with
// probability proportional to its weight. Keys are log(u)/w draws, kept so
// two reservoirs merge associatively into the reservoir of the concatenated
// stream; once full, an exponential-jump skip counter avoids touching the
// RNG for items that cannot enter.
class WeightedReservoir {
 public:
  struct Item {
    double value = 0.0;
    double weight = 0.0;
    double key = 0.0;  // log(u) / weight, larger is better
  };

  WeightedReservoir() = default;
  explicit WeightedReservoir(int capacity) : capacity_(capacity) {}

  void add(double value, double weight, RngStream& rng);
  // Top-capacity items by key across both reservoirs; call only after the
  // adds are done (the skip counter does not survive a merge).
  void merge_from(const WeightedReservoir& other);

  int capacity() const { return capacity_; }
  const std::vector<Item>& items() const { return items_; }
  std::vector<double> sorted_values() const;

 private:
  void insert(const Item& item);
  void draw_skip(RngStream& rng);

  int capacity_ = 0;
  double weight_to_skip_ = 0.0;
  std::vector<Item> items_;  // min-heap on key
};

// Raw time integrals and counts over the measurement window, plus derived
// accessors. Merging adds field-wise, so replications reduce associatively.
struct MetricsReport {
  double horizon = 0.0;
  double warmup = 0.0;
  double measured_time = 0.0;
  int num_replications = 1;

  std::vector<double> queue_time;     // per buffer (immediate) or class (delayed)
  std::vector<double> workload_time;  // per server, integral of W_k
  std::vector<double> idle_time;      // per server
  std::vector<double> effort_time;    // per activity, integral of P_j
  double weighted_total_time = 0.0;   // integral of sum_k u_k W_k
  double gap_time = 0.0;              // integral of T_(K) - T_(1)
  double gap_sq_time = 0.0;
  double tmax_time = 0.0;             // integral of T_(K)

  std::vector<int64_t> arrivals;    // per class
  std::vector<int64_t> routings;    // per activity
  std::vector<int64_t> departures;  // per activity
  double sojourn_sum = 0.0;
  double sojourn_sum_sq = 0.0;
  int64_t sojourn_count = 0;
  int64_t final_total_jobs = 0;  // jobs in system at the horizon

  WeightedReservoir reservoir;  // (sum_k u_k W_k, holding time) samples

  double queue_avg(int idx) const { return queue_time[idx] / measured_time; }
  double queue_avg_total() const;
  double workload_avg(int server) const { return workload_time[server] / measured_time; }
  double idle_frac(int server) const { return idle_time[server] / measured_time; }
  double effort_frac(int activity) const { return effort_time[activity] / measured_time; }
  double route_frac(int activity, int class_id) const {
    return arrivals[class_id] == 0
               ? 0.0
               : static_cast<double>(routings[activity]) / arrivals[class_id];
  }
  double weighted_total_avg() const { return weighted_total_time / measured_time; }
  double gap_mean() const { return gap_time / measured_time; }
  double gap_sq_mean() const { return gap_sq_time / measured_time; }
  double tmax_mean() const { return tmax_time / measured_time; }
  double sojourn_mean() const {
    return sojourn_count == 0 ? 0.0 : sojourn_sum / static_cast<double>(sojourn_count);
  }

  void merge_from(const MetricsReport& other);

  // Deterministic serialization (stable key order, shortest round-trip
  // doubles); the reservoir is spilled separately as CSV when asked for.
  std::string to_json() const;
};

}  // namespace psslab
