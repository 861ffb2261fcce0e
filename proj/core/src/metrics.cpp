#include "psslab/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace psslab {

namespace {

bool key_greater(const WeightedReservoir::Item& a, const WeightedReservoir::Item& b) {
  return a.key > b.key;  // min-heap on key
}

}  // namespace

void WeightedReservoir::insert(const Item& item) {
  if (capacity_ <= 0) return;
  if (static_cast<int>(items_.size()) < capacity_) {
    items_.push_back(item);
    std::push_heap(items_.begin(), items_.end(), key_greater);
    return;
  }
  if (item.key <= items_.front().key) return;
  std::pop_heap(items_.begin(), items_.end(), key_greater);
  items_.back() = item;
  std::push_heap(items_.begin(), items_.end(), key_greater);
}

void WeightedReservoir::draw_skip(RngStream& rng) {
  // Weight mass until the next replacement: log(u) / T for the current
  // threshold T = min key (both negative, so the skip is positive).
  weight_to_skip_ = std::log(rng.next_double_open()) / items_.front().key;
}

void WeightedReservoir::add(double value, double weight, RngStream& rng) {
  if (weight <= 0.0 || capacity_ <= 0) return;
  if (static_cast<int>(items_.size()) < capacity_) {
    const double key = std::log(rng.next_double_open()) / weight;
    insert(Item{value, weight, key});
    if (static_cast<int>(items_.size()) == capacity_) draw_skip(rng);
    return;
  }
  weight_to_skip_ -= weight;
  if (weight_to_skip_ > 0.0) return;
  // This item enters; its key is conditioned on beating the threshold.
  const double threshold = items_.front().key;
  const double floor = std::exp(threshold * weight);
  const double u = floor + (1.0 - floor) * rng.next_double_open();
  const double key = std::log(u) / weight;
  std::pop_heap(items_.begin(), items_.end(), key_greater);
  items_.back() = Item{value, weight, key};
  std::push_heap(items_.begin(), items_.end(), key_greater);
  draw_skip(rng);
}

void WeightedReservoir::merge_from(const WeightedReservoir& other) {
  if (capacity_ == 0) {
    capacity_ = other.capacity_;
  }
  for (const Item& item : other.items_) insert(item);
  weight_to_skip_ = 0.0;
}

std::vector<double> WeightedReservoir::sorted_values() const {
  std::vector<double> values;
  values.reserve(items_.size());
  for (const Item& item : items_) values.push_back(item.value);
  std::sort(values.begin(), values.end());
  return values;
}

double MetricsReport::queue_avg_total() const {
  double s = 0.0;
  for (double q : queue_time) s += q;
  return s / measured_time;
}

void MetricsReport::merge_from(const MetricsReport& other) {
  auto add_vec = [](auto& dst, const auto& src) {
    if (dst.size() != src.size()) throw std::invalid_argument("metrics shape mismatch");
    for (size_t i = 0; i < dst.size(); ++i) dst[i] += src[i];
  };
  if (horizon != other.horizon || warmup != other.warmup) {
    throw std::invalid_argument("merging metrics from different run windows");
  }
  measured_time += other.measured_time;
  num_replications += other.num_replications;
  add_vec(queue_time, other.queue_time);
  add_vec(workload_time, other.workload_time);
  add_vec(idle_time, other.idle_time);
  add_vec(effort_time, other.effort_time);
  weighted_total_time += other.weighted_total_time;
  gap_time += other.gap_time;
  gap_sq_time += other.gap_sq_time;
  tmax_time += other.tmax_time;
  add_vec(arrivals, other.arrivals);
  add_vec(routings, other.routings);
  add_vec(departures, other.departures);
  sojourn_sum += other.sojourn_sum;
  sojourn_sum_sq += other.sojourn_sum_sq;
  sojourn_count += other.sojourn_count;
  final_total_jobs += other.final_total_jobs;
  reservoir.merge_from(other.reservoir);
}

}  // namespace psslab
