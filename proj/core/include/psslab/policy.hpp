#pragma once

#include <span>
#include <vector>

#include "psslab/model.hpp"
#include "psslab/rng.hpp"

namespace psslab {

enum class RoutingKind { kWwta, kJsq };

enum class TieBreak { kSmallestIndex, kRandom };

// Service-effort allocation. HLPPS splits effort across nonempty buffers in
// proportion to (weighted) queue lengths; SBP serves the highest-priority
// nonempty buffer preemptively; MaxWeight and ClassPriority drive the
// delayed-routing architecture.
struct SchedulingSpec {
  enum class Kind { kHlpps, kSbp, kMaxWeight, kClassPriority };

  Kind kind = Kind::kHlpps;
  std::vector<double> hlpps_weights;             // per activity; empty = all ones
  std::vector<std::vector<int>> priority_order;  // per server, highest first

  static SchedulingSpec hlpps(std::vector<double> weights = {});
  // Shortest mean processing time first; ties by class index.
  static SchedulingSpec sbp_smp_first(const SystemConfig& config);
  static SchedulingSpec sbp(std::vector<std::vector<int>> order);
  static SchedulingSpec maxweight();
  static SchedulingSpec class_priority(std::vector<std::vector<int>> order);
};

// W_k(z) = sum over the server's buffers of m_j z_j.
double workload(std::span<const int> z, int server, const ActivityIndex& index);

// Server minimizing m_ik W_k(z) among the class's eligible servers.
int wwta_route(std::span<const int> z, int class_id, const ActivityIndex& index,
               TieBreak tie_break = TieBreak::kSmallestIndex, RngStream* rng = nullptr);

// Server minimizing the total buffer count among the class's eligible servers.
int jsq_route(std::span<const int> z, int class_id, const ActivityIndex& index,
              TieBreak tie_break = TieBreak::kSmallestIndex, RngStream* rng = nullptr);

// Writes P_j for each of the server's activities into `shares` (indexed by
// activity id). Shares sum to 1 whenever the server has work, 0 otherwise.
void effort_shares(std::span<const int> z, int server, const SchedulingSpec& spec,
                   const ActivityIndex& index, std::span<double> shares);

// Class maximizing mu_ik z_i among the server's nonempty eligible classes;
// -1 when they are all empty (server idles).
int maxweight_pick(std::span<const int> class_queues, int server,
                   const SystemConfig& config, const ActivityIndex& index,
                   TieBreak tie_break = TieBreak::kSmallestIndex, RngStream* rng = nullptr);

// Highest-priority nonempty eligible class per the fixed order; -1 if empty.
int class_priority_pick(std::span<const int> class_queues, int server,
                        const SchedulingSpec& spec, const ActivityIndex& index);

}  // namespace psslab
