#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "psslab/lp.hpp"
#include "psslab/model.hpp"

namespace psslab {

// x_j > kClassifyTol counts as basic-capable; LP residuals are checked
// against kResidualTol. Doubles on well-scaled desk-size LPs leave plenty of
// headroom below both.
inline constexpr double kClassifyTol = 1e-9;
inline constexpr double kResidualTol = 1e-8;

// The polytope {x >= 0, Rx = lambda, Ax = e} is empty.
struct HeavyTrafficViolated : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Dual propagation produced values that violate an unused basic-activity
// equation or dual feasibility; the pooling assumptions do not hold.
struct ConsistencyViolation : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct PrimalSolution {
  std::vector<double> x;  // long-run activity proportions, length J
  double rho = 0.0;       // utilization of the busiest server
};

struct DualSolution {
  std::vector<double> v;  // per class
  std::vector<double> u;  // per server
  std::vector<double> d;  // slack u_k - mu_j v_i per activity
};

enum class ActivityStatus { kBasicCapable, kStrictlyNonBasic };

struct ActivityEntry {
  double max_x = 0.0;  // supremum of x_j over the optimal polytope
  ActivityStatus status = ActivityStatus::kStrictlyNonBasic;
  double d = 0.0;
};

using ActivityReport = std::vector<ActivityEntry>;

struct LimitPrediction {
  double m = 0.0;       // sum_i lambda_i v_i^2
  double x_mean = 0.0;  // m / sum_k u_k^2
  std::vector<double> per_server_mean;  // u_k * x_mean
  double total_weighted_mean = 0.0;     // equals m
};

struct HeavyTrafficCheck {
  bool holds = false;
  std::vector<double> witness;      // some x with Rx = lambda, Ax = e
  double max_min_utilization = 0.0; // best achievable min_k (Ax)_k under Ax <= e
};

// Edges carry the smallest class certifying direct communication.
struct CommunicationGraph {
  int num_servers = 0;
  std::vector<std::pair<int, int>> edges;
  std::vector<int> edge_class;
  std::vector<std::vector<int>> adjacency;
  bool connected = false;
};

PrimalSolution solve_primal(const SystemMatrices& matrices,
                            const std::vector<double>& lambda);

HeavyTrafficCheck check_relaxed_heavy_traffic(const SystemMatrices& matrices,
                                              const std::vector<double>& lambda);

// max x_j over {x >= 0, Rx = lambda, Ax = e}; throws HeavyTrafficViolated
// when the polytope is empty.
double max_over_optimal(const SystemMatrices& matrices,
                        const std::vector<double>& lambda, int activity);

// True when activities j and j2 (same class, different servers) are both
// positive in some point of the optimal polytope, via one auxiliary-t LP.
bool can_coexist(const SystemMatrices& matrices, const std::vector<double>& lambda,
                 int activity_a, int activity_b);

CommunicationGraph communication_graph(const SystemMatrices& matrices,
                                       const std::vector<double>& lambda);

inline bool crp_check(const CommunicationGraph& graph) { return graph.connected; }

// Classifies every activity via max_over_optimal. The d field is filled by
// the caller once a dual solution is available.
ActivityReport build_activity_report(const SystemMatrices& matrices,
                                     const std::vector<double>& lambda);

// Constructive dual: root u at server `root`, propagate along a breadth-first
// spanning tree of the communication graph through basic activities,
// normalize sum(u) = 1, then verify every unused basic-activity equation and
// all dual feasibility constraints. Throws ConsistencyViolation on failure.
DualSolution dual_by_propagation(const SystemMatrices& matrices,
                                 const std::vector<double>& lambda,
                                 const ActivityReport& report,
                                 const CommunicationGraph& graph, int root = 0);

// Solves the dual LP directly (v free, u >= 0, slacks d >= 0).
DualSolution dual_by_lp(const SystemMatrices& matrices,
                        const std::vector<double>& lambda);

LimitPrediction predict_limit(const std::vector<double>& lambda,
                              const DualSolution& dual);

// Everything the `analyze` command reports, bundled.
struct AnalysisReport {
  std::vector<std::string> violations;
  PrimalSolution primal;
  HeavyTrafficCheck heavy_traffic;
  ActivityReport activities;
  CommunicationGraph graph;
  bool crp = false;
  DualSolution dual;  // propagation result under CRP, dual LP otherwise
  LimitPrediction prediction;  // meaningful only under CRP
};

AnalysisReport analyze(const SystemConfig& config);

}  // namespace psslab
