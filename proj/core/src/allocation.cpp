#include "psslab/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace psslab {

namespace {

// Rows common to the optimal polytope {x >= 0, Rx = lambda, Ax = e}, with
// `extra` additional variables appended after x.
StandardLp polytope_lp(const SystemMatrices& matrices, const std::vector<double>& lambda,
                       int extra_vars, int extra_rows) {
  const int I = matrices.num_classes();
  const int K = matrices.num_servers();
  const int J = matrices.num_activities();

  StandardLp lp;
  lp.eq = Matrix(I + K + extra_rows, J + extra_vars);
  lp.rhs.assign(I + K + extra_rows, 0.0);
  lp.cost.assign(J + extra_vars, 0.0);
  for (int i = 0; i < I; ++i) {
    for (int j = 0; j < J; ++j) lp.eq(i, j) = matrices.output(i, j);
    lp.rhs[i] = lambda[i];
  }
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < J; ++j) lp.eq(I + k, j) = matrices.consumption(k, j);
    lp.rhs[I + k] = 1.0;
  }
  return lp;
}

}  // namespace

PrimalSolution solve_primal(const SystemMatrices& matrices,
                            const std::vector<double>& lambda) {
  const int I = matrices.num_classes();
  const int K = matrices.num_servers();
  const int J = matrices.num_activities();

  // Variables: x (J), rho, slack per server. Rows: Rx = lambda and
  // Ax - rho e + s = 0.
  StandardLp lp;
  lp.eq = Matrix(I + K, J + 1 + K);
  lp.rhs.assign(I + K, 0.0);
  lp.cost.assign(J + 1 + K, 0.0);
  lp.cost[J] = 1.0;
  for (int i = 0; i < I; ++i) {
    for (int j = 0; j < J; ++j) lp.eq(i, j) = matrices.output(i, j);
    lp.rhs[i] = lambda[i];
  }
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < J; ++j) lp.eq(I + k, j) = matrices.consumption(k, j);
    lp.eq(I + k, J) = -1.0;
    lp.eq(I + k, J + 1 + k) = 1.0;
  }

  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal) {
    throw std::runtime_error("static allocation LP has no solution with Rx = lambda");
  }
  PrimalSolution out;
  out.x.assign(sol.x.begin(), sol.x.begin() + J);
  out.rho = sol.x[J];
  return out;
}

HeavyTrafficCheck check_relaxed_heavy_traffic(const SystemMatrices& matrices,
                                              const std::vector<double>& lambda) {
  const int I = matrices.num_classes();
  const int K = matrices.num_servers();
  const int J = matrices.num_activities();

  // max t subject to Rx = lambda, t e <= Ax <= e:
  // Ax + s_hi = e and Ax - t e - s_lo = 0.
  StandardLp lp;
  const int n = J + 1 + 2 * K;  // x, t, s_hi, s_lo
  lp.eq = Matrix(I + 2 * K, n);
  lp.rhs.assign(I + 2 * K, 0.0);
  lp.cost.assign(n, 0.0);
  lp.cost[J] = -1.0;
  for (int i = 0; i < I; ++i) {
    for (int j = 0; j < J; ++j) lp.eq(i, j) = matrices.output(i, j);
    lp.rhs[i] = lambda[i];
  }
  for (int k = 0; k < K; ++k) {
    for (int j = 0; j < J; ++j) {
      lp.eq(I + k, j) = matrices.consumption(k, j);
      lp.eq(I + K + k, j) = matrices.consumption(k, j);
    }
    lp.eq(I + k, J + 1 + k) = 1.0;
    lp.rhs[I + k] = 1.0;
    lp.eq(I + K + k, J) = -1.0;
    lp.eq(I + K + k, J + 1 + K + k) = -1.0;
  }

  const LpSolution sol = solve_lp(lp);
  HeavyTrafficCheck out;
  if (sol.status != LpStatus::kOptimal) {
    // No x with Ax <= e serves the demand at all (rho* > 1).
    out.holds = false;
    out.max_min_utilization = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  out.max_min_utilization = sol.x[J];
  out.holds = out.max_min_utilization >= 1.0 - kResidualTol;
  if (out.holds) {
    out.witness.assign(sol.x.begin(), sol.x.begin() + J);
    for (double& x : out.witness) {
      if (std::fabs(x) < 1e-12) x = 0.0;
    }
  }
  return out;
}

double max_over_optimal(const SystemMatrices& matrices,
                        const std::vector<double>& lambda, int activity) {
  StandardLp lp = polytope_lp(matrices, lambda, 0, 0);
  lp.cost[activity] = -1.0;
  const LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::kInfeasible) {
    throw HeavyTrafficViolated("optimal polytope {Rx = lambda, Ax = e} is empty");
  }
  return sol.x[activity];
}

bool can_coexist(const SystemMatrices& matrices, const std::vector<double>& lambda,
                 int activity_a, int activity_b) {
  const int I = matrices.num_classes();
  const int K = matrices.num_servers();
  const int J = matrices.num_activities();

  // max t with x_a >= t and x_b >= t over the optimal polytope; extra
  // variables t, s_a, s_b and rows x - t - s = 0.
  StandardLp lp = polytope_lp(matrices, lambda, 3, 2);
  lp.cost[J] = -1.0;
  lp.eq(I + K, activity_a) = 1.0;
  lp.eq(I + K, J) = -1.0;
  lp.eq(I + K, J + 1) = -1.0;
  lp.eq(I + K + 1, activity_b) = 1.0;
  lp.eq(I + K + 1, J) = -1.0;
  lp.eq(I + K + 1, J + 2) = -1.0;

  const LpSolution sol = solve_lp(lp);
  if (sol.status == LpStatus::kInfeasible) {
    throw HeavyTrafficViolated("optimal polytope {Rx = lambda, Ax = e} is empty");
  }
  return sol.x[J] > kClassifyTol;
}

CommunicationGraph communication_graph(const SystemMatrices& matrices,
                                       const std::vector<double>& lambda) {
  const int I = matrices.num_classes();
  const int K = matrices.num_servers();
  const int J = matrices.num_activities();

  std::vector<int> at(static_cast<size_t>(I) * K, -1);
  for (int j = 0; j < J; ++j) {
    at[static_cast<size_t>(matrices.class_of(j)) * K + matrices.server_of(j)] = j;
  }

  CommunicationGraph g;
  g.num_servers = K;
  g.adjacency.resize(K);
  for (int k = 0; k < K; ++k) {
    for (int k2 = k + 1; k2 < K; ++k2) {
      int certifying_class = -1;
      for (int i = 0; i < I && certifying_class < 0; ++i) {
        const int ja = at[static_cast<size_t>(i) * K + k];
        const int jb = at[static_cast<size_t>(i) * K + k2];
        if (ja < 0 || jb < 0) continue;
        if (can_coexist(matrices, lambda, ja, jb)) certifying_class = i;
      }
      if (certifying_class >= 0) {
        g.edges.emplace_back(k, k2);
        g.edge_class.push_back(certifying_class);
        g.adjacency[k].push_back(k2);
        g.adjacency[k2].push_back(k);
      }
    }
  }

  std::vector<char> seen(K, 0);
  std::deque<int> frontier{0};
  seen[0] = 1;
  int reached = 1;
  while (!frontier.empty()) {
    const int k = frontier.front();
    frontier.pop_front();
    for (int nb : g.adjacency[k]) {
      if (!seen[nb]) {
        seen[nb] = 1;
        ++reached;
        frontier.push_back(nb);
      }
    }
  }
  g.connected = (reached == K);
  return g;
}

ActivityReport build_activity_report(const SystemMatrices& matrices,
                                     const std::vector<double>& lambda) {
  const int J = matrices.num_activities();
  ActivityReport report(J);
  for (int j = 0; j < J; ++j) {
    report[j].max_x = max_over_optimal(matrices, lambda, j);
    report[j].status = report[j].max_x > kClassifyTol ? ActivityStatus::kBasicCapable
                                                      : ActivityStatus::kStrictlyNonBasic;
  }
  return report;
}

DualSolution dual_by_propagation(const SystemMatrices& matrices,
                                 const std::vector<double>& lambda,
                                 const ActivityReport& report,
                                 const CommunicationGraph& graph, int root) {
  const int I = matrices.num_classes();
  const int K = matrices.num_servers();
  const int J = matrices.num_activities();

  std::vector<int> at(static_cast<size_t>(I) * K, -1);
  for (int j = 0; j < J; ++j) {
    at[static_cast<size_t>(matrices.class_of(j)) * K + matrices.server_of(j)] = j;
  }
  const auto edge_class_of = [&](int a, int b) {
    for (size_t e = 0; e < graph.edges.size(); ++e) {
      const auto& [x, y] = graph.edges[e];
      if ((x == a && y == b) || (x == b && y == a)) return graph.edge_class[e];
    }
    return -1;
  };

  std::vector<double> u(K, 0.0);
  std::vector<char> known(K, 0);
  u[root] = 1.0;
  known[root] = 1;
  std::deque<int> frontier{root};
  while (!frontier.empty()) {
    const int k = frontier.front();
    frontier.pop_front();
    std::vector<int> nbs = graph.adjacency[k];
    std::sort(nbs.begin(), nbs.end());
    for (int nb : nbs) {
      if (known[nb]) continue;
      const int i = edge_class_of(k, nb);
      const double mu_here = matrices.rate_of(at[static_cast<size_t>(i) * K + k]);
      const double mu_there = matrices.rate_of(at[static_cast<size_t>(i) * K + nb]);
      u[nb] = u[k] * mu_there / mu_here;
      known[nb] = 1;
      frontier.push_back(nb);
    }
  }
  for (int k = 0; k < K; ++k) {
    if (!known[k]) {
      throw ConsistencyViolation("communication graph is not connected from the root");
    }
  }

  // v_i from the smallest-index basic-capable activity of class i.
  std::vector<double> v(I, 0.0);
  for (int i = 0; i < I; ++i) {
    int chosen = -1;
    for (int j = 0; j < J && chosen < 0; ++j) {
      if (matrices.class_of(j) == i && report[j].status == ActivityStatus::kBasicCapable) {
        chosen = j;
      }
    }
    if (chosen < 0) {
      throw ConsistencyViolation("class " + std::to_string(i + 1) +
                                 " has no basic-capable activity");
    }
    v[i] = u[matrices.server_of(chosen)] / matrices.rate_of(chosen);
  }

  double u_sum = 0.0;
  for (double value : u) u_sum += value;
  for (double& value : u) value /= u_sum;
  for (double& value : v) value /= u_sum;

  // Unused basic-activity equations must agree and every activity must be
  // dual-feasible, otherwise the pooling assumptions fail (the dual would
  // not be unique).
  DualSolution dual{v, u, std::vector<double>(J, 0.0)};
  for (int j = 0; j < J; ++j) {
    const int i = matrices.class_of(j);
    const int k = matrices.server_of(j);
    dual.d[j] = u[k] - matrices.rate_of(j) * v[i];
    if (report[j].status == ActivityStatus::kBasicCapable &&
        std::fabs(dual.d[j]) > kResidualTol) {
      throw ConsistencyViolation("basic-activity equation violated at activity " +
                                 std::to_string(j + 1));
    }
    if (dual.d[j] < -kResidualTol) {
      throw ConsistencyViolation("dual feasibility violated at activity " +
                                 std::to_string(j + 1));
    }
  }
  double v_lambda = 0.0;
  for (int i = 0; i < I; ++i) v_lambda += lambda[i] * v[i];
  if (std::fabs(v_lambda - 1.0) > kResidualTol) {
    throw ConsistencyViolation("propagated dual objective differs from 1");
  }
  return dual;
}

DualSolution dual_by_lp(const SystemMatrices& matrices,
                        const std::vector<double>& lambda) {
  const int I = matrices.num_classes();
  const int K = matrices.num_servers();
  const int J = matrices.num_activities();

  // Variables: v+ (I), v- (I), u (K), d (J), w (1).
  // Rows: mu_j v_i - u_k + d_j = 0 per activity and sum(u) + w = 1.
  StandardLp lp;
  const int n = 2 * I + K + J + 1;
  lp.eq = Matrix(J + 1, n);
  lp.rhs.assign(J + 1, 0.0);
  lp.cost.assign(n, 0.0);
  for (int i = 0; i < I; ++i) {
    lp.cost[i] = -lambda[i];
    lp.cost[I + i] = lambda[i];
  }
  for (int j = 0; j < J; ++j) {
    const int i = matrices.class_of(j);
    const int k = matrices.server_of(j);
    const double mu = matrices.rate_of(j);
    lp.eq(j, i) = mu;
    lp.eq(j, I + i) = -mu;
    lp.eq(j, 2 * I + k) = -1.0;
    lp.eq(j, 2 * I + K + j) = 1.0;
  }
  for (int k = 0; k < K; ++k) lp.eq(J, 2 * I + k) = 1.0;
  lp.eq(J, 2 * I + K + J) = 1.0;
  lp.rhs[J] = 1.0;

  const LpSolution sol = solve_lp(lp);
  if (sol.status != LpStatus::kOptimal) {
    throw std::runtime_error("dual LP solve failed");
  }
  DualSolution dual;
  dual.v.resize(I);
  dual.u.resize(K);
  dual.d.resize(J);
  for (int i = 0; i < I; ++i) dual.v[i] = sol.x[i] - sol.x[I + i];
  for (int k = 0; k < K; ++k) dual.u[k] = sol.x[2 * I + k];
  for (int j = 0; j < J; ++j) dual.d[j] = sol.x[2 * I + K + j];
  return dual;
}

LimitPrediction predict_limit(const std::vector<double>& lambda,
                              const DualSolution& dual) {
  LimitPrediction p;
  for (size_t i = 0; i < lambda.size(); ++i) p.m += lambda[i] * dual.v[i] * dual.v[i];
  double u_sq = 0.0;
  for (double u : dual.u) u_sq += u * u;
  p.x_mean = p.m / u_sq;
  p.per_server_mean.resize(dual.u.size());
  for (size_t k = 0; k < dual.u.size(); ++k) p.per_server_mean[k] = dual.u[k] * p.x_mean;
  p.total_weighted_mean = p.m;
  return p;
}

AnalysisReport analyze(const SystemConfig& config) {
  AnalysisReport out;
  out.violations = validate_config(config);
  if (!out.violations.empty()) return out;

  const SystemMatrices matrices = build_matrices(config);
  const std::vector<double>& lambda = config.arrival_rates;

  out.primal = solve_primal(matrices, lambda);
  out.heavy_traffic = check_relaxed_heavy_traffic(matrices, lambda);
  if (!out.heavy_traffic.holds) return out;

  out.activities = build_activity_report(matrices, lambda);
  out.graph = communication_graph(matrices, lambda);
  out.crp = crp_check(out.graph);

  out.dual = out.crp ? dual_by_propagation(matrices, lambda, out.activities, out.graph)
                     : dual_by_lp(matrices, lambda);
  for (size_t j = 0; j < out.activities.size(); ++j) out.activities[j].d = out.dual.d[j];
  if (out.crp) out.prediction = predict_limit(lambda, out.dual);
  return out;
}

}  // namespace psslab
