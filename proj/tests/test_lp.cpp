#include "psslab/lp.hpp"

#include <cmath>

#include "doctest.h"
#include "psslab/allocation.hpp"
#include "psslab/model.hpp"
#include "support/oracle.hpp"
#include "support/random_instances.hpp"
#include "support/test_configs.hpp"

using namespace psslab;

TEST_CASE("simplex solves a textbook LP") {
  // min -3x - 5y s.t. x + s1 = 4, 2y + s2 = 12, 3x + 2y + s3 = 18.
  StandardLp lp;
  lp.eq = Matrix(3, 5);
  lp.rhs = {4, 12, 18};
  lp.cost = {-3, -5, 0, 0, 0};
  lp.eq(0, 0) = 1;
  lp.eq(0, 2) = 1;
  lp.eq(1, 1) = 2;
  lp.eq(1, 3) = 1;
  lp.eq(2, 0) = 3;
  lp.eq(2, 1) = 2;
  lp.eq(2, 4) = 1;

  const LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(-36.0).epsilon(1e-10));
  CHECK(sol.x[0] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(sol.x[1] == doctest::Approx(6.0).epsilon(1e-10));
}

TEST_CASE("simplex reports infeasible and unbounded problems") {
  StandardLp infeasible;
  infeasible.eq = Matrix(2, 1);
  infeasible.eq(0, 0) = 1;
  infeasible.eq(1, 0) = 1;
  infeasible.rhs = {1, 2};
  infeasible.cost = {1};
  CHECK(solve_lp(infeasible).status == LpStatus::kInfeasible);

  // min -x with x - y = 0: both can grow without bound.
  StandardLp unbounded;
  unbounded.eq = Matrix(1, 2);
  unbounded.eq(0, 0) = 1;
  unbounded.eq(0, 1) = -1;
  unbounded.rhs = {0};
  unbounded.cost = {-1, 0};
  CHECK(solve_lp(unbounded).status == LpStatus::kUnbounded);
}

TEST_CASE("simplex handles redundant rows") {
  // x + y = 2 stated twice.
  StandardLp lp;
  lp.eq = Matrix(2, 2);
  lp.eq(0, 0) = 1;
  lp.eq(0, 1) = 1;
  lp.eq(1, 0) = 1;
  lp.eq(1, 1) = 1;
  lp.rhs = {2, 2};
  lp.cost = {1, 2};
  const LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == LpStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(sol.x[0] == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("simplex matches the vertex-enumeration oracle on the canonical models") {
  for (const SystemConfig& config :
       {testcfg::n_model(), testcfg::w_model(), testcfg::x_model()}) {
    const SystemMatrices matrices = build_matrices(config);
    const StandardLp lp = oracle::primal_standard_form(matrices, config.arrival_rates);
    const oracle::OracleOptimum expected = oracle::minimize(lp);
    REQUIRE(expected.feasible);
    const LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::kOptimal);
    CHECK(std::fabs(sol.objective - expected.objective) < 1e-9);
  }
}

TEST_CASE("simplex matches the oracle on random instances") {
  RngStream rng(20240817);
  int checked = 0;
  while (checked < 60) {
    const SystemConfig config = testgen::random_instance(rng);
    const SystemMatrices matrices = build_matrices(config);
    const StandardLp lp = oracle::primal_standard_form(matrices, config.arrival_rates);
    const oracle::OracleOptimum expected = oracle::minimize(lp);
    REQUIRE(expected.feasible);  // rho absorbs any demand, so always solvable
    const LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::kOptimal);
    CHECK(std::fabs(sol.objective - expected.objective) < 1e-8);

    // Strong duality: the equality-row multipliers price the rhs exactly.
    double dual_obj = 0.0;
    for (size_t r = 0; r < lp.rhs.size(); ++r) dual_obj += sol.dual[r] * lp.rhs[r];
    CHECK(std::fabs(dual_obj - sol.objective) < 1e-8);
    ++checked;
  }
}

TEST_CASE("lp duals satisfy feasibility and complementary slackness") {
  RngStream rng(7);
  for (int trial = 0; trial < 30; ++trial) {
    const SystemConfig config = testgen::random_instance(rng);
    const SystemMatrices matrices = build_matrices(config);
    const StandardLp lp = oracle::primal_standard_form(matrices, config.arrival_rates);
    const LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == LpStatus::kOptimal);
    for (int c = 0; c < lp.num_cols(); ++c) {
      double reduced = lp.cost[c];
      for (int r = 0; r < lp.num_rows(); ++r) reduced -= sol.dual[r] * lp.eq(r, c);
      CHECK(reduced > -1e-8);                       // dual feasibility
      CHECK(std::fabs(reduced * sol.x[c]) < 1e-7);  // complementary slackness
    }
  }
}
