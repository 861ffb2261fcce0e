#include "psslab/policy.hpp"

#include <array>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "support/test_configs.hpp"

using namespace psslab;

namespace {

std::vector<int> random_state(RngStream& rng, int size, int cap = 6) {
  std::vector<int> z(size);
  for (int& v : z) v = static_cast<int>(rng.next_u64() % (cap + 1));
  return z;
}

}  // namespace

TEST_CASE("workload") {
  const ActivityIndex idx = build_activity_index(testcfg::n_model());
  CHECK(workload(std::vector<int>{3, 0, 0}, 0, idx) == doctest::Approx(3.0));
  CHECK(workload(std::vector<int>{3, 0, 0}, 1, idx) == doctest::Approx(0.0));
  CHECK(workload(std::vector<int>{0, 2, 1}, 1, idx) == doctest::Approx(5.0));
  CHECK(workload(std::vector<int>{0, 0, 0}, 0, idx) == doctest::Approx(0.0));
  CHECK(workload(std::vector<int>{0, 0, 0}, 1, idx) == doctest::Approx(0.0));
}

TEST_CASE("wwta_route") {
  const ActivityIndex idx = build_activity_index(testcfg::n_model());
  CHECK(wwta_route(std::vector<int>{0, 0, 0}, 0, idx) == 0);  // tie, smallest index
  CHECK(wwta_route(std::vector<int>{3, 0, 0}, 0, idx) == 1);  // 3 > 0
  CHECK(wwta_route(std::vector<int>{1, 1, 1}, 0, idx) == 0);  // 1 < 2*3

  // Scaling every mean service time by the same factor scales every
  // m_ik W_k by its square; the argmin cannot move.
  SystemConfig half = testcfg::n_model();
  for (Activity& act : half.activities) act.rate *= 2.0;
  const ActivityIndex idx_half = build_activity_index(half);
  RngStream rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    const std::vector<int> z = random_state(rng, 3);
    CHECK(wwta_route(z, 0, idx) == wwta_route(z, 0, idx_half));
  }
}

TEST_CASE("jsq_route") {
  const ActivityIndex n_idx = build_activity_index(testcfg::n_model());
  CHECK(jsq_route(std::vector<int>{2, 0, 1}, 0, n_idx) == 1);
  CHECK(jsq_route(std::vector<int>{0, 0, 0}, 0, n_idx) == 0);

  const ActivityIndex x_idx = build_activity_index(testcfg::x_model());
  // z = (z11, z12, z22, z21) = (1, 1, 1, 0): totals 1 vs 2 for class 2.
  CHECK(jsq_route(std::vector<int>{1, 1, 1, 0}, 1, x_idx) == 0);
}

TEST_CASE("effort_shares hlpps") {
  const SystemConfig config = testcfg::n_model();
  const ActivityIndex idx = build_activity_index(config);
  const SchedulingSpec hlpps = SchedulingSpec::hlpps();
  std::vector<double> shares(3, -1.0);

  effort_shares(std::vector<int>{0, 2, 2}, 1, hlpps, idx, shares);
  CHECK(shares[1] == doctest::Approx(0.5));
  CHECK(shares[2] == doctest::Approx(0.5));

  effort_shares(std::vector<int>{0, 0, 0}, 1, hlpps, idx, shares);
  CHECK(shares[1] == 0.0);  // 0/0 = 0: empty server idles
  CHECK(shares[2] == 0.0);

  // Generalized weights c = 1 reduce to plain HLPPS.
  const SchedulingSpec ones = SchedulingSpec::hlpps({1.0, 1.0, 1.0});
  RngStream rng(11);
  std::vector<double> shares_ones(3, 0.0);
  for (int trial = 0; trial < 100; ++trial) {
    const std::vector<int> z = random_state(rng, 3);
    effort_shares(z, 1, SchedulingSpec::hlpps(), idx, shares);
    effort_shares(z, 1, ones, idx, shares_ones);
    for (int j = 1; j < 3; ++j) CHECK(shares[j] == doctest::Approx(shares_ones[j]));
  }

  // Weighted shares follow c z / sum(c z).
  const SchedulingSpec weighted = SchedulingSpec::hlpps({1.0, 3.0, 1.0});
  effort_shares(std::vector<int>{0, 1, 1}, 1, weighted, idx, shares);
  CHECK(shares[1] == doctest::Approx(0.75));
  CHECK(shares[2] == doctest::Approx(0.25));
}

TEST_CASE("effort_shares sbp") {
  const SystemConfig config = testcfg::n_model();
  const ActivityIndex idx = build_activity_index(config);
  // Server 2 ranks class 2 above class 1.
  const SchedulingSpec sbp = SchedulingSpec::sbp({{0}, {1, 0}});
  std::vector<double> shares(3, 0.0);

  effort_shares(std::vector<int>{0, 5, 1}, 1, sbp, idx, shares);
  CHECK(shares[1] == 0.0);
  CHECK(shares[2] == 1.0);

  effort_shares(std::vector<int>{0, 5, 0}, 1, sbp, idx, shares);
  CHECK(shares[1] == 1.0);
  CHECK(shares[2] == 0.0);

  // Default order is shortest mean processing time first.
  const SchedulingSpec smp = SchedulingSpec::sbp_smp_first(testcfg::w_model());
  CHECK(smp.priority_order[0] == std::vector<int>{0, 1, 2});
  CHECK(smp.priority_order[1] == std::vector<int>{2, 1, 0});
}

TEST_CASE("non-idling effort shares") {
  const SystemConfig config = testcfg::w_model();
  const ActivityIndex idx = build_activity_index(config);
  RngStream rng(123);
  std::vector<double> shares(6, 0.0);
  for (const SchedulingSpec& spec :
       {SchedulingSpec::hlpps(), SchedulingSpec::sbp_smp_first(config),
        SchedulingSpec::hlpps({2.0, 1.0, 0.5, 1.0, 4.0, 1.0})}) {
    for (int trial = 0; trial < 300; ++trial) {
      const std::vector<int> z = random_state(rng, 6);
      for (int k = 0; k < 2; ++k) {
        effort_shares(z, k, spec, idx, shares);
        double sum = 0.0;
        int jobs = 0;
        for (int j : idx.of_server[k]) {
          CHECK(shares[j] >= 0.0);
          CHECK(shares[j] <= 1.0);
          sum += shares[j];
          jobs += z[j];
        }
        CHECK(sum == doctest::Approx(jobs > 0 ? 1.0 : 0.0).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("maxweight_pick") {
  const SystemConfig config = testcfg::n_model();
  const ActivityIndex idx = build_activity_index(config);
  // Server 2 weighs 0.5*4 = 2 against 1*3 = 3.
  CHECK(maxweight_pick(std::vector<int>{4, 3}, 1, config, idx) == 1);
  // Single eligible class at server 1.
  CHECK(maxweight_pick(std::vector<int>{2, 9}, 0, config, idx) == 0);
  // Empty queues idle.
  CHECK(maxweight_pick(std::vector<int>{0, 0}, 1, config, idx) == -1);

  // Queue contents of classes the server cannot process never matter.
  const SystemConfig w = testcfg::w_model();
  const ActivityIndex w_idx = build_activity_index(w);
  SystemConfig w_partial = w;
  w_partial.activities = {{0, 0, 8.0}, {1, 0, 2.0}, {1, 1, 0.5}, {2, 1, 1.0}};
  const ActivityIndex partial_idx = build_activity_index(w_partial);
  RngStream rng(77);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<int> q = random_state(rng, 3);
    const int base = maxweight_pick(q, 0, w_partial, partial_idx);
    q[2] = static_cast<int>(rng.next_u64() % 50);  // class 3 not eligible at server 1
    CHECK(maxweight_pick(q, 0, w_partial, partial_idx) == base);
  }
}

TEST_CASE("class_priority_pick") {
  const SystemConfig config = testcfg::x_model();
  const ActivityIndex idx = build_activity_index(config);
  const SchedulingSpec priority = SchedulingSpec::class_priority({{1, 0}, {1, 0}});
  CHECK(class_priority_pick(std::vector<int>{3, 1}, 0, priority, idx) == 1);
  CHECK(class_priority_pick(std::vector<int>{3, 0}, 0, priority, idx) == 0);
  CHECK(class_priority_pick(std::vector<int>{0, 0}, 0, priority, idx) == -1);
}

TEST_CASE("routing stays within the eligible set") {
  const SystemConfig config = testcfg::w_model();
  const ActivityIndex idx = build_activity_index(config);
  RngStream rng(31);
  for (int trial = 0; trial < 300; ++trial) {
    const std::vector<int> z = random_state(rng, 6);
    for (int i = 0; i < 3; ++i) {
      const int k_wwta = wwta_route(z, i, idx);
      const int k_jsq = jsq_route(z, i, idx);
      CHECK(idx.at(i, k_wwta) >= 0);
      CHECK(idx.at(i, k_jsq) >= 0);
    }
  }
}

TEST_CASE("random tie-break stays within the argmin set") {
  const ActivityIndex idx = build_activity_index(testcfg::n_model());
  RngStream rng(41);
  // Empty system: both servers tie at zero weighted workload for class 1.
  std::array<int, 2> hits{0, 0};
  for (int trial = 0; trial < 2000; ++trial) {
    const int k = wwta_route(std::vector<int>{0, 0, 0}, 0, idx, TieBreak::kRandom, &rng);
    REQUIRE(k >= 0);
    REQUIRE(k <= 1);
    ++hits[k];
  }
  CHECK(hits[0] > 800);  // roughly balanced
  CHECK(hits[1] > 800);
  // A strict minimizer is never overridden.
  for (int trial = 0; trial < 50; ++trial) {
    CHECK(wwta_route(std::vector<int>{3, 0, 0}, 0, idx, TieBreak::kRandom, &rng) == 1);
  }
}
