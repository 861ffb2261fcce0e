#include "psslab/model.hpp"

#include <stdexcept>
#include <string>

#include "doctest.h"
#include "support/test_configs.hpp"

using namespace psslab;

namespace {

bool has_violation(const std::vector<std::string>& violations, const std::string& needle) {
  for (const std::string& v : violations) {
    if (v.find(needle) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("n-model matrices") {
  const SystemMatrices m = build_matrices(testcfg::n_model());
  REQUIRE(m.num_classes() == 2);
  REQUIRE(m.num_servers() == 2);
  REQUIRE(m.num_activities() == 3);

  const double c_expected[2][3] = {{1, 1, 0}, {0, 0, 1}};
  const double a_expected[2][3] = {{1, 0, 0}, {0, 1, 1}};
  const double r_expected[2][3] = {{1, 0.5, 0}, {0, 0, 1}};
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 3; ++j) {
      CHECK(m.constituency(i, j) == c_expected[i][j]);
      CHECK(m.consumption(i, j) == a_expected[i][j]);
      CHECK(m.output(i, j) == r_expected[i][j]);
    }
  }
}

TEST_CASE("single-activity matrices") {
  SystemConfig config;
  config.num_classes = 1;
  config.num_servers = 1;
  config.arrival_rates = {1.0};
  config.activities = {{0, 0, 2.0}};
  const SystemMatrices m = build_matrices(config);
  CHECK(m.constituency(0, 0) == 1.0);
  CHECK(m.consumption(0, 0) == 1.0);
  CHECK(m.output(0, 0) == 2.0);
}

TEST_CASE("w-model matrices have one 1 per column") {
  const SystemMatrices m = build_matrices(testcfg::w_model());
  REQUIRE(m.constituency.rows == 3);
  REQUIRE(m.consumption.rows == 2);
  REQUIRE(m.num_activities() == 6);
  for (int j = 0; j < 6; ++j) {
    int c_ones = 0, a_ones = 0;
    for (int i = 0; i < 3; ++i) c_ones += m.constituency(i, j) == 1.0;
    for (int k = 0; k < 2; ++k) a_ones += m.consumption(k, j) == 1.0;
    CHECK(c_ones == 1);
    CHECK(a_ones == 1);
    // R's column sum is the activity's mu.
    double col_sum = 0.0;
    for (int i = 0; i < 3; ++i) col_sum += m.output(i, j);
    CHECK(col_sum == doctest::Approx(testcfg::w_model().activities[j].rate));
  }
}

TEST_CASE("validate_config") {
  CHECK(validate_config(testcfg::n_model()).empty());

  SystemConfig zero_rate = testcfg::n_model();
  zero_rate.arrival_rates[1] = 0.0;
  CHECK(has_violation(validate_config(zero_rate), "arrival rate must be positive"));

  SystemConfig dup = testcfg::n_model();
  dup.activities.push_back({0, 0, 2.0});
  CHECK(has_violation(validate_config(dup), "duplicate activity"));

  SystemConfig uncovered = testcfg::n_model();
  uncovered.num_servers = 3;
  CHECK(has_violation(validate_config(uncovered), "server 3 has no activity"));

  SystemConfig bad_id = testcfg::n_model();
  bad_id.activities[0].server_id = 7;
  CHECK(has_violation(validate_config(bad_id), "server id out of range"));
}

TEST_CASE("scale_arrivals") {
  const SystemConfig n_scaled = scale_arrivals(testcfg::n_model(), 0.05);
  CHECK(n_scaled.arrival_rates[0] == doctest::Approx(1.235).epsilon(1e-12));
  CHECK(n_scaled.arrival_rates[1] == doctest::Approx(0.38).epsilon(1e-12));

  const SystemConfig w_scaled = scale_arrivals(testcfg::w_model(), 0.02);
  CHECK(w_scaled.arrival_rates[0] == doctest::Approx(3.92).epsilon(1e-12));
  CHECK(w_scaled.arrival_rates[1] == doctest::Approx(1.274).epsilon(1e-12));
  CHECK(w_scaled.arrival_rates[2] == doctest::Approx(0.392).epsilon(1e-12));

  const SystemConfig tiny = scale_arrivals(testcfg::n_model(), 1e-9);
  CHECK(tiny.arrival_rates[0] ==
        doctest::Approx(testcfg::n_model().arrival_rates[0]).epsilon(1e-8));

  CHECK_THROWS_AS(scale_arrivals(testcfg::n_model(), 0.0), std::invalid_argument);
  CHECK_THROWS_AS(scale_arrivals(testcfg::n_model(), 1.0), std::invalid_argument);

  // Composing two scalings equals one scaling by 1 - (1-r1)(1-r2).
  const SystemConfig twice = scale_arrivals(scale_arrivals(testcfg::w_model(), 0.1), 0.2);
  const SystemConfig once = scale_arrivals(testcfg::w_model(), 1.0 - 0.9 * 0.8);
  for (int i = 0; i < 3; ++i) {
    CHECK(twice.arrival_rates[i] == doctest::Approx(once.arrival_rates[i]).epsilon(1e-12));
  }
}

TEST_CASE("activity index") {
  const ActivityIndex idx = build_activity_index(testcfg::x_model());
  CHECK(idx.at(0, 0) == 0);
  CHECK(idx.at(1, 0) == 3);
  CHECK(idx.mean_service[1] == doctest::Approx(2.0));
  // Eligible lists sorted by server id regardless of declaration order.
  REQUIRE(idx.of_class[1].size() == 2);
  CHECK(idx.server_of[idx.of_class[1][0]] == 0);
  CHECK(idx.server_of[idx.of_class[1][1]] == 1);
}
