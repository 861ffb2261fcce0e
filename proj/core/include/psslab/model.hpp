#pragma once

#include <string>
#include <vector>

namespace psslab {

// Routing architecture: immediate routing to per-server buffers, or delayed
// routing from per-class queues.
enum class Architecture { kImmediate, kDelayed };

// One (class, server) pair a server may perform. Ids are 0-based internally;
// topology files use 1-based ids.
struct Activity {
  int class_id = 0;
  int server_id = 0;
  double rate = 0.0;  // service rate mu > 0; mean service time is 1/rate
};

struct SystemConfig {
  int num_classes = 0;
  int num_servers = 0;
  std::vector<Activity> activities;    // activity j in declaration order
  std::vector<double> arrival_rates;   // per class, length num_classes
  Architecture architecture = Architecture::kImmediate;

  int num_activities() const { return static_cast<int>(activities.size()); }
};

// Small dense row-major matrix. The problems here never exceed a few dozen
// rows/columns, so no sparse machinery.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

  double& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
  double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
};

// Constituency matrix (class x activity, 0/1), resource-consumption matrix
// (server x activity, 0/1) and output matrix (constituency * diag(mu)).
// Each column carries exactly one 1 in constituency and consumption.
struct SystemMatrices {
  Matrix constituency;  // I x J
  Matrix consumption;   // K x J
  Matrix output;        // I x J

  int num_classes() const { return constituency.rows; }
  int num_servers() const { return consumption.rows; }
  int num_activities() const { return constituency.cols; }

  // Recovers (class, server, rate) of activity j from the matrix columns.
  int class_of(int j) const;
  int server_of(int j) const;
  double rate_of(int j) const { return output(class_of(j), j); }
};

// Returns every violated invariant of the config; empty means valid.
std::vector<std::string> validate_config(const SystemConfig& config);

// Builds the three matrices; requires a valid config.
SystemMatrices build_matrices(const SystemConfig& config);

// Returns a copy with arrival rates lambda * (1 - r). Requires 0 < r < 1.
SystemConfig scale_arrivals(const SystemConfig& config, double r);

// Per-class and per-server activity lists, plus mean service times,
// precomputed once and shared by the policy and engine code.
struct ActivityIndex {
  std::vector<std::vector<int>> of_class;   // class -> activity ids
  std::vector<std::vector<int>> of_server;  // server -> activity ids
  std::vector<int> class_of;                // activity -> class
  std::vector<int> server_of;               // activity -> server
  std::vector<double> rate;                 // mu_j
  std::vector<double> mean_service;         // m_j = 1 / mu_j
  std::vector<int> lookup;                  // class * K + server -> j, or -1

  int num_servers = 0;
  int at(int class_id, int server_id) const {
    return lookup[static_cast<size_t>(class_id) * num_servers + server_id];
  }
};

ActivityIndex build_activity_index(const SystemConfig& config);

}  // namespace psslab
