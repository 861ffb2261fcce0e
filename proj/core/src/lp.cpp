#include "psslab/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace psslab {

namespace {

constexpr double kPivotTol = 1e-9;
constexpr double kFeasTol = 1e-8;

// Gaussian elimination with partial pivoting; returns false when singular.
bool solve_square(Matrix a, std::vector<double> b, std::vector<double>& out) {
  const int n = a.rows;
  std::vector<int> perm(n);
  for (int i = 0; i < n; ++i) perm[i] = i;

  for (int col = 0; col < n; ++col) {
    int best = col;
    double best_abs = std::fabs(a(col, col));
    for (int r = col + 1; r < n; ++r) {
      const double v = std::fabs(a(r, col));
      if (v > best_abs) {
        best_abs = v;
        best = r;
      }
    }
    if (best_abs < 1e-12) return false;
    if (best != col) {
      for (int c = 0; c < n; ++c) std::swap(a(col, c), a(best, c));
      std::swap(b[col], b[best]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double f = a(r, col) / a(col, col);
      if (f == 0.0) continue;
      for (int c = col; c < n; ++c) a(r, c) -= f * a(col, c);
      b[r] -= f * b[col];
    }
  }
  out.assign(n, 0.0);
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a(r, c) * out[c];
    out[r] = s / a(r, r);
  }
  return true;
}

// Working tableau: rows x (cols + 1), last column is the rhs.
struct Tableau {
  int rows = 0;
  int cols = 0;
  std::vector<double> t;
  std::vector<int> basis;    // basic variable per row
  std::vector<int> row_ids;  // original constraint index per row

  double& at(int r, int c) { return t[static_cast<size_t>(r) * (cols + 1) + c]; }
  double at(int r, int c) const { return t[static_cast<size_t>(r) * (cols + 1) + c]; }
  double& rhs(int r) { return t[static_cast<size_t>(r) * (cols + 1) + cols]; }
  double rhs(int r) const { return t[static_cast<size_t>(r) * (cols + 1) + cols]; }

  void pivot(int pr, int pc) {
    const double p = at(pr, pc);
    for (int c = 0; c <= cols; ++c) at(pr, c) /= p;
    for (int r = 0; r < rows; ++r) {
      if (r == pr) continue;
      const double f = at(r, pc);
      if (f == 0.0) continue;
      for (int c = 0; c <= cols; ++c) at(r, c) -= f * at(pr, c);
    }
    basis[pr] = pc;
  }

  void drop_row(int r) {
    t.erase(t.begin() + static_cast<size_t>(r) * (cols + 1),
            t.begin() + static_cast<size_t>(r + 1) * (cols + 1));
    basis.erase(basis.begin() + r);
    row_ids.erase(row_ids.begin() + r);
    --rows;
  }

  void drop_columns_from(int first) {
    std::vector<double> nt;
    nt.reserve(static_cast<size_t>(rows) * (first + 1));
    for (int r = 0; r < rows; ++r) {
      for (int c = 0; c < first; ++c) nt.push_back(at(r, c));
      nt.push_back(rhs(r));
    }
    t = std::move(nt);
    cols = first;
  }
};

// Runs simplex iterations on the tableau for the given objective. Bland's
// rule: entering column = smallest index with negative reduced cost, leaving
// row = smallest basic variable among minimum-ratio rows.
LpStatus iterate(Tableau& tab, const std::vector<double>& cost, int* degenerate_pivots) {
  const int max_iters = 20000 * (tab.rows + tab.cols + 1);
  for (int iter = 0; iter < max_iters; ++iter) {
    // Reduced costs r_j = c_j - c_B . column_j, recomputed each step; the
    // tableaus here are tiny so this costs nothing and avoids drift.
    int enter = -1;
    for (int j = 0; j < tab.cols; ++j) {
      double red = cost[j];
      for (int r = 0; r < tab.rows; ++r) red -= cost[tab.basis[r]] * tab.at(r, j);
      if (red < -kPivotTol) {
        enter = j;
        break;  // Bland: smallest eligible index
      }
    }
    if (enter < 0) return LpStatus::kOptimal;

    int leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int r = 0; r < tab.rows; ++r) {
      const double a = tab.at(r, enter);
      if (a > kPivotTol) {
        const double ratio = tab.rhs(r) / a;
        if (ratio < best_ratio - 1e-12 ||
            (ratio < best_ratio + 1e-12 && (leave < 0 || tab.basis[r] < tab.basis[leave]))) {
          best_ratio = ratio;
          leave = r;
        }
      }
    }
    if (leave < 0) return LpStatus::kUnbounded;
    if (best_ratio < kPivotTol && degenerate_pivots) ++(*degenerate_pivots);
    tab.pivot(leave, enter);
  }
  throw std::runtime_error("simplex failed to terminate");
}

}  // namespace

LpSolution solve_lp(const StandardLp& lp) {
  const int m = lp.num_rows();
  const int n = lp.num_cols();

  // Orient every row so the rhs is nonnegative; remember the flips so the
  // returned duals refer to the caller's row orientation.
  Matrix eq = lp.eq;
  std::vector<double> rhs = lp.rhs;
  std::vector<double> row_sign(m, 1.0);
  for (int r = 0; r < m; ++r) {
    if (rhs[r] < 0.0) {
      row_sign[r] = -1.0;
      rhs[r] = -rhs[r];
      for (int c = 0; c < n; ++c) eq(r, c) = -eq(r, c);
    }
  }

  LpSolution sol;

  // Phase 1: artificial columns n..n+m-1.
  Tableau tab;
  tab.rows = m;
  tab.cols = n + m;
  tab.t.assign(static_cast<size_t>(m) * (tab.cols + 1), 0.0);
  tab.basis.resize(m);
  tab.row_ids.resize(m);
  for (int r = 0; r < m; ++r) {
    for (int c = 0; c < n; ++c) tab.at(r, c) = eq(r, c);
    tab.at(r, n + r) = 1.0;
    tab.rhs(r) = rhs[r];
    tab.basis[r] = n + r;
    tab.row_ids[r] = r;
  }
  std::vector<double> phase1_cost(n + m, 0.0);
  for (int c = n; c < n + m; ++c) phase1_cost[c] = 1.0;

  if (iterate(tab, phase1_cost, &sol.degenerate_pivots) != LpStatus::kOptimal) {
    throw std::runtime_error("phase-1 simplex cannot be unbounded");
  }
  double infeas = 0.0;
  for (int r = 0; r < tab.rows; ++r) {
    if (tab.basis[r] >= n) infeas += tab.rhs(r);
  }
  if (infeas > kFeasTol) {
    sol.status = LpStatus::kInfeasible;
    return sol;
  }

  // Drive remaining artificials out of the basis; rows that offer no real
  // pivot are redundant constraints and get dropped.
  for (int r = tab.rows - 1; r >= 0; --r) {
    if (tab.basis[r] < n) continue;
    int pc = -1;
    for (int c = 0; c < n; ++c) {
      if (std::fabs(tab.at(r, c)) > kPivotTol) {
        pc = c;
        break;
      }
    }
    if (pc >= 0) {
      tab.pivot(r, pc);
    } else {
      tab.drop_row(r);
    }
  }
  tab.drop_columns_from(n);

  std::vector<double> cost = lp.cost;
  sol.status = iterate(tab, cost, &sol.degenerate_pivots);
  if (sol.status != LpStatus::kOptimal) return sol;

  // Re-solve the final basis against the original data: B x_B = b for the
  // primal point and B^T y = c_B for the duals.
  const int mb = tab.rows;
  Matrix basis_mat(mb, mb);
  Matrix basis_mat_t(mb, mb);
  std::vector<double> b_active(mb), c_basic(mb);
  for (int r = 0; r < mb; ++r) {
    b_active[r] = rhs[tab.row_ids[r]];
    c_basic[r] = lp.cost[tab.basis[r]];
    for (int c = 0; c < mb; ++c) {
      basis_mat(r, c) = eq(tab.row_ids[r], tab.basis[c]);
      basis_mat_t(c, r) = basis_mat(r, c);
    }
  }
  std::vector<double> xb, y_active;
  if (!solve_square(basis_mat, b_active, xb) ||
      !solve_square(basis_mat_t, c_basic, y_active)) {
    throw std::runtime_error("simplex produced a singular basis");
  }

  sol.x.assign(n, 0.0);
  for (int r = 0; r < mb; ++r) sol.x[tab.basis[r]] = xb[r];
  sol.dual.assign(m, 0.0);  // duals of dropped redundant rows stay 0
  for (int r = 0; r < mb; ++r) {
    sol.dual[tab.row_ids[r]] = row_sign[tab.row_ids[r]] * y_active[r];
  }
  sol.objective = 0.0;
  for (int c = 0; c < n; ++c) sol.objective += lp.cost[c] * sol.x[c];
  return sol;
}

}  // namespace psslab
