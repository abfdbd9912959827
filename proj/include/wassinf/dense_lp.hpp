#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace wassinf {

enum class RowSense { kLessEqual, kEqual, kGreaterEqual };

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-10;
  double pivot_tol = 1e-12;
  /// Pivots under the largest-coefficient rule before switching to Bland's rule.
  std::size_t dantzig_budget = 0;  // 0 = 20 * (rows + cols)
  /// Hard limit across both phases; exceeding it raises SolverError.
  std::size_t max_pivots = 0;  // 0 = 200 * (rows + cols) + 10000
};

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  double objective = 0.0;
  Eigen::VectorXd x;
};

/// Small dense linear program solved by the two-phase tableau simplex:
///
///   maximize   c^T x
///   subject to a_i^T x (<=, =, >=) b_i,   x_j >= 0 unless marked free.
///
/// Meant for problems with at most a few hundred rows.
class DenseLp {
 public:
  explicit DenseLp(std::size_t num_vars);

  void set_free(std::size_t var);
  void add_row(const Eigen::RowVectorXd& coeffs, RowSense sense, double rhs);

  std::size_t num_vars() const { return num_vars_; }
  std::size_t num_rows() const { return rhs_.size(); }

  LpResult maximize(const Eigen::VectorXd& objective, const LpOptions& options = {}) const;

 private:
  std::size_t num_vars_;
  std::vector<bool> free_;
  std::vector<Eigen::RowVectorXd> rows_;
  std::vector<RowSense> senses_;
  std::vector<double> rhs_;
};

}  // namespace wassinf
