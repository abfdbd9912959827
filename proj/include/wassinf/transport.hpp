#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

#include "wassinf/dense_lp.hpp"
#include "wassinf/ground.hpp"

namespace wassinf {

struct TransportOptions {
  double feasibility_tol = 1e-9;
  double optimality_tol = 1e-10;
  /// Pivots under block pricing before switching to Bland's rule (0 = automatic).
  std::size_t bland_after = 0;
  /// Pivot limit for one simplex run; when exceeded the solve restarts on a
  /// perturbed instance (0 = automatic).
  std::size_t max_pivots = 0;
};

/// Exact solution of the transportation problem between two measures.
struct TransportSolution {
  double value_pp = 0.0;   ///< optimal value W_p^p
  Eigen::MatrixXd plan;    ///< optimal vertex coupling
  Eigen::VectorXd dual_u;  ///< row potentials, dual_u(0) = 0
  Eigen::VectorXd dual_v;  ///< column potentials
};

/// Transportation simplex on a dense m x n instance with equal supply and demand totals.
///
/// The basis is a spanning tree of the bipartite graph, initialized by the
/// northwest-corner rule. Entering cells are chosen by block pricing; after
/// `bland_after` pivots the smallest-index rule (Bland) is used so degenerate
/// cycling cannot occur. If the pivot limit is still reached, the solve restarts
/// on a lexicographically perturbed instance and the resulting basis is re-evaluated
/// on the original data.
class TransportSimplex {
 public:
  TransportSimplex(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                   const Eigen::MatrixXd& cost, const TransportOptions& options = {});

  void solve();

  double value() const { return value_; }
  Eigen::MatrixXd plan() const;
  const Eigen::VectorXd& row_potentials() const { return u_; }
  const Eigen::VectorXd& col_potentials() const { return v_; }
  std::size_t pivots() const { return total_pivots_; }
  bool used_perturbation() const { return used_perturbation_; }

 private:
  struct Arc {
    int row;
    int col;
    double flow;
  };

  bool run_simplex(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand);
  void northwest_corner(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand);
  void rebuild_tree();
  bool price(bool bland, int& row, int& col);
  void pivot(int row, int col);
  void flows_from_basis(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand);
  bool basis_is_optimal() const;
  void finalize();

  int m_;
  int n_;
  Eigen::VectorXd supply_;
  Eigen::VectorXd demand_;
  Eigen::MatrixXd cost_;
  TransportOptions options_;
  double cost_scale_ = 1.0;

  std::vector<Arc> basis_;
  std::vector<int> parent_;
  std::vector<int> parent_arc_;
  std::vector<int> depth_;
  std::vector<double> potential_;
  std::vector<int> adj_start_;
  std::vector<int> adj_arcs_;
  std::vector<int> queue_;
  std::vector<int> cycle_plus_;
  std::vector<int> cycle_minus_;
  std::size_t price_cursor_ = 0;
  std::size_t pivots_ = 0;
  std::size_t total_pivots_ = 0;
  bool used_perturbation_ = false;

  double value_ = 0.0;
  Eigen::VectorXd u_;
  Eigen::VectorXd v_;
};

/// Optimal value of the balanced transportation problem only.
double transport_value(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                       const Eigen::MatrixXd& cost, const TransportOptions& options = {});

TransportSolution solve_ot(const Measure& r, const Measure& s, const CostMatrix& c,
                           const TransportOptions& options = {});

/// W_p(r, s) = (W_p^p)^(1/p).
double wasserstein(const Measure& r, const Measure& s, const CostMatrix& c, double p,
                   const TransportOptions& options = {});

/// |sum c w - (<u, r> + <v, s>)|.
double duality_gap(const TransportSolution& sol, const Measure& r, const Measure& s,
                   const CostMatrix& c);

/// Shortest-path closure of a cost matrix (Floyd-Warshall). Equal to the input when
/// the cost already satisfies the triangle inequality, e.g. d^1 for a metric d.
Eigen::MatrixXd shortest_path_closure(const Eigen::MatrixXd& cost);

/// The optimal face of the dual transport program,
///   { (u, v) : u_x + v_x' <= c(x, x'), <u, r> + <v, s> = W_p^p(r, s) },
/// with the shift direction (u + t, v - t) removed by pinning u_0 = 0.
class DualFace {
 public:
  DualFace(const Eigen::VectorXd& r, const Eigen::VectorXd& s, const CostMatrix& c,
           double value_pp);
  DualFace(const Measure& r, const Measure& s, const CostMatrix& c);

  double value_pp() const { return value_pp_; }

  /// max <a, u> + <b, v> over the face; +infinity when unbounded. a and b must each sum
  /// to zero (otherwise the objective is not invariant under the pinned shift).
  double maximize(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                  const LpOptions& options = {}) const;

 private:
  std::size_t n_;
  double value_pp_;
  DenseLp lp_;
};

/// Directional derivative of (r, s) -> W_p^p(r, s) in direction (h1, h2): the maximum of
/// <u, h1> + <v, h2> over the optimal dual face. Returns +infinity when the direction
/// leaves the simplex through a zero-mass coordinate.
double directional_derivative(const Measure& r, const Measure& s, const CostMatrix& c,
                              const Eigen::VectorXd& h1, const Eigen::VectorXd& h2);

}  // namespace wassinf
