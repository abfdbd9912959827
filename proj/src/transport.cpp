#include "wassinf/transport.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "wassinf/errors.hpp"

namespace wassinf {

TransportSimplex::TransportSimplex(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                                   const Eigen::MatrixXd& cost, const TransportOptions& options)
    : m_(static_cast<int>(supply.size())),
      n_(static_cast<int>(demand.size())),
      supply_(supply),
      demand_(demand),
      cost_(cost),
      options_(options) {
  if (m_ < 1 || n_ < 1) throw DomainError("transport problem needs at least one supply and demand");
  if (cost.rows() != m_ || cost.cols() != n_) {
    throw DataError("cost matrix shape does not match supply and demand sizes");
  }
  const double total = std::max(1.0, std::max(supply.cwiseAbs().sum(), demand.cwiseAbs().sum()));
  for (int i = 0; i < m_; ++i) {
    if (!(supply_(i) >= -options_.feasibility_tol * total)) {
      throw DomainError("supplies must be nonnegative");
    }
    supply_(i) = std::max(0.0, supply_(i));
  }
  for (int j = 0; j < n_; ++j) {
    if (!(demand_(j) >= -options_.feasibility_tol * total)) {
      throw DomainError("demands must be nonnegative");
    }
    demand_(j) = std::max(0.0, demand_(j));
  }
  if (std::abs(supply_.sum() - demand_.sum()) > options_.feasibility_tol * total) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "unbalanced transport problem: supply " << supply_.sum() << " vs demand "
        << demand_.sum();
    throw DomainError(msg.str());
  }
  cost_scale_ = std::max(1.0, cost.cwiseAbs().maxCoeff());
  const std::size_t nodes = static_cast<std::size_t>(m_ + n_);
  parent_.resize(nodes);
  parent_arc_.resize(nodes);
  depth_.resize(nodes);
  potential_.resize(nodes);
  adj_start_.resize(nodes + 1);
  adj_arcs_.resize(2 * (nodes - 1));
  queue_.resize(nodes);
}

void TransportSimplex::solve() {
  const std::size_t cells = static_cast<std::size_t>(m_) * static_cast<std::size_t>(n_);
  const std::size_t nodes = static_cast<std::size_t>(m_ + n_);
  if (options_.bland_after == 0) options_.bland_after = 50 * nodes + 1000;
  if (options_.max_pivots == 0) options_.max_pivots = std::max<std::size_t>(100000, 20 * cells);

  if (!run_simplex(supply_, demand_)) {
    // Pivot limit reached: restart from a lexicographically perturbed instance,
    // then evaluate its basis on the original marginals.
    used_perturbation_ = true;
    const double delta =
        1e-7 * std::max(1.0, supply_.sum()) / static_cast<double>(m_ + n_);
    Eigen::VectorXd supply = supply_;
    Eigen::VectorXd demand = demand_;
    for (int i = 0; i < m_; ++i) supply(i) += delta;
    demand(n_ - 1) += delta * m_;
    const std::size_t saved = options_.max_pivots;
    options_.bland_after = 0;
    options_.max_pivots = std::max<std::size_t>(saved, 1000000);
    const bool done = run_simplex(supply, demand);
    options_.max_pivots = saved;
    if (!done) throw SolverError("transport simplex did not terminate after perturbation restart");
    flows_from_basis(supply_, demand_);
    rebuild_tree();
    if (!basis_is_optimal()) {
      throw SolverError("perturbed basis is not optimal for the original transport problem");
    }
  }
  finalize();
}

bool TransportSimplex::run_simplex(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand) {
  northwest_corner(supply, demand);
  rebuild_tree();
  pivots_ = 0;
  price_cursor_ = 0;
  for (;;) {
    int row = 0;
    int col = 0;
    if (!price(pivots_ >= options_.bland_after, row, col)) return true;
    if (pivots_ >= options_.max_pivots) return false;
    pivot(row, col);
    rebuild_tree();
  }
}

void TransportSimplex::northwest_corner(const Eigen::VectorXd& supply,
                                        const Eigen::VectorXd& demand) {
  basis_.clear();
  basis_.reserve(static_cast<std::size_t>(m_ + n_ - 1));
  Eigen::VectorXd a = supply;
  Eigen::VectorXd b = demand;
  int i = 0;
  int j = 0;
  for (;;) {
    const double f = std::min(a(i), b(j));
    basis_.push_back({i, j, f});
    a(i) -= f;
    b(j) -= f;
    if (i == m_ - 1 && j == n_ - 1) break;
    if (j == n_ - 1 || (i < m_ - 1 && a(i) <= b(j))) {
      ++i;
    } else {
      ++j;
    }
  }
}

void TransportSimplex::rebuild_tree() {
  const int nodes = m_ + n_;
  std::fill(adj_start_.begin(), adj_start_.end(), 0);
  for (const Arc& arc : basis_) {
    ++adj_start_[static_cast<std::size_t>(arc.row) + 1];
    ++adj_start_[static_cast<std::size_t>(m_ + arc.col) + 1];
  }
  for (int k = 0; k < nodes; ++k) adj_start_[k + 1] += adj_start_[k];
  std::vector<int>& fill = queue_;
  std::copy(adj_start_.begin(), adj_start_.end() - 1, fill.begin());
  for (int a = 0; a < static_cast<int>(basis_.size()); ++a) {
    adj_arcs_[static_cast<std::size_t>(fill[basis_[a].row]++)] = a;
    adj_arcs_[static_cast<std::size_t>(fill[m_ + basis_[a].col]++)] = a;
  }

  std::fill(depth_.begin(), depth_.end(), -1);
  std::size_t head = 0;
  std::size_t tail = 0;
  queue_[tail++] = 0;
  depth_[0] = 0;
  parent_[0] = -1;
  parent_arc_[0] = -1;
  potential_[0] = 0.0;
  while (head < tail) {
    const int k = queue_[head++];
    for (int e = adj_start_[k]; e < adj_start_[k + 1]; ++e) {
      const int a = adj_arcs_[static_cast<std::size_t>(e)];
      const Arc& arc = basis_[static_cast<std::size_t>(a)];
      const int other = k < m_ ? m_ + arc.col : arc.row;
      if (depth_[other] >= 0) continue;
      depth_[other] = depth_[k] + 1;
      parent_[other] = k;
      parent_arc_[other] = a;
      potential_[other] = cost_(arc.row, arc.col) - potential_[k];
      queue_[tail++] = other;
    }
  }
  if (tail != static_cast<std::size_t>(nodes)) {
    throw SolverError("transport basis is not a spanning tree");
  }
}

bool TransportSimplex::price(bool bland, int& row, int& col) {
  const double tol = options_.optimality_tol * cost_scale_;
  const std::size_t total = static_cast<std::size_t>(m_) * static_cast<std::size_t>(n_);
  const auto reduced = [&](std::size_t cell) {
    const int i = static_cast<int>(cell / static_cast<std::size_t>(n_));
    const int j = static_cast<int>(cell % static_cast<std::size_t>(n_));
    return cost_(i, j) - potential_[i] - potential_[m_ + j];
  };
  if (bland) {
    for (std::size_t cell = 0; cell < total; ++cell) {
      if (reduced(cell) < -tol) {
        row = static_cast<int>(cell / static_cast<std::size_t>(n_));
        col = static_cast<int>(cell % static_cast<std::size_t>(n_));
        return true;
      }
    }
    return false;
  }
  const std::size_t block =
      std::max<std::size_t>(16, static_cast<std::size_t>(std::sqrt(static_cast<double>(total))));
  double best = -tol;
  std::size_t best_cell = total;
  std::size_t scanned = 0;
  while (scanned < total) {
    for (std::size_t k = 0; k < block && scanned < total; ++k, ++scanned) {
      const double d = reduced(price_cursor_);
      if (d < best) {
        best = d;
        best_cell = price_cursor_;
      }
      if (++price_cursor_ == total) price_cursor_ = 0;
    }
    if (best_cell != total) break;
  }
  if (best_cell == total) return false;
  row = static_cast<int>(best_cell / static_cast<std::size_t>(n_));
  col = static_cast<int>(best_cell % static_cast<std::size_t>(n_));
  return true;
}

void TransportSimplex::pivot(int row, int col) {
  cycle_plus_.clear();
  cycle_minus_.clear();
  int a = row;
  int b = m_ + col;
  int steps_a = 0;
  int steps_b = 0;
  // Arcs alternate -, +, -, ... walking from either endpoint of the entering cell
  // towards their common ancestor.
  while (a != b) {
    if (depth_[a] >= depth_[b]) {
      (++steps_a % 2 == 1 ? cycle_minus_ : cycle_plus_).push_back(parent_arc_[a]);
      a = parent_[a];
    } else {
      (++steps_b % 2 == 1 ? cycle_minus_ : cycle_plus_).push_back(parent_arc_[b]);
      b = parent_[b];
    }
  }
  int leave = -1;
  double theta = std::numeric_limits<double>::infinity();
  long long leave_index = 0;
  for (const int arc : cycle_minus_) {
    const Arc& e = basis_[static_cast<std::size_t>(arc)];
    const long long index = static_cast<long long>(e.row) * n_ + e.col;
    if (e.flow < theta || (e.flow == theta && index < leave_index)) {
      theta = e.flow;
      leave = arc;
      leave_index = index;
    }
  }
  theta = std::max(0.0, theta);
  for (const int arc : cycle_plus_) basis_[static_cast<std::size_t>(arc)].flow += theta;
  for (const int arc : cycle_minus_) {
    double& f = basis_[static_cast<std::size_t>(arc)].flow;
    f = std::max(0.0, f - theta);
  }
  basis_[static_cast<std::size_t>(leave)] = {row, col, theta};
  ++pivots_;
  ++total_pivots_;
}

void TransportSimplex::flows_from_basis(const Eigen::VectorXd& supply,
                                        const Eigen::VectorXd& demand) {
  rebuild_tree();
  // Peel leaves: a leaf's only arc must carry its entire residual.
  const int nodes = m_ + n_;
  std::vector<double> residual(static_cast<std::size_t>(nodes));
  for (int i = 0; i < m_; ++i) residual[i] = supply(i);
  for (int j = 0; j < n_; ++j) residual[m_ + j] = demand(j);
  std::vector<int> degree(static_cast<std::size_t>(nodes));
  for (int k = 0; k < nodes; ++k) degree[k] = adj_start_[k + 1] - adj_start_[k];
  std::vector<char> done(basis_.size(), 0);
  std::vector<int> leaves;
  for (int k = 0; k < nodes; ++k) {
    if (degree[k] == 1) leaves.push_back(k);
  }
  while (!leaves.empty()) {
    const int k = leaves.back();
    leaves.pop_back();
    if (degree[k] != 1) continue;
    int arc = -1;
    for (int e = adj_start_[k]; e < adj_start_[k + 1]; ++e) {
      if (!done[adj_arcs_[e]]) {
        arc = adj_arcs_[e];
        break;
      }
    }
    Arc& edge = basis_[static_cast<std::size_t>(arc)];
    const int other = k < m_ ? m_ + edge.col : edge.row;
    edge.flow = std::max(0.0, residual[k]);
    residual[other] -= residual[k];
    done[arc] = 1;
    --degree[k];
    if (--degree[other] == 1) leaves.push_back(other);
  }
}

bool TransportSimplex::basis_is_optimal() const {
  const double tol = options_.optimality_tol * cost_scale_ * 10.0;
  for (int i = 0; i < m_; ++i) {
    for (int j = 0; j < n_; ++j) {
      if (cost_(i, j) - potential_[i] - potential_[m_ + j] < -tol) return false;
    }
  }
  return true;
}

void TransportSimplex::finalize() {
  flows_from_basis(supply_, demand_);
  value_ = 0.0;
  for (const Arc& arc : basis_) value_ += cost_(arc.row, arc.col) * arc.flow;
  u_.resize(m_);
  v_.resize(n_);
  for (int i = 0; i < m_; ++i) u_(i) = potential_[i];
  for (int j = 0; j < n_; ++j) v_(j) = potential_[m_ + j];
}

Eigen::MatrixXd TransportSimplex::plan() const {
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(m_, n_);
  for (const Arc& arc : basis_) w(arc.row, arc.col) += arc.flow;
  return w;
}

double transport_value(const Eigen::VectorXd& supply, const Eigen::VectorXd& demand,
                       const Eigen::MatrixXd& cost, const TransportOptions& options) {
  TransportSimplex solver(supply, demand, cost, options);
  solver.solve();
  return solver.value();
}

TransportSolution solve_ot(const Measure& r, const Measure& s, const CostMatrix& c,
                           const TransportOptions& options) {
  if (r.size() != s.size() || r.size() != c.size()) {
    throw DataError("measures and cost matrix have different numbers of points");
  }
  TransportSimplex solver(r.mass(), s.mass(), c.entries(), options);
  solver.solve();
  return {solver.value(), solver.plan(), solver.row_potentials(), solver.col_potentials()};
}

double wasserstein(const Measure& r, const Measure& s, const CostMatrix& c, double p,
                   const TransportOptions& options) {
  if (!(p >= 1.0)) throw DomainError("exponent p must be >= 1");
  const double value = solve_ot(r, s, c, options).value_pp;
  return std::pow(std::max(0.0, value), 1.0 / p);
}

double duality_gap(const TransportSolution& sol, const Measure& r, const Measure& s,
                   const CostMatrix& c) {
  const double primal = (c.entries().array() * sol.plan.array()).sum();
  const double dual = sol.dual_u.dot(r.mass()) + sol.dual_v.dot(s.mass());
  return std::abs(primal - dual);
}

Eigen::MatrixXd shortest_path_closure(const Eigen::MatrixXd& cost) {
  Eigen::MatrixXd d = cost;
  const Eigen::Index n = d.rows();
  for (Eigen::Index k = 0; k < n; ++k) {
    for (Eigen::Index i = 0; i < n; ++i) {
      const double dik = d(i, k);
      for (Eigen::Index j = 0; j < n; ++j) {
        d(i, j) = std::min(d(i, j), dik + d(k, j));
      }
    }
  }
  return d;
}

DualFace::DualFace(const Eigen::VectorXd& r, const Eigen::VectorXd& s, const CostMatrix& c,
                   double value_pp)
    : n_(c.size()), value_pp_(value_pp), lp_(2 * c.size() - 1) {
  if (static_cast<std::size_t>(r.size()) != n_ || static_cast<std::size_t>(s.size()) != n_) {
    throw DataError("measures and cost matrix have different numbers of points");
  }
  // Variables: u_1 .. u_{N-1} (u_0 pinned to 0), then v_0 .. v_{N-1}.
  const auto u_var = [](std::size_t x) { return static_cast<Eigen::Index>(x - 1); };
  const auto v_var = [this](std::size_t x) { return static_cast<Eigen::Index>(n_ - 1 + x); };
  for (std::size_t k = 0; k < lp_.num_vars(); ++k) lp_.set_free(k);
  Eigen::RowVectorXd row(static_cast<Eigen::Index>(lp_.num_vars()));
  for (std::size_t x = 0; x < n_; ++x) {
    for (std::size_t y = 0; y < n_; ++y) {
      row.setZero();
      if (x > 0) row(u_var(x)) = 1.0;
      row(v_var(y)) = 1.0;
      lp_.add_row(row, RowSense::kLessEqual, c(x, y));
    }
  }
  row.setZero();
  for (std::size_t x = 1; x < n_; ++x) row(u_var(x)) = r(static_cast<Eigen::Index>(x));
  for (std::size_t y = 0; y < n_; ++y) row(v_var(y)) = s(static_cast<Eigen::Index>(y));
  lp_.add_row(row, RowSense::kEqual, value_pp);
}

DualFace::DualFace(const Measure& r, const Measure& s, const CostMatrix& c)
    : DualFace(r.mass(), s.mass(), c, solve_ot(r, s, c).value_pp) {}

double DualFace::maximize(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                          const LpOptions& options) const {
  if (static_cast<std::size_t>(a.size()) != n_ || static_cast<std::size_t>(b.size()) != n_) {
    throw DataError("direction vectors have the wrong length");
  }
  Eigen::VectorXd objective(static_cast<Eigen::Index>(lp_.num_vars()));
  for (std::size_t x = 1; x < n_; ++x) {
    objective(static_cast<Eigen::Index>(x - 1)) = a(static_cast<Eigen::Index>(x));
  }
  objective.tail(static_cast<Eigen::Index>(n_)) = b;
  const LpResult result = lp_.maximize(objective, options);
  switch (result.status) {
    case LpStatus::kOptimal:
      return result.objective;
    case LpStatus::kUnbounded:
      return std::numeric_limits<double>::infinity();
    case LpStatus::kInfeasible:
      break;
  }
  std::ostringstream msg;
  msg.precision(17);
  msg << "dual optimal face is numerically infeasible (N=" << n_ << ", W_p^p=" << value_pp_
      << ")";
  throw SolverError(msg.str());
}

double directional_derivative(const Measure& r, const Measure& s, const CostMatrix& c,
                              const Eigen::VectorXd& h1, const Eigen::VectorXd& h2) {
  if (static_cast<std::size_t>(h1.size()) != c.size() ||
      static_cast<std::size_t>(h2.size()) != c.size()) {
    throw DataError("direction vectors have the wrong length");
  }
  const auto tangent = [](const Eigen::VectorXd& h) {
    return std::abs(h.sum()) <= 1e-9 * std::max(1.0, h.cwiseAbs().maxCoeff());
  };
  if (!tangent(h1) || !tangent(h2)) {
    throw DomainError("direction vectors must sum to zero");
  }
  return DualFace(r, s, c).maximize(h1, h2);
}

}  // namespace wassinf
