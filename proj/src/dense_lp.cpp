#include "wassinf/dense_lp.hpp"

#include <cmath>
#include <limits>

#include "wassinf/errors.hpp"

namespace wassinf {

namespace {

// Tableau in canonical form: rows_ x (cols_ + 1), last column is the right-hand side.
class Tableau {
 public:
  Tableau(Eigen::MatrixXd t, std::vector<std::size_t> basis, std::size_t num_artificial_start,
          const LpOptions& options)
      : t_(std::move(t)),
        basis_(std::move(basis)),
        artificial_start_(num_artificial_start),
        options_(options) {
    const std::size_t size = static_cast<std::size_t>(t_.rows() + t_.cols());
    dantzig_budget_ = options.dantzig_budget ? options.dantzig_budget : 20 * size;
    max_pivots_ = options.max_pivots ? options.max_pivots : 200 * size + 10000;
  }

  std::size_t rows() const { return static_cast<std::size_t>(t_.rows()); }
  std::size_t cols() const { return static_cast<std::size_t>(t_.cols()) - 1; }
  double rhs(std::size_t i) const { return t_(idx(i), t_.cols() - 1); }
  const std::vector<std::size_t>& basis() const { return basis_; }

  // Runs the simplex for `cost` (length cols()). Columns at or beyond `allowed_end`
  // never enter. Returns false when the objective is unbounded.
  bool optimize(const Eigen::VectorXd& cost, std::size_t allowed_end) {
    Eigen::VectorXd reduced = reduced_costs(cost);
    const double scale = std::max(1.0, cost.cwiseAbs().maxCoeff());
    const double tol = options_.optimality_tol * scale;
    for (;;) {
      const bool bland = pivots_ >= dantzig_budget_;
      std::size_t enter = cols();
      double best = tol;
      for (std::size_t j = 0; j < allowed_end; ++j) {
        if (reduced(idx(j)) > best) {
          enter = j;
          if (bland) break;
          best = reduced(idx(j));
        }
      }
      if (enter == cols()) return true;

      std::size_t leave = rows();
      double best_ratio = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < rows(); ++i) {
        const double a = t_(idx(i), idx(enter));
        if (a <= options_.pivot_tol) continue;
        const double ratio = std::max(0.0, rhs(i)) / a;
        if (ratio < best_ratio - 1e-15 ||
            (ratio <= best_ratio + 1e-15 && leave < rows() && basis_[i] < basis_[leave])) {
          best_ratio = std::min(best_ratio, ratio);
          leave = i;
        }
      }
      if (leave == rows()) return false;
      pivot(leave, enter);
      const double factor = reduced(idx(enter));
      reduced -= factor * t_.row(idx(leave)).head(idx(cols())).transpose();
      reduced(idx(enter)) = 0.0;
    }
  }

  double objective(const Eigen::VectorXd& cost) const {
    double value = 0.0;
    for (std::size_t i = 0; i < rows(); ++i) value += cost(idx(basis_[i])) * rhs(i);
    return value;
  }

  // Moves basic artificial variables out of the basis where a structural pivot exists.
  void drive_out_artificials() {
    for (std::size_t i = 0; i < rows(); ++i) {
      if (basis_[i] < artificial_start_) continue;
      std::size_t best = cols();
      double best_abs = options_.pivot_tol * 1e3;
      for (std::size_t j = 0; j < artificial_start_; ++j) {
        const double a = std::abs(t_(idx(i), idx(j)));
        if (a > best_abs) {
          best_abs = a;
          best = j;
        }
      }
      // No candidate: the row is redundant and the artificial stays basic at ~0.
      if (best != cols()) pivot(i, best);
    }
  }

 private:
  static Eigen::Index idx(std::size_t v) { return static_cast<Eigen::Index>(v); }

  Eigen::VectorXd reduced_costs(const Eigen::VectorXd& cost) const {
    Eigen::VectorXd reduced = cost;
    for (std::size_t i = 0; i < rows(); ++i) {
      const double cb = cost(idx(basis_[i]));
      if (cb != 0.0) {
        reduced -= cb * t_.row(idx(i)).head(idx(cols())).transpose();
      }
    }
    return reduced;
  }

  void pivot(std::size_t r, std::size_t q) {
    if (++pivots_ > max_pivots_) throw SolverError("dense simplex exceeded its pivot limit");
    const Eigen::Index ri = idx(r);
    t_.row(ri) /= t_(ri, idx(q));
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == ri) continue;
      const double f = t_(i, idx(q));
      if (f != 0.0) t_.row(i) -= f * t_.row(ri);
    }
    basis_[r] = q;
  }

  Eigen::MatrixXd t_;
  std::vector<std::size_t> basis_;
  std::size_t artificial_start_;
  LpOptions options_;
  std::size_t pivots_ = 0;
  std::size_t dantzig_budget_ = 0;
  std::size_t max_pivots_ = 0;
};

}  // namespace

DenseLp::DenseLp(std::size_t num_vars) : num_vars_(num_vars), free_(num_vars, false) {}

void DenseLp::set_free(std::size_t var) { free_.at(var) = true; }

void DenseLp::add_row(const Eigen::RowVectorXd& coeffs, RowSense sense, double rhs) {
  if (static_cast<std::size_t>(coeffs.size()) != num_vars_) {
    throw DataError("row length does not match the number of variables");
  }
  rows_.push_back(coeffs);
  senses_.push_back(sense);
  rhs_.push_back(rhs);
}

LpResult DenseLp::maximize(const Eigen::VectorXd& objective, const LpOptions& options) const {
  if (static_cast<std::size_t>(objective.size()) != num_vars_) {
    throw DataError("objective length does not match the number of variables");
  }
  const std::size_t m = rows_.size();

  // Column layout: structural (free variables split into +/- parts), slacks, artificials.
  std::vector<std::size_t> pos(num_vars_);
  std::size_t structural = 0;
  for (std::size_t j = 0; j < num_vars_; ++j) {
    pos[j] = structural;
    structural += free_[j] ? 2 : 1;
  }
  std::size_t slacks = 0;
  std::size_t artificials = 0;
  for (const auto s : senses_) {
    if (s != RowSense::kEqual) ++slacks;
    if (s != RowSense::kLessEqual) ++artificials;
  }
  // Rows with negative right-hand side are flipped, which may turn <= into >=.
  std::vector<RowSense> senses = senses_;
  std::vector<double> sign(m, 1.0);
  artificials = 0;
  for (std::size_t i = 0; i < m; ++i) {
    if (rhs_[i] < 0.0) {
      sign[i] = -1.0;
      if (senses[i] == RowSense::kLessEqual) {
        senses[i] = RowSense::kGreaterEqual;
      } else if (senses[i] == RowSense::kGreaterEqual) {
        senses[i] = RowSense::kLessEqual;
      }
    }
    if (senses[i] != RowSense::kLessEqual) ++artificials;
  }
  const std::size_t art_start = structural + slacks;
  const std::size_t ncols = art_start + artificials;

  Eigen::MatrixXd t = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(m),
                                            static_cast<Eigen::Index>(ncols + 1));
  std::vector<std::size_t> basis(m);
  std::size_t next_slack = structural;
  std::size_t next_art = art_start;
  for (std::size_t i = 0; i < m; ++i) {
    const auto ri = static_cast<Eigen::Index>(i);
    for (std::size_t j = 0; j < num_vars_; ++j) {
      const double a = sign[i] * rows_[i](static_cast<Eigen::Index>(j));
      t(ri, static_cast<Eigen::Index>(pos[j])) = a;
      if (free_[j]) t(ri, static_cast<Eigen::Index>(pos[j] + 1)) = -a;
    }
    t(ri, static_cast<Eigen::Index>(ncols)) = sign[i] * rhs_[i];
    switch (senses[i]) {
      case RowSense::kLessEqual:
        t(ri, static_cast<Eigen::Index>(next_slack)) = 1.0;
        basis[i] = next_slack++;
        break;
      case RowSense::kGreaterEqual:
        t(ri, static_cast<Eigen::Index>(next_slack++)) = -1.0;
        t(ri, static_cast<Eigen::Index>(next_art)) = 1.0;
        basis[i] = next_art++;
        break;
      case RowSense::kEqual:
        t(ri, static_cast<Eigen::Index>(next_art)) = 1.0;
        basis[i] = next_art++;
        break;
    }
  }

  Tableau tableau(std::move(t), std::move(basis), art_start, options);
  LpResult result;

  if (artificials > 0) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ncols));
    phase1.tail(static_cast<Eigen::Index>(artificials)).setConstant(-1.0);
    tableau.optimize(phase1, ncols);
    double scale = 1.0;
    for (const double b : rhs_) scale = std::max(scale, std::abs(b));
    if (tableau.objective(phase1) < -options.feasibility_tol * scale) {
      result.status = LpStatus::kInfeasible;
      return result;
    }
    tableau.drive_out_artificials();
  }

  Eigen::VectorXd cost = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ncols));
  for (std::size_t j = 0; j < num_vars_; ++j) {
    cost(static_cast<Eigen::Index>(pos[j])) = objective(static_cast<Eigen::Index>(j));
    if (free_[j]) cost(static_cast<Eigen::Index>(pos[j] + 1)) = -objective(static_cast<Eigen::Index>(j));
  }
  if (!tableau.optimize(cost, art_start)) {
    result.status = LpStatus::kUnbounded;
    result.objective = std::numeric_limits<double>::infinity();
    return result;
  }

  Eigen::VectorXd expanded = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ncols));
  for (std::size_t i = 0; i < tableau.rows(); ++i) {
    expanded(static_cast<Eigen::Index>(tableau.basis()[i])) = tableau.rhs(i);
  }
  result.x.resize(static_cast<Eigen::Index>(num_vars_));
  for (std::size_t j = 0; j < num_vars_; ++j) {
    double v = expanded(static_cast<Eigen::Index>(pos[j]));
    if (free_[j]) v -= expanded(static_cast<Eigen::Index>(pos[j] + 1));
    result.x(static_cast<Eigen::Index>(j)) = v;
  }
  result.objective = objective.dot(result.x);
  result.status = LpStatus::kOptimal;
  return result;
}

}  // namespace wassinf
