#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wassinf/rng.hpp"

namespace wassinf {

/// Finite ground space: N distinct labels, optionally with coordinates (one row per label).
class GroundSpace {
 public:
  explicit GroundSpace(std::vector<std::string> labels);
  GroundSpace(std::vector<std::string> labels, Eigen::MatrixXd coords);

  /// Points on the real line labelled "0", "1", ... in input order.
  static GroundSpace line(std::span<const double> points);

  std::size_t size() const { return labels_.size(); }
  const std::vector<std::string>& labels() const { return labels_; }
  bool has_coords() const { return coords_.has_value(); }
  const Eigen::MatrixXd& coords() const;
  std::optional<std::size_t> index_of(std::string_view label) const;

 private:
  std::vector<std::string> labels_;
  std::optional<Eigen::MatrixXd> coords_;
  std::unordered_map<std::string, std::size_t> index_;
};

/// Transport cost c(x, x') = d^p(x, x'). Always symmetric, nonnegative, zero on the diagonal.
/// With the metric flag set, c^(1/p) is additionally checked to satisfy the triangle inequality.
class CostMatrix {
 public:
  CostMatrix(Eigen::MatrixXd entries, double exponent, bool metric_flag);

  std::size_t size() const { return static_cast<std::size_t>(entries_.rows()); }
  double operator()(std::size_t i, std::size_t j) const {
    return entries_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
  }
  const Eigen::MatrixXd& entries() const { return entries_; }
  double exponent() const { return exponent_; }
  bool is_metric() const { return metric_flag_; }
  /// Largest entry, i.e. diam(X)^p for a metric cost.
  double max_entry() const;

 private:
  Eigen::MatrixXd entries_;
  double exponent_;
  bool metric_flag_;
};

/// Probability vector on the ground points. Zero entries are allowed.
class Measure {
 public:
  static constexpr double kSumTolerance = 1e-12;

  explicit Measure(Eigen::VectorXd mass);

  /// Accepts rounded input: rescales when |sum - 1| <= tolerance, rejects otherwise.
  static Measure renormalized(Eigen::VectorXd mass, double tolerance = 1e-6);

  std::size_t size() const { return static_cast<std::size_t>(mass_.size()); }
  double operator[](std::size_t i) const { return mass_(static_cast<Eigen::Index>(i)); }
  const Eigen::VectorXd& mass() const { return mass_; }
  double total() const { return mass_.sum(); }

 private:
  Eigen::VectorXd mass_;
};

/// Occurrence counts per ground point.
class Counts {
 public:
  explicit Counts(std::vector<std::int64_t> counts);

  std::size_t size() const { return counts_.size(); }
  std::int64_t n() const { return n_; }
  std::int64_t operator[](std::size_t i) const { return counts_[i]; }
  const std::vector<std::int64_t>& values() const { return counts_; }

 private:
  std::vector<std::int64_t> counts_;
  std::int64_t n_ = 0;
};

/// Euclidean distances of the space's coordinates raised to p.
CostMatrix build_cost(const GroundSpace& space, double p);

/// Regular L x L grid with integer coordinates (i, j), 1 <= i, j <= L.
std::pair<GroundSpace, CostMatrix> build_grid(int L, double p);

/// Symmetric Dirichlet(alpha, ..., alpha) draw on N points.
Measure sample_dirichlet(std::size_t N, double alpha, Rng& rng);

Measure normalize(const Counts& counts);

/// Multinomial(n, r) counts, sampled by sequential conditional binomials.
Counts sample_multinomial(std::int64_t n, const Eigen::VectorXd& probabilities, Rng& rng);

/// Checks symmetry, zero diagonal and nonnegativity; with check_triangle also the
/// triangle inequality of entries^(1/p). Throws DomainError naming the first violation.
void validate_cost(const Eigen::MatrixXd& entries, double exponent, bool check_triangle);

}  // namespace wassinf
