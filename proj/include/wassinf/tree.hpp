#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <tuple>
#include <unordered_map>
#include <vector>

#include "wassinf/ground.hpp"
#include "wassinf/limit_laws.hpp"

namespace wassinf {

/// Rooted tree with positive edge weights; node i hangs below parent(i) at distance weight(i).
class Tree {
 public:
  using Edge = std::tuple<std::string, std::string, double>;  // child, parent, weight

  /// parent[i] == i marks the root. The root's weight is ignored and stored as 0.
  Tree(std::vector<std::string> labels, std::vector<std::size_t> parent,
       std::vector<double> weight);

  /// Builds a tree from (child, parent, weight) rows. A row with child == parent names the
  /// root; without one the root is the unique node that never appears as a child.
  static Tree from_edges(const std::vector<Edge>& edges);

  /// Chain x_1 - x_2 - ... - x_N rooted at x_N with weights x_{j+1} - x_j.
  static Tree chain(std::span<const double> points);

  std::size_t size() const { return labels_.size(); }
  std::size_t root() const { return root_; }
  std::size_t parent(std::size_t i) const { return parent_[i]; }
  double weight(std::size_t i) const { return weight_[i]; }
  const std::vector<std::string>& labels() const { return labels_; }
  std::optional<std::size_t> index_of(std::string_view label) const;
  std::size_t depth(std::size_t i) const { return depth_[i]; }

  /// Nodes ordered so that every child precedes its parent; the root comes last.
  const std::vector<std::size_t>& bottom_up() const { return order_; }

  /// children(x) including x itself, for every node. O(N^2) memory; for inspection only.
  std::vector<std::vector<std::size_t>> children_closure() const;

 private:
  std::vector<std::string> labels_;
  std::vector<std::size_t> parent_;
  std::vector<double> weight_;
  std::vector<std::size_t> depth_;
  std::vector<std::size_t> order_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t root_ = 0;
};

double tree_distance(const Tree& tree, std::size_t x, std::size_t y);
double tree_distance(const Tree& tree, std::string_view x, std::string_view y);

/// (S u)_x = sum of u over the subtree below x, x included.
Eigen::VectorXd apply_S(const Tree& tree, const Eigen::VectorXd& u);
/// (D v)_x = v_x - v_parent(x), and (D v)_root = v_root.
Eigen::VectorXd apply_D(const Tree& tree, const Eigen::VectorXd& v);
/// Inverse of apply_D: prefix sums along the path from the root.
Eigen::VectorXd invert_D(const Tree& tree, const Eigen::VectorXd& d);

/// c(x, y) = d_T(x, y)^p.
CostMatrix tree_cost(const Tree& tree, double p);

/// sum over x != root of |(S g)_x| w_x^p; equals max <g, u> over the dual set of d_T^p.
double tree_null_max(const Tree& tree, const Eigen::VectorXd& g, double p);

/// Limit of n^{1/(2p)} W_p(r_hat_n, r) on a tree metric. Draw i depends only on (seed, i).
LimitDraws tree_limit_sample(const Tree& tree, const Measure& r, double p, std::size_t M,
                             std::uint64_t seed, std::size_t workers = 0);

/// Limit of n^{1/4} W_2(r_hat_n, r) for points on the real line, through a Brownian bridge
/// evaluated at the cumulative masses.
LimitDraws line_limit_sample(std::span<const double> points, const Measure& r, std::size_t M,
                             std::uint64_t seed, std::size_t workers = 0);

}  // namespace wassinf
