#include "wassinf/tree.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "wassinf/errors.hpp"

namespace wassinf {

Tree::Tree(std::vector<std::string> labels, std::vector<std::size_t> parent,
           std::vector<double> weight)
    : labels_(std::move(labels)), parent_(std::move(parent)), weight_(std::move(weight)) {
  const std::size_t n = labels_.size();
  if (n == 0) throw DomainError("a tree needs at least one node");
  if (parent_.size() != n || weight_.size() != n) {
    throw DataError("tree parent and weight arrays must have one entry per node");
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (!index_.emplace(labels_[i], i).second) {
      throw DataError("duplicate tree node '" + labels_[i] + "'");
    }
  }
  std::size_t roots = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (parent_[i] >= n) throw DataError("parent index out of range");
    if (parent_[i] == i) {
      root_ = i;
      ++roots;
      weight_[i] = 0.0;
    } else if (!(weight_[i] > 0.0) || !std::isfinite(weight_[i])) {
      throw DomainError("edge weight of '" + labels_[i] + "' must be positive and finite");
    }
  }
  if (roots != 1) throw DataError("a tree needs exactly one root");

  // Depths by walking up with memoization; a walk longer than N steps means a cycle.
  constexpr std::size_t kUnknown = static_cast<std::size_t>(-1);
  depth_.assign(n, kUnknown);
  depth_[root_] = 0;
  std::vector<std::size_t> path;
  for (std::size_t i = 0; i < n; ++i) {
    path.clear();
    std::size_t x = i;
    while (depth_[x] == kUnknown) {
      path.push_back(x);
      if (path.size() > n) throw DataError("tree parent map contains a cycle");
      x = parent_[x];
    }
    std::size_t d = depth_[x];
    for (auto it = path.rbegin(); it != path.rend(); ++it) depth_[*it] = ++d;
  }
  order_.resize(n);
  for (std::size_t i = 0; i < n; ++i) order_[i] = i;
  std::stable_sort(order_.begin(), order_.end(),
                   [this](std::size_t a, std::size_t b) { return depth_[a] > depth_[b]; });
}

Tree Tree::from_edges(const std::vector<Edge>& edges) {
  std::vector<std::string> labels;
  std::unordered_map<std::string, std::size_t> index;
  const auto intern = [&](const std::string& label) {
    auto [it, inserted] = index.emplace(label, labels.size());
    if (inserted) labels.push_back(label);
    return it->second;
  };
  for (const auto& [child, parent, w] : edges) {
    intern(child);
    intern(parent);
  }
  const std::size_t n = labels.size();
  if (n == 0) throw DataError("tree has no edges");
  constexpr std::size_t kNone = static_cast<std::size_t>(-1);
  std::vector<std::size_t> parent(n, kNone);
  std::vector<double> weight(n, 0.0);
  for (const auto& [child, par, w] : edges) {
    const std::size_t c = index.at(child);
    if (parent[c] != kNone) throw DataError("node '" + child + "' has more than one parent row");
    parent[c] = index.at(par);
    weight[c] = w;
  }
  std::size_t orphans = 0;
  std::size_t orphan = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (parent[i] == kNone) {
      ++orphans;
      orphan = i;
    }
  }
  bool explicit_root = false;
  for (std::size_t i = 0; i < n; ++i) explicit_root = explicit_root || parent[i] == i;
  if (explicit_root) {
    if (orphans != 0) throw DataError("node '" + labels[orphan] + "' has no parent");
  } else {
    if (orphans != 1) throw DataError("cannot infer a unique tree root");
    parent[orphan] = orphan;
  }
  return Tree(std::move(labels), std::move(parent), std::move(weight));
}

Tree Tree::chain(std::span<const double> points) {
  const std::size_t n = points.size();
  if (n == 0) throw DomainError("a chain needs at least one point");
  std::vector<std::string> labels(n);
  std::vector<std::size_t> parent(n);
  std::vector<double> weight(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    labels[j] = std::to_string(j);
    if (j + 1 < n) {
      if (!(points[j + 1] > points[j])) throw DomainError("points must be strictly increasing");
      parent[j] = j + 1;
      weight[j] = points[j + 1] - points[j];
    } else {
      parent[j] = j;
    }
  }
  return Tree(std::move(labels), std::move(parent), std::move(weight));
}

std::optional<std::size_t> Tree::index_of(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::vector<std::size_t>> Tree::children_closure() const {
  std::vector<std::vector<std::size_t>> closure(size());
  for (std::size_t x = 0; x < size(); ++x) {
    std::size_t y = x;
    closure[y].push_back(x);
    while (y != root_) {
      y = parent_[y];
      closure[y].push_back(x);
    }
  }
  for (auto& list : closure) std::sort(list.begin(), list.end());
  return closure;
}

double tree_distance(const Tree& tree, std::size_t x, std::size_t y) {
  if (x >= tree.size() || y >= tree.size()) throw DataError("tree node index out of range");
  double total = 0.0;
  while (x != y) {
    if (tree.depth(x) >= tree.depth(y)) {
      total += tree.weight(x);
      x = tree.parent(x);
    } else {
      total += tree.weight(y);
      y = tree.parent(y);
    }
  }
  return total;
}

double tree_distance(const Tree& tree, std::string_view x, std::string_view y) {
  const auto ix = tree.index_of(x);
  const auto iy = tree.index_of(y);
  if (!ix) throw DataError("unknown tree node '" + std::string(x) + "'");
  if (!iy) throw DataError("unknown tree node '" + std::string(y) + "'");
  return tree_distance(tree, *ix, *iy);
}

Eigen::VectorXd apply_S(const Tree& tree, const Eigen::VectorXd& u) {
  if (static_cast<std::size_t>(u.size()) != tree.size()) throw DataError("vector length mismatch");
  Eigen::VectorXd out = u;
  for (std::size_t x : tree.bottom_up()) {
    if (x != tree.root()) out(static_cast<Eigen::Index>(tree.parent(x))) += out(static_cast<Eigen::Index>(x));
  }
  return out;
}

Eigen::VectorXd apply_D(const Tree& tree, const Eigen::VectorXd& v) {
  if (static_cast<std::size_t>(v.size()) != tree.size()) throw DataError("vector length mismatch");
  Eigen::VectorXd out = v;
  for (std::size_t x = 0; x < tree.size(); ++x) {
    if (x != tree.root()) {
      out(static_cast<Eigen::Index>(x)) -= v(static_cast<Eigen::Index>(tree.parent(x)));
    }
  }
  return out;
}

Eigen::VectorXd invert_D(const Tree& tree, const Eigen::VectorXd& d) {
  if (static_cast<std::size_t>(d.size()) != tree.size()) throw DataError("vector length mismatch");
  Eigen::VectorXd v = d;
  const auto& order = tree.bottom_up();
  for (auto it = order.rbegin(); it != order.rend(); ++it) {
    const std::size_t x = *it;
    if (x != tree.root()) {
      v(static_cast<Eigen::Index>(x)) += v(static_cast<Eigen::Index>(tree.parent(x)));
    }
  }
  return v;
}

CostMatrix tree_cost(const Tree& tree, double p) {
  const std::size_t n = tree.size();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t x = 0; x < n; ++x) {
    for (std::size_t y = x + 1; y < n; ++y) {
      const double d = std::pow(tree_distance(tree, x, y), p);
      c(static_cast<Eigen::Index>(x), static_cast<Eigen::Index>(y)) = d;
      c(static_cast<Eigen::Index>(y), static_cast<Eigen::Index>(x)) = d;
    }
  }
  return CostMatrix(std::move(c), p, true);
}

double tree_null_max(const Tree& tree, const Eigen::VectorXd& g, double p) {
  const Eigen::VectorXd sg = apply_S(tree, g);
  double total = 0.0;
  for (std::size_t x = 0; x < tree.size(); ++x) {
    if (x == tree.root()) continue;
    total += std::abs(sg(static_cast<Eigen::Index>(x))) * std::pow(tree.weight(x), p);
  }
  return total;
}

LimitDraws tree_limit_sample(const Tree& tree, const Measure& r, double p, std::size_t M,
                             std::uint64_t seed, std::size_t workers) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("p must be a finite number >= 1");
  if (M == 0) throw DomainError("the number of draws M must be positive");
  if (r.size() != tree.size()) throw DataError("measure and tree have different numbers of nodes");
  LimitDraws out;
  out.regime = Regime::kOneSampleNull;
  out.p = p;
  out.seed = seed;
  out.draws.assign(M, 0.0);
  const GaussianSpec spec(r);
  std::vector<double> wp(tree.size());
  for (std::size_t x = 0; x < tree.size(); ++x) wp[x] = std::pow(tree.weight(x), p);
  const auto& order = tree.bottom_up();
  parallel_for(M, workers == 0 ? default_workers() : workers, [&](std::size_t i) {
    Rng rng = make_stream(seed, StreamTag::kTreeDraw, i);
    Eigen::VectorXd sg = spec.sample(rng);
    double total = 0.0;
    for (std::size_t x : order) {
      if (x == tree.root()) continue;
      const double value = sg(static_cast<Eigen::Index>(x));
      total += std::abs(value) * wp[x];
      sg(static_cast<Eigen::Index>(tree.parent(x))) += value;
    }
    out.draws[i] = std::pow(total, 1.0 / p);
  });
  return out;
}

LimitDraws line_limit_sample(std::span<const double> points, const Measure& r, std::size_t M,
                             std::uint64_t seed, std::size_t workers) {
  const std::size_t n = points.size();
  if (M == 0) throw DomainError("the number of draws M must be positive");
  if (n == 0) throw DomainError("at least one point is required");
  for (std::size_t j = 0; j + 1 < n; ++j) {
    if (!(points[j + 1] > points[j])) throw DomainError("points must be strictly increasing");
  }
  if (r.size() != n) throw DataError("measure and points have different lengths");
  LimitDraws out;
  out.regime = Regime::kOneSampleNull;
  out.p = 2.0;
  out.seed = seed;
  out.draws.assign(M, 0.0);
  if (n == 1) return out;

  // Cumulative masses t_1 <= ... <= t_{N-1} <= 1 and the increments between them.
  std::vector<double> t(n - 1);
  double acc = 0.0;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    acc += r[j];
    t[j] = std::min(acc, 1.0);
  }
  std::vector<double> step_sd(n);
  double prev = 0.0;
  for (std::size_t j = 0; j + 1 < n; ++j) {
    step_sd[j] = std::sqrt(std::max(0.0, t[j] - prev));
    prev = t[j];
  }
  step_sd[n - 1] = std::sqrt(std::max(0.0, 1.0 - prev));
  std::vector<double> gap_sq(n - 1);
  for (std::size_t j = 0; j + 1 < n; ++j) {
    const double gap = points[j + 1] - points[j];
    gap_sq[j] = gap * gap;
  }

  parallel_for(M, workers == 0 ? default_workers() : workers, [&](std::size_t i) {
    Rng rng = make_stream(seed, StreamTag::kLineDraw, i);
    std::normal_distribution<double> normal(0.0, 1.0);
    // Brownian motion at the cumulative masses, then B(t) = W(t) - t W(1).
    std::vector<double> w(n - 1);
    double level = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) {
      level += step_sd[j] * normal(rng);
      w[j] = level;
    }
    const double w1 = level + step_sd[n - 1] * normal(rng);
    double total = 0.0;
    for (std::size_t j = 0; j + 1 < n; ++j) total += std::abs(w[j] - t[j] * w1) * gap_sq[j];
    out.draws[i] = std::sqrt(total);
  });
  return out;
}

}  // namespace wassinf
