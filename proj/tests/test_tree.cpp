#include <doctest.h>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "wassinf/errors.hpp"
#include "wassinf/inference.hpp"
#include "wassinf/tree.hpp"

using namespace wassinf;
using testing::dense_dual_null_max;
using testing::random_balanced;
using testing::random_simplex;

namespace {

// Random tree: node i > 0 attaches to a uniformly chosen earlier node; labels are shuffled
// relative to the construction order so that the root is not always node 0.
Tree random_tree(std::size_t n, Rng& rng) {
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  std::shuffle(perm.begin(), perm.end(), rng);
  std::uniform_real_distribution<double> w(0.1, 2.0);
  std::vector<std::string> labels(n);
  std::vector<std::size_t> parent(n);
  std::vector<double> weight(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) labels[perm[i]] = "n" + std::to_string(i);
  parent[perm[0]] = perm[0];
  for (std::size_t i = 1; i < n; ++i) {
    std::uniform_int_distribution<std::size_t> pick(0, i - 1);
    parent[perm[i]] = perm[pick(rng)];
    weight[perm[i]] = w(rng);
  }
  return Tree(labels, parent, weight);
}

double mean(const std::vector<double>& v) {
  double total = 0.0;
  for (double x : v) total += x;
  return total / static_cast<double>(v.size());
}

}  // namespace

TEST_CASE("tree distances") {
  const Tree chain = Tree::from_edges({{"a", "b", 1.0}, {"b", "c", 2.0}, {"c", "c", 0.0}});
  CHECK(tree_distance(chain, "a", "a") == 0.0);
  CHECK(tree_distance(chain, "a", "c") == doctest::Approx(3.0));
  CHECK(tree_distance(chain, "c", "a") == doctest::Approx(3.0));
  const Tree star = Tree::from_edges({{"u", "z", 1.5}, {"v", "z", 2.5}});
  CHECK(star.labels()[star.root()] == "z");
  CHECK(tree_distance(star, "u", "v") == doctest::Approx(4.0));
  CHECK_THROWS_AS(tree_distance(star, "u", "w"), DataError);
}

TEST_CASE("tree validation") {
  CHECK_THROWS_AS(Tree::from_edges({{"a", "b", 1.0}, {"b", "a", 1.0}}), DataError);
  CHECK_THROWS_AS(Tree::from_edges({{"a", "r", 1.0}, {"b", "s", 1.0}}), DataError);
  CHECK_THROWS_AS(Tree::from_edges({{"a", "r", 0.0}}), DomainError);
  CHECK_THROWS_AS(Tree::from_edges({{"a", "r", -1.0}}), DomainError);
  CHECK_THROWS_AS(Tree::from_edges({{"a", "r", 1.0}, {"a", "s", 1.0}, {"s", "r", 1.0}}), DataError);
  CHECK_THROWS_AS(Tree({"a", "b"}, {0, 1}, {0.0, 0.0}), DataError);
  CHECK_THROWS_AS(Tree({"a", "b", "c"}, {0, 2, 1}, {0.0, 1.0, 1.0}), DataError);
  CHECK_THROWS_AS(Tree::chain(std::vector<double>{0.0, 1.0, 1.0}), DomainError);
  const Tree single = Tree::from_edges({{"x", "x", 0.0}});
  CHECK(single.size() == 1);
}

TEST_CASE("children closure and S on a chain") {
  const Tree chain = Tree::from_edges({{"a", "b", 1.0}, {"b", "root", 1.0}});
  const std::size_t a = *chain.index_of("a");
  const std::size_t b = *chain.index_of("b");
  const std::size_t root = *chain.index_of("root");
  const Eigen::VectorXd s = apply_S(chain, Eigen::VectorXd::Ones(3));
  CHECK(s(static_cast<Eigen::Index>(root)) == 3.0);
  CHECK(s(static_cast<Eigen::Index>(b)) == 2.0);
  CHECK(s(static_cast<Eigen::Index>(a)) == 1.0);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(3);
  e(static_cast<Eigen::Index>(root)) = 1.0;
  CHECK(apply_S(chain, e) == e);
  const auto closure = chain.children_closure();
  CHECK(closure[root].size() == 3);
  CHECK(closure[a] == std::vector<std::size_t>{a});
}

TEST_CASE("D of a constant and its inverse") {
  Rng rng(2);
  const Tree tree = random_tree(12, rng);
  const Eigen::VectorXd d = apply_D(tree, Eigen::VectorXd::Constant(12, 2.5));
  for (std::size_t x = 0; x < 12; ++x) {
    CHECK(d(static_cast<Eigen::Index>(x)) == (x == tree.root() ? 2.5 : 0.0));
  }
  for (int k = 0; k < 20; ++k) {
    const Eigen::VectorXd v = Eigen::VectorXd::Random(12);
    CHECK((invert_D(tree, apply_D(tree, v)) - v).cwiseAbs().maxCoeff() <= 1e-12);
  }
}

TEST_CASE("S and D are adjoint") {
  Rng rng(3);
  std::uniform_int_distribution<std::size_t> size(1, 50);
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int t = 0; t < 100; ++t) {
    const std::size_t n = size(rng);
    const Tree tree = random_tree(n, rng);
    Eigen::VectorXd u(static_cast<Eigen::Index>(n));
    for (auto& x : u) x = normal(rng);
    const Eigen::VectorXd su = apply_S(tree, u);
    // Closure-list definition of S as an independent check of the bottom-up pass.
    const auto closure = tree.children_closure();
    for (std::size_t x = 0; x < n; ++x) {
      double total = 0.0;
      for (std::size_t y : closure[x]) total += u(static_cast<Eigen::Index>(y));
      CHECK(std::abs(total - su(static_cast<Eigen::Index>(x))) <= 1e-12 * (1.0 + std::abs(total)) * n);
    }
    for (int k = 0; k < 5; ++k) {
      Eigen::VectorXd v(static_cast<Eigen::Index>(n));
      for (auto& x : v) x = normal(rng);
      const double lhs = u.dot(v);
      const double rhs = su.dot(apply_D(tree, v));
      CHECK(std::abs(lhs - rhs) <= 1e-12 * (1.0 + u.cwiseAbs().sum() * v.cwiseAbs().sum()));
    }
  }
}

TEST_CASE("tree cost is the path metric") {
  Rng rng(4);
  const Tree tree = random_tree(9, rng);
  const CostMatrix c = tree_cost(tree, 1.0);
  CHECK(c.is_metric());
  CHECK((shortest_path_closure(c.entries()) - c.entries()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("closed-form null maximum on trees") {
  Rng rng(5);
  std::uniform_int_distribution<std::size_t> size(2, 10);
  for (int t = 0; t < 50; ++t) {
    const std::size_t n = size(rng);
    const Tree tree = random_tree(n, rng);
    const double p = t % 2 == 0 ? 1.0 : 2.0;
    const CostMatrix c = tree_cost(tree, p);
    const Eigen::VectorXd g = random_balanced(n, rng);
    const double closed = tree_null_max(tree, g, p);
    CHECK(std::abs(max_dual_null(g, c) - closed) <= 1e-8);
    CHECK(std::abs(dense_dual_null_max(g, c.entries()) - closed) <= 1e-8);
    // The potential with (D u)_x = sign((S g)_x) w_x^p attains the bound and is dual feasible.
    const Eigen::VectorXd sg = apply_S(tree, g);
    Eigen::VectorXd du = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    for (std::size_t x = 0; x < n; ++x) {
      if (x == tree.root()) continue;
      const auto i = static_cast<Eigen::Index>(x);
      du(i) = (sg(i) >= 0 ? 1.0 : -1.0) * std::pow(tree.weight(x), p);
    }
    const Eigen::VectorXd u = invert_D(tree, du);
    CHECK(std::abs(g.dot(u) - closed) <= 1e-10);
    if (p == 1.0) {
      for (std::size_t x = 0; x < n; ++x) {
        for (std::size_t y = 0; y < n; ++y) {
          CHECK(u(static_cast<Eigen::Index>(x)) - u(static_cast<Eigen::Index>(y)) <=
                c(x, y) + 1e-12);
        }
      }
    }
  }
}

TEST_CASE("tree limit sampler: degenerate and two-point cases") {
  const Tree single = Tree::from_edges({{"x", "x", 0.0}});
  const auto zero = tree_limit_sample(single, Measure(Eigen::VectorXd::Ones(1)), 2.0, 100, 1);
  for (double d : zero.draws) CHECK(d == 0.0);
  const Tree two = Tree::from_edges({{"leaf", "root", 1.0}});
  const auto draws = tree_limit_sample(two, Measure(Eigen::Vector2d(0.5, 0.5)), 1.0, 100000, 2);
  CHECK(std::abs(mean(draws.draws) - 0.5 * std::sqrt(2.0 / M_PI)) <= 0.005);
  CHECK_THROWS_AS(tree_limit_sample(two, Measure(Eigen::Vector2d(0.5, 0.5)), 0.5, 10, 2), DomainError);
  CHECK_THROWS_AS(tree_limit_sample(two, Measure(Eigen::Vector2d(0.5, 0.5)), 1.0, 0, 2), DomainError);
}

TEST_CASE("tree limit sampler matches the general null limit") {
  Rng rng(6);
  for (int t = 0; t < 3; ++t) {
    const std::size_t n = 4 + 5 * static_cast<std::size_t>(t);
    const Tree tree = random_tree(n, rng);
    const double p = t == 1 ? 2.0 : 1.0;
    const Measure r(random_simplex(n, rng, t == 2));
    const auto a = tree_limit_sample(tree, r, p, 20000, 10 + t);
    const auto b =
        limit_sample(Regime::kOneSampleNull, r, std::nullopt, tree_cost(tree, p), p, 1.0, 20000, 20 + t);
    CHECK(ks_distance(a.draws, b.draws) <= 0.02);
  }
}

TEST_CASE("tree limit sampler is deterministic across worker counts") {
  Rng rng(7);
  const Tree tree = random_tree(10, rng);
  const Measure r(random_simplex(10, rng, false));
  CHECK(tree_limit_sample(tree, r, 2.0, 500, 3, 1).draws ==
        tree_limit_sample(tree, r, 2.0, 500, 3, 3).draws);
}

TEST_CASE("line limit sampler") {
  const std::vector<double> one{0.5};
  for (double d : line_limit_sample(one, Measure(Eigen::VectorXd::Ones(1)), 50, 1).draws) {
    CHECK(d == 0.0);
  }
  // N = 2: sqrt(|B(1/2)|) with B(1/2) ~ N(0, 1/4), so E[draw^2] = E|B| = 0.5 sqrt(2/pi).
  const std::vector<double> two{0.0, 1.0};
  const auto draws = line_limit_sample(two, Measure(Eigen::Vector2d(0.5, 0.5)), 100000, 2);
  double sq = 0.0;
  for (double d : draws.draws) sq += d * d;
  CHECK(std::abs(sq / 100000 - 0.5 * std::sqrt(2.0 / M_PI)) <= 0.005);
  const std::vector<double> unsorted{0.0, 2.0, 1.0};
  CHECK_THROWS_AS(line_limit_sample(unsorted, Measure(Eigen::Vector3d(0.2, 0.3, 0.5)), 10, 1),
                  DomainError);
}

TEST_CASE("line limit sampler matches the chain tree") {
  Rng rng(8);
  std::uniform_real_distribution<double> gap(0.2, 1.5);
  std::vector<double> points{0.0};
  for (int j = 0; j < 4; ++j) points.push_back(points.back() + gap(rng));
  const Measure r(random_simplex(points.size(), rng, false));
  const auto line = line_limit_sample(points, r, 20000, 1);
  const auto chain = tree_limit_sample(Tree::chain(points), r, 2.0, 20000, 2);
  CHECK(ks_distance(line.draws, chain.draws) <= 0.02);
}
