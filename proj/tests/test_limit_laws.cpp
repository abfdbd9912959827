#include <doctest.h>

#include <cmath>
#include <random>

#include "support/oracles.hpp"
#include "wassinf/errors.hpp"
#include "wassinf/inference.hpp"
#include "wassinf/limit_laws.hpp"
#include "wassinf/transport.hpp"

using namespace wassinf;
using testing::dense_dual_null_max;
using testing::random_balanced;
using testing::random_euclidean_cost;
using testing::random_simplex;

namespace {

double mean(const std::vector<double>& v) {
  double total = 0.0;
  for (double x : v) total += x;
  return total / static_cast<double>(v.size());
}

CostMatrix two_point(double kappa) {
  Eigen::MatrixXd c(2, 2);
  c << 0.0, kappa, kappa, 0.0;
  return CostMatrix(c, 1.0, true);
}

}  // namespace

TEST_CASE("multinomial covariance") {
  Eigen::VectorXd r(3);
  r << 0.2, 0.3, 0.5;
  const Eigen::MatrixXd sigma = multinomial_covariance(r);
  CHECK(sigma.rowwise().sum().cwiseAbs().maxCoeff() <= 1e-15);
  for (int i = 0; i < 3; ++i) CHECK(sigma(i, i) == doctest::Approx(r(i) * (1 - r(i))));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sigma);
  CHECK(eig.eigenvalues().minCoeff() >= -1e-14);
}

TEST_CASE("multinomial gaussian on a point mass is zero") {
  Eigen::VectorXd r = Eigen::VectorXd::Zero(4);
  r(0) = 1.0;
  const GaussianSpec spec{Measure(r)};
  Rng rng(3);
  for (int i = 0; i < 100; ++i) CHECK(spec.sample(rng).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("multinomial gaussian on two points") {
  const GaussianSpec spec{Measure(Eigen::Vector2d(0.5, 0.5))};
  Rng rng(11);
  double sum_sq = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd g = spec.sample(rng);
    CHECK(g(1) == -g(0));
    sum_sq += g(0) * g(0);
  }
  CHECK(sum_sq / n == doctest::Approx(0.25).epsilon(0.02));
}

TEST_CASE("multinomial gaussian covariance matches Sigma(r)") {
  Eigen::VectorXd r(3);
  r << 0.2, 0.3, 0.5;
  const GaussianSpec spec{Measure(r)};
  Rng rng(5);
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(3, 3);
  const int n = 100000;
  double worst_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const Eigen::VectorXd g = spec.sample(rng);
    worst_sum = std::max(worst_sum, std::abs(g.sum()));
    acc += g * g.transpose();
  }
  acc /= n;
  CHECK(worst_sum <= 1e-15);
  CHECK((acc - multinomial_covariance(r)).cwiseAbs().maxCoeff() <= 0.01);
}

TEST_CASE("null dual maximum: closed forms") {
  CHECK(max_dual_null(Eigen::VectorXd::Zero(2), two_point(1.0)) == 0.0);
  const CostMatrix c = two_point(2.5);
  for (double g : {0.3, -0.7, 1.9}) {
    const Eigen::Vector2d v(g, -g);
    CHECK(max_dual_null(v, c) == doctest::Approx(2.5 * std::abs(g)).epsilon(1e-12));
    CHECK(dense_dual_null_max(v, c.entries()) == doctest::Approx(2.5 * std::abs(g)).epsilon(1e-12));
  }
  CHECK_THROWS_AS(max_dual_null(Eigen::Vector2d(1.0, 0.5), c), DomainError);
}

TEST_CASE("null dual maximum matches the direct dual LP") {
  Rng rng(2024);
  std::uniform_int_distribution<int> size(2, 8);
  for (int trial = 0; trial < 200; ++trial) {
    const auto n = static_cast<std::size_t>(size(rng));
    const double p = trial % 2 == 0 ? 1.0 : 2.0;
    const CostMatrix c = random_euclidean_cost(n, p, rng);
    const Eigen::VectorXd g = random_balanced(n, rng);
    const double value = max_dual_null(g, c);
    CHECK(value >= 0.0);
    CHECK(std::abs(value - dense_dual_null_max(g, c.entries())) <= 1e-8);
  }
}

TEST_CASE("alternative face maximum on r = s reduces to the null maximum") {
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 5);
    const CostMatrix c = random_euclidean_cost(n, trial % 2 ? 2.0 : 1.0, rng);
    const Measure r(random_simplex(n, rng, false));
    const Eigen::VectorXd g = random_balanced(n, rng);
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    const double null_max = max_dual_null(g, c);
    CHECK(max_dual_alt(g, zero, r, r, c, 1.0) == doctest::Approx(null_max).epsilon(1e-8));
    // With weights (G, -G) at lambda = 1/2 the face v = -u doubles the pairing.
    CHECK(max_dual_alt(g, -g, r, r, c, 0.5) ==
          doctest::Approx(std::sqrt(2.0) * null_max).epsilon(1e-8));
    CHECK(max_dual_alt(zero, zero, r, r, c, 0.5) == doctest::Approx(0.0));
  }
}

TEST_CASE("one-dimensional search agrees with the face LP") {
  Rng rng(99);
  for (int instance = 0; instance < 10; ++instance) {
    const std::size_t n = 2 + static_cast<std::size_t>(instance % 4);
    const double p = instance % 2 ? 2.0 : 1.0;
    const CostMatrix c = random_euclidean_cost(n, p, rng);
    const Measure r(random_simplex(n, rng, false));
    const Measure s(random_simplex(n, rng, false));
    const double w = wasserstein(r, s, c, p);
    const AlternativeLimit limit(r, s, c, p);
    std::uniform_real_distribution<double> unif(0.05, 0.95);
    for (int k = 0; k < 20; ++k) {
      const Eigen::VectorXd g = random_balanced(n, rng);
      const Eigen::VectorXd h = random_balanced(n, rng);
      const double lambda = unif(rng);
      const double face = max_dual_alt(g, h, r, s, c, lambda);
      const double expected = std::pow(w, 1.0 - p) / p * face;
      CHECK(std::abs(altalt_value(g, h, r, s, c, lambda, p) - expected) <= 1e-6);
      CHECK(std::abs(limit.face_lp(g, h, lambda) - expected) <= 1e-9 * (1 + std::abs(expected)));
    }
  }
}

TEST_CASE("one-dimensional search: zero, homogeneity and barrier") {
  Rng rng(4);
  const CostMatrix c = random_euclidean_cost(4, 2.0, rng);
  const Measure r(random_simplex(4, rng, false));
  const Measure s(random_simplex(4, rng, false));
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(4);
  CHECK(altalt_value(zero, zero, r, s, c, 0.4, 2.0) == 0.0);
  const Eigen::VectorXd g = random_balanced(4, rng);
  const Eigen::VectorXd h = random_balanced(4, rng);
  const double once = altalt_value(g, h, r, s, c, 0.4, 2.0);
  CHECK(altalt_value(2.0 * g, 2.0 * h, r, s, c, 0.4, 2.0) == doctest::Approx(2.0 * once).epsilon(1e-6));

  Eigen::VectorXd r0 = r.mass();
  r0(3) = 0.0;
  r0 /= r0.sum();
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(4);
  bad(3) = 1.0;
  bad(0) = -1.0;
  CHECK_THROWS_AS(altalt_value(bad, zero, Measure(r0), s, c, 1.0, 2.0), DomainError);
}

TEST_CASE("limit_sample: two-point null is half-normal") {
  const CostMatrix c = two_point(1.0);
  const Measure r(Eigen::Vector2d(0.5, 0.5));
  const LimitDraws draws =
      limit_sample(Regime::kOneSampleNull, r, std::nullopt, c, 1.0, 1.0, 100000, 8);
  REQUIRE(draws.draws.size() == 100000);
  CHECK(std::abs(mean(draws.draws) - 0.5 * std::sqrt(2.0 / M_PI)) <= 0.005);
  for (double d : draws.draws) CHECK(d >= 0.0);
  CHECK_FALSE(draws.lambda.has_value());
}

TEST_CASE("limit_sample: degenerate and invalid arguments") {
  const CostMatrix one(Eigen::MatrixXd::Zero(1, 1), 2.0, true);
  const Measure point(Eigen::VectorXd::Ones(1));
  for (Regime regime : {Regime::kOneSampleNull, Regime::kTwoSampleNull}) {
    const LimitDraws d = limit_sample(regime, point, std::nullopt, one, 2.0, 0.5, 50, 1);
    for (double x : d.draws) CHECK(x == 0.0);
  }
  const CostMatrix c = two_point(1.0);
  const Measure r(Eigen::Vector2d(0.5, 0.5));
  CHECK_THROWS_AS(limit_sample(Regime::kOneSampleNull, r, std::nullopt, c, 1.0, 1.0, 0, 1), DomainError);
  CHECK_THROWS_AS(limit_sample(Regime::kTwoSampleNull, r, std::nullopt, c, 1.0, 1.5, 10, 1), DomainError);
  CHECK_THROWS_AS(limit_sample(Regime::kTwoSampleNull, r, std::nullopt, c, 1.0, -0.1, 10, 1), DomainError);
  CHECK_THROWS_AS(limit_sample(Regime::kOneSampleAlt, r, std::nullopt, c, 1.0, 1.0, 10, 1), ConfigError);
}

TEST_CASE("limit_sample is independent of the worker count") {
  Rng rng(6);
  const CostMatrix c = random_euclidean_cost(5, 2.0, rng);
  const Measure r(random_simplex(5, rng, false));
  const Measure s(random_simplex(5, rng, false));
  for (Regime regime : {Regime::kOneSampleNull, Regime::kOneSampleAlt, Regime::kTwoSampleNull,
                        Regime::kTwoSampleAlt}) {
    LimitOptions one;
    one.workers = 1;
    LimitOptions many;
    many.workers = 4;
    const auto a = limit_sample(regime, r, s, c, 2.0, 0.4, 300, 42, one);
    const auto b = limit_sample(regime, r, s, c, 2.0, 0.4, 300, 42, many);
    CHECK(a.draws == b.draws);
    const auto other = limit_sample(regime, r, s, c, 2.0, 0.4, 300, 43, many);
    CHECK(a.draws != other.draws);
  }
}

TEST_CASE("limit_sample: alternative methods agree draw by draw") {
  Rng rng(8);
  const CostMatrix c = random_euclidean_cost(4, 2.0, rng);
  const Measure r(random_simplex(4, rng, false));
  const Measure s(random_simplex(4, rng, false));
  LimitOptions face;
  face.alt_method = AltMethod::kFaceLp;
  for (Regime regime : {Regime::kOneSampleAlt, Regime::kTwoSampleAlt}) {
    const auto a = limit_sample(regime, r, s, c, 2.0, 0.3, 200, 5);
    const auto b = limit_sample(regime, r, s, c, 2.0, 0.3, 200, 5, face);
    for (std::size_t i = 0; i < a.draws.size(); ++i) {
      CHECK(std::abs(a.draws[i] - b.draws[i]) <= 1e-6);
    }
  }
}

TEST_CASE("two-sample null limit does not depend on lambda") {
  Rng rng(12);
  const CostMatrix c = random_euclidean_cost(4, 1.0, rng);
  const Measure r(random_simplex(4, rng, false));
  const auto a = limit_sample(Regime::kTwoSampleNull, r, std::nullopt, c, 1.0, 0.3, 20000, 1);
  const auto b = limit_sample(Regime::kTwoSampleNull, r, std::nullopt, c, 1.0, 0.7, 20000, 2);
  CHECK(ks_distance(a.draws, b.draws) <= 0.02);
}

TEST_CASE("alternative limit matches the finite-sample law at n = m = 5000") {
  Rng rng(31);
  Eigen::MatrixXd coords(3, 1);
  coords << 0.0, 1.0, 2.5;
  const GroundSpace space({"a", "b", "c"}, coords);
  const CostMatrix c = build_cost(space, 2.0);
  const Measure r(Eigen::Vector3d(0.5, 0.3, 0.2));
  const Measure s(Eigen::Vector3d(0.2, 0.3, 0.5));
  const std::int64_t n = 5000;
  const std::int64_t m = 5000;
  const double w = wasserstein(r, s, c, 2.0);
  const double rho = two_sample_rate(n, m);
  const std::size_t reps = 20000;
  std::vector<double> finite(reps);
  parallel_for(reps, 0, [&](std::size_t i) {
    Rng local = make_stream(77, StreamTag::kSimulation, i);
    const Measure rh = normalize(sample_multinomial(n, r.mass(), local));
    const Measure sh = normalize(sample_multinomial(m, s.mass(), local));
    finite[i] = rho * (wasserstein(rh, sh, c, 2.0) - w);
  });
  const double lambda = static_cast<double>(m) / static_cast<double>(n + m);
  const auto limit = limit_sample(Regime::kTwoSampleAlt, r, s, c, 2.0, lambda, reps, 78);
  CHECK(ks_distance(finite, limit.draws) <= 0.05);
}

TEST_CASE("scaling rates") {
  CHECK(scaling(Regime::kOneSampleNull, 16, std::nullopt, 2.0).factor == doctest::Approx(2.0));
  CHECK(scaling(Regime::kOneSampleAlt, 100, std::nullopt, 3.0).factor == doctest::Approx(10.0));
  for (std::int64_t k : {1, 7, 50}) {
    CHECK(scaling(Regime::kTwoSampleNull, 2 * k, 2 * k, 2.0).factor ==
          doctest::Approx(std::pow(static_cast<double>(k), 0.25)));
    CHECK(scaling(Regime::kTwoSampleAlt, 2 * k, 2 * k, 2.0).factor ==
          doctest::Approx(std::sqrt(static_cast<double>(k))));
  }
  CHECK_THROWS_AS(scaling(Regime::kTwoSampleNull, 10, std::nullopt, 1.0), ConfigError);
  CHECK_THROWS_AS(scaling(Regime::kOneSampleNull, 0, std::nullopt, 1.0), DomainError);
  CHECK(scaling(Regime::kTwoSampleAlt, 1, 1, 1.0).factor > 0.0);
}

TEST_CASE("regime names round-trip") {
  for (Regime regime : {Regime::kOneSampleNull, Regime::kOneSampleAlt, Regime::kTwoSampleNull,
                        Regime::kTwoSampleAlt}) {
    CHECK(parse_regime(to_string(regime)) == regime);
  }
  CHECK_THROWS_AS(parse_regime("three-sample"), ConfigError);
}
