#include <doctest.h>

#include <cmath>

#include "wassinf/dense_lp.hpp"
#include "wassinf/errors.hpp"

using namespace wassinf;

TEST_CASE("textbook LP") {
  DenseLp lp(2);
  lp.add_row(Eigen::RowVector2d(1, 2), RowSense::kLessEqual, 4);
  lp.add_row(Eigen::RowVector2d(3, 1), RowSense::kLessEqual, 6);
  const LpResult res = lp.maximize(Eigen::Vector2d(1, 1));
  REQUIRE(res.status == LpStatus::kOptimal);
  CHECK(res.objective == doctest::Approx(2.8));
  CHECK(res.x(0) == doctest::Approx(1.6));
  CHECK(res.x(1) == doctest::Approx(1.2));
}

TEST_CASE("equality and >= rows need phase one") {
  // max -x - y  s.t.  x + y >= 2,  x - y = 1.
  DenseLp lp(2);
  lp.add_row(Eigen::RowVector2d(1, 1), RowSense::kGreaterEqual, 2);
  lp.add_row(Eigen::RowVector2d(1, -1), RowSense::kEqual, 1);
  const LpResult res = lp.maximize(Eigen::Vector2d(-1, -1));
  REQUIRE(res.status == LpStatus::kOptimal);
  CHECK(res.objective == doctest::Approx(-2.0));
  CHECK(res.x(0) == doctest::Approx(1.5));
}

TEST_CASE("negative right-hand sides are flipped") {
  // max x  s.t.  -x >= -3  (x <= 3).
  DenseLp lp(1);
  lp.add_row(Eigen::RowVectorXd::Constant(1, -1.0), RowSense::kGreaterEqual, -3);
  CHECK(lp.maximize(Eigen::VectorXd::Constant(1, 1.0)).objective == doctest::Approx(3.0));
}

TEST_CASE("free variables") {
  // max -x  s.t.  x >= -5, x free.
  DenseLp lp(1);
  lp.set_free(0);
  lp.add_row(Eigen::RowVectorXd::Constant(1, 1.0), RowSense::kGreaterEqual, -5);
  const LpResult res = lp.maximize(Eigen::VectorXd::Constant(1, -1.0));
  REQUIRE(res.status == LpStatus::kOptimal);
  CHECK(res.x(0) == doctest::Approx(-5.0));
}

TEST_CASE("infeasible and unbounded") {
  DenseLp infeasible(1);
  infeasible.add_row(Eigen::RowVectorXd::Constant(1, 1.0), RowSense::kLessEqual, 1);
  infeasible.add_row(Eigen::RowVectorXd::Constant(1, 1.0), RowSense::kGreaterEqual, 2);
  CHECK(infeasible.maximize(Eigen::VectorXd::Constant(1, 1.0)).status == LpStatus::kInfeasible);

  DenseLp unbounded(2);
  unbounded.add_row(Eigen::RowVector2d(1, -1), RowSense::kLessEqual, 1);
  const LpResult res = unbounded.maximize(Eigen::Vector2d(1, 1));
  CHECK(res.status == LpStatus::kUnbounded);
  CHECK(std::isinf(res.objective));
}

TEST_CASE("Beale's cycling example terminates") {
  // Cycles under the largest-coefficient rule with naive tie breaking.
  DenseLp lp(4);
  lp.add_row(Eigen::RowVector4d(0.25, -8, -1, 9), RowSense::kLessEqual, 0);
  lp.add_row(Eigen::RowVector4d(0.5, -12, -0.5, 3), RowSense::kLessEqual, 0);
  lp.add_row(Eigen::RowVector4d(0, 0, 1, 0), RowSense::kLessEqual, 1);
  const Eigen::Vector4d objective(0.75, -20, 0.5, -6);
  for (std::size_t budget : {std::size_t{1}, std::size_t{0}}) {
    LpOptions options;
    options.dantzig_budget = budget;
    const LpResult res = lp.maximize(objective, options);
    REQUIRE(res.status == LpStatus::kOptimal);
    CHECK(res.objective == doctest::Approx(1.25));
  }
}

TEST_CASE("redundant equality rows") {
  DenseLp lp(2);
  lp.add_row(Eigen::RowVector2d(1, 1), RowSense::kEqual, 1);
  lp.add_row(Eigen::RowVector2d(2, 2), RowSense::kEqual, 2);
  const LpResult res = lp.maximize(Eigen::Vector2d(1, 0));
  REQUIRE(res.status == LpStatus::kOptimal);
  CHECK(res.objective == doctest::Approx(1.0));
}

TEST_CASE("pivot limit raises SolverError") {
  DenseLp lp(2);
  lp.add_row(Eigen::RowVector2d(1, 2), RowSense::kLessEqual, 4);
  lp.add_row(Eigen::RowVector2d(3, 1), RowSense::kLessEqual, 6);
  LpOptions options;
  options.max_pivots = 1;
  CHECK_THROWS_AS(lp.maximize(Eigen::Vector2d(1, 1), options), SolverError);
}
