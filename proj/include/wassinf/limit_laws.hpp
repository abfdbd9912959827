#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "wassinf/ground.hpp"
#include "wassinf/rng.hpp"
#include "wassinf/transport.hpp"

namespace wassinf {

enum class Regime { kOneSampleNull, kOneSampleAlt, kTwoSampleNull, kTwoSampleAlt };

std::string_view to_string(Regime regime);
Regime parse_regime(std::string_view text);
bool is_null(Regime regime);
bool is_two_sample(Regime regime);

/// Sigma(r) = diag(r) - r r^T, the covariance of the limit of sqrt(n) (r_hat_n - r).
Eigen::MatrixXd multinomial_covariance(const Eigen::VectorXd& r);

/// Mean-zero Gaussian with covariance Sigma(r).
class GaussianSpec {
 public:
  explicit GaussianSpec(Measure base);

  const Measure& base() const { return base_; }
  Eigen::MatrixXd covariance() const { return multinomial_covariance(base_.mass()); }

  /// G_x = sqrt(r_x) Z_x - r_x sum_y sqrt(r_y) Z_y. The coordinates of G sum to zero
  /// up to rounding and G_x is exactly zero wherever r_x is.
  Eigen::VectorXd sample(Rng& rng) const;

 private:
  Measure base_;
  Eigen::VectorXd sqrt_mass_;
};

Eigen::VectorXd sample_multinomial_gaussian(const GaussianSpec& spec, Rng& rng);

/// max <g, u> over { u : u_x - u_x' <= c(x, x') } for a balanced vector g.
///
/// Evaluated as the transport cost between g+ and g- under the shortest-path closure
/// of c: the potential constraints chain along paths, so only the closure matters, and
/// for a cost satisfying the triangle inequality the min-cost flow is a transport plan.
class NullDualMaximizer {
 public:
  explicit NullDualMaximizer(const CostMatrix& c);

  double operator()(const Eigen::VectorXd& g) const;
  const Eigen::MatrixXd& closure() const { return closure_; }

 private:
  Eigen::MatrixXd closure_;
};

double max_dual_null(const Eigen::VectorXd& g, const CostMatrix& c);

/// max sqrt(lambda) <G, u> + sqrt(1 - lambda) <H, v> over the optimal dual face of (r, s).
double max_dual_alt(const Eigen::VectorXd& G, const Eigen::VectorXd& H, const Measure& r,
                    const Measure& s, const CostMatrix& c, double lambda);

/// Evaluates the alternative-regime limit variable through the one-dimensional problem
///
///   (1/p) W_p^{1-p}(r, s) * min_{z >= z_min} z { W_p^p(r + a/z, s + b/z) - W_p^p(r, s) }
///
/// with a = sqrt(lambda) G and b = sqrt(1 - lambda) H. Each probe is one transport solve.
/// The objective is nonincreasing in z; the upper end of the bracket is found by doubling
/// until it stops decreasing and the minimum is located by golden-section search.
class AlternativeLimit {
 public:
  AlternativeLimit(const Measure& r, const Measure& s, const CostMatrix& c, double p);

  double value_pp() const { return value_pp_; }
  double distance() const;
  /// (1/p) W_p^{1-p}(r, s); DomainError when W_p = 0 and p > 1.
  double prefactor() const;

  /// min over z of the perspective z { W_p^p(r + a/z, s + b/z) - W_p^p(r, s) }.
  double min_perspective(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;

  /// Limit variable via the one-dimensional search.
  double one_dimensional(const Eigen::VectorXd& G, const Eigen::VectorXd& H, double lambda) const;
  /// Limit variable via the face LP; the two agree up to solver tolerance.
  double face_lp(const Eigen::VectorXd& G, const Eigen::VectorXd& H, double lambda) const;

 private:
  double perspective(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double z) const;

  Eigen::VectorXd r_;
  Eigen::VectorXd s_;
  CostMatrix c_;
  double p_;
  double value_pp_;
  DualFace face_;
};

double altalt_value(const Eigen::VectorXd& G, const Eigen::VectorXd& H, const Measure& r,
                    const Measure& s, const CostMatrix& c, double lambda, double p);

enum class AltMethod { kOneDimensional, kFaceLp };

/// Monte-Carlo sample of one of the four limit laws.
struct LimitDraws {
  Regime regime = Regime::kOneSampleNull;
  double p = 1.0;
  std::optional<double> lambda;
  std::uint64_t seed = 0;
  std::vector<double> draws;
};

struct LimitOptions {
  std::size_t workers = 0;
  AltMethod alt_method = AltMethod::kOneDimensional;
};

/// Draws M variables of the regime's limit. Null regimes return {max <G, u>}^{1/p};
/// alternative regimes return (1/p) W_p^{1-p} times the dual-face maximum. `s` is
/// required for the alternative regimes; `lambda` is used by the two-sample regimes only.
/// Draw i depends only on (seed, i).
LimitDraws limit_sample(Regime regime, const Measure& r, const std::optional<Measure>& s,
                        const CostMatrix& c, double p, double lambda, std::size_t M,
                        std::uint64_t seed, const LimitOptions& options = {});

struct ScalingRate {
  double factor = 1.0;
  Regime regime = Regime::kOneSampleNull;
};

/// n^{1/(2p)}, n^{1/2}, (nm/(n+m))^{1/(2p)} or (nm/(n+m))^{1/2} depending on the regime.
ScalingRate scaling(Regime regime, std::int64_t n, std::optional<std::int64_t> m, double p);

/// rho_{n,m} = sqrt(nm / (n + m)).
double two_sample_rate(std::int64_t n, std::int64_t m);

}  // namespace wassinf
