#include "wassinf/limit_laws.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "wassinf/errors.hpp"

namespace wassinf {

namespace {

void check_balanced(const Eigen::VectorXd& g, const char* name) {
  const double scale = std::max(1.0, g.cwiseAbs().maxCoeff());
  if (std::abs(g.sum()) > 1e-9 * scale * std::max<double>(1.0, static_cast<double>(g.size()))) {
    std::ostringstream msg;
    msg.precision(17);
    msg << name << " must sum to zero (sum = " << g.sum() << ")";
    throw DomainError(msg.str());
  }
}

void check_lambda(double lambda) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw DomainError("lambda must lie in [0, 1]");
}

void check_p(double p) {
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("p must be a finite number >= 1");
}

}  // namespace

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::kOneSampleNull:
      return "one-sample-null";
    case Regime::kOneSampleAlt:
      return "one-sample-alt";
    case Regime::kTwoSampleNull:
      return "two-sample-null";
    case Regime::kTwoSampleAlt:
      return "two-sample-alt";
  }
  return "unknown";
}

Regime parse_regime(std::string_view text) {
  for (Regime regime : {Regime::kOneSampleNull, Regime::kOneSampleAlt, Regime::kTwoSampleNull,
                        Regime::kTwoSampleAlt}) {
    if (text == to_string(regime)) return regime;
  }
  throw ConfigError("unknown regime '" + std::string(text) + "'");
}

bool is_null(Regime regime) {
  return regime == Regime::kOneSampleNull || regime == Regime::kTwoSampleNull;
}

bool is_two_sample(Regime regime) {
  return regime == Regime::kTwoSampleNull || regime == Regime::kTwoSampleAlt;
}

Eigen::MatrixXd multinomial_covariance(const Eigen::VectorXd& r) {
  Eigen::MatrixXd sigma = -r * r.transpose();
  sigma.diagonal() += r;
  return sigma;
}

GaussianSpec::GaussianSpec(Measure base) : base_(std::move(base)) {
  sqrt_mass_ = base_.mass().cwiseSqrt();
}

Eigen::VectorXd GaussianSpec::sample(Rng& rng) const {
  std::normal_distribution<double> normal(0.0, 1.0);
  const Eigen::Index n = sqrt_mass_.size();
  Eigen::VectorXd z(n);
  for (Eigen::Index i = 0; i < n; ++i) z(i) = normal(rng);
  Eigen::VectorXd g = sqrt_mass_.cwiseProduct(z);
  const double common = g.sum();
  g -= common * base_.mass();
  // Remove the rounding residue from the largest-mass coordinate so sum(G) = 0 holds
  // to the last bit, keeping the LPs built on G bounded.
  if (n > 0) {
    Eigen::Index top = 0;
    base_.mass().maxCoeff(&top);
    g(top) -= g.sum();
  }
  return g;
}

Eigen::VectorXd sample_multinomial_gaussian(const GaussianSpec& spec, Rng& rng) {
  return spec.sample(rng);
}

NullDualMaximizer::NullDualMaximizer(const CostMatrix& c)
    : closure_(shortest_path_closure(c.entries())) {}

double NullDualMaximizer::operator()(const Eigen::VectorXd& g) const {
  if (static_cast<Eigen::Index>(g.size()) != closure_.rows()) {
    throw DataError("vector length does not match the cost matrix");
  }
  check_balanced(g, "G");
  const Eigen::VectorXd plus = g.cwiseMax(0.0);
  const Eigen::VectorXd minus = (-g).cwiseMax(0.0);
  const double mass = plus.sum();
  if (mass == 0.0) return 0.0;
  // Balance the two parts exactly; the residual is below the balance tolerance.
  const Eigen::VectorXd demand = minus * (mass / minus.sum());
  return std::max(0.0, transport_value(plus, demand, closure_));
}

double max_dual_null(const Eigen::VectorXd& g, const CostMatrix& c) {
  return NullDualMaximizer(c)(g);
}

double max_dual_alt(const Eigen::VectorXd& G, const Eigen::VectorXd& H, const Measure& r,
                    const Measure& s, const CostMatrix& c, double lambda) {
  check_lambda(lambda);
  check_balanced(G, "G");
  check_balanced(H, "H");
  const DualFace face(r, s, c);
  return face.maximize(std::sqrt(lambda) * G, std::sqrt(1.0 - lambda) * H);
}

AlternativeLimit::AlternativeLimit(const Measure& r, const Measure& s, const CostMatrix& c,
                                   double p)
    : r_(r.mass()),
      s_(s.mass()),
      c_(c),
      p_(p),
      value_pp_(solve_ot(r, s, c).value_pp),
      face_(r.mass(), s.mass(), c, value_pp_) {
  check_p(p);
}

double AlternativeLimit::distance() const { return std::pow(value_pp_, 1.0 / p_); }

double AlternativeLimit::prefactor() const {
  if (p_ == 1.0) return 1.0;
  if (value_pp_ <= 0.0) {
    throw DomainError("the alternative-regime limit needs W_p(r, s) > 0 when p > 1");
  }
  return std::pow(value_pp_, (1.0 - p_) / p_) / p_;
}

double AlternativeLimit::perspective(const Eigen::VectorXd& a, const Eigen::VectorXd& b,
                                     double z) const {
  const Eigen::VectorXd ra = r_ + a / z;
  const Eigen::VectorXd sb = s_ + b / z;
  return z * (transport_value(ra.cwiseMax(0.0), sb.cwiseMax(0.0), c_.entries()) - value_pp_);
}

double AlternativeLimit::min_perspective(const Eigen::VectorXd& a,
                                         const Eigen::VectorXd& b) const {
  const Eigen::Index n = r_.size();
  if (a.size() != n || b.size() != n) throw DataError("direction vectors have the wrong length");
  check_balanced(a, "a");
  check_balanced(b, "b");
  if (a.isZero(0.0) && b.isZero(0.0)) return 0.0;

  double z_min = 0.0;
  const auto threshold = [&z_min](const Eigen::VectorXd& base, const Eigen::VectorXd& dir) {
    for (Eigen::Index x = 0; x < base.size(); ++x) {
      if (dir(x) == 0.0) continue;
      if (base(x) <= 0.0) {
        throw DomainError("perturbation direction is nonzero where the measure has no mass");
      }
      z_min = std::max(z_min, -dir(x) / base(x));
    }
  };
  threshold(r_, a);
  threshold(s_, b);

  double best = std::numeric_limits<double>::infinity();
  const auto f = [&](double z) {
    const double value = perspective(a, b, z);
    best = std::min(best, value);
    return value;
  };

  const double lo = z_min + 1e-8 * std::max(1.0, z_min);
  // Grow the bracket until the objective stops decreasing.
  double span = std::max(1.0, z_min);
  double previous = f(lo + span);
  for (int step = 0; step < 64; ++step) {
    const double next = f(lo + 2.0 * span);
    span *= 2.0;
    if (next >= previous - 1e-12 * (1.0 + std::abs(previous))) break;
    previous = next;
  }
  double left = lo;
  double right = lo + span;
  const double tolerance = 1e-9 * std::max(1.0, right);
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = right - inv_phi * (right - left);
  double x2 = left + inv_phi * (right - left);
  double f1 = f(x1);
  double f2 = f(x2);
  while (right - left > tolerance) {
    if (f1 <= f2) {
      right = x2;
      x2 = x1;
      f2 = f1;
      x1 = right - inv_phi * (right - left);
      f1 = f(x1);
    } else {
      left = x1;
      x1 = x2;
      f1 = f2;
      x2 = left + inv_phi * (right - left);
      f2 = f(x2);
    }
  }
  return best;
}

double AlternativeLimit::one_dimensional(const Eigen::VectorXd& G, const Eigen::VectorXd& H,
                                         double lambda) const {
  check_lambda(lambda);
  const double pre = prefactor();
  return pre * min_perspective(std::sqrt(lambda) * G, std::sqrt(1.0 - lambda) * H);
}

double AlternativeLimit::face_lp(const Eigen::VectorXd& G, const Eigen::VectorXd& H,
                                 double lambda) const {
  check_lambda(lambda);
  check_balanced(G, "G");
  check_balanced(H, "H");
  const double pre = prefactor();
  return pre * face_.maximize(std::sqrt(lambda) * G, std::sqrt(1.0 - lambda) * H);
}

double altalt_value(const Eigen::VectorXd& G, const Eigen::VectorXd& H, const Measure& r,
                    const Measure& s, const CostMatrix& c, double lambda, double p) {
  return AlternativeLimit(r, s, c, p).one_dimensional(G, H, lambda);
}

LimitDraws limit_sample(Regime regime, const Measure& r, const std::optional<Measure>& s,
                        const CostMatrix& c, double p, double lambda, std::size_t M,
                        std::uint64_t seed, const LimitOptions& options) {
  check_p(p);
  if (M == 0) throw DomainError("the number of draws M must be positive");
  if (r.size() != c.size()) throw DataError("measure and cost matrix have different sizes");
  if (is_two_sample(regime)) check_lambda(lambda);
  if (!is_null(regime)) {
    if (!s) throw ConfigError("the alternative regimes need a second measure s");
    if (s->size() != c.size()) throw DataError("measure and cost matrix have different sizes");
  }

  LimitDraws out;
  out.regime = regime;
  out.p = p;
  out.seed = seed;
  if (is_two_sample(regime)) out.lambda = lambda;
  out.draws.assign(M, 0.0);

  const GaussianSpec g_spec(r);
  const double inv_p = 1.0 / p;
  const std::size_t workers = options.workers == 0 ? default_workers() : options.workers;

  if (is_null(regime)) {
    const NullDualMaximizer maximizer(c);
    const double wg = std::sqrt(lambda);
    const double wh = std::sqrt(1.0 - lambda);
    Eigen::Index top = 0;
    r.mass().maxCoeff(&top);
    parallel_for(M, workers, [&](std::size_t i) {
      Rng rng = make_stream(seed, StreamTag::kLimitDraw, i);
      Eigen::VectorXd g = g_spec.sample(rng);
      if (regime == Regime::kTwoSampleNull) {
        const Eigen::VectorXd h = g_spec.sample(rng);
        g = wg * g - wh * h;
        g(top) -= g.sum();
      }
      out.draws[i] = std::pow(maximizer(g), inv_p);
    });
    return out;
  }

  const AlternativeLimit limit(r, *s, c, p);
  limit.prefactor();  // fail early on W_p = 0 with p > 1
  const GaussianSpec h_spec(*s);
  const double lam = regime == Regime::kOneSampleAlt ? 1.0 : lambda;
  parallel_for(M, workers, [&](std::size_t i) {
    Rng rng = make_stream(seed, StreamTag::kLimitDraw, i);
    const Eigen::VectorXd g = g_spec.sample(rng);
    Eigen::VectorXd h = Eigen::VectorXd::Zero(g.size());
    if (regime == Regime::kTwoSampleAlt) h = h_spec.sample(rng);
    out.draws[i] = options.alt_method == AltMethod::kFaceLp ? limit.face_lp(g, h, lam)
                                                             : limit.one_dimensional(g, h, lam);
  });
  return out;
}

double two_sample_rate(std::int64_t n, std::int64_t m) {
  if (n < 1 || m < 1) throw DomainError("sample sizes must be at least 1");
  const double dn = static_cast<double>(n);
  const double dm = static_cast<double>(m);
  return std::sqrt(dn * dm / (dn + dm));
}

ScalingRate scaling(Regime regime, std::int64_t n, std::optional<std::int64_t> m, double p) {
  check_p(p);
  if (n < 1) throw DomainError("sample size n must be at least 1");
  ScalingRate rate;
  rate.regime = regime;
  double base = static_cast<double>(n);
  if (is_two_sample(regime)) {
    if (!m) throw ConfigError("two-sample regimes need the second sample size m");
    const double rho = two_sample_rate(n, *m);
    base = rho * rho;
  }
  rate.factor = is_null(regime) ? std::pow(base, 0.5 / p) : std::sqrt(base);
  return rate;
}

}  // namespace wassinf
