#include "wassinf/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wassinf/errors.hpp"
#include "wassinf/limit_laws.hpp"
#include "wassinf/rng.hpp"
#include "wassinf/transport.hpp"

namespace wassinf {

namespace {

void check_inputs(const Counts& x, const Counts& y, const CostMatrix& c, double p) {
  if (x.size() != c.size() || y.size() != c.size()) {
    throw DataError("count vectors and cost matrix have different numbers of points");
  }
  if (x.n() < 1 || y.n() < 1) throw DomainError("both samples must be nonempty");
  if (!(p >= 1.0) || !std::isfinite(p)) throw DomainError("p must be a finite number >= 1");
}

Eigen::VectorXd resample(std::int64_t size, const Eigen::VectorXd& probabilities, Rng& rng) {
  const Counts counts = sample_multinomial(size, probabilities, rng);
  Eigen::VectorXd out(probabilities.size());
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    out(i) = static_cast<double>(counts[static_cast<std::size_t>(i)]) / static_cast<double>(size);
  }
  return out;
}

BootstrapDraws make_draws(BootstrapScheme scheme, const Counts& x, const Counts& y,
                          std::size_t B, std::uint64_t seed) {
  BootstrapDraws out;
  out.scheme = scheme;
  out.B = B;
  out.seed = seed;
  out.n = x.n();
  out.m = y.n();
  out.consistent = scheme != BootstrapScheme::kNaive;
  out.values.assign(B, 0.0);
  return out;
}

std::size_t workers_of(const BootstrapOptions& options) {
  return options.workers == 0 ? default_workers() : options.workers;
}

}  // namespace

std::string_view to_string(BootstrapScheme scheme) {
  switch (scheme) {
    case BootstrapScheme::kNaive:
      return "naive";
    case BootstrapScheme::kMofN:
      return "m-of-n";
    case BootstrapScheme::kDerivative:
      return "derivative";
  }
  return "unknown";
}

BootstrapScheme parse_scheme(std::string_view text) {
  for (auto scheme : {BootstrapScheme::kNaive, BootstrapScheme::kMofN, BootstrapScheme::kDerivative}) {
    if (text == to_string(scheme)) return scheme;
  }
  throw ConfigError("unknown bootstrap scheme '" + std::string(text) + "'");
}

std::int64_t default_subsample_size(std::int64_t n) {
  if (n < 1) throw DomainError("sample size must be at least 1");
  auto k = static_cast<std::int64_t>(std::ceil(std::cbrt(static_cast<double>(n) * static_cast<double>(n)) - 1e-9));
  return std::max<std::int64_t>(1, k);
}

std::vector<double> to_distance_scale(std::span<const double> values, double p) {
  std::vector<double> out(values.size());
  std::transform(values.begin(), values.end(), out.begin(), [p](double v) {
    return std::copysign(std::pow(std::abs(v), 1.0 / p), v);
  });
  return out;
}

BootstrapDraws naive_bootstrap(const Counts& x, const Counts& y, const CostMatrix& c, double p,
                               std::size_t B, std::uint64_t seed,
                               const BootstrapOptions& options) {
  check_inputs(x, y, c, p);
  BootstrapDraws out = make_draws(BootstrapScheme::kNaive, x, y, B, seed);
  const Measure r = normalize(x);
  const Measure s = normalize(y);
  const double base = solve_ot(r, s, c).value_pp;
  const double rho = two_sample_rate(x.n(), y.n());
  parallel_for(B, workers_of(options), [&](std::size_t i) {
    Rng rng = make_stream(seed, StreamTag::kBootstrap, i);
    const Eigen::VectorXd rs = resample(x.n(), r.mass(), rng);
    const Eigen::VectorXd ss = resample(y.n(), s.mass(), rng);
    out.values[i] = rho * (transport_value(rs, ss, c.entries()) - base);
  });
  return out;
}

BootstrapDraws mofn_bootstrap(const Counts& x, const Counts& y, const CostMatrix& c, double p,
                              std::optional<std::int64_t> k, std::size_t B, std::uint64_t seed,
                              const BootstrapOptions& options) {
  check_inputs(x, y, c, p);
  const std::int64_t size = k ? *k : default_subsample_size(std::min(x.n(), y.n()));
  if (size < 1) throw DomainError("resample size k must be at least 1");
  if (size >= std::min(x.n(), y.n())) {
    throw DomainError("resample size k must be smaller than both sample sizes");
  }
  BootstrapDraws out = make_draws(BootstrapScheme::kMofN, x, y, B, seed);
  out.k = size;
  const double limit = std::pow(static_cast<double>(std::min(x.n(), y.n())), 0.9);
  if (static_cast<double>(size) > limit) {
    std::ostringstream msg;
    msg << "k = " << size << " exceeds n^0.9 = " << limit
        << "; the resampling fluctuation may not be small relative to the sample";
    out.warnings.push_back(msg.str());
  }
  const Measure r = normalize(x);
  const Measure s = normalize(y);
  const double rho = two_sample_rate(size, size);
  if (options.mofn_statistic == MofnStatistic::kPlugIn) {
    const double base = solve_ot(r, s, c).value_pp;
    parallel_for(B, workers_of(options), [&](std::size_t i) {
      Rng rng = make_stream(seed, StreamTag::kBootstrap, i);
      const Eigen::VectorXd rs = resample(size, r.mass(), rng);
      const Eigen::VectorXd ss = resample(size, s.mass(), rng);
      out.values[i] = rho * (transport_value(rs, ss, c.entries()) - base);
    });
    return out;
  }
  const NullDualMaximizer phi(c);
  parallel_for(B, workers_of(options), [&](std::size_t i) {
    Rng rng = make_stream(seed, StreamTag::kBootstrap, i);
    const Eigen::VectorXd rs = resample(size, r.mass(), rng);
    const Eigen::VectorXd ss = resample(size, s.mass(), rng);
    Eigen::VectorXd h = rho * ((ss - s.mass()) - (rs - r.mass()));
    h(0) -= h.sum();
    out.values[i] = phi(h);
  });
  return out;
}

BootstrapDraws derivative_bootstrap(const Counts& x, const Counts& y, const CostMatrix& c,
                                    double p, std::size_t B, std::uint64_t seed,
                                    const BootstrapOptions& options) {
  check_inputs(x, y, c, p);
  BootstrapDraws out = make_draws(BootstrapScheme::kDerivative, x, y, B, seed);
  const Measure r = normalize(x);
  const Measure s = normalize(y);
  const double rho = two_sample_rate(x.n(), y.n());
  const NullDualMaximizer phi(c);
  parallel_for(B, workers_of(options), [&](std::size_t i) {
    Rng rng = make_stream(seed, StreamTag::kBootstrap, i);
    const Eigen::VectorXd rs = resample(x.n(), r.mass(), rng);
    const Eigen::VectorXd ss = resample(y.n(), s.mass(), rng);
    Eigen::VectorXd h = rho * ((ss - s.mass()) - (rs - r.mass()));
    h(0) -= h.sum();
    out.values[i] = phi(h);
  });
  return out;
}

}  // namespace wassinf
