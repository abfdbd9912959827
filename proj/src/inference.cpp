#include "wassinf/inference.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "wassinf/errors.hpp"
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

std::size_t workers_of(std::size_t workers) { return workers == 0 ? default_workers() : workers; }

Measure pooled(const Counts& x, const Counts& y) {
  std::vector<std::int64_t> total(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) total[i] = x[i] + y[i];
  return normalize(Counts(std::move(total)));
}

}  // namespace

double monte_carlo_p_value(std::span<const double> draws, double statistic) {
  // Ties within rounding count as exceedances.
  const double threshold = statistic - 1e-12 * std::max(1.0, std::abs(statistic));
  const auto exceed = std::count_if(draws.begin(), draws.end(),
                                    [threshold](double d) { return d >= threshold; });
  return (1.0 + static_cast<double>(exceed)) / (static_cast<double>(draws.size()) + 1.0);
}

double quantile(std::span<const double> sorted, double prob) {
  if (sorted.empty()) throw DomainError("quantile of an empty sample");
  if (!(prob >= 0.0 && prob <= 1.0)) throw DomainError("quantile level must lie in [0, 1]");
  const double h = prob * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

TestReport test_two_sample_null(const Counts& x, const Counts& y, const CostMatrix& c, double p,
                                std::size_t M, std::uint64_t seed,
                                const InferenceOptions& options) {
  check_inputs(x, y, c, p);
  if (M == 0) throw DomainError("the number of draws M must be positive");
  TestReport report;
  report.method = "limit";
  report.regime = Regime::kTwoSampleNull;
  report.p = p;
  report.n = x.n();
  report.m = y.n();
  report.M = M;
  const double w = wasserstein(normalize(x), normalize(y), c, p);
  report.statistic = scaling(Regime::kTwoSampleNull, x.n(), y.n(), p).factor * w;
  const double lambda =
      static_cast<double>(y.n()) / static_cast<double>(x.n() + y.n());
  LimitOptions limit_options;
  limit_options.workers = options.workers;
  const LimitDraws draws = limit_sample(Regime::kTwoSampleNull, pooled(x, y), std::nullopt, c, p,
                                        lambda, M, seed, limit_options);
  report.p_value = monte_carlo_p_value(draws.draws, report.statistic);
  return report;
}

ConfidenceInterval ci_two_sample_alt(const Counts& x, const Counts& y, const CostMatrix& c,
                                     double p, double level, std::size_t M, std::uint64_t seed,
                                     const InferenceOptions& options) {
  check_inputs(x, y, c, p);
  if (!(level > 0.0 && level < 1.0)) throw DomainError("confidence level must lie in (0, 1)");
  if (M == 0) throw DomainError("the number of draws M must be positive");
  ConfidenceInterval ci;
  ci.level = level;
  ci.M = M;
  const Measure r = normalize(x);
  const Measure s = normalize(y);
  ci.estimate = wasserstein(r, s, c, p);
  const double lambda = static_cast<double>(y.n()) / static_cast<double>(x.n() + y.n());
  LimitOptions limit_options;
  limit_options.workers = options.workers;
  limit_options.alt_method = options.alt_method;

  if (ci.estimate <= 0.0) {
    // The alternative limit is undefined at W_p = 0; bound W_p by the null limit instead.
    ci.one_sided = true;
    ci.lower = 0.0;
    if (c.size() == 1) return ci;
    LimitDraws draws = limit_sample(Regime::kTwoSampleNull, pooled(x, y), std::nullopt, c, p,
                                    lambda, M, seed, limit_options);
    std::sort(draws.draws.begin(), draws.draws.end());
    const double rate = scaling(Regime::kTwoSampleNull, x.n(), y.n(), p).factor;
    ci.upper = quantile(draws.draws, level) / rate;
    return ci;
  }

  LimitDraws draws =
      limit_sample(Regime::kTwoSampleAlt, r, s, c, p, lambda, M, seed, limit_options);
  std::sort(draws.draws.begin(), draws.draws.end());
  const double alpha = 1.0 - level;
  const double rho = two_sample_rate(x.n(), y.n());
  ci.lower = std::max(0.0, ci.estimate - quantile(draws.draws, 1.0 - alpha / 2.0) / rho);
  ci.upper = ci.estimate - quantile(draws.draws, alpha / 2.0) / rho;
  ci.upper = std::max(ci.upper, ci.estimate);
  ci.lower = std::min(ci.lower, ci.estimate);
  return ci;
}

TestReport permutation_test(const Counts& x, const Counts& y, const CostMatrix& c, double p,
                            std::size_t B, std::uint64_t seed, const InferenceOptions& options) {
  check_inputs(x, y, c, p);
  TestReport report;
  report.method = "permutation";
  report.regime = Regime::kTwoSampleNull;
  report.p = p;
  report.n = x.n();
  report.m = y.n();
  report.M = B;
  report.statistic = wasserstein(normalize(x), normalize(y), c, p);

  std::vector<std::uint32_t> pooled_labels;
  pooled_labels.reserve(static_cast<std::size_t>(x.n() + y.n()));
  for (std::size_t i = 0; i < x.size(); ++i) {
    pooled_labels.insert(pooled_labels.end(), static_cast<std::size_t>(x[i] + y[i]),
                         static_cast<std::uint32_t>(i));
  }
  const auto n = static_cast<std::size_t>(x.n());
  const double inv_n = 1.0 / static_cast<double>(x.n());
  const double inv_m = 1.0 / static_cast<double>(y.n());
  const Eigen::Index N = static_cast<Eigen::Index>(c.size());
  std::vector<double> draws(B, 0.0);
  parallel_for(B, workers_of(options.workers), [&](std::size_t b) {
    Rng rng = make_stream(seed, StreamTag::kPermutation, b);
    std::vector<std::uint32_t> labels = pooled_labels;
    // Partial Fisher-Yates: the first n positions form the relabelled first sample.
    for (std::size_t i = 0; i < n; ++i) {
      std::uniform_int_distribution<std::size_t> pick(i, labels.size() - 1);
      std::swap(labels[i], labels[pick(rng)]);
    }
    Eigen::VectorXd r = Eigen::VectorXd::Zero(N);
    Eigen::VectorXd s = Eigen::VectorXd::Zero(N);
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (i < n) {
        r(labels[i]) += inv_n;
      } else {
        s(labels[i]) += inv_m;
      }
    }
    s *= r.sum() / s.sum();
    draws[b] = std::pow(std::max(0.0, transport_value(r, s, c.entries())), 1.0 / p);
  });
  report.p_value = monte_carlo_p_value(draws, report.statistic);
  return report;
}

double ks_distance(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw DomainError("KS distance needs two nonempty samples");
  std::vector<double> sa(a.begin(), a.end());
  std::vector<double> sb(b.begin(), b.end());
  std::sort(sa.begin(), sa.end());
  std::sort(sb.begin(), sb.end());
  const double na = static_cast<double>(sa.size());
  const double nb = static_cast<double>(sb.size());
  std::size_t i = 0;
  std::size_t j = 0;
  double best = 0.0;
  while (i < sa.size() && j < sb.size()) {
    const double t = std::min(sa[i], sb[j]);
    while (i < sa.size() && sa[i] <= t) ++i;
    while (j < sb.size() && sb[j] <= t) ++j;
    best = std::max(best, std::abs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
  }
  return best;
}

double ks_distance(std::span<const double> a, const std::function<double(double)>& cdf) {
  if (a.empty()) throw DomainError("KS distance needs a nonempty sample");
  std::vector<double> sa(a.begin(), a.end());
  std::sort(sa.begin(), sa.end());
  const double n = static_cast<double>(sa.size());
  double best = 0.0;
  for (std::size_t i = 0; i < sa.size(); ++i) {
    const double f = cdf(sa[i]);
    best = std::max({best, f - static_cast<double>(i) / n, static_cast<double>(i + 1) / n - f});
  }
  return best;
}

std::vector<ConvergenceRow> convergence_study(const ConvergenceConfig& config) {
  if (config.L < 1) throw DomainError("grid size L must be at least 1");
  if (!(config.alpha > 0.0)) throw DomainError("Dirichlet parameter alpha must be positive");
  if (config.n_measures == 0 || config.M == 0) {
    throw DomainError("number of measures and draws must be positive");
  }
  for (auto n : config.n_list) {
    if (n < 1) throw DomainError("sample sizes must be at least 1");
  }
  const auto [space, cost] = build_grid(config.L, config.p);
  const std::size_t N = space.size();
  const std::size_t workers = workers_of(config.workers);
  std::vector<double> ks_sum(config.n_list.size(), 0.0);

  for (std::size_t j = 0; j < config.n_measures; ++j) {
    Rng measure_rng = make_stream(config.seed, StreamTag::kDirichlet, j);
    const Measure r = sample_dirichlet(N, config.alpha, measure_rng);
    LimitOptions limit_options;
    limit_options.workers = workers;
    const LimitDraws limit =
        limit_sample(Regime::kOneSampleNull, r, std::nullopt, cost, config.p, 1.0, config.M,
                     derive_seed(config.seed, StreamTag::kLimitDraw, j), limit_options);
    for (std::size_t ni = 0; ni < config.n_list.size(); ++ni) {
      const std::int64_t n = config.n_list[ni];
      const double rate = scaling(Regime::kOneSampleNull, n, std::nullopt, config.p).factor;
      std::vector<double> finite(config.M, 0.0);
      parallel_for(config.M, workers, [&](std::size_t i) {
        Rng rng = make_stream(config.seed, StreamTag::kFiniteSample, i,
                              static_cast<std::uint64_t>(j) * 1000003u + ni);
        const Measure r_hat = normalize(sample_multinomial(n, r.mass(), rng));
        const double w_pp = transport_value(r_hat.mass(), r.mass(), cost.entries());
        finite[i] = rate * std::pow(std::max(0.0, w_pp), 1.0 / config.p);
      });
      ks_sum[ni] += ks_distance(finite, limit.draws);
    }
  }
  std::vector<ConvergenceRow> rows;
  for (std::size_t ni = 0; ni < config.n_list.size(); ++ni) {
    rows.push_back({config.L, config.alpha, config.p, config.n_list[ni],
                    ks_sum[ni] / static_cast<double>(config.n_measures)});
  }
  return rows;
}

}  // namespace wassinf
