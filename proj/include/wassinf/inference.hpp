#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "wassinf/ground.hpp"
#include "wassinf/limit_laws.hpp"

namespace wassinf {

struct TestReport {
  double statistic = 0.0;
  double p_value = 1.0;
  std::size_t M = 0;
  std::string method;  // "limit" or "permutation"
  Regime regime = Regime::kTwoSampleNull;
  double p = 1.0;
  std::int64_t n = 0;
  std::int64_t m = 0;
};

struct ConfidenceInterval {
  double estimate = 0.0;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
  std::size_t M = 0;
  /// True when the estimate is 0 and the interval [0, upper] comes from the null limit.
  bool one_sided = false;
};

struct InferenceOptions {
  std::size_t workers = 0;
  AltMethod alt_method = AltMethod::kOneDimensional;
};

/// (1 + #{draws >= statistic}) / (M + 1).
double monte_carlo_p_value(std::span<const double> draws, double statistic);

/// Sample quantile with linear interpolation between order statistics (type 7).
double quantile(std::span<const double> sorted, double prob);

/// Test of r = s with statistic rho_{n,m}^{1/p} W_p(r_hat, s_hat), calibrated by the
/// two-sample null limit evaluated at the pooled empirical measure.
TestReport test_two_sample_null(const Counts& x, const Counts& y, const CostMatrix& c, double p,
                                std::size_t M, std::uint64_t seed,
                                const InferenceOptions& options = {});

/// Interval for W_p(r, s) from the two-sample alternative limit with plug-ins
/// (r_hat, s_hat, m/(n+m)).
ConfidenceInterval ci_two_sample_alt(const Counts& x, const Counts& y, const CostMatrix& c,
                                     double p, double level, std::size_t M, std::uint64_t seed,
                                     const InferenceOptions& options = {});

/// Permutation test with statistic W_p(r_hat, s_hat) over B relabelings of the pooled sample.
TestReport permutation_test(const Counts& x, const Counts& y, const CostMatrix& c, double p,
                            std::size_t B, std::uint64_t seed,
                            const InferenceOptions& options = {});

/// Two-sample Kolmogorov-Smirnov statistic sup_t |F_a(t) - F_b(t)|. Inputs need not be sorted.
double ks_distance(std::span<const double> a, std::span<const double> b);

/// One-sample Kolmogorov-Smirnov statistic sup_t |F_a(t) - cdf(t)| for a continuous cdf.
double ks_distance(std::span<const double> a, const std::function<double(double)>& cdf);

struct ConvergenceRow {
  int L = 0;
  double alpha = 0.0;
  double p = 2.0;
  std::int64_t n = 0;
  double ks = 0.0;
};

struct ConvergenceConfig {
  int L = 3;
  double alpha = 1.0;
  double p = 2.0;
  std::vector<std::int64_t> n_list{10, 100, 1000, 5000};
  std::size_t n_measures = 5;
  std::size_t M = 20000;
  std::uint64_t seed = 0;
  std::size_t workers = 0;
};

/// For each Dirichlet(alpha) measure r on the L x L grid and each n: KS distance between M
/// draws of n^{1/(2p)} W_p(r_hat_n, r) and M draws of the one-sample null limit, averaged
/// over the measures.
std::vector<ConvergenceRow> convergence_study(const ConvergenceConfig& config);

}  // namespace wassinf
