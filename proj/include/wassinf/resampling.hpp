#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wassinf/ground.hpp"

namespace wassinf {

enum class BootstrapScheme { kNaive, kMofN, kDerivative };

std::string_view to_string(BootstrapScheme scheme);
BootstrapScheme parse_scheme(std::string_view text);

/// How an m-out-of-n replicate is turned into a number.
enum class MofnStatistic {
  /// phi_p applied to the rescaled resampling fluctuation.
  kDerivative,
  /// Rescaled difference W_p^p(r**, s**) - W_p^p(r_hat, s_hat).
  kPlugIn,
};

/// Bootstrap replicates on the W_p^p scale.
struct BootstrapDraws {
  BootstrapScheme scheme = BootstrapScheme::kNaive;
  std::vector<double> values;
  std::size_t B = 0;
  std::optional<std::int64_t> k;
  std::uint64_t seed = 0;
  std::int64_t n = 0;
  std::int64_t m = 0;
  /// False for the naive scheme, which does not reproduce the limit law.
  bool consistent = true;
  std::vector<std::string> warnings;
};

struct BootstrapOptions {
  std::size_t workers = 0;
  MofnStatistic mofn_statistic = MofnStatistic::kDerivative;
};

/// rho_{n,m} (W_p^p(r*, s*) - W_p^p(r_hat, s_hat)) with full-size multinomial resamples.
BootstrapDraws naive_bootstrap(const Counts& x, const Counts& y, const CostMatrix& c, double p,
                               std::size_t B, std::uint64_t seed,
                               const BootstrapOptions& options = {});

/// Resamples of size k from each empirical measure, rescaled by rho_{k,k}.
/// k defaults to ceil(n^{2/3}); k >= min(n, m) is rejected.
BootstrapDraws mofn_bootstrap(const Counts& x, const Counts& y, const CostMatrix& c, double p,
                              std::optional<std::int64_t> k, std::size_t B, std::uint64_t seed,
                              const BootstrapOptions& options = {});

/// phi_p(rho_{n,m} {(r*, s*) - (r_hat, s_hat)}) = max over the null dual set of
/// <u, rho_{n,m} ((s* - s_hat) - (r* - r_hat))>. Valid under r = s.
BootstrapDraws derivative_bootstrap(const Counts& x, const Counts& y, const CostMatrix& c,
                                    double p, std::size_t B, std::uint64_t seed,
                                    const BootstrapOptions& options = {});

std::int64_t default_subsample_size(std::int64_t n);

/// sign(v) |v|^{1/p}, mapping W_p^p-scale replicates to the W_p scale.
std::vector<double> to_distance_scale(std::span<const double> values, double p);

}  // namespace wassinf
