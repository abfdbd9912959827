#include "wassinf/ground.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "wassinf/errors.hpp"

namespace wassinf {

namespace {

constexpr double kCostTolerance = 1e-12;

void build_index(const std::vector<std::string>& labels,
                 std::unordered_map<std::string, std::size_t>& index) {
  if (labels.empty()) throw DomainError("ground space must contain at least one point");
  index.reserve(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (!index.emplace(labels[i], i).second) {
      throw DataError("duplicate point label '" + labels[i] + "'");
    }
  }
}

}  // namespace

GroundSpace::GroundSpace(std::vector<std::string> labels) : labels_(std::move(labels)) {
  build_index(labels_, index_);
}

GroundSpace::GroundSpace(std::vector<std::string> labels, Eigen::MatrixXd coords)
    : labels_(std::move(labels)), coords_(std::move(coords)) {
  build_index(labels_, index_);
  if (static_cast<std::size_t>(coords_->rows()) != labels_.size()) {
    throw DataError("expected one coordinate tuple per label");
  }
  if (coords_->cols() < 1) throw DataError("coordinates must have dimension >= 1");
}

GroundSpace GroundSpace::line(std::span<const double> points) {
  std::vector<std::string> labels;
  Eigen::MatrixXd coords(static_cast<Eigen::Index>(points.size()), 1);
  for (std::size_t i = 0; i < points.size(); ++i) {
    labels.push_back(std::to_string(i));
    coords(static_cast<Eigen::Index>(i), 0) = points[i];
  }
  return GroundSpace(std::move(labels), std::move(coords));
}

const Eigen::MatrixXd& GroundSpace::coords() const {
  if (!coords_) throw ConfigError("ground space has no coordinates");
  return *coords_;
}

std::optional<std::size_t> GroundSpace::index_of(std::string_view label) const {
  const auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void validate_cost(const Eigen::MatrixXd& c, double exponent, bool check_triangle) {
  if (c.rows() != c.cols()) throw DataError("cost matrix must be square");
  if (c.rows() < 1) throw DomainError("cost matrix must be nonempty");
  if (!(exponent >= 1.0)) throw DomainError("exponent p must be >= 1");
  const Eigen::Index n = c.rows();
  const double scale = std::max(1.0, c.cwiseAbs().maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i) {
    if (c(i, i) != 0.0) throw DomainError("cost matrix diagonal must be zero");
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!std::isfinite(c(i, j)) || c(i, j) < 0.0) {
        throw DomainError("cost entries must be finite and nonnegative");
      }
      if (std::abs(c(i, j) - c(j, i)) > kCostTolerance * scale) {
        throw DomainError("cost matrix must be symmetric");
      }
    }
  }
  if (!check_triangle) return;
  const Eigen::MatrixXd d = c.array().pow(1.0 / exponent).matrix();
  const double dscale = std::max(1.0, d.maxCoeff());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      for (Eigen::Index k = 0; k < n; ++k) {
        if (d(i, j) > d(i, k) + d(k, j) + 1e-9 * dscale) {
          std::ostringstream msg;
          msg << "triangle inequality violated on (" << i << ", " << k << ", " << j << ")";
          throw DomainError(msg.str());
        }
      }
    }
  }
}

CostMatrix::CostMatrix(Eigen::MatrixXd entries, double exponent, bool metric_flag)
    : entries_(std::move(entries)), exponent_(exponent), metric_flag_(metric_flag) {
  validate_cost(entries_, exponent_, metric_flag_);
}

double CostMatrix::max_entry() const { return entries_.maxCoeff(); }

Measure::Measure(Eigen::VectorXd mass) : mass_(std::move(mass)) {
  if (mass_.size() < 1) throw DomainError("measure must have at least one entry");
  for (Eigen::Index i = 0; i < mass_.size(); ++i) {
    if (!std::isfinite(mass_(i)) || mass_(i) < 0.0) {
      throw DomainError("measure entries must be finite and nonnegative");
    }
  }
  if (std::abs(mass_.sum() - 1.0) > kSumTolerance) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "measure must sum to 1 (got " << mass_.sum() << ")";
    throw DomainError(msg.str());
  }
}

Measure Measure::renormalized(Eigen::VectorXd mass, double tolerance) {
  const double total = mass.sum();
  if (!(std::abs(total - 1.0) <= tolerance)) {
    std::ostringstream msg;
    msg.precision(17);
    msg << "measure sums to " << total << ", outside the accepted tolerance " << tolerance;
    throw DataError(msg.str());
  }
  mass /= total;
  return Measure(std::move(mass));
}

Counts::Counts(std::vector<std::int64_t> counts) : counts_(std::move(counts)) {
  for (const auto c : counts_) {
    if (c < 0) throw DomainError("counts must be nonnegative");
    n_ += c;
  }
}

CostMatrix build_cost(const GroundSpace& space, double p) {
  if (!(p >= 1.0)) throw DomainError("exponent p must be >= 1");
  const Eigen::MatrixXd& x = space.coords();
  const Eigen::Index n = x.rows();
  Eigen::MatrixXd c = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double dist = (x.row(i) - x.row(j)).norm();
      c(i, j) = c(j, i) = std::pow(dist, p);
    }
  }
  return CostMatrix(std::move(c), p, true);
}

std::pair<GroundSpace, CostMatrix> build_grid(int L, double p) {
  if (L <= 0) throw DomainError("grid size L must be >= 1");
  const Eigen::Index n = static_cast<Eigen::Index>(L) * L;
  Eigen::MatrixXd coords(n, 2);
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(n));
  Eigen::Index k = 0;
  for (int i = 1; i <= L; ++i) {
    for (int j = 1; j <= L; ++j, ++k) {
      coords(k, 0) = i;
      coords(k, 1) = j;
      labels.push_back(std::to_string(i) + ":" + std::to_string(j));
    }
  }
  GroundSpace space(std::move(labels), std::move(coords));
  CostMatrix cost = build_cost(space, p);
  return {std::move(space), std::move(cost)};
}

Measure sample_dirichlet(std::size_t N, double alpha, Rng& rng) {
  if (!(alpha > 0.0)) throw DomainError("Dirichlet concentration must be > 0");
  if (N == 0) throw DomainError("Dirichlet dimension must be >= 1");
  Eigen::VectorXd g(static_cast<Eigen::Index>(N));
  std::gamma_distribution<double> gamma(alpha, 1.0);
  double total = 0.0;
  // Tiny alpha can underflow every coordinate; redraw in that case.
  while (total <= 0.0) {
    for (Eigen::Index i = 0; i < g.size(); ++i) g(i) = gamma(rng);
    total = g.sum();
  }
  g /= total;
  g /= g.sum();
  return Measure(std::move(g));
}

Measure normalize(const Counts& counts) {
  if (counts.n() <= 0) throw DomainError("cannot normalize empty counts");
  Eigen::VectorXd mass(static_cast<Eigen::Index>(counts.size()));
  for (std::size_t i = 0; i < counts.size(); ++i) {
    mass(static_cast<Eigen::Index>(i)) =
        static_cast<double>(counts[i]) / static_cast<double>(counts.n());
  }
  return Measure(std::move(mass));
}

Counts sample_multinomial(std::int64_t n, const Eigen::VectorXd& probabilities, Rng& rng) {
  if (n < 0) throw DomainError("multinomial size must be >= 0");
  const Eigen::Index k = probabilities.size();
  std::vector<std::int64_t> out(static_cast<std::size_t>(k), 0);
  // tail(i) = mass of points i..k-1, so zero-probability trailing points never receive counts.
  Eigen::VectorXd tail = Eigen::VectorXd::Zero(k + 1);
  for (Eigen::Index i = k - 1; i >= 0; --i) tail(i) = tail(i + 1) + probabilities(i);
  std::int64_t remaining = n;
  for (Eigen::Index i = 0; i < k && remaining > 0; ++i) {
    const double pi = probabilities(i);
    if (pi <= 0.0) continue;
    if (tail(i + 1) <= 0.0) {
      out[static_cast<std::size_t>(i)] = remaining;
      break;
    }
    std::binomial_distribution<std::int64_t> binom(remaining, std::clamp(pi / tail(i), 0.0, 1.0));
    const std::int64_t draw = binom(rng);
    out[static_cast<std::size_t>(i)] = draw;
    remaining -= draw;
  }
  return Counts(std::move(out));
}

}  // namespace wassinf
