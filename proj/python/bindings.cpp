#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>
#include <string>
#include <vector>

#include "wassinf/errors.hpp"
#include "wassinf/inference.hpp"
#include "wassinf/limit_laws.hpp"
#include "wassinf/resampling.hpp"
#include "wassinf/transport.hpp"
#include "wassinf/tree.hpp"

namespace py = pybind11;
using namespace wassinf;

namespace {

// Python callers pass plain arrays; cost entries are taken as d^p already.
CostMatrix make_cost(const Eigen::MatrixXd& cost, double p, bool check_triangle) {
  return CostMatrix(cost, p, check_triangle);
}

Measure make_measure(const Eigen::VectorXd& mass) { return Measure::renormalized(mass); }

AltMethod parse_alt_method(const std::string& method) {
  if (method == "altalt") return AltMethod::kOneDimensional;
  if (method == "face") return AltMethod::kFaceLp;
  throw ConfigError("unknown method '" + method + "' (expected altalt or face)");
}

py::dict limit_dict(const LimitDraws& d) {
  py::dict out;
  out["regime"] = std::string(to_string(d.regime));
  out["p"] = d.p;
  out["lambda"] = d.lambda;
  out["seed"] = d.seed;
  out["draws"] = d.draws;
  return out;
}

py::dict report_dict(const TestReport& t) {
  py::dict out;
  out["statistic"] = t.statistic;
  out["p_value"] = t.p_value;
  out["M"] = t.M;
  out["method"] = t.method;
  out["regime"] = std::string(to_string(t.regime));
  out["p"] = t.p;
  out["n"] = t.n;
  out["m"] = t.m;
  return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Wasserstein distances on finite spaces: exact transport, limit laws, inference";

  auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<DomainError>(m, "DomainError", base.ptr());
  py::register_exception<ConfigError>(m, "ConfigError", base.ptr());
  py::register_exception<DataError>(m, "DataError", base.ptr());
  py::register_exception<ParseError>(m, "ParseError", base.ptr());
  py::register_exception<SolverError>(m, "SolverError", base.ptr());

  m.def(
      "solve_ot",
      [](const Eigen::VectorXd& r, const Eigen::VectorXd& s, const Eigen::MatrixXd& cost,
         double p, bool check_triangle) {
        const auto sol = solve_ot(make_measure(r), make_measure(s), make_cost(cost, p, check_triangle));
        py::dict out;
        out["w_pp"] = sol.value_pp;
        out["plan"] = sol.plan;
        out["u"] = sol.dual_u;
        out["v"] = sol.dual_v;
        return out;
      },
      py::arg("r"), py::arg("s"), py::arg("cost"), py::arg("p") = 2.0,
      py::arg("check_triangle") = false,
      "Optimal plan, W_p^p and dual potentials for the cost matrix `cost` (entries d^p).");

  m.def(
      "wasserstein",
      [](const Eigen::VectorXd& r, const Eigen::VectorXd& s, const Eigen::MatrixXd& cost, double p) {
        return wasserstein(make_measure(r), make_measure(s), make_cost(cost, p, false), p);
      },
      py::arg("r"), py::arg("s"), py::arg("cost"), py::arg("p") = 2.0);

  m.def(
      "euclidean_cost",
      [](const Eigen::MatrixXd& coords, double p) {
        std::vector<std::string> labels;
        for (Eigen::Index i = 0; i < coords.rows(); ++i) labels.push_back(std::to_string(i));
        return build_cost(GroundSpace(labels, coords), p).entries();
      },
      py::arg("coords"), py::arg("p") = 2.0, "d^p for the rows of `coords`.");

  m.def(
      "grid",
      [](int L, double p) {
        const auto [space, cost] = build_grid(L, p);
        return py::make_tuple(space.coords(), cost.entries());
      },
      py::arg("L"), py::arg("p") = 2.0, "Coordinates and cost of the L x L grid.");

  m.def(
      "max_dual_null",
      [](const Eigen::VectorXd& g, const Eigen::MatrixXd& cost, double p) {
        return max_dual_null(g, make_cost(cost, p, false));
      },
      py::arg("g"), py::arg("cost"), py::arg("p") = 2.0,
      "max <g, u> over u_x - u_x' <= c(x, x') for a balanced vector g.");

  m.def(
      "limit_sample",
      [](const std::string& regime, const Eigen::VectorXd& r, const Eigen::MatrixXd& cost,
         double p, std::optional<Eigen::VectorXd> s, double lam, std::size_t M,
         std::uint64_t seed, std::size_t workers, const std::string& method) {
        std::optional<Measure> sm;
        if (s) sm = make_measure(*s);
        LimitOptions options;
        options.workers = workers;
        options.alt_method = parse_alt_method(method);
        const auto d = limit_sample(parse_regime(regime), make_measure(r), sm,
                                    make_cost(cost, p, false), p, lam, M, seed, options);
        return limit_dict(d);
      },
      py::arg("regime"), py::arg("r"), py::arg("cost"), py::arg("p") = 2.0,
      py::arg("s") = py::none(), py::arg("lam") = 0.5, py::arg("M") = 20000,
      py::arg("seed") = 0, py::arg("workers") = 0, py::arg("method") = "altalt",
      "Monte-Carlo draws of a distributional limit. regime is one-sample-null, "
      "one-sample-alt, two-sample-null or two-sample-alt.");

  m.def(
      "tree_limit_sample",
      [](const std::vector<std::tuple<std::string, std::string, double>>& edges,
         const Eigen::VectorXd& r, double p, std::size_t M, std::uint64_t seed,
         std::size_t workers) {
        const Tree tree = Tree::from_edges(edges);
        return limit_dict(tree_limit_sample(tree, make_measure(r), p, M, seed, workers));
      },
      py::arg("edges"), py::arg("r"), py::arg("p") = 1.0, py::arg("M") = 20000,
      py::arg("seed") = 0, py::arg("workers") = 0,
      "Null limit on a tree given as (child, parent, weight) rows. r follows the order in "
      "which labels first appear in `edges`.");

  m.def(
      "tree_labels",
      [](const std::vector<std::tuple<std::string, std::string, double>>& edges) {
        return Tree::from_edges(edges).labels();
      },
      py::arg("edges"), "Node order used by tree_limit_sample.");

  m.def(
      "line_limit_sample",
      [](const std::vector<double>& points, const Eigen::VectorXd& r, std::size_t M,
         std::uint64_t seed, std::size_t workers) {
        return limit_dict(line_limit_sample(points, make_measure(r), M, seed, workers));
      },
      py::arg("points"), py::arg("r"), py::arg("M") = 20000, py::arg("seed") = 0,
      py::arg("workers") = 0);

  m.def(
      "two_sample_test",
      [](const std::vector<std::int64_t>& x, const std::vector<std::int64_t>& y,
         const Eigen::MatrixXd& cost, double p, std::size_t M, std::uint64_t seed,
         const std::string& method, std::size_t workers) {
        const CostMatrix c = make_cost(cost, p, false);
        InferenceOptions options;
        options.workers = workers;
        if (method == "limit") {
          return report_dict(test_two_sample_null(Counts(x), Counts(y), c, p, M, seed, options));
        }
        if (method == "permutation") {
          return report_dict(permutation_test(Counts(x), Counts(y), c, p, M, seed, options));
        }
        throw ConfigError("unknown method '" + method + "' (expected limit or permutation)");
      },
      py::arg("x"), py::arg("y"), py::arg("cost"), py::arg("p") = 2.0, py::arg("M") = 20000,
      py::arg("seed") = 0, py::arg("method") = "limit", py::arg("workers") = 0,
      "Test of r = s from count vectors. For method='permutation' M is the number of "
      "relabelings.");

  m.def(
      "confidence_interval",
      [](const std::vector<std::int64_t>& x, const std::vector<std::int64_t>& y,
         const Eigen::MatrixXd& cost, double p, double level, std::size_t M, std::uint64_t seed,
         std::size_t workers, const std::string& method) {
        InferenceOptions options;
        options.workers = workers;
        options.alt_method = parse_alt_method(method);
        const auto ci = ci_two_sample_alt(Counts(x), Counts(y), make_cost(cost, p, false), p,
                                          level, M, seed, options);
        py::dict out;
        out["estimate"] = ci.estimate;
        out["lower"] = ci.lower;
        out["upper"] = ci.upper;
        out["level"] = ci.level;
        out["M"] = ci.M;
        out["one_sided"] = ci.one_sided;
        return out;
      },
      py::arg("x"), py::arg("y"), py::arg("cost"), py::arg("p") = 2.0, py::arg("level") = 0.95,
      py::arg("M") = 20000, py::arg("seed") = 0, py::arg("workers") = 0,
      py::arg("method") = "altalt");

  m.def(
      "bootstrap",
      [](const std::vector<std::int64_t>& x, const std::vector<std::int64_t>& y,
         const Eigen::MatrixXd& cost, double p, const std::string& scheme, std::size_t B,
         std::optional<std::int64_t> k, std::uint64_t seed, const std::string& statistic,
         std::size_t workers) {
        const CostMatrix c = make_cost(cost, p, false);
        BootstrapOptions options;
        options.workers = workers;
        if (statistic == "plug-in") {
          options.mofn_statistic = MofnStatistic::kPlugIn;
        } else if (statistic != "derivative") {
          throw ConfigError("unknown statistic '" + statistic + "' (expected derivative or plug-in)");
        }
        BootstrapDraws d;
        switch (parse_scheme(scheme)) {
          case BootstrapScheme::kNaive:
            d = naive_bootstrap(Counts(x), Counts(y), c, p, B, seed, options);
            break;
          case BootstrapScheme::kMofN:
            d = mofn_bootstrap(Counts(x), Counts(y), c, p, k, B, seed, options);
            break;
          case BootstrapScheme::kDerivative:
            d = derivative_bootstrap(Counts(x), Counts(y), c, p, B, seed, options);
            break;
        }
        py::dict out;
        out["scheme"] = std::string(to_string(d.scheme));
        out["values"] = d.values;
        out["B"] = d.B;
        out["k"] = d.k;
        out["seed"] = d.seed;
        out["n"] = d.n;
        out["m"] = d.m;
        out["consistent"] = d.consistent;
        out["warnings"] = d.warnings;
        return out;
      },
      py::arg("x"), py::arg("y"), py::arg("cost"), py::arg("p") = 2.0,
      py::arg("scheme") = "derivative", py::arg("B") = 999, py::arg("k") = py::none(),
      py::arg("seed") = 0, py::arg("statistic") = "derivative", py::arg("workers") = 0,
      "Bootstrap replicates on the W_p^p scale. scheme is naive, m-of-n or derivative.");

  m.def(
      "convergence_study",
      [](int L, double alpha, double p, std::vector<std::int64_t> n_list, std::size_t n_measures,
         std::size_t M, std::uint64_t seed, std::size_t workers) {
        ConvergenceConfig config;
        config.L = L;
        config.alpha = alpha;
        config.p = p;
        config.n_list = std::move(n_list);
        config.n_measures = n_measures;
        config.M = M;
        config.seed = seed;
        config.workers = workers;
        py::list rows;
        for (const auto& row : convergence_study(config)) {
          py::dict d;
          d["L"] = row.L;
          d["alpha"] = row.alpha;
          d["p"] = row.p;
          d["n"] = row.n;
          d["ks"] = row.ks;
          rows.append(d);
        }
        return rows;
      },
      py::arg("L") = 3, py::arg("alpha") = 1.0, py::arg("p") = 2.0,
      py::arg("n_list") = std::vector<std::int64_t>{10, 100, 1000, 5000},
      py::arg("n_measures") = 5, py::arg("M") = 20000, py::arg("seed") = 0,
      py::arg("workers") = 0);

  m.def(
      "ks_distance",
      [](const std::vector<double>& a, const std::vector<double>& b) { return ks_distance(a, b); },
      py::arg("a"), py::arg("b"));
}
