// wassinf: exact Wasserstein distances and their limit laws from the command line.

#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "wassinf/errors.hpp"
#include "wassinf/inference.hpp"
#include "wassinf/io.hpp"
#include "wassinf/limit_laws.hpp"
#include "wassinf/resampling.hpp"
#include "wassinf/transport.hpp"
#include "wassinf/tree.hpp"

namespace {

using namespace wassinf;

enum ExitCode { kOk = 0, kUsage = 2, kData = 3, kSolver = 4 };

struct Globals {
  std::uint64_t seed = 0;
  std::size_t workers = 0;
  std::string output;
  double p = 2.0;
};

// Where points come from: an explicit cost matrix, coordinates or a tree.
struct CostSource {
  std::string cost;
  std::string points;
  std::string tree;
  bool check_triangle = false;

  void add_to(CLI::App* cmd, bool allow_tree) {
    auto* c = cmd->add_option("--cost", cost, "Cost matrix CSV (first row and column hold ids)");
    auto* pts = cmd->add_option("--points", points, "Point coordinates CSV: id,c1,...,cd");
    c->excludes(pts);
    if (allow_tree) {
      auto* t = cmd->add_option("--tree", tree, "Tree CSV: child,parent,weight");
      t->excludes(c)->excludes(pts);
    }
    cmd->add_flag("--check-triangle", check_triangle,
                  "Verify that the cost file's p-th root is a metric");
  }

  std::pair<GroundSpace, CostMatrix> load(double p) const {
    if (!cost.empty()) return io::read_cost(std::filesystem::path(cost), p, check_triangle);
    if (!points.empty()) {
      GroundSpace space = io::read_points(std::filesystem::path(points));
      CostMatrix c = build_cost(space, p);
      return {std::move(space), std::move(c)};
    }
    if (!tree.empty()) {
      const Tree t = io::read_tree(std::filesystem::path(tree));
      return {GroundSpace(t.labels()), tree_cost(t, p)};
    }
    throw ConfigError("one of --cost, --points or --tree is required");
  }
};

// Writes the whole primary output at once so that failures leave stdout empty.
void emit(const Globals& g, const std::string& body) {
  if (g.output.empty()) {
    std::cout << body;
    std::cout.flush();
    return;
  }
  std::ofstream out(g.output, std::ios::binary);
  if (!out) throw ParseError("cannot write '" + g.output + "'");
  out << body;
}

void emit_sidecar(const Globals& g, const io::Json& meta) {
  if (g.output.empty()) return;
  std::ofstream out(g.output + ".json", std::ios::binary);
  if (!out) throw ParseError("cannot write '" + g.output + ".json'");
  out << meta.dump(2) << '\n';
}

std::string json_line(const io::Json& j) { return j.dump(2) + "\n"; }

std::filesystem::path path_of(const std::string& s) { return std::filesystem::path(s); }

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Exact Wasserstein distances on finite spaces and their sampling limit laws"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed")->capture_default_str();
  app.add_option("--workers", g.workers, "Worker threads (0 = all cores)")->capture_default_str();
  app.add_option("-o,--output", g.output, "Primary output file (default: stdout)");
  app.add_option("-p", g.p, "Order p >= 1 of the Wasserstein distance")->capture_default_str();

  // dist
  auto* dist = app.add_subcommand("dist", "Exact W_p between two measures");
  std::string dist_r, dist_s, dist_plan;
  CostSource dist_cost;
  dist->add_option("--r", dist_r, "First measure CSV: id,mass")->required();
  dist->add_option("--s", dist_s, "Second measure CSV: id,mass")->required();
  dist->add_option("--plan", dist_plan, "Write the optimal plan as from_id,to_id,mass");
  dist_cost.add_to(dist, false);

  // limit
  auto* limit = app.add_subcommand("limit", "Sample a limit law of the empirical distance");
  std::string limit_regime, limit_r, limit_s, limit_method = "altalt";
  double limit_lambda = 0.5;
  std::size_t limit_M = 20000;
  CostSource limit_cost;
  limit->add_option("--regime", limit_regime,
                    "one-sample-null, one-sample-alt, two-sample-null or two-sample-alt")
      ->required();
  limit->add_option("--r", limit_r, "Measure r (plug-in under the null)")->required();
  limit->add_option("--s", limit_s, "Measure s (alternative regimes)");
  limit->add_option("--lambda", limit_lambda, "Two-sample limit weight in [0, 1]")
      ->capture_default_str();
  limit->add_option("-M", limit_M, "Number of draws")->capture_default_str();
  limit->add_option("--method", limit_method, "Alternative-regime evaluation: altalt or face")
      ->check(CLI::IsMember({"altalt", "face"}))
      ->capture_default_str();
  limit_cost.add_to(limit, true);

  // tree-limit
  auto* tree_limit = app.add_subcommand("tree-limit", "Sample the tree-metric null limit");
  std::string tl_tree, tl_line, tl_r;
  std::size_t tl_M = 20000;
  auto* tl_tree_opt = tree_limit->add_option("--tree", tl_tree, "Tree CSV: child,parent,weight");
  auto* tl_line_opt = tree_limit->add_option(
      "--line", tl_line, "Points on the real line (id,x, increasing x); uses p = 2");
  tl_tree_opt->excludes(tl_line_opt);
  tree_limit->add_option("--r", tl_r, "Measure on the nodes: id,mass")->required();
  tree_limit->add_option("-M", tl_M, "Number of draws")->capture_default_str();

  // test
  auto* test = app.add_subcommand("test", "Two-sample test of r = s");
  std::string test_x, test_y, test_method = "limit";
  std::size_t test_M = 20000, test_B = 999;
  CostSource test_cost;
  test->add_option("--x", test_x, "First sample: id,count rows or one label per line")->required();
  test->add_option("--y", test_y, "Second sample")->required();
  test->add_option("-M", test_M, "Limit draws")->capture_default_str();
  test->add_option("-B", test_B, "Permutations (with --method permutation)")->capture_default_str();
  test->add_option("--method", test_method, "limit or permutation")
      ->check(CLI::IsMember({"limit", "permutation"}))
      ->capture_default_str();
  test_cost.add_to(test, true);

  // ci
  auto* ci = app.add_subcommand("ci", "Confidence interval for W_p(r, s)");
  std::string ci_x, ci_y, ci_method = "altalt";
  double ci_level = 0.95;
  std::size_t ci_M = 20000;
  CostSource ci_cost;
  ci->add_option("--x", ci_x, "First sample")->required();
  ci->add_option("--y", ci_y, "Second sample")->required();
  ci->add_option("--level", ci_level, "Nominal coverage")->capture_default_str();
  ci->add_option("-M", ci_M, "Limit draws")->capture_default_str();
  ci->add_option("--method", ci_method, "altalt or face")
      ->check(CLI::IsMember({"altalt", "face"}))
      ->capture_default_str();
  ci_cost.add_to(ci, true);

  // bootstrap
  auto* boot = app.add_subcommand("bootstrap", "Bootstrap replicates on the W_p^p scale");
  std::string boot_x, boot_y, boot_scheme = "derivative", boot_stat = "derivative";
  std::size_t boot_B = 999;
  std::optional<std::int64_t> boot_k;
  bool boot_distance_scale = false;
  CostSource boot_cost;
  boot->add_option("--x", boot_x, "First sample")->required();
  boot->add_option("--y", boot_y, "Second sample")->required();
  boot->add_option("--scheme", boot_scheme, "naive, m-of-n or derivative")
      ->check(CLI::IsMember({"naive", "m-of-n", "derivative"}))
      ->capture_default_str();
  boot->add_option("-B", boot_B, "Replications")->capture_default_str();
  boot->add_option("-k", boot_k, "Resample size for m-of-n (default ceil(n^(2/3)))");
  boot->add_option("--statistic", boot_stat, "m-of-n replicate: derivative or plug-in")
      ->check(CLI::IsMember({"derivative", "plug-in"}))
      ->capture_default_str();
  boot->add_flag("--distance-scale", boot_distance_scale,
                 "Report sign(v)|v|^(1/p) instead of the W_p^p-scale value");
  boot_cost.add_to(boot, true);

  // convergence
  auto* conv = app.add_subcommand("convergence", "KS distance between finite-sample and limit laws");
  int conv_L = 3;
  double conv_alpha = 1.0;
  std::vector<std::int64_t> conv_n{10, 100, 1000, 5000};
  std::size_t conv_measures = 5, conv_M = 20000;
  conv->add_option("--grid-size", conv_L, "Grid side L")->capture_default_str();
  conv->add_option("--alpha", conv_alpha, "Dirichlet parameter")->capture_default_str();
  conv->add_option("--n", conv_n, "Sample sizes")->delimiter(',')->capture_default_str();
  conv->add_option("--measures", conv_measures, "Number of random measures")->capture_default_str();
  conv->add_option("-M", conv_M, "Draws per law")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);
    std::cerr << "wassinf: " << e.what() << '\n';
    return kUsage;
  }

  try {
    if (*dist) {
      const auto [space, cost] = dist_cost.load(g.p);
      const Measure r = io::read_measure(path_of(dist_r), space);
      const Measure s = io::read_measure(path_of(dist_s), space);
      const TransportSolution sol = solve_ot(r, s, cost);
      io::Json j;
      j["w_pp"] = io::round12(sol.value_pp);
      j["w_p"] = io::round12(std::pow(std::max(0.0, sol.value_pp), 1.0 / g.p));
      j["n_points"] = space.size();
      if (!dist_plan.empty()) {
        std::ostringstream plan;
        io::write_plan(plan, space, sol.plan);
        std::ofstream out(dist_plan, std::ios::binary);
        if (!out) throw ParseError("cannot write '" + dist_plan + "'");
        out << plan.str();
      }
      emit(g, json_line(j));
    } else if (*limit) {
      const Regime regime = parse_regime(limit_regime);
      const auto [space, cost] = limit_cost.load(g.p);
      const Measure r = io::read_measure(path_of(limit_r), space);
      std::optional<Measure> s;
      if (!limit_s.empty()) s = io::read_measure(path_of(limit_s), space);
      LimitOptions options;
      options.workers = g.workers;
      options.alt_method = limit_method == "face" ? AltMethod::kFaceLp : AltMethod::kOneDimensional;
      const LimitDraws draws =
          limit_sample(regime, r, s, cost, g.p, limit_lambda, limit_M, g.seed, options);
      std::ostringstream out;
      io::write_values(out, "draw_index,value", draws.draws);
      emit(g, out.str());
      emit_sidecar(g, io::limit_metadata(draws));
    } else if (*tree_limit) {
      LimitDraws draws;
      if (!tl_line.empty()) {
        const GroundSpace space = io::read_points(path_of(tl_line));
        if (space.coords().cols() != 1) throw DataError("--line expects one coordinate per point");
        std::vector<double> x(space.size());
        for (std::size_t i = 0; i < x.size(); ++i) x[i] = space.coords()(static_cast<Eigen::Index>(i), 0);
        const Measure r = io::read_measure(path_of(tl_r), space);
        draws = line_limit_sample(x, r, tl_M, g.seed, g.workers);
      } else if (!tl_tree.empty()) {
        const Tree tree = io::read_tree(path_of(tl_tree));
        const Measure r = io::read_measure(path_of(tl_r), GroundSpace(tree.labels()));
        draws = tree_limit_sample(tree, r, g.p, tl_M, g.seed, g.workers);
      } else {
        throw ConfigError("tree-limit needs --tree or --line");
      }
      std::ostringstream out;
      io::write_values(out, "draw_index,value", draws.draws);
      emit(g, out.str());
      emit_sidecar(g, io::limit_metadata(draws));
    } else if (*test) {
      const auto [space, cost] = test_cost.load(g.p);
      const Counts x = io::read_counts(path_of(test_x), space);
      const Counts y = io::read_counts(path_of(test_y), space);
      InferenceOptions options;
      options.workers = g.workers;
      const TestReport report =
          test_method == "permutation"
              ? permutation_test(x, y, cost, g.p, test_B, g.seed, options)
              : test_two_sample_null(x, y, cost, g.p, test_M, g.seed, options);
      emit(g, json_line(io::to_json(report)));
    } else if (*ci) {
      const auto [space, cost] = ci_cost.load(g.p);
      const Counts x = io::read_counts(path_of(ci_x), space);
      const Counts y = io::read_counts(path_of(ci_y), space);
      InferenceOptions options;
      options.workers = g.workers;
      options.alt_method = ci_method == "face" ? AltMethod::kFaceLp : AltMethod::kOneDimensional;
      const ConfidenceInterval interval =
          ci_two_sample_alt(x, y, cost, g.p, ci_level, ci_M, g.seed, options);
      emit(g, json_line(io::to_json(interval)));
    } else if (*boot) {
      const auto [space, cost] = boot_cost.load(g.p);
      const Counts x = io::read_counts(path_of(boot_x), space);
      const Counts y = io::read_counts(path_of(boot_y), space);
      BootstrapOptions options;
      options.workers = g.workers;
      options.mofn_statistic =
          boot_stat == "plug-in" ? MofnStatistic::kPlugIn : MofnStatistic::kDerivative;
      BootstrapDraws draws;
      switch (parse_scheme(boot_scheme)) {
        case BootstrapScheme::kNaive:
          draws = naive_bootstrap(x, y, cost, g.p, boot_B, g.seed, options);
          break;
        case BootstrapScheme::kMofN:
          draws = mofn_bootstrap(x, y, cost, g.p, boot_k, boot_B, g.seed, options);
          break;
        case BootstrapScheme::kDerivative:
          draws = derivative_bootstrap(x, y, cost, g.p, boot_B, g.seed, options);
          break;
      }
      for (const auto& w : draws.warnings) std::cerr << "wassinf: warning: " << w << '\n';
      const std::vector<double> values =
          boot_distance_scale ? to_distance_scale(draws.values, g.p) : draws.values;
      std::ostringstream out;
      io::write_values(out, "rep,value", values);
      emit(g, out.str());
      io::Json meta = io::bootstrap_metadata(draws);
      meta["scale"] = boot_distance_scale ? "W_p" : "W_p^p";
      emit_sidecar(g, meta);
    } else if (*conv) {
      ConvergenceConfig config;
      config.L = conv_L;
      config.alpha = conv_alpha;
      config.p = g.p;
      config.n_list = conv_n;
      config.n_measures = conv_measures;
      config.M = conv_M;
      config.seed = g.seed;
      config.workers = g.workers;
      const auto rows = convergence_study(config);
      std::ostringstream out;
      io::write_convergence(out, rows);
      emit(g, out.str());
    }
  } catch (const DataError& e) {
    std::cerr << "wassinf: data error: " << e.what() << '\n';
    return kData;
  } catch (const SolverError& e) {
    std::cerr << "wassinf: solver error: " << e.what() << '\n';
    return kSolver;
  } catch (const Error& e) {
    std::cerr << "wassinf: error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "wassinf: error: " << e.what() << '\n';
    return kUsage;
  }
  return kOk;
}
