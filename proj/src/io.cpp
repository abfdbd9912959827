#include "wassinf/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unordered_map>

#include "wassinf/errors.hpp"

namespace wassinf::io {

namespace {

std::string trim(std::string_view text) {
  std::size_t b = 0;
  std::size_t e = text.size();
  while (b < e && std::isspace(static_cast<unsigned char>(text[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(text[e - 1]))) --e;
  return std::string(text.substr(b, e - b));
}

std::ifstream open(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open '" + path.string() + "'");
  return in;
}

std::string where(std::size_t line) { return "line " + std::to_string(line); }

}  // namespace

std::vector<std::vector<std::string>> read_rows(std::istream& in,
                                                std::vector<std::size_t>* line_numbers) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = stripped.find(',', start);
      fields.push_back(trim(std::string_view(stripped).substr(start, comma - start)));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    rows.push_back(std::move(fields));
    if (line_numbers) line_numbers->push_back(number);
  }
  return rows;
}

std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& path,
                                                std::vector<std::size_t>* line_numbers) {
  auto in = open(path);
  return read_rows(in, line_numbers);
}

double parse_double(const std::string& text, const std::string& context) {
  double value = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ParseError(context + ": expected a number, got '" + text + "'");
  }
  return value;
}

std::int64_t parse_int(const std::string& text, const std::string& context) {
  std::int64_t value = 0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty()) {
    throw ParseError(context + ": expected an integer, got '" + text + "'");
  }
  return value;
}

std::pair<GroundSpace, CostMatrix> read_cost(std::istream& in, double p, bool metric_flag) {
  std::vector<std::size_t> lines;
  const auto rows = read_rows(in, &lines);
  if (rows.empty()) throw ParseError("cost file is empty");
  const auto& header = rows.front();
  if (header.size() < 2) throw ParseError("cost header needs at least one point id");
  const std::size_t n = header.size() - 1;
  std::vector<std::string> labels(header.begin() + 1, header.end());
  if (rows.size() != n + 1) {
    throw DataError("cost file has " + std::to_string(rows.size() - 1) + " rows for " +
                    std::to_string(n) + " columns");
  }
  GroundSpace space(labels);
  Eigen::MatrixXd c(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  for (std::size_t i = 0; i < n; ++i) {
    const auto& row = rows[i + 1];
    const std::string ctx = where(lines[i + 1]);
    if (row.size() != n + 1) throw ParseError(ctx + ": expected " + std::to_string(n + 1) + " fields");
    if (row.front() != labels[i]) {
      throw DataError(ctx + ": row id '" + row.front() + "' does not match column id '" +
                      labels[i] + "'");
    }
    for (std::size_t j = 0; j < n; ++j) {
      c(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = parse_double(row[j + 1], ctx);
    }
  }
  return {std::move(space), CostMatrix(std::move(c), p, metric_flag)};
}

std::pair<GroundSpace, CostMatrix> read_cost(const std::filesystem::path& path, double p,
                                             bool metric_flag) {
  auto in = open(path);
  return read_cost(in, p, metric_flag);
}

GroundSpace read_points(std::istream& in) {
  std::vector<std::size_t> lines;
  auto rows = read_rows(in, &lines);
  std::size_t first = 0;
  if (!rows.empty() && rows.front().front() == "id") first = 1;
  if (rows.size() <= first) throw ParseError("points file has no points");
  const std::size_t dim = rows[first].size() - 1;
  if (dim < 1) throw ParseError(where(lines[first]) + ": a point needs at least one coordinate");
  std::vector<std::string> labels;
  Eigen::MatrixXd coords(static_cast<Eigen::Index>(rows.size() - first), static_cast<Eigen::Index>(dim));
  for (std::size_t i = first; i < rows.size(); ++i) {
    const std::string ctx = where(lines[i]);
    if (rows[i].size() != dim + 1) throw ParseError(ctx + ": inconsistent coordinate dimension");
    labels.push_back(rows[i].front());
    for (std::size_t d = 0; d < dim; ++d) {
      coords(static_cast<Eigen::Index>(i - first), static_cast<Eigen::Index>(d)) =
          parse_double(rows[i][d + 1], ctx);
    }
  }
  return GroundSpace(std::move(labels), std::move(coords));
}

GroundSpace read_points(const std::filesystem::path& path) {
  auto in = open(path);
  return read_points(in);
}

Measure read_measure(std::istream& in, const GroundSpace& space) {
  std::vector<std::size_t> lines;
  const auto rows = read_rows(in, &lines);
  Eigen::VectorXd mass = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(space.size()));
  std::vector<bool> seen(space.size(), false);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const std::string ctx = where(lines[i]);
    if (row.size() != 2) throw ParseError(ctx + ": expected 'id,mass'");
    if (i == 0 && row[0] == "id") continue;  // header
    const auto index = space.index_of(row[0]);
    if (!index) throw DataError(ctx + ": unknown point id '" + row[0] + "'");
    if (seen[*index]) throw DataError(ctx + ": duplicate point id '" + row[0] + "'");
    seen[*index] = true;
    mass(static_cast<Eigen::Index>(*index)) = parse_double(row[1], ctx);
  }
  return Measure::renormalized(std::move(mass));
}

Measure read_measure(const std::filesystem::path& path, const GroundSpace& space) {
  auto in = open(path);
  return read_measure(in, space);
}

Counts read_counts(std::istream& in, const GroundSpace& space) {
  std::vector<std::size_t> lines;
  const auto rows = read_rows(in, &lines);
  std::vector<std::int64_t> counts(space.size(), 0);
  if (rows.empty()) throw DataError("sample file contains no observations");
  const bool aggregated = rows.front().size() == 2;
  std::vector<bool> seen(space.size(), false);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const std::string ctx = where(lines[i]);
    if (aggregated) {
      if (row.size() != 2) throw ParseError(ctx + ": expected 'id,count'");
      if (i == 0 && row[0] == "id") continue;  // header
      const auto index = space.index_of(row[0]);
      if (!index) throw DataError(ctx + ": unknown point id '" + row[0] + "'");
      if (seen[*index]) throw DataError(ctx + ": duplicate point id '" + row[0] + "'");
      seen[*index] = true;
      const std::int64_t value = parse_int(row[1], ctx);
      if (value < 0) throw DomainError(ctx + ": counts must be nonnegative");
      counts[*index] = value;
    } else {
      if (row.size() != 1) throw ParseError(ctx + ": expected one observation label per line");
      const auto index = space.index_of(row[0]);
      if (!index) throw DataError(ctx + ": unknown point id '" + row[0] + "'");
      ++counts[*index];
    }
  }
  Counts out(std::move(counts));
  if (out.n() < 1) throw DataError("sample contains no observations");
  return out;
}

Counts read_counts(const std::filesystem::path& path, const GroundSpace& space) {
  auto in = open(path);
  return read_counts(in, space);
}

Tree read_tree(std::istream& in) {
  std::vector<std::size_t> lines;
  const auto rows = read_rows(in, &lines);
  std::vector<Tree::Edge> edges;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    const std::string ctx = where(lines[i]);
    if (row.size() != 3) throw ParseError(ctx + ": expected 'child,parent,weight'");
    if (i == 0 && row[0] == "child") continue;  // header
    edges.emplace_back(row[0], row[1], parse_double(row[2], ctx));
  }
  if (edges.empty()) throw ParseError("tree file has no rows");
  return Tree::from_edges(edges);
}

Tree read_tree(const std::filesystem::path& path) {
  auto in = open(path);
  return read_tree(in);
}

std::string format_number(double value) {
  if (value == 0.0) return "0";  // also folds -0
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.12g", value);
  return buffer;
}

double round12(double value) {
  if (!std::isfinite(value)) return value;
  return std::strtod(format_number(value).c_str(), nullptr);
}

void write_plan(std::ostream& out, const GroundSpace& space, const Eigen::MatrixXd& plan) {
  out << "from_id,to_id,mass\n";
  for (Eigen::Index i = 0; i < plan.rows(); ++i) {
    for (Eigen::Index j = 0; j < plan.cols(); ++j) {
      if (plan(i, j) > 1e-12) {
        out << space.labels()[static_cast<std::size_t>(i)] << ','
            << space.labels()[static_cast<std::size_t>(j)] << ',' << format_number(plan(i, j))
            << '\n';
      }
    }
  }
}

void write_values(std::ostream& out, const std::string& header, std::span<const double> values) {
  out << header << '\n';
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << i << ',' << format_number(values[i]) << '\n';
  }
}

void write_convergence(std::ostream& out, std::span<const ConvergenceRow> rows) {
  out << "L,alpha,p,n,ks\n";
  for (const auto& row : rows) {
    out << row.L << ',' << format_number(row.alpha) << ',' << format_number(row.p) << ','
        << row.n << ',' << format_number(row.ks) << '\n';
  }
}

Json to_json(const TestReport& report) {
  Json j;
  j["statistic"] = round12(report.statistic);
  j["p_value"] = round12(report.p_value);
  j["M"] = report.M;
  j["method"] = report.method;
  j["regime"] = std::string(to_string(report.regime));
  j["p"] = round12(report.p);
  j["n"] = report.n;
  j["m"] = report.m;
  return j;
}

Json to_json(const ConfidenceInterval& ci) {
  Json j;
  j["estimate"] = round12(ci.estimate);
  j["lower"] = round12(ci.lower);
  j["upper"] = round12(ci.upper);
  j["level"] = round12(ci.level);
  j["M"] = ci.M;
  j["one_sided"] = ci.one_sided;
  return j;
}

Json limit_metadata(const LimitDraws& draws) {
  Json j;
  j["regime"] = std::string(to_string(draws.regime));
  j["p"] = round12(draws.p);
  j["lambda"] = draws.lambda ? Json(round12(*draws.lambda)) : Json(nullptr);
  j["M"] = draws.draws.size();
  j["seed"] = draws.seed;
  return j;
}

Json bootstrap_metadata(const BootstrapDraws& draws) {
  Json j;
  j["scheme"] = std::string(to_string(draws.scheme));
  j["B"] = draws.B;
  j["k"] = draws.k ? Json(*draws.k) : Json(nullptr);
  j["seed"] = draws.seed;
  j["n"] = draws.n;
  j["m"] = draws.m;
  j["inconsistent"] = !draws.consistent;
  j["warnings"] = draws.warnings;
  return j;
}

}  // namespace wassinf::io
