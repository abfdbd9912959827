#pragma once

#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "wassinf/ground.hpp"
#include "wassinf/inference.hpp"
#include "wassinf/limit_laws.hpp"
#include "wassinf/resampling.hpp"
#include "wassinf/tree.hpp"

namespace wassinf::io {

using Json = nlohmann::ordered_json;

/// Non-empty, non-comment lines of a CSV file split on commas with fields trimmed.
/// `line_numbers` receives the 1-based source line of each returned row.
std::vector<std::vector<std::string>> read_rows(std::istream& in,
                                                std::vector<std::size_t>* line_numbers = nullptr);
std::vector<std::vector<std::string>> read_rows(const std::filesystem::path& path,
                                                std::vector<std::size_t>* line_numbers = nullptr);

double parse_double(const std::string& text, const std::string& context);
std::int64_t parse_int(const std::string& text, const std::string& context);

/// Cost file: header row "id,<id_1>,...,<id_N>" then one row "<id_i>,c_i1,...,c_iN" per point.
std::pair<GroundSpace, CostMatrix> read_cost(std::istream& in, double p, bool metric_flag);
std::pair<GroundSpace, CostMatrix> read_cost(const std::filesystem::path& path, double p,
                                             bool metric_flag);

/// Points file: "id,c1,...,cd" per point (an optional header whose first field is "id").
GroundSpace read_points(std::istream& in);
GroundSpace read_points(const std::filesystem::path& path);

/// Measure file "id,mass", aligned to the space's labels. Missing labels get mass 0;
/// unknown labels are a DataError. Sums within 1e-6 of 1 are renormalized.
Measure read_measure(std::istream& in, const GroundSpace& space);
Measure read_measure(const std::filesystem::path& path, const GroundSpace& space);

/// Counts file: aggregated "id,count" rows or one observation label per line.
Counts read_counts(std::istream& in, const GroundSpace& space);
Counts read_counts(const std::filesystem::path& path, const GroundSpace& space);

/// Tree file: "child,parent,weight" rows.
Tree read_tree(std::istream& in);
Tree read_tree(const std::filesystem::path& path);

/// Number printed with 12 significant digits.
std::string format_number(double value);
/// Value rounded to 12 significant digits, for JSON output.
double round12(double value);

void write_plan(std::ostream& out, const GroundSpace& space, const Eigen::MatrixXd& plan);
/// Header then "index,value" rows.
void write_values(std::ostream& out, const std::string& header, std::span<const double> values);
void write_convergence(std::ostream& out, std::span<const ConvergenceRow> rows);

Json to_json(const TestReport& report);
Json to_json(const ConfidenceInterval& ci);
Json limit_metadata(const LimitDraws& draws);
Json bootstrap_metadata(const BootstrapDraws& draws);

}  // namespace wassinf::io
