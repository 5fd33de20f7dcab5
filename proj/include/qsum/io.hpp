#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "qsum/fourier.hpp"
#include "qsum/geometry.hpp"
#include "qsum/solver.hpp"
#include "qsum/transforms.hpp"

namespace qsum::io {

using json = nlohmann::json;

/// A problem file: the spec plus the sector direction it asks for.
struct ProblemFile {
  ProblemSpec spec;
  double direction = 0.0;
  /// canonical JSON with every profile inlined; this is what gets hashed
  json canonical;
};

/// Profiles are either inline ({"values": [[re, im], ...]} or {"re": [...], "im": [...]}),
/// a Gaussian ({"gaussian": {"scale", "width", "shift"}}) or a file reference
/// ({"file": "name.json"}). File references resolve against base_dir first and
/// QSUM_DATA_DIR second. InvalidSpec on any malformed field.
ProblemFile parse_problem(const json& j, const std::filesystem::path& base_dir);
ProblemFile load_problem(const std::filesystem::path& file);

json problem_to_json(const ProblemSpec& spec, double direction);

cplx complex_from_json(const json& j);
json complex_to_json(cplx z);

json fourier_to_json(const FourierFn& f);
FourierFn fourier_from_json(const json& j, const MGrid& grid, double beta, double mu,
                            const std::filesystem::path& base_dir);

json series_to_json(const FourierSeries& s);
FourierSeries series_from_json(const json& j);
FourierSeries load_series(const std::filesystem::path& file);

json sector_to_json(const SectorConfig& c);
json solution_report(const BorelSolution& sol, const SolverOptions& options);

/// SHA-1 of "blob <size>\0<content>", the id git gives the same bytes.
std::string git_blob_sha1(std::string_view content);

/// Shortest decimal that reads back to the same double.
std::string format_double(double x);

/// Tabular output shared by the commands.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<json>> rows;

  std::string to_csv(const std::string& manifest_ref) const;
  json to_json(const std::string& manifest_ref) const;
};

/// Directory containing a relative path's data files: QSUM_DATA_DIR or "data".
std::filesystem::path data_dir();

/// Reads a whole file; InvalidArgument if it cannot be opened.
std::string read_file(const std::filesystem::path& file);
/// Writes and returns the git blob id of the contents.
std::string write_file(const std::filesystem::path& file, const std::string& contents);

}  // namespace qsum::io
