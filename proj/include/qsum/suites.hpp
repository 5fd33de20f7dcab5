#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "qsum/geometry.hpp"
#include "qsum/transforms.hpp"

namespace qsum {

/// One measured quantity against its tolerance.
struct CheckRow {
  std::string check;
  std::string label;
  double error = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  std::string witness;
};

struct SuiteResult {
  std::string suite;
  std::vector<CheckRow> rows;

  bool pass() const;
  /// rows whose check name matches
  std::vector<CheckRow> rows_of(const std::string& check) const;
  void add(std::string check, std::string label, double error, double tolerance, std::string witness = {});
  void add_failure(std::string check, std::string label, std::string witness);
};

/// Transform, series and special-function identities that need no problem
/// data. The seed drives the random series of the exact formal checks.
SuiteResult identities_suite(std::uint64_t seed = 1);

/// Structure conditions, sector selection, exp_q envelope, the P_m lower bound
/// and the inverse-Taylor reconstruction of a problem. Errors become failing rows.
SuiteResult geometry_suite(const ProblemSpec& spec, double direction);

struct Theorem2Options {
  std::size_t order = 16;
  /// Residual acceptance in units of the quadrature budget; 0 picks 10 for
  /// forcing-only problems and 100 otherwise.
  double budget_factor = 0.0;
  /// Weight of the rounding estimate when deciding that refinement has
  /// reached the truncation floor.
  double floor_factor = 10.0;
  /// Require the strict halving under node doubling even at the rounding floor.
  bool strict_refinement = false;
};

/// Transformed-equation residual at five points with |t| between R/8 and R/4,
/// and its behaviour when ray and contour nodes are doubled.
SuiteResult theorem2_suite(const ProblemSpec& spec, double direction, const Theorem2Options& options = {});

/// Fit of log|u^d - partial sum| over N = 2..8 at |t| = R/4 and R/8; the N^2
/// coefficient must be log q / (2k) within 15%.
SuiteResult asymptotics_suite(const ProblemSpec& spec, double direction, std::size_t order = 16);

}  // namespace qsum
