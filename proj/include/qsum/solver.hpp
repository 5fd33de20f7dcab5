#pragma once

#include <cstddef>
#include <vector>

#include "qsum/fourier.hpp"
#include "qsum/geometry.hpp"
#include "qsum/series.hpp"

namespace qsum {

struct SolverOptions {
  std::size_t order = 16;
  double tol = 1e-12;
  std::size_t max_iter = 100;
  /// Keep iterating through norm blow-up; the map is triangular in the order,
  /// so the truncation is still reached after order + 1 steps.
  bool force_triangular = false;
  /// Largest power l2 * order a Mahler term may request.
  std::size_t order_budget = 4096;
};

struct BorelSolution {
  FourierSeries omega;
  std::size_t iterations = 0;
  std::vector<double> contraction_history;
  std::vector<double> norm_history;
  double residual_1R = 0.0;
  double norm_1R = 0.0;
  /// sum of enorm over coefficients dropped by Mahler substitution past the order.
  double dropped_mass = 0.0;
  bool contraction_warning = false;
};

/// The affine Borel-plane map omega -> (1/P_m) [coupling terms + forcing],
/// with 1/P_m replaced by its Taylor expansion to the working order.
class H1Operator {
 public:
  H1Operator(const ProblemSpec& spec, const SectorConfig& config, std::size_t order,
             std::size_t order_budget = 4096);

  FourierSeries apply(const FourierSeries& omega) const;

  /// The bracket before the division by P_m: coupling terms of omega plus forcing.
  FourierSeries bracket(const FourierSeries& omega, bool with_forcing = true) const;

  /// Truncated product of the Taylor series of 1/P_m with a series.
  FourierSeries divide_by_P(const FourierSeries& s) const;

  /// Truncated product of the Taylor series of P_m with a series.
  FourierSeries multiply_by_P(const FourierSeries& s) const;

  const std::vector<FourierFn>& inverse_taylor() const noexcept { return inv_; }
  std::size_t order() const noexcept { return order_; }
  double last_dropped_mass() const noexcept { return dropped_; }
  FourierSeries zero_series() const;

 private:
  ProblemSpec spec_;
  SectorConfig config_;
  std::size_t order_;
  std::vector<FourierFn> inv_;
  std::vector<FourierFn> pm_;
  mutable double dropped_ = 0.0;
};

/// (1/sqrt(2 pi)) int A(m - m1) g(m1) R(i m1) dm1.
FourierFn coupling_convolution(const FourierFn& A, const Polynomial& R, const FourierFn& g);

/// Picard iteration from omega = 0. NoContraction when the step ratio exceeds 1
/// three times in a row, unless force_triangular is set.
BorelSolution solve_fixed_point(const ProblemSpec& spec, const SectorConfig& config, const SolverOptions& options);

/// U_p = omega_p q^{p(p-1)/(2k)}.
FourierSeries assemble_U_hat(const BorelSolution& sol, const QParams& params);

/// u_p(z) for every coefficient and point; rows are p = 1..N.
std::vector<std::vector<cplx>> assemble_u_hat(const FourierSeries& U, const std::vector<cplx>& z_points,
                                              double beta_prime);

struct OrderResidual {
  std::size_t order = 0;
  double absolute = 0.0;
  /// Largest enorm among the individual terms at this order.
  double scale = 0.0;
  double relative = 0.0;
  bool counted = true;
};

/// Both sides of the t-plane equation for U, order by order. Orders above
/// N - max l0 are reported with counted = false.
std::vector<OrderResidual> main_equation_residual(const FourierSeries& U, const ProblemSpec& spec);

/// Coefficients of t-plane LHS - RHS as a series (used for the Borel-plane cross-check).
FourierSeries main_equation_defect(const FourierSeries& U, const ProblemSpec& spec);

}  // namespace qsum
