#pragma once

#include <string>
#include <vector>

#include "qsum/fourier.hpp"
#include "qsum/qcore.hpp"

namespace qsum {

/// Polynomial with complex coefficients, lowest degree first.
struct Polynomial {
  std::vector<cplx> coeffs;

  cplx operator()(cplx x) const;
  /// Degree ignoring trailing zero coefficients; -1 for the zero polynomial.
  int degree() const;
};

/// One term a(z) (t^{l0} sigma^{l1} R(d/dz) u)(t^{l2}, z) of the equation;
/// `A` is the Fourier-side profile of a(z).
struct MahlerTerm {
  int l0 = 0;
  int l1 = 0;
  int l2 = 1;
  Polynomial R;
  FourierFn A;
};

struct ForcingTerm {
  int j = 1;
  FourierFn F;
};

struct ProblemSpec {
  QParams params{2.0, 1};
  Polynomial Q;
  Polynomial RD;
  std::vector<MahlerTerm> terms;
  double alpha_D = 1.0;
  int d_D = 1;
  std::vector<ForcingTerm> forcing;
  double beta = 1.0;
  double mu = 2.0;
  MGrid grid;

  /// alpha_D / q^{d_D(d_D-1)/(2k)}.
  double alpha_tilde() const;
  int max_l0() const;
};

struct ConditionReport {
  std::string name;
  bool ok = true;
  std::string witness;
};

/// Structural conditions on the data: shift bound l1 <= l0/k - 1, the
/// degree bound on d_D for Mahler terms, degree compatibility, nonvanishing of
/// Q(im), R_D(im) on the grid, grid/decay consistency of the profiles.
std::vector<ConditionReport> check_structure(const ProblemSpec& spec);

struct SectorConfig {
  double d = 0.0;
  double half_opening = 0.0;
  double rho = 0.0;
  double R = 0.0;
  double alpha_tilde = 0.0;
  double theta_excl = 0.0;
  double delta1 = 0.0;
  GrowthEnvelope envelope;
};

struct SectorOptions {
  double theta_excl = kPi / 4;
  double R_fraction = 0.5;
  std::size_t rays = 64;
  std::size_t radii = 64;
  double far_radius_factor = 1e3;
  EnvelopeOptions envelope;
};

/// Q(im) - exp_q(alpha_tilde tau^{d_D}) R_D(im).
cplx eval_Pm(cplx tau, double m, const ProblemSpec& spec);

/// Sector of bisecting direction d and the disc radius rho for the symbol P_m.
/// BadDirection if the image direction d_D*d meets the zero cone; SmallDelta if
/// the measured distance delta1 between Q/R_D and exp_q(alpha_tilde tau^{d_D})
/// falls below eps_abs.
SectorConfig select_sector(const ProblemSpec& spec, double d, const SectorOptions& options = {});

/// Measured minimum of |Q(im)/R_D(im) - exp_q(alpha_tilde tau^{d_D})| over
/// sector samples (rays x log-radii), a polar grid of the disc of radius rho
/// and the m-grid.
double measure_delta1(const ProblemSpec& spec, const SectorConfig& config, std::size_t rays, std::size_t radii,
                      double far_radius);

struct FarFieldRow {
  double tau_abs = 0.0;
  double min_ratio = 0.0;
};

struct LowerBoundReport {
  double delta1 = 0.0;
  double delta1_refined = 0.0;
  /// min and max of |Q(im)/R_D(im)| over the grid.
  double ratio_min = 0.0;
  double ratio_max = 0.0;
  /// Start of the far-field table.
  double far_radius = 0.0;
  double gap_bound = 0.0;
  /// "C0" or "mu-min": which term of the gap condition is smaller.
  std::string binding;
  double fitted_M = 0.0;
  std::vector<FarFieldRow> far_field;
};

/// Checks the gap condition ratio_max < min(C0, eps/K0 min_{x >= x0} e^{mu(x)}) and
/// |P_m(tau)| >= delta1 |R_D(im)| on refined samples (1% slack), and tabulates
/// |P_m(tau)| / (e^{mu(alpha_tilde |tau|^{d_D})} |R_D(im)|) over [far_radius, 100 far_radius].
/// BoundViolation with a witness on failure.
LowerBoundReport pm_lower_bound_report(const ProblemSpec& spec, const SectorConfig& config,
                                       const SectorOptions& options = {});

/// Taylor coefficients f_0..f_N of 1/P_m(tau) at 0 by power-series inversion.
/// DivergentInversion if |P_m(0)| < eps_abs.
std::vector<cplx> inv_pm_taylor(double m, const ProblemSpec& spec, std::size_t N);

/// Same, tabulated over the m-grid: entry p is the FourierFn m -> f_p(m).
std::vector<FourierFn> inv_pm_taylor_grid(const ProblemSpec& spec, std::size_t N);

/// max over p, m of |f_p(m)| R1^p (1+|m|)^{deg R_D}.
double fit_taylor_bound(const std::vector<FourierFn>& f, double R1, int deg_RD);

}  // namespace qsum
