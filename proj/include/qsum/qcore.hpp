#pragma once

#include <complex>
#include <cmath>
#include <cstddef>
#include <vector>

namespace qsum {

using cplx = std::complex<double>;

inline constexpr double kPi = 3.14159265358979323846;

/// Global parameters: base q > 1, integer summability order k >= 1 and the
/// tolerances used for series truncation and quadrature acceptance.
class QParams {
 public:
  QParams(double q, int k, double eps_abs = 1e-12, double eps_rel = 1e-10);

  double q() const noexcept { return q_; }
  int k() const noexcept { return k_; }
  double eps_abs() const noexcept { return eps_abs_; }
  double eps_rel() const noexcept { return eps_rel_; }
  double log_q() const noexcept { return log_q_; }

  QParams with_tolerances(double eps_abs, double eps_rel) const {
    return QParams(q_, k_, eps_abs, eps_rel);
  }

 private:
  double q_;
  int k_;
  double eps_abs_;
  double eps_rel_;
  double log_q_;
};

/// A point of the universal covering of C \ {0}: modulus and an unbounded
/// argument. Never reduced modulo 2*pi.
class CoveringPoint {
 public:
  CoveringPoint(double r, double theta);

  double r() const noexcept { return r_; }
  double theta() const noexcept { return theta_; }

  /// log r + i*theta on the covering branch carried by the point.
  cplx log() const noexcept { return {std::log(r_), theta_}; }

  /// Lossy projection to the plane.
  cplx to_complex() const noexcept { return std::polar(r_, theta_); }

  /// Lift a plane point to the sheet whose argument lies within pi of
  /// `branch_hint`.
  static CoveringPoint lift(cplx z, double branch_hint = 0.0);

  CoveringPoint pow(double e) const { return {std::pow(r_, e), theta_ * e}; }
  CoveringPoint scaled(double factor) const { return {r_ * factor, theta_}; }

  friend CoveringPoint operator*(const CoveringPoint& a, const CoveringPoint& b) {
    return {a.r_ * b.r_, a.theta_ + b.theta_};
  }
  friend CoveringPoint operator/(const CoveringPoint& a, const CoveringPoint& b) {
    return {a.r_ / b.r_, a.theta_ - b.theta_};
  }

 private:
  double r_;
  double theta_;
};

/// Constants of the two-sided growth envelope of exp_q on a sector away from
/// its zeros, fitted from samples.
struct GrowthEnvelope {
  double K0 = 0.0;
  double K1 = 0.0;
  double C0 = 0.0;
  double epsilon = 0.0;
  double theta_excl = 0.0;
  std::size_t samples = 0;
  /// min over sampled |z| >= q^{1/2}/(q-1) of |exp_q(z)| * exp(-mu(|z|)).
  double min_ratio = 0.0;
  /// max of the same ratio.
  double max_ratio = 0.0;
};

/// Unbounded sector of the plane {arg z in (bisector - half_opening, bisector + half_opening)}.
struct Sector {
  double bisector = 0.0;
  double half_opening = 0.0;
};

double q_number(unsigned n, double q);

/// [n]_q! ; throws Overflow when the product leaves the double range.
double q_factorial(unsigned n, double q);

/// Entire q-exponential sum_{n>=0} z^n/[n]_q!, truncated when the next term
/// drops below eps_abs*(1+|partial sum|). Hard cap of 500 terms.
cplx exp_q(cplx z, const QParams& params);

/// Taylor coefficients 1/[n]_q!, n = 0..order.
std::vector<double> exp_q_coefficients(std::size_t order, double q);

/// mu(x) = log^2 x / (2 log q) + (-1/2 + log(q-1)/log q) log x.
double mu_growth(double x, const QParams& params);

/// Radius q^{1/2}/(q-1) separating the disc estimate from the sector envelope.
double envelope_radius(const QParams& params);

/// Closed-form location -q^{m+1}/(q-1) of the m-th zero.
double exp_q_zero(unsigned m, const QParams& params);

/// Refines the m-th zero of exp_q on the negative real axis by bisection on a
/// bracket around the closed form, evaluating the series to full precision.
double locate_exp_q_zero(unsigned m, const QParams& params);

struct EnvelopeOptions {
  std::size_t radii = 200;
  std::size_t rays = 33;
  double r_max = 1e4;
  std::size_t disc_radii = 24;
  std::size_t disc_rays = 96;
};

/// Samples |exp_q| over the sector (radii log-spaced in [q^{1/2}/(q-1), r_max])
/// and over the closed disc of radius q^{1/2}/(q-1), and fits the envelope
/// constants. The sector must avoid the excluded cone of half-opening
/// theta_excl around the negative real axis; otherwise EnvelopeViolation.
GrowthEnvelope envelope_check(const Sector& sector, double theta_excl, const QParams& params,
                              const EnvelopeOptions& options = {});

/// Theta_k(z) = q^{-(k/2) L (L - 1/k)}, L = log z / log q, on the covering.
cplx theta_kernel(const CoveringPoint& z, const QParams& params);

/// Same kernel for a real (possibly non-integer) order.
cplx theta_kernel(const CoveringPoint& z, double order, double log_q);

/// pi_{q,k} = q^{-1/(8k)} sqrt(k) / sqrt(2 pi log q).
double pi_qk(const QParams& params);
double pi_qk(double order, double log_q);

/// Reduces an angle to (-pi, pi].
double principal_angle(double theta);

}  // namespace qsum
