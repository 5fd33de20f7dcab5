#include "qsum/qcore.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "qsum/errors.hpp"

namespace qsum {

QParams::QParams(double q, int k, double eps_abs, double eps_rel)
    : q_(q), k_(k), eps_abs_(eps_abs), eps_rel_(eps_rel), log_q_(std::log(q)) {
  if (!(q > 1.0) || !std::isfinite(q)) fail(ErrorKind::InvalidArgument, "q must be a finite real > 1");
  if (k < 1) fail(ErrorKind::InvalidArgument, "k must be an integer >= 1");
  if (!(eps_abs > 0.0) || !(eps_rel > 0.0))
    fail(ErrorKind::InvalidArgument, "tolerances must be positive");
}

CoveringPoint::CoveringPoint(double r, double theta) : r_(r), theta_(theta) {
  if (!(r > 0.0) || !std::isfinite(r) || !std::isfinite(theta))
    fail(ErrorKind::InvalidArgument, "covering point needs finite r > 0 and finite theta");
}

CoveringPoint CoveringPoint::lift(cplx z, double branch_hint) {
  const double a = std::arg(z);
  const double turns = std::round((branch_hint - a) / (2.0 * kPi));
  return {std::abs(z), a + 2.0 * kPi * turns};
}

double principal_angle(double theta) {
  double t = std::remainder(theta, 2.0 * kPi);
  if (t <= -kPi) t += 2.0 * kPi;
  return t;
}

double q_number(unsigned n, double q) {
  // (q^n - 1)/(q - 1) loses digits for q near 1; the direct sum does not.
  double s = 0.0;
  double p = 1.0;
  for (unsigned j = 0; j < n; ++j) {
    s += p;
    p *= q;
  }
  return s;
}

double q_factorial(unsigned n, double q) {
  double f = 1.0;
  for (unsigned j = 1; j <= n; ++j) {
    f *= q_number(j, q);
    if (!std::isfinite(f))
      fail(ErrorKind::Overflow, "[" + std::to_string(n) + "]_q! exceeds the double range");
  }
  return f;
}

std::vector<double> exp_q_coefficients(std::size_t order, double q) {
  std::vector<double> c(order + 1, 0.0);
  double f = 1.0;
  c[0] = 1.0;
  for (std::size_t n = 1; n <= order; ++n) {
    f /= q_number(static_cast<unsigned>(n), q);
    c[n] = f;
  }
  return c;
}

cplx exp_q(cplx z, const QParams& params) {
  constexpr int kMaxTerms = 500;
  const double q = params.q();
  cplx sum = 1.0;
  cplx term = 1.0;
  double qn = 1.0;     // q^{n}
  double qnum = 0.0;   // [n]_q
  for (int n = 0; n < kMaxTerms; ++n) {
    qnum += qn;  // [n+1]_q
    qn *= q;
    term *= z / qnum;
    if (std::abs(term) < params.eps_abs() * (1.0 + std::abs(sum))) return sum;
    sum += term;
    if (!std::isfinite(sum.real()) || !std::isfinite(sum.imag()))
      fail(ErrorKind::NonConvergence, "exp_q partial sum overflowed");
  }
  fail(ErrorKind::NonConvergence, "exp_q did not converge within 500 terms");
}

double mu_growth(double x, const QParams& params) {
  const double lq = params.log_q();
  const double lx = std::log(x);
  return lx * lx / (2.0 * lq) + (-0.5 + std::log(params.q() - 1.0) / lq) * lx;
}

double envelope_radius(const QParams& params) {
  return std::sqrt(params.q()) / (params.q() - 1.0);
}

double exp_q_zero(unsigned m, const QParams& params) {
  return -std::pow(params.q(), static_cast<double>(m) + 1.0) / (params.q() - 1.0);
}

double locate_exp_q_zero(unsigned m, const QParams& params) {
  const QParams tight = params.with_tolerances(1e-300, params.eps_rel());
  const double z0 = exp_q_zero(m, params);
  // Neighbouring zeros are a factor q apart, so +-(q-1)/(2q) relative stays inside.
  const double half = std::abs(z0) * (params.q() - 1.0) / (2.0 * params.q());
  double lo = z0 - half;
  double hi = z0 + half;
  double flo = exp_q(lo, tight).real();
  const double fhi = exp_q(hi, tight).real();
  if (flo * fhi > 0.0) fail(ErrorKind::NonConvergence, "zero bracket has no sign change");
  for (int it = 0; it < 200 && hi - lo > 4.0 * std::numeric_limits<double>::epsilon() * std::abs(z0);
       ++it) {
    const double mid = 0.5 * (lo + hi);
    const double fm = exp_q(mid, tight).real();
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

GrowthEnvelope envelope_check(const Sector& sector, double theta_excl, const QParams& params,
                              const EnvelopeOptions& options) {
  if (!(theta_excl > 0.0) || !(theta_excl < kPi / 2.0))
    fail(ErrorKind::InvalidArgument, "theta_excl must lie in (0, pi/2)");
  if (!(sector.half_opening > 0.0)) fail(ErrorKind::InvalidArgument, "half-opening must be positive");
  if (options.radii < 2 || options.rays < 1) fail(ErrorKind::InvalidArgument, "too few samples");

  const double centre = principal_angle(sector.bisector);
  if (std::abs(centre) + sector.half_opening > kPi - theta_excl)
    fail(ErrorKind::EnvelopeViolation,
         "sector [" + std::to_string(centre - sector.half_opening) + ", " +
             std::to_string(centre + sector.half_opening) +
             "] meets the zero cone |arg z| >= pi - theta_excl");

  GrowthEnvelope env;
  env.theta_excl = theta_excl;
  env.epsilon = std::sin(theta_excl);

  const double r0 = envelope_radius(params);
  const double r1 = std::max(options.r_max, r0 * 1.0001);
  double log_max = -std::numeric_limits<double>::infinity();  // log(|e|/e^mu)
  double log_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < options.radii; ++i) {
    const double r = r0 * std::pow(r1 / r0, static_cast<double>(i) / (options.radii - 1));
    const double mu = mu_growth(r, params);
    for (std::size_t j = 0; j < options.rays; ++j) {
      const double frac = options.rays == 1 ? 0.5 : static_cast<double>(j) / (options.rays - 1);
      const double th = centre - sector.half_opening + 2.0 * sector.half_opening * frac;
      const double a = std::abs(exp_q(std::polar(r, th), params));
      if (!(a > 0.0) || !std::isfinite(a))
        fail(ErrorKind::EnvelopeViolation, "exp_q vanishes or overflows on a sample");
      const double lr = std::log(a) - mu;
      log_max = std::max(log_max, lr);
      log_min = std::min(log_min, lr);
      ++env.samples;
    }
  }
  env.K1 = std::exp(log_max);
  env.K0 = env.epsilon * std::exp(-log_min);
  env.max_ratio = std::exp(log_max);
  env.min_ratio = std::exp(log_min);
  if (!std::isfinite(env.K0) || !std::isfinite(env.K1))
    fail(ErrorKind::EnvelopeViolation, "fitted envelope constants are not finite");

  double c0 = std::numeric_limits<double>::infinity();
  c0 = std::min(c0, 1.0);  // z = 0
  for (std::size_t i = 1; i <= options.disc_radii; ++i) {
    const double r = r0 * static_cast<double>(i) / options.disc_radii;
    for (std::size_t j = 0; j < options.disc_rays; ++j) {
      const double th = -kPi + 2.0 * kPi * static_cast<double>(j) / options.disc_rays;
      c0 = std::min(c0, std::abs(exp_q(std::polar(r, th), params)));
    }
  }
  env.C0 = c0;
  if (!(c0 > 0.0)) fail(ErrorKind::EnvelopeViolation, "exp_q vanishes on the closed disc");
  return env;
}

cplx theta_kernel(const CoveringPoint& z, double order, double log_q) {
  const cplx L = z.log();
  return std::exp(-(order / (2.0 * log_q)) * L * L + 0.5 * L);
}

cplx theta_kernel(const CoveringPoint& z, const QParams& params) {
  return theta_kernel(z, static_cast<double>(params.k()), params.log_q());
}

double pi_qk(double order, double log_q) {
  return std::exp(-log_q / (8.0 * order)) * std::sqrt(order) / std::sqrt(2.0 * kPi * log_q);
}

double pi_qk(const QParams& params) { return pi_qk(static_cast<double>(params.k()), params.log_q()); }

}  // namespace qsum
