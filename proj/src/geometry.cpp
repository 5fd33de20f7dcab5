#include "qsum/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "qsum/errors.hpp"
#include "qsum/series.hpp"

namespace qsum {

cplx Polynomial::operator()(cplx x) const {
  cplx acc = 0.0;
  for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * x + *it;
  return acc;
}

int Polynomial::degree() const {
  for (int i = static_cast<int>(coeffs.size()) - 1; i >= 0; --i)
    if (coeffs[static_cast<std::size_t>(i)] != cplx(0.0)) return i;
  return -1;
}

double ProblemSpec::alpha_tilde() const {
  return alpha_D / q_pow(params.q(), borel_exponent(d_D, params.k()));
}

int ProblemSpec::max_l0() const {
  int m = 0;
  for (const auto& t : terms) m = std::max(m, t.l0);
  return m;
}

namespace {

cplx ratio_at(const ProblemSpec& spec, double m) {
  return spec.Q(cplx(0.0, m)) / spec.RD(cplx(0.0, m));
}

cplx image_point(const ProblemSpec& spec, double r, double theta) {
  return spec.alpha_tilde() * std::polar(std::pow(r, spec.d_D), spec.d_D * theta);
}

struct Witness {
  double value = std::numeric_limits<double>::infinity();
  cplx tau = 0.0;
  double m = 0.0;
};

std::vector<cplx> tau_samples(const SectorConfig& c, std::size_t rays, std::size_t radii, double far_radius) {
  std::vector<cplx> out;
  const double r_lo = 1e-3 * c.rho;
  for (std::size_t i = 0; i < radii; ++i) {
    const double r = r_lo * std::pow(far_radius / r_lo, static_cast<double>(i) / static_cast<double>(radii - 1));
    for (std::size_t j = 0; j < rays; ++j) {
      const double th = c.d - c.half_opening + 2.0 * c.half_opening * static_cast<double>(j) / (rays - 1);
      out.push_back(std::polar(r, th));
    }
  }
  out.push_back(0.0);
  const std::size_t disc_r = radii / 2, disc_a = 2 * rays;
  for (std::size_t i = 1; i <= disc_r; ++i)
    for (std::size_t j = 0; j < disc_a; ++j)
      out.push_back(std::polar(c.rho * i / disc_r, 2.0 * kPi * j / disc_a));
  return out;
}

Witness min_distance(const ProblemSpec& spec, const SectorConfig& c, std::size_t rays, std::size_t radii,
                     double far_radius) {
  const auto taus = tau_samples(c, rays, radii, far_radius);
  std::vector<cplx> e(taus.size());
  for (std::size_t i = 0; i < taus.size(); ++i)
    e[i] = exp_q(spec.alpha_tilde() * std::pow(taus[i], spec.d_D), spec.params);
  Witness w;
  for (std::size_t mi = 0; mi < spec.grid.size(); ++mi) {
    const double m = spec.grid.m(mi);
    const cplx v = ratio_at(spec, m);
    for (std::size_t i = 0; i < taus.size(); ++i) {
      const double d = std::abs(v - e[i]);
      if (d < w.value) w = {d, taus[i], m};
    }
  }
  return w;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

}  // namespace

std::vector<ConditionReport> check_structure(const ProblemSpec& spec) {
  std::vector<ConditionReport> out;
  const int k = spec.params.k();

  ConditionReport shift{"shift-bound", true, ""};
  for (const auto& t : spec.terms) {
    if (t.l0 < 0 || t.l1 < 0 || t.l2 < 1 || k * (t.l1 + 1) > t.l0) {
      shift.ok = false;
      shift.witness = "(" + std::to_string(t.l0) + "," + std::to_string(t.l1) + "," + std::to_string(t.l2) + ")";
      break;
    }
  }
  out.push_back(shift);

  ConditionReport ddeg{"mahler-degree", true, ""};
  if (spec.d_D < 1) {
    ddeg.ok = false;
    ddeg.witness = "d_D=" + std::to_string(spec.d_D);
  }
  for (const auto& t : spec.terms) {
    if (t.l2 >= 2 && static_cast<long>(spec.d_D) * spec.d_D * (static_cast<long>(t.l2) * t.l2 - 1) <= k) {
      ddeg.ok = false;
      ddeg.witness = "d_D=" + std::to_string(spec.d_D) + " l2=" + std::to_string(t.l2);
      break;
    }
  }
  out.push_back(ddeg);

  ConditionReport deg{"degrees", true, ""};
  const int dq = spec.Q.degree(), dr = spec.RD.degree();
  if (dq != dr || dr < 0) {
    deg.ok = false;
    deg.witness = "deg Q=" + std::to_string(dq) + " deg R_D=" + std::to_string(dr);
  }
  for (const auto& t : spec.terms)
    if (deg.ok && t.R.degree() > dr) {
      deg.ok = false;
      deg.witness = "deg R_l=" + std::to_string(t.R.degree()) + " > deg R_D=" + std::to_string(dr);
    }
  out.push_back(deg);

  ConditionReport nz{"nonvanishing", true, ""};
  double rmin = std::numeric_limits<double>::infinity(), rmax = 0.0;
  for (std::size_t i = 0; i < spec.grid.size(); ++i) {
    const double m = spec.grid.m(i);
    const double aq = std::abs(spec.Q(cplx(0.0, m))), ar = std::abs(spec.RD(cplx(0.0, m)));
    if (aq < spec.params.eps_abs() || ar < spec.params.eps_abs()) {
      nz.ok = false;
      nz.witness = "m=" + fmt(m);
      break;
    }
    rmin = std::min(rmin, aq / ar);
    rmax = std::max(rmax, aq / ar);
  }
  out.push_back(nz);
  out.push_back({"ratio-bounds", nz.ok && rmin > 0.0, "r1=" + fmt(rmin) + " r2=" + fmt(rmax)});

  ConditionReport prof{"profiles", true, ""};
  auto check_profile = [&](const FourierFn& f, const std::string& what) {
    if (!prof.ok) return;
    if (!(f.grid() == spec.grid)) {
      prof.ok = false;
      prof.witness = what + " is not sampled on the problem grid";
    } else if (!std::isfinite(enorm(f))) {
      prof.ok = false;
      prof.witness = what + " has no finite decay certificate";
    }
  };
  for (std::size_t i = 0; i < spec.terms.size(); ++i) check_profile(spec.terms[i].A, "A[" + std::to_string(i) + "]");
  for (std::size_t i = 0; i < spec.forcing.size(); ++i) {
    check_profile(spec.forcing[i].F, "F[" + std::to_string(i) + "]");
    if (spec.forcing[i].j < 1 && prof.ok) {
      prof.ok = false;
      prof.witness = "forcing power must be >= 1";
    }
  }
  if (!(spec.alpha_D > 0.0) && prof.ok) {
    prof.ok = false;
    prof.witness = "alpha_D must be positive";
  }
  out.push_back(prof);
  return out;
}

cplx eval_Pm(cplx tau, double m, const ProblemSpec& spec) {
  const cplx im(0.0, m);
  return spec.Q(im) - exp_q(spec.alpha_tilde() * std::pow(tau, spec.d_D), spec.params) * spec.RD(im);
}

double measure_delta1(const ProblemSpec& spec, const SectorConfig& config, std::size_t rays, std::size_t radii,
                      double far_radius) {
  return min_distance(spec, config, rays, radii, far_radius).value;
}

SectorConfig select_sector(const ProblemSpec& spec, double d, const SectorOptions& options) {
  if (spec.grid.size() < 1) fail(ErrorKind::InvalidArgument, "problem has no m-grid");
  SectorConfig c;
  c.d = d;
  c.theta_excl = options.theta_excl;
  c.alpha_tilde = spec.alpha_tilde();
  const double image = principal_angle(spec.d_D * d);
  const double room = kPi - options.theta_excl - std::abs(image);
  if (room <= 0.0)
    fail(ErrorKind::BadDirection, "image direction " + fmt(image) + " lies in the zero cone of exp_q");
  double h_img = std::min(kPi / 4, room);
  bool accepted = false;
  for (int attempt = 0; attempt < 30 && !accepted; ++attempt) {
    try {
      c.envelope = envelope_check({image, h_img}, options.theta_excl, spec.params, options.envelope);
      accepted = true;
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::EnvelopeViolation) throw;
      h_img *= 0.8;
    }
  }
  if (!accepted) fail(ErrorKind::BadDirection, "no sector around the image direction passes the envelope check");
  c.half_opening = h_img / spec.d_D;
  c.rho = std::pow(envelope_radius(spec.params) / c.alpha_tilde, 1.0 / spec.d_D);
  c.R = options.R_fraction * c.rho;
  c.delta1 = measure_delta1(spec, c, options.rays, options.radii, options.far_radius_factor * c.rho);
  if (c.delta1 < spec.params.eps_abs())
    fail(ErrorKind::SmallDelta, "measured delta1 = " + fmt(c.delta1) + " is below eps_abs");
  return c;
}

LowerBoundReport pm_lower_bound_report(const ProblemSpec& spec, const SectorConfig& config,
                                       const SectorOptions& options) {
  LowerBoundReport rep;
  rep.delta1 = config.delta1;
  rep.ratio_min = std::numeric_limits<double>::infinity();
  double m_at_max = 0.0;
  for (std::size_t i = 0; i < spec.grid.size(); ++i) {
    const double r = std::abs(ratio_at(spec, spec.grid.m(i)));
    rep.ratio_min = std::min(rep.ratio_min, r);
    if (r > rep.ratio_max) {
      rep.ratio_max = r;
      m_at_max = spec.grid.m(i);
    }
  }
  const double x0 = envelope_radius(spec.params);
  // mu attains its minimum over [x0, inf) at x0; eps/K0 equals the fitted min ratio.
  const double far_term = config.envelope.epsilon / config.envelope.K0 * std::exp(mu_growth(x0, spec.params));
  rep.gap_bound = std::min(config.envelope.C0, far_term);
  rep.binding = config.envelope.C0 <= far_term ? "C0" : "mu-min";
  if (!(rep.ratio_max < rep.gap_bound))
    fail(ErrorKind::BoundViolation, "gap condition fails: |Q/R_D| = " + fmt(rep.ratio_max) + " at m = " +
                                        fmt(m_at_max) + " >= " + fmt(rep.gap_bound) + " (" + rep.binding + ")");

  const Witness w = min_distance(spec, config, 2 * options.rays, 2 * options.radii,
                                 options.far_radius_factor * config.rho);
  rep.delta1_refined = w.value;
  if (w.value < 0.99 * config.delta1)
    fail(ErrorKind::BoundViolation, "|P_m(tau)| < delta1 |R_D(im)| at tau = (" + fmt(w.tau.real()) + ", " +
                                        fmt(w.tau.imag()) + "), m = " + fmt(w.m));

  rep.far_radius = config.rho;
  double worst = std::numeric_limits<double>::infinity();
  constexpr std::size_t kRows = 20, kRays = 16;
  for (std::size_t i = 0; i < kRows; ++i) {
    const double r = rep.far_radius * std::pow(100.0, static_cast<double>(i) / (kRows - 1));
    const double weight = std::exp(mu_growth(config.alpha_tilde * std::pow(r, spec.d_D), spec.params));
    double row = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < kRays; ++j) {
      const double th = config.d - config.half_opening + 2.0 * config.half_opening * j / (kRays - 1);
      const cplx e = exp_q(image_point(spec, r, th), spec.params);
      for (std::size_t mi = 0; mi < spec.grid.size(); ++mi) {
        const cplx im(0.0, spec.grid.m(mi));
        const cplx rd = spec.RD(im);
        row = std::min(row, std::abs(spec.Q(im) - e * rd) / (weight * std::abs(rd)));
      }
    }
    rep.far_field.push_back({r, row});
    worst = std::min(worst, row);
  }
  rep.fitted_M = config.envelope.epsilon / (config.envelope.K0 * worst);
  return rep;
}

std::vector<cplx> inv_pm_taylor(double m, const ProblemSpec& spec, std::size_t N) {
  const cplx im(0.0, m);
  const cplx q = spec.Q(im), rd = spec.RD(im);
  const auto d = static_cast<std::size_t>(spec.d_D);
  std::vector<cplx> c(N + 1, 0.0);
  c[0] = q - rd;
  const auto ex = exp_q_coefficients(N / d + 1, spec.params.q());
  double at = 1.0;
  for (std::size_t n = 1; n * d <= N; ++n) {
    at *= spec.alpha_tilde();
    c[n * d] = -rd * at * ex[n];
  }
  if (std::abs(c[0]) < spec.params.eps_abs())
    fail(ErrorKind::DivergentInversion, "P_m(0) vanishes at m = " + fmt(m));
  std::vector<cplx> f(N + 1, 0.0);
  f[0] = 1.0 / c[0];
  for (std::size_t p = 1; p <= N; ++p) {
    cplx acc = 0.0;
    for (std::size_t i = 1; i <= p; ++i) acc += c[i] * f[p - i];
    f[p] = -acc / c[0];
  }
  return f;
}

std::vector<FourierFn> inv_pm_taylor_grid(const ProblemSpec& spec, std::size_t N) {
  std::vector<FourierFn> out(N + 1, FourierFn::zeros(spec.grid, spec.beta, spec.mu));
  for (std::size_t i = 0; i < spec.grid.size(); ++i) {
    const auto f = inv_pm_taylor(spec.grid.m(i), spec, N);
    for (std::size_t p = 0; p <= N; ++p) out[p][i] = f[p];
  }
  return out;
}

double fit_taylor_bound(const std::vector<FourierFn>& f, double R1, int deg_RD) {
  double c = 0.0;
  for (std::size_t p = 0; p < f.size(); ++p)
    for (std::size_t i = 0; i < f[p].size(); ++i)
      c = std::max(c, std::abs(f[p][i]) * std::pow(R1, static_cast<double>(p)) *
                          std::pow(1.0 + std::abs(f[p].grid().m(i)), deg_RD));
  return c;
}

}  // namespace qsum
