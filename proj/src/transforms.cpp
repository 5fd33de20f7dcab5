#include "qsum/transforms.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstring>
#include <deque>

#include "qsum/errors.hpp"
#include "qsum/series.hpp"

namespace qsum {

namespace {

constexpr double kWindowEps = 1e-12;

double max_abs(const std::vector<cplx>& v) {
  double s = 0.0;
  for (auto x : v) s = std::max(s, std::abs(x));
  return s;
}

void axpy(std::vector<cplx>& y, cplx a, const std::vector<cplx>& x) {
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += a * x[i];
}

/// Half width of a window holding all but kWindowEps of exp(-y^2 / (2 var)).
double gaussian_half_width(double var) { return std::sqrt(2.0 * var * (std::log(1.0 / kWindowEps) + 2.0)); }

std::vector<cplx> head(const std::vector<cplx>& v, std::size_t n) { return {v.begin(), v.begin() + static_cast<long>(n)}; }
std::vector<cplx> tail(const std::vector<cplx>& v, std::size_t n) { return {v.begin() + static_cast<long>(n), v.end()}; }

FourierFn on_grid(const FourierFn& proto, std::vector<cplx> values) {
  return FourierFn(proto.grid(), std::move(values), proto.beta(), proto.mu());
}

}  // namespace

Integration integrate_line(const LineIntegrand& user_f, const LineRule& rule) {
  auto f = [&](double x) {
    auto v = user_f(x);
    for (auto c : v)
      if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
        fail(ErrorKind::QuadratureStall, "integrand is not finite at " + std::to_string(x));
    return v;
  };
  if (!(rule.b > rule.a) || rule.intervals < 1) fail(ErrorKind::InvalidArgument, "empty integration window");
  const double h = (rule.b - rule.a) / static_cast<double>(rule.intervals);
  double a = rule.a, b = rule.b;
  std::deque<std::vector<cplx>> vals;
  double peak = 0.0;
  for (std::size_t i = 0; i <= rule.intervals; ++i) {
    vals.push_back(f(a + static_cast<double>(i) * h));
    peak = std::max(peak, max_abs(vals.back()));
  }
  if (rule.extend > 0.0) {
    const auto steps = static_cast<std::size_t>(std::max(1.0, std::ceil(rule.extend / h)));
    auto negligible = [&](const std::vector<cplx>& v) { return max_abs(v) <= 1e-3 * rule.rel_tol * peak; };
    while (!negligible(vals.front())) {
      if (b - a > rule.max_width) fail(ErrorKind::QuadratureStall, "integrand does not decay at the lower end");
      for (std::size_t j = 0; j < steps; ++j) {
        a -= h;
        vals.push_front(f(a));
        peak = std::max(peak, max_abs(vals.front()));
      }
    }
    while (!negligible(vals.back())) {
      if (b - a > rule.max_width) fail(ErrorKind::QuadratureStall, "integrand does not decay at the upper end");
      for (std::size_t j = 0; j < steps; ++j) {
        b += h;
        vals.push_back(f(b));
        peak = std::max(peak, max_abs(vals.back()));
      }
    }
  }
  const std::size_t dim = vals.front().size();
  std::size_t n = vals.size() - 1;
  std::vector<cplx> S(dim, 0.0);
  std::vector<double> A(dim, 0.0);
  auto add_abs = [](std::vector<double>& y, double w, const std::vector<cplx>& x) {
    for (std::size_t i = 0; i < y.size(); ++i) y[i] += w * std::abs(x[i]);
  };
  for (std::size_t i = 0; i <= n; ++i) {
    axpy(S, (i == 0 || i == n) ? 0.5 * h : h, vals[i]);
    add_abs(A, (i == 0 || i == n) ? 0.5 * h : h, vals[i]);
  }
  vals.clear();

  Integration out;
  out.nodes = n + 1;
  double hc = h;
  for (std::size_t level = 1; level <= rule.max_doublings; ++level) {
    std::vector<cplx> mid(dim, 0.0);
    std::vector<double> mid_abs(dim, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const auto v = f(a + (static_cast<double>(i) + 0.5) * hc);
      axpy(mid, 1.0, v);
      add_abs(mid_abs, 1.0, v);
    }
    std::vector<cplx> next(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      next[i] = 0.5 * S[i] + 0.5 * hc * mid[i];
      A[i] = 0.5 * A[i] + 0.5 * hc * mid_abs[i];
    }
    out.difference.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) out.difference[i] = next[i] - S[i];
    out.error = max_abs(out.difference);
    out.nodes += n;
    S = std::move(next);
    n *= 2;
    hc /= 2.0;
    if (level >= rule.min_doublings && (out.error <= rule.rel_tol * max_abs(S) || out.error == 0.0)) {
      out.value = std::move(S);
      out.magnitude = std::move(A);
      return out;
    }
  }
  fail(ErrorKind::QuadratureStall, "node doubling did not settle: last difference " + std::to_string(out.error));
}

RayQuadrature RayQuadrature::around(double T_abs, double theta_d, const QParams& params, double width_fraction) {
  if (!(T_abs > 0.0)) fail(ErrorKind::InvalidArgument, "|T| must be positive");
  const double var = params.log_q() / params.k();
  const double W = gaussian_half_width(var);
  RayQuadrature quad;
  quad.theta_d = theta_d;
  quad.s_min = std::log(T_abs) - W;
  quad.s_max = std::log(T_abs) + W;
  quad.nodes = static_cast<std::size_t>(std::ceil(2.0 * W / (width_fraction * std::sqrt(var))));
  return quad;
}

CircleContour CircleContour::around(double radius, double theta, double order, double log_q, double width_fraction) {
  const double var = log_q / order;
  const double W = gaussian_half_width(var);
  CircleContour c;
  c.radius = radius;
  c.theta_min = theta - W;
  c.theta_max = theta + W;
  c.nodes = static_cast<std::size_t>(std::ceil(2.0 * W / (width_fraction * std::sqrt(var))));
  return c;
}

cplx inverse_theta(const CoveringPoint& z, double order, double log_q) {
  const cplx L = z.log();
  return std::exp((order / (2.0 * log_q)) * L * L - 0.5 * L);
}

Integration q_laplace_vector(const std::function<std::vector<cplx>(cplx)>& f, const CoveringPoint& T,
                             const RayQuadrature& quad, const QParams& params) {
  if (T.r() > quad.certified_radius)
    fail(ErrorKind::DomainTooLarge, "|T| = " + std::to_string(T.r()) + " exceeds the certified radius " +
                                        std::to_string(quad.certified_radius));
  const double pi = pi_qk(params);
  std::size_t dim = 0;
  auto integrand = [&](double s) {
    const CoveringPoint u(std::exp(s), quad.theta_d);
    const cplx kernel = pi * theta_kernel(T / u, params);
    if (kernel == cplx(0.0) && dim > 0) return std::vector<cplx>(dim, 0.0);
    auto v = f(u.to_complex());
    dim = v.size();
    for (auto& x : v) x *= kernel;
    return v;
  };
  LineRule rule;
  rule.a = quad.s_min;
  rule.b = quad.s_max;
  rule.intervals = quad.nodes;
  rule.max_doublings = quad.max_doublings;
  rule.min_doublings = quad.min_doublings;
  rule.rel_tol = params.eps_rel();
  rule.extend = std::sqrt(params.log_q() / params.k());
  return integrate_line(integrand, rule);
}

QuadResult q_laplace(const std::function<cplx(cplx)>& f, const CoveringPoint& T, const RayQuadrature& quad,
                     const QParams& params) {
  const auto r = q_laplace_vector([&](cplx u) { return std::vector<cplx>{f(u)}; }, T, quad, params);
  return {r.value[0], r.error, r.nodes};
}

QuadResult q_borel_analytic(const std::function<cplx(const CoveringPoint&)>& phi, const CoveringPoint& xi,
                            const CircleContour& contour, const QParams& params) {
  const double k = params.k(), L = params.log_q();
  // -i q^{1/(8k)} sqrt(k) / sqrt(2 pi log q) times dx/x = i dt.
  const double pre = std::exp(L / (8.0 * k)) * std::sqrt(k) / std::sqrt(2.0 * kPi * L);
  auto integrand = [&](double t) {
    const CoveringPoint x(contour.radius, t);
    return std::vector<cplx>{pre * phi(x) * inverse_theta(x / xi, k, L)};
  };
  LineRule rule;
  rule.a = contour.theta_min;
  rule.b = contour.theta_max;
  rule.intervals = contour.nodes;
  rule.max_doublings = contour.max_doublings;
  rule.rel_tol = params.eps_rel();
  rule.extend = std::sqrt(L / k);
  const auto r = integrate_line(integrand, rule);
  return {r.value[0], r.error, r.nodes};
}

DecelerationOrders deceleration_orders(int p, int k) {
  if (p < 2) fail(ErrorKind::InvalidArgument, "Mahler power must be >= 2");
  const double p2 = static_cast<double>(p) * p;
  return {k / (p2 - 1.0), (p2 - p) / (2.0 * k)};
}

QuadResult deceleration_integral(const std::function<cplx(cplx)>& f, int p, const CoveringPoint& h,
                                 const CircleContour& contour, const QParams& params, double disc_radius) {
  const auto ord = deceleration_orders(p, params.k());
  const double L = params.log_q();
  const double shrink = std::exp(-ord.shift * L);
  if (contour.radius * shrink >= disc_radius)
    fail(ErrorKind::DomainViolation, "shifted circle of radius " + std::to_string(contour.radius * shrink) +
                                         " leaves the disc of radius " + std::to_string(disc_radius));
  const double pre = std::exp(L / (8.0 * ord.kernel)) * std::sqrt(ord.kernel) / std::sqrt(2.0 * kPi * L);
  auto integrand = [&](double t) {
    const CoveringPoint x(contour.radius, t);
    return std::vector<cplx>{pre * f(std::polar(contour.radius * shrink, t)) * inverse_theta(x / h, ord.kernel, L)};
  };
  LineRule rule;
  rule.a = contour.theta_min;
  rule.b = contour.theta_max;
  rule.intervals = contour.nodes;
  rule.max_doublings = contour.max_doublings;
  rule.rel_tol = params.eps_rel();
  rule.extend = std::sqrt(L / ord.kernel);
  const auto r = integrate_line(integrand, rule);
  return {r.value[0], r.error, r.nodes};
}

DecelerationContour::DecelerationContour(const std::function<std::vector<cplx>(cplx)>& g, int p, double radius,
                                         std::size_t nodes_per_turn, const QParams& params)
    : orders_(deceleration_orders(p, params.k())), radius_(radius), log_q_(params.log_q()) {
  if (nodes_per_turn < 8 || nodes_per_turn % 2 != 0)
    fail(ErrorKind::InvalidArgument, "contour needs an even node count >= 8");
  half_width_ = gaussian_half_width(log_q_ / orders_.kernel);
  const double shrink = std::exp(-orders_.shift * log_q_);
  samples_.reserve(nodes_per_turn);
  for (std::size_t j = 0; j < nodes_per_turn; ++j)
    samples_.push_back(g(std::polar(radius * shrink, 2.0 * kPi * static_cast<double>(j) / nodes_per_turn)));

  const std::size_t dim = samples_.front().size();
  const int k = params.k();
  for (std::size_t n = 0; n < nodes_per_turn / 2; ++n) {
    std::vector<cplx> c(dim, 0.0);
    for (std::size_t j = 0; j < nodes_per_turn; ++j)
      axpy(c, std::polar(1.0, -2.0 * kPi * static_cast<double>(n * j % nodes_per_turn) / nodes_per_turn), samples_[j]);
    const double nn = static_cast<double>(n);
    const double log_factor = (nn * (nn - 1) / (2.0 * k) - p * nn * (p * nn - 1) / (2.0 * k)) * log_q_ -
                              nn * std::log(radius * shrink) - std::log(static_cast<double>(nodes_per_turn));
    const double factor = std::exp(log_factor);
    for (auto& x : c) x *= factor;
    decelerated_coeffs_.push_back(std::move(c));
  }
}

Integration DecelerationContour::operator()(const CoveringPoint& h) const {
  if (h.r() <= radius_) {
    const std::size_t dim = samples_.front().size();
    const std::size_t n_half = decelerated_coeffs_.size() / 2;
    Integration out;
    out.value.assign(dim, 0.0);
    out.difference.assign(dim, 0.0);
    const cplx hz = h.to_complex();
    cplx hn = 1.0;
    for (std::size_t n = 0; n < decelerated_coeffs_.size(); ++n, hn *= hz) {
      axpy(out.value, hn, decelerated_coeffs_[n]);
      if (n >= n_half) axpy(out.difference, hn, decelerated_coeffs_[n]);
    }
    out.error = max_abs(out.difference);
    out.nodes = samples_.size();
    return out;
  }
  const auto K = static_cast<long>(samples_.size());
  const double dt = 2.0 * kPi / static_cast<double>(K);
  const long j_lo = static_cast<long>(std::floor((h.theta() - half_width_) / dt));
  const long j_hi = static_cast<long>(std::ceil((h.theta() + half_width_) / dt));
  const double k1 = orders_.kernel;
  const double pre = std::exp(log_q_ / (8.0 * k1)) * std::sqrt(k1) / std::sqrt(2.0 * kPi * log_q_);
  const std::size_t dim = samples_.front().size();
  std::vector<cplx> fine(dim, 0.0), coarse(dim, 0.0);
  for (long j = j_lo; j <= j_hi; ++j) {
    const cplx w = pre * inverse_theta(CoveringPoint(radius_, dt * static_cast<double>(j)) / h, k1, log_q_);
    const auto& g = samples_[static_cast<std::size_t>(((j % K) + K) % K)];
    axpy(fine, w * dt, g);
    if (j % 2 == 0) axpy(coarse, 2.0 * w * dt, g);
  }
  Integration out;
  out.difference.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) out.difference[i] = fine[i] - coarse[i];
  out.error = max_abs(out.difference);
  out.value = std::move(fine);
  out.nodes = static_cast<std::size_t>(j_hi - j_lo + 1);
  return out;
}

std::size_t BorelField::KeyHash::operator()(const std::pair<double, double>& k) const noexcept {
  std::uint64_t a, b;
  std::memcpy(&a, &k.first, sizeof a);
  std::memcpy(&b, &k.second, sizeof b);
  return std::hash<std::uint64_t>{}(a ^ (b * 0x9e3779b97f4a7c15ULL));
}

BorelField::BorelField(const ProblemSpec& spec, const SectorConfig& config, const FourierSeries& omega,
                       FieldOptions options)
    : spec_(spec), config_(config), omega_(omega), options_(options), series_radius_(options.series_fraction * config.R) {
  if (!(options.series_fraction > 0.0 && options.series_fraction <= 1.0))
    fail(ErrorKind::InvalidArgument, "series_fraction must lie in (0, 1]");
  contour_of_term_.assign(spec_.terms.size(), 0);
  for (std::size_t i = 0; i < spec_.terms.size(); ++i) {
    if (spec_.terms[i].l2 < 2) continue;
    contour_of_term_[i] = contours_.size();
    contours_.emplace_back([this, i](cplx y) { return shifted(i, y).values(); }, spec_.terms[i].l2, contour_radius(),
                           options.contour_nodes, spec_.params);
  }
  dec_memo_.resize(contours_.size());
}

FourierFn BorelField::series_value(cplx tau) const {
  FourierFn acc = FourierFn::zeros(spec_.grid, spec_.beta, spec_.mu);
  for (std::size_t p = omega_.order(); p >= 1; --p) {
    acc = acc * tau;
    acc += omega_.coeff(p);
  }
  return acc * tau;
}

const FourierFn& BorelField::operator()(cplx tau) const {
  const Key key{tau.real(), tau.imag()};
  if (auto it = memo_.find(key); it != memo_.end()) return it->second;
  FourierFn v = std::abs(tau) < series_radius_ ? series_value(tau) : rhs(tau);
  return memo_.emplace(key, std::move(v)).first->second;
}

FourierFn BorelField::shifted(std::size_t term, cplx tau) const {
  const auto& t = spec_.terms.at(term);
  const QParams& P = spec_.params;
  const double pre = 1.0 / q_pow(P.q(), borel_exponent(t.l0, P.k()));
  const double dilation = q_pow(P.q(), Rational(t.l1) - Rational(t.l0, P.k()));
  return (*this)(dilation * tau) * (pre * std::pow(tau, t.l0));
}

const Integration& BorelField::decelerated(std::size_t term, const CoveringPoint& h) const {
  if (spec_.terms.at(term).l2 < 2) fail(ErrorKind::InvalidArgument, "term has no Mahler substitution");
  const std::size_t c = contour_of_term_[term];
  const Key key{h.r(), h.theta()};
  auto& memo = dec_memo_[c];
  if (auto it = memo.find(key); it != memo.end()) return it->second;
  return memo.emplace(key, contours_[c](h)).first->second;
}

FourierFn BorelField::rhs(cplx tau) const {
  FourierFn acc = FourierFn::zeros(spec_.grid, spec_.beta, spec_.mu);
  for (std::size_t i = 0; i < spec_.terms.size(); ++i) {
    const auto& t = spec_.terms[i];
    if (t.l2 == 1) {
      acc += coupling_convolution(t.A, t.R, shifted(i, tau));
    } else {
      const auto h = CoveringPoint::lift(tau, config_.d).pow(t.l2);
      acc += coupling_convolution(t.A, t.R, on_grid(acc, decelerated(i, h).value));
    }
  }
  for (const auto& f : spec_.forcing) acc += f.F * std::pow(tau, f.j);
  const cplx E = exp_q(spec_.alpha_tilde() * std::pow(tau, spec_.d_D), spec_.params);
  for (std::size_t i = 0; i < acc.size(); ++i) {
    const cplx im(0.0, spec_.grid.m(i));
    acc[i] /= spec_.Q(im) - E * spec_.RD(im);
  }
  return acc;
}

SectorFunction BorelField::as_function() const {
  return [this](cplx tau) { return (*this)(tau); };
}

SumSetup SumSetup::from(const ProblemSpec& spec, const SectorConfig& config) {
  SumSetup s;
  s.params = spec.params;
  s.direction = config.d;
  s.alpha_tilde = spec.alpha_tilde();
  s.d_D = spec.d_D;
  s.beta_prime = spec.beta / 2.0;
  s.certified_radius = config.R;
  s.contour_radius = config.R / 2.0;
  return s;
}

RayQuadrature SumSetup::ray(const CoveringPoint& t) const {
  auto quad = RayQuadrature::around(t.r(), direction, params, ray_width_fraction);
  quad.certified_radius = certified_radius;
  quad.min_doublings = ray_min_doublings;
  return quad;
}

SumValue inverse_fourier_with_error(const FourierFn& f, cplx z, double beta_prime) {
  SumValue v;
  v.value = inverse_fourier_eval(f, z, beta_prime);
  v.grid_error = std::abs(v.value - inverse_fourier_eval(f.restricted(f.grid().coarsened()), z, beta_prime));
  std::vector<cplx> mag(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) mag[i] = std::abs(f[i]);
  v.rounding = std::numeric_limits<double>::epsilon() *
               std::abs(inverse_fourier_eval(FourierFn(f.grid(), std::move(mag), f.beta(), f.mu()), cplx(0.0, z.imag()),
                                             beta_prime));
  return v;
}

namespace {

cplx checked_exp_q(cplx u, const SumSetup& s) {
  const cplx E = exp_q(s.alpha_tilde * std::pow(u, s.d_D), s.params);
  if (std::abs(E) < s.params.eps_abs())
    fail(ErrorKind::ZeroDivision, "quadrature node within eps_abs of a zero of exp_q");
  return E;
}

/// Laplace along the ray of an m-profile (optionally followed by a second
/// profile carrying contour differences), then inverse Fourier at z.
SumValue laplace_fourier(const std::function<std::vector<cplx>(cplx)>& g, const FourierFn& proto, bool with_contour,
                         const CoveringPoint& t, cplx z, const SumSetup& setup) {
  const auto r = q_laplace_vector(g, t, setup.ray(t), setup.params);
  const std::size_t M = proto.size();
  SumValue out = inverse_fourier_with_error(on_grid(proto, head(r.value, M)), z, setup.beta_prime);
  out.ray_error = std::abs(inverse_fourier_eval(on_grid(proto, head(r.difference, M)), z, setup.beta_prime));
  if (with_contour)
    out.contour_error = std::abs(inverse_fourier_eval(on_grid(proto, tail(r.value, M)), z, setup.beta_prime));
  // |e^{imz}| = e^{-m Im z}, so the absolute Fourier sum is the transform at i Im z.
  std::vector<cplx> mag(M);
  for (std::size_t i = 0; i < M; ++i) mag[i] = r.magnitude[i];
  out.rounding = std::numeric_limits<double>::epsilon() *
                 std::abs(inverse_fourier_eval(on_grid(proto, std::move(mag)), cplx(0.0, z.imag()), setup.beta_prime));
  return out;
}

std::vector<cplx> concat(std::vector<cplx> a, const std::vector<cplx>& b) {
  a.insert(a.end(), b.begin(), b.end());
  return a;
}

/// a * v with first-order error propagation.
SumValue product(const SumValue& a, const SumValue& v) {
  SumValue out;
  out.value = a.value * v.value;
  const double ma = std::abs(a.value), mv = std::abs(v.value);
  out.ray_error = ma * v.ray_error + mv * a.ray_error;
  out.grid_error = ma * v.grid_error + mv * a.grid_error;
  out.contour_error = ma * v.contour_error + mv * a.contour_error;
  out.rounding = ma * v.rounding + mv * a.rounding;
  return out;
}

}  // namespace

SumValue gq_sum(const SectorFunction& omega, const CoveringPoint& t, cplx z, const SumSetup& setup) {
  const FourierFn proto = omega(0.0);
  return laplace_fourier([&](cplx u) { return omega(u).values(); }, proto, false, t, z, setup);
}

SumValue expq_inverse_op(const SectorFunction& omega, const CoveringPoint& t, cplx z, const SumSetup& setup) {
  const FourierFn proto = omega(0.0);
  return laplace_fourier(
      [&](cplx u) {
        auto v = omega(u).values();
        const cplx inv = 1.0 / checked_exp_q(u, setup);
        for (auto& x : v) x *= inv;
        return v;
      },
      proto, false, t, z, setup);
}

SumValue g_ellk_op(const SectorFunction& omega, const MahlerTerm& term, const CoveringPoint& t, cplx z,
                   const SumSetup& setup) {
  const QParams& P = setup.params;
  const double dilation = q_pow(P.q(), Rational(term.l1) - Rational(term.l0, P.k()));
  const DecelerationContour contour(
      [&](cplx x) {
        auto v = omega(dilation * x).values();
        const cplx xp = std::pow(x, term.l0);
        for (auto& e : v) e *= xp;
        return v;
      },
      term.l2, setup.contour_radius, setup.contour_nodes, P);
  const FourierFn proto = omega(0.0);
  return laplace_fourier(
      [&](cplx u) {
        const auto d = contour(CoveringPoint::lift(u, setup.direction).pow(term.l2));
        const cplx inv = 1.0 / checked_exp_q(u, setup);
        auto v = concat(d.value, d.difference);
        for (auto& x : v) x *= inv;
        return v;
      },
      proto, true, t, z, setup);
}

std::vector<Theorem2Row> theorem2_residual(const BorelField& field,
                                           const std::vector<std::pair<CoveringPoint, cplx>>& points,
                                           const SumSetup& setup) {
  const ProblemSpec& spec = field.spec();
  const FourierFn proto = FourierFn::zeros(spec.grid, spec.beta, spec.mu);
  const std::size_t M = proto.size();
  auto symbol = [&](const Polynomial& p) {
    std::vector<cplx> s(M);
    for (std::size_t i = 0; i < M; ++i) s[i] = p(cplx(0.0, spec.grid.m(i)));
    return s;
  };
  const auto Qs = symbol(spec.Q), RDs = symbol(spec.RD);
  std::vector<std::vector<cplx>> Rs;
  for (const auto& t : spec.terms) Rs.push_back(symbol(t.R));

  auto scaled = [](std::vector<cplx> v, const std::vector<cplx>& s, cplx c) {
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= s[i] * c;
    return v;
  };

  std::vector<Theorem2Row> rows;
  for (const auto& [t, z] : points) {
    Theorem2Row row;
    row.t = t;
    row.z = z;
    row.lhs = laplace_fourier(
        [&](cplx u) { return scaled(field(u).values(), Qs, 1.0 / checked_exp_q(u, setup)); }, proto, false, t, z,
        setup);
    row.terms.push_back(
        {"R_D", laplace_fourier([&](cplx u) { return scaled(field(u).values(), RDs, 1.0); }, proto, false, t, z, setup)});
    for (std::size_t i = 0; i < spec.terms.size(); ++i) {
      const auto& term = spec.terms[i];
      const std::string tag =
          "(" + std::to_string(term.l0) + "," + std::to_string(term.l1) + "," + std::to_string(term.l2) + ")";
      SumValue inner;
      if (term.l2 == 1) {
        inner = laplace_fourier(
            [&](cplx u) { return scaled(field.shifted(i, u).values(), Rs[i], 1.0 / checked_exp_q(u, setup)); }, proto,
            false, t, z, setup);
      } else {
        inner = laplace_fourier(
            [&](cplx u) {
              const auto& d = field.decelerated(i, CoveringPoint::lift(u, setup.direction).pow(term.l2));
              const cplx inv = 1.0 / checked_exp_q(u, setup);
              return concat(scaled(d.value, Rs[i], inv), scaled(d.difference, Rs[i], inv));
            },
            proto, true, t, z, setup);
      }
      const SumValue a = inverse_fourier_with_error(term.A, z, setup.beta_prime);
      row.terms.push_back({(term.l2 == 1 ? "shift" : "G") + tag, product(a, inner)});
    }
    if (!spec.forcing.empty())
      row.terms.push_back({"forcing", laplace_fourier(
                                          [&](cplx u) {
                                            std::vector<cplx> v(M, 0.0);
                                            for (const auto& f : spec.forcing) axpy(v, std::pow(u, f.j), f.F.values());
                                            const cplx inv = 1.0 / checked_exp_q(u, setup);
                                            for (auto& x : v) x *= inv;
                                            return v;
                                          },
                                          proto, false, t, z, setup)});
    cplx rhs = 0.0;
    row.budget = row.lhs.budget();
    row.floor = row.lhs.rounding;
    for (const auto& term : row.terms) {
      rhs += term.value.value;
      row.budget += term.value.budget();
      row.floor += term.value.rounding;
    }
    row.defect = row.lhs.value - rhs;
    row.residual = std::abs(row.defect);
    rows.push_back(std::move(row));
  }
  return rows;
}

SectorResidualRow eaux2_sector_residual(const BorelField& field, const BorelField& deeper, cplx tau,
                                        const std::vector<std::size_t>& m_indices, double alpha) {
  const ProblemSpec& spec = field.spec();
  const FourierFn& a = field(tau);
  const FourierFn& b = deeper(tau);
  const double L = spec.params.log_q(), k = spec.params.k();
  const double r = std::abs(tau), lr = std::log(r);
  const double profile = r * std::exp(k * lr * lr / (2.0 * L) + alpha * lr);
  SectorResidualRow row;
  row.tau = tau;
  for (std::size_t i : m_indices) {
    const double m = std::abs(spec.grid.m(i));
    const double w = std::pow(1.0 + m, spec.mu) * std::exp(spec.beta * m);
    row.self_consistency = std::max(row.self_consistency, w * std::abs(a[i] - b[i]));
    row.growth_ratio = std::max(row.growth_ratio, w * std::abs(a[i]) / profile);
  }
  return row;
}

GevreyFit fit_gevrey(const std::vector<int>& orders, const std::vector<double>& log_errors, const QParams& params) {
  if (orders.size() != log_errors.size() || orders.size() < 3)
    fail(ErrorKind::InvalidArgument, "fit needs at least three (N, log err) pairs");
  Eigen::MatrixXd A(orders.size(), 3);
  Eigen::VectorXd y(orders.size());
  for (std::size_t i = 0; i < orders.size(); ++i) {
    const double n = orders[i];
    A.row(static_cast<Eigen::Index>(i)) << 1.0, n, n * n;
    y(static_cast<Eigen::Index>(i)) = log_errors[i];
  }
  const Eigen::VectorXd c = A.colPivHouseholderQr().solve(y);
  GevreyFit fit{c(0), c(1), c(2), params.log_q() / (2.0 * params.k()), 0.0};
  fit.relative_error = std::abs(fit.c2 - fit.target) / fit.target;
  return fit;
}

QuadResult gaussian_integral(double a, double rel_tol) {
  LineRule rule;
  rule.a = -a / 2.0 - 6.0;
  rule.b = -a / 2.0 + 6.0;
  rule.intervals = 24;
  rule.rel_tol = rel_tol;
  rule.extend = 1.0;
  const auto r = integrate_line([a](double x) { return std::vector<cplx>{std::exp(-x * x - a * x)}; }, rule);
  return {r.value[0], r.error, r.nodes};
}

}  // namespace qsum
