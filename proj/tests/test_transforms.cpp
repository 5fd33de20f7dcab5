#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "qsum/errors.hpp"
#include "qsum/transforms.hpp"

using namespace qsum;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error raised");
  return ErrorKind::InvalidArgument;
}

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

/// q-Laplace along the direction of T itself, valid for entire f.
cplx laplace_following(const std::function<cplx(cplx)>& f, const CoveringPoint& T, const QParams& P) {
  return q_laplace(f, T, RayQuadrature::around(T.r(), T.theta(), P), P).value;
}

}  // namespace

TEST_CASE("monomial q-Laplace table") {
  for (double q : {2.0, 1.5})
    for (int k : {1, 2}) {
      const QParams P(q, k);
      for (const CoveringPoint T : {CoveringPoint(0.1, 0.0), CoveringPoint(0.05, 0.3), CoveringPoint(0.02, -0.2)})
        for (int n = 1; n <= 6; ++n) {
          const auto r = q_laplace([n](cplx u) { return std::pow(u, n); }, T, RayQuadrature::around(T.r(), 0.0, P), P);
          const cplx expect = std::pow(q, n * (n - 1) / (2.0 * k)) * std::pow(T.to_complex(), n);
          CHECK_MESSAGE(rel(r.value, expect) <= 1e-7, "q=" << q << " k=" << k << " n=" << n);
        }
    }
  const QParams P(2.0, 1);
  const CoveringPoint T(0.1, 0.0);
  CHECK(std::abs(q_laplace([](cplx u) { return u; }, T, RayQuadrature::around(0.1, 0.0, P), P).value - 0.1) < 1e-8);
  CHECK(std::abs(q_laplace([](cplx u) { return u * u; }, T, RayQuadrature::around(0.1, 0.0, P), P).value - 0.02) <
        1e-8);

  auto quad = RayQuadrature::around(0.1, 0.0, P);
  quad.certified_radius = 0.05;
  CHECK(kind_of([&] { q_laplace([](cplx u) { return u; }, T, quad, P); }) == ErrorKind::DomainTooLarge);
  // e^{u^2} is not Laplace transformable along the positive axis.
  CHECK(kind_of([&] { q_laplace([](cplx u) { return std::exp(u * u); }, T, RayQuadrature::around(0.1, 0.0, P), P); }) ==
        ErrorKind::QuadratureStall);
}

TEST_CASE("Gaussian identity") {
  for (double a : {0.0, 1.0, 2.0})
    CHECK(std::abs(gaussian_integral(a).value - std::sqrt(kPi) * std::exp(a * a / 4)) <= 1e-10);
}

TEST_CASE("kernel modulus") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int i = 0; i < 20; ++i) {
    const QParams P(1.2 + std::abs(u(rng)), 1 + i % 3);
    const CoveringPoint T(std::exp(u(rng)), u(rng)), U(std::exp(u(rng)), u(rng));
    const double L = P.log_q(), k = P.k();
    const double lr = std::log(T.r() / U.r()), dt = T.theta() - U.theta();
    const double expect = std::exp(-k / (2 * L) * (lr * lr - dt * dt) + 0.5 * lr);
    CHECK(std::abs(std::abs(theta_kernel(T / U, P)) - expect) <= 1e-12 * expect);
  }
}

TEST_CASE("direction independence and q-difference commutation") {
  const QParams P(2.0, 1);
  auto f = [](cplx u) { return u + u * u * u / 7.0; };
  const CoveringPoint T(0.08, 0.1);
  const cplx base = q_laplace(f, T, RayQuadrature::around(T.r(), 0.0, P), P).value;
  for (double d : {-0.05, 0.05})
    CHECK(rel(q_laplace(f, T, RayQuadrature::around(T.r(), d, P), P).value, base) <= 1e-7);

  // L(z^s f(q^{j - s/k} z))(T) = q^{s(s-1)/(2k)} T^s L(f)(q^j T), f = z^2, s = j = 1.
  const double q = 2.0;
  const cplx lhs = q_laplace([](cplx z) { return z * z * z; }, T, RayQuadrature::around(T.r(), 0.0, P), P).value;
  const CoveringPoint qT = T.scaled(q);
  const cplx rhs = T.to_complex() * q_laplace([](cplx z) { return z * z; }, qT, RayQuadrature::around(qT.r(), 0.0, P), P).value;
  CHECK(rel(lhs, rhs) <= 1e-6);
}

TEST_CASE("analytic q-Borel") {
  const QParams P(2.0, 1);
  const double radius = 0.25;
  auto contour_for = [&](const CoveringPoint& xi) { return CircleContour::around(radius, xi.theta(), 1.0, P.log_q()); };

  auto phi_id = [&](const CoveringPoint& x) { return laplace_following([](cplx u) { return u; }, x, P); };
  const CoveringPoint xi(1.5, 0.1);
  CHECK(std::abs(q_borel_analytic(phi_id, xi, contour_for(xi), P).value - xi.to_complex()) <= 1e-6);

  auto square = [](const CoveringPoint& x) { return x.to_complex() * x.to_complex(); };
  const CoveringPoint xi2(2.0, 0.0);
  CHECK(std::abs(q_borel_analytic(square, xi2, contour_for(xi2), P).value - 2.0) <= 1e-6);
  for (int n = 1; n <= 5; ++n) {
    auto mono = [n](const CoveringPoint& x) { return std::pow(x.to_complex(), n); };
    const CoveringPoint x0(0.7, -0.4);
    const cplx expect = std::pow(x0.to_complex(), n) / std::pow(2.0, n * (n - 1) / 2.0);
    CHECK(std::abs(q_borel_analytic(mono, x0, contour_for(x0), P).value - expect) <= 1e-6 * std::max(1.0, std::abs(expect)));
  }

  auto univalued = [](const CoveringPoint& x) { return x.to_complex() + x.to_complex() * x.to_complex(); };
  const CoveringPoint a(0.9, 0.4), b(0.9, 0.4 + 2 * kPi);
  CHECK(std::abs(q_borel_analytic(univalued, a, contour_for(a), P).value -
                 q_borel_analytic(univalued, b, contour_for(b), P).value) <= 1e-8);

  auto f = [](cplx u) { return u + u * u * u / 7.0; };
  auto phi = [&](const CoveringPoint& x) { return laplace_following(f, x, P); };
  for (const CoveringPoint x : {CoveringPoint(0.5, 0.0), CoveringPoint(1.0, 0.2), CoveringPoint(1.5, -0.3),
                                CoveringPoint(2.0, 0.1), CoveringPoint(0.8, 0.35)})
    CHECK(std::abs(q_borel_analytic(phi, x, contour_for(x), P).value - f(x.to_complex())) <= 1e-5);
}

TEST_CASE("deceleration integral") {
  const QParams P(2.0, 1);
  auto contour_for = [&](double radius, int p, const CoveringPoint& h) {
    return CircleContour::around(radius, h.theta(), deceleration_orders(p, 1).kernel, P.log_q());
  };
  const CoveringPoint h1(0.3, 0.0);
  CHECK(std::abs(deceleration_integral([](cplx x) { return x; }, 2, h1, contour_for(0.5, 2, h1), P).value - 0.15) <= 1e-6);
  const CoveringPoint h2(0.5, 0.2);
  CHECK(std::abs(deceleration_integral([](cplx x) { return x * x; }, 2, h2, contour_for(0.5, 2, h2), P).value -
                 2.0 / 64.0 * std::pow(h2.to_complex(), 2)) <= 1e-6);

  // Formal factor q^{n(n-1)/2k - pn(pn-1)/2k} on tau + tau^2.
  for (int p : {2, 3})
    for (double r : {0.3, 1.0, 3.0}) {
      const CoveringPoint h(r, 0.25);
      auto factor = [p](int n) { return std::pow(2.0, n * (n - 1) / 2.0 - p * n * (p * n - 1) / 2.0); };
      const cplx hz = h.to_complex();
      const cplx expect = factor(1) * hz + factor(2) * hz * hz;
      const cplx got = deceleration_integral([](cplx x) { return x + x * x; }, p, h, contour_for(0.5, p, h), P).value;
      CHECK_MESSAGE(std::abs(got - expect) <= 1e-5, "p=" << p << " |h|=" << r);
    }

  // Growth envelope with Delta = 2 and alpha = 0: the constant K stays moderate.
  const auto ord = deceleration_orders(2, 1);
  double K = 0.0;
  for (double r : {1.0, 10.0, 100.0}) {
    const CoveringPoint h(r, 0.0);
    const cplx v = deceleration_integral([](cplx x) { return x + x * x; }, 2, h, contour_for(1.0, 2, h), P).value;
    const double env = std::exp(ord.kernel / (2 * P.log_q()) * std::pow(std::log(r + 2.0), 2));
    K = std::max(K, std::abs(v) / env);
    CHECK(std::abs(v - (0.5 * r + r * r / 32.0)) <= 1e-6 * std::abs(v));
  }
  CHECK(K < 10.0);

  CHECK(kind_of([&] {
          deceleration_integral([](cplx x) { return x; }, 2, h1, contour_for(0.5, 2, h1), P, 0.1);
        }) == ErrorKind::DomainViolation);

  const DecelerationContour dc([](cplx x) { return std::vector<cplx>{x, x * x}; }, 3, 0.5, 256, P);
  const CoveringPoint h3(1.3, -0.2);
  const auto v = dc(h3);
  CHECK(std::abs(v.value[0] - std::pow(2.0, -3.0) * h3.to_complex()) <= 1e-9);
  CHECK(std::abs(v.value[1] - std::pow(2.0, 1.0 - 15.0) * std::pow(h3.to_complex(), 2)) <= 1e-9);
  CHECK(v.error <= 1e-9);
}

TEST_CASE("q-Gevrey fit") {
  const QParams P(2.0, 1);
  std::vector<int> N;
  std::vector<double> y;
  for (int n = 2; n <= 8; ++n) {
    N.push_back(n);
    y.push_back(0.3 - 1.7 * n + P.log_q() / 2 * n * n);
  }
  const auto fit = fit_gevrey(N, y, P);
  CHECK(fit.relative_error < 1e-10);
  CHECK(fit.c1 == doctest::Approx(-1.7));
}

TEST_CASE("continued Borel field") {
  const auto fo = testing::forcing_only();
  const auto cfg = select_sector(fo, 0.0);
  SolverOptions opt;
  opt.order = 16;
  const auto sol = solve_fixed_point(fo, cfg, opt);
  const BorelField field(fo, cfg, sol.omega);
  const cplx E1 = 0.0;
  (void)E1;
  for (cplx tau : {cplx(0.05, 0.01), cplx(0.3, 0.0), cplx(2.0, 0.3), cplx(40.0, -5.0)}) {
    const auto& w = field(tau);
    const cplx E = exp_q(fo.alpha_tilde() * tau, fo.params);
    double err = 0.0, scale = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const cplx im(0, fo.grid.m(i));
      const cplx expect = fo.forcing[0].F[i] * tau / (fo.Q(im) - E * fo.RD(im));
      err = std::max(err, std::abs(w[i] - expect));
      scale = std::max(scale, std::abs(expect));
    }
    CHECK_MESSAGE(err <= 1e-13 * scale, "tau=" << tau);
  }

  const auto spec = testing::contraction();
  const auto c = select_sector(spec, 0.0);
  const auto s2 = solve_fixed_point(spec, c, opt);
  const BorelField f2(spec, c, s2.omega);
  for (cplx tau : {cplx(0.1, 0.0), cplx(0.08, 0.05)}) {
    const auto a = f2.rhs(tau), b = f2.series_value(tau);
    CHECK(enorm(a - b) <= 1e-11 * enorm(b));
  }
  // The contour deceleration of the series part agrees with the formal factor.
  const auto& t2 = spec.terms[1];
  const CoveringPoint h(0.2, 0.1);
  const auto& d = f2.decelerated(1, h);
  FourierSeries inner = cplx(1.0 / std::pow(2.0, t2.l0 * (t2.l0 - 1) / 2.0)) *
                        apply_t_sigma(s2.omega, t2.l0, Rational(t2.l1) - Rational(t2.l0, 1), spec.params, 16);
  const auto dec = formal_deceleration(inner, 2, spec.params);
  FourierFn expect = FourierFn::zeros(spec.grid, spec.beta, spec.mu);
  for (std::size_t n = 16; n >= 1; --n) expect = expect * h.to_complex() + dec.coeff(n);
  expect = expect * h.to_complex();
  double err = 0.0;
  for (std::size_t i = 0; i < expect.size(); ++i) err = std::max(err, std::abs(d.value[i] - expect[i]));
  CHECK(err <= 1e-12 * enorm(expect));
}

TEST_CASE("G_q-sum operators") {
  const auto spec = testing::contraction();
  const auto cfg = select_sector(spec, 0.0);
  const SumSetup setup = SumSetup::from(spec, cfg);
  const auto g = testing::gaussian_profile(spec.grid, 1.0, 1.0, 0.3);
  const CoveringPoint t(cfg.R / 8, 0.1);
  const cplx z(0.4, 0.2);
  const cplx Fg = inverse_fourier_eval(g, z, setup.beta_prime);

  SectorFunction sep = [&](cplx u) { return g * u; };
  CHECK(std::abs(gq_sum(sep, t, z, setup).value - t.to_complex() * Fg) <= 1e-6 * std::abs(Fg));
  SectorFunction zero = [&](cplx) { return zero_like(g); };
  CHECK(gq_sum(zero, t, z, setup).value == cplx(0.0));
  CHECK(expq_inverse_op(zero, t, z, setup).value == cplx(0.0));
  CHECK(g_ellk_op(zero, spec.terms[1], t, z, setup).value == cplx(0.0));

  SectorFunction with_exp = [&](cplx u) { return g * (exp_q(setup.alpha_tilde * u, setup.params) * u); };
  CHECK(std::abs(expq_inverse_op(with_exp, t, z, setup).value - t.to_complex() * Fg) <= 1e-6 * std::abs(Fg));

  SectorFunction sq = [&](cplx u) { return g * (u * u + 0.3 * u); };
  SectorFunction sq_div = [&](cplx u) { return sq(u) * (1.0 / exp_q(setup.alpha_tilde * u, setup.params)); };
  const cplx a = expq_inverse_op(sq, t, z, setup).value, b = gq_sum(sq_div, t, z, setup).value;
  CHECK(std::abs(a - b) <= 1e-8 * std::abs(b));

  // Monomial u^n g(m): the contour reproduces the formal deceleration of x^{l0} (q^{l1-l0/k} x)^n.
  const auto& term = spec.terms[1];
  for (int n : {1, 2}) {
    SectorFunction mono = [&, n](cplx u) { return g * std::pow(u, n); };
    const int e = term.l0 + n;
    const double dil = std::pow(2.0, (term.l1 - term.l0) * n);
    const double factor = dil * std::pow(2.0, e * (e - 1) / 2.0 - 2.0 * e * (2 * e - 1) / 2.0);
    SectorFunction formal = [&, e, factor](cplx u) { return g * (factor * std::pow(u, 2 * e)); };
    const cplx got = g_ellk_op(mono, term, t, z, setup).value;
    const cplx expect = expq_inverse_op(formal, t, z, setup).value;
    CHECK_MESSAGE(std::abs(got - expect) <= 1e-5 * std::abs(expect), "n=" << n);
  }
  SectorFunction m1 = [&](cplx u) { return g * u; };
  SectorFunction m2 = [&](cplx u) { return g * (u * u * u); };
  SectorFunction mix = [&](cplx u) { return m1(u) * cplx(0.7) + m2(u) * cplx(0.0, -1.3); };
  const cplx lin = 0.7 * g_ellk_op(m1, term, t, z, setup).value + cplx(0, -1.3) * g_ellk_op(m2, term, t, z, setup).value;
  CHECK(std::abs(g_ellk_op(mix, term, t, z, setup).value - lin) <= 1e-8 * std::abs(lin));

  CHECK(kind_of([&] { gq_sum(sep, CoveringPoint(2 * cfg.R, 0.0), z, setup); }) == ErrorKind::DomainTooLarge);
  CHECK(kind_of([&] { gq_sum(sep, t, cplx(0, 0.9), setup); }) == ErrorKind::StripViolation);
}

TEST_CASE("transformed equation residual") {
  SolverOptions opt;
  opt.order = 16;
  {
    const auto fo = testing::forcing_only();
    const auto cfg = select_sector(fo, 0.0);
    const auto sol = solve_fixed_point(fo, cfg, opt);
    const BorelField field(fo, cfg, sol.omega);
    std::vector<std::pair<CoveringPoint, cplx>> pts;
    for (int i = 0; i < 5; ++i) pts.push_back({CoveringPoint(cfg.R / (4 + i), 0.05 * i), cplx(0.3 * i - 0.6, 0.1)});
    for (const auto& row : theorem2_residual(field, pts, SumSetup::from(fo, cfg))) {
      CHECK(row.budget > 0.0);
      CHECK_MESSAGE(row.residual <= 10 * row.budget, row.residual << " vs " << row.budget);
    }
  }
  {
    const auto spec = testing::contraction();
    const auto cfg = select_sector(spec, 0.0);
    const auto sol = solve_fixed_point(spec, cfg, opt);
    const BorelField field(spec, cfg, sol.omega);
    const std::vector<std::pair<CoveringPoint, cplx>> pts{{CoveringPoint(cfg.R / 8, 0.0), cplx(0.2, 0.1)}};
    for (const auto& row : theorem2_residual(field, pts, SumSetup::from(spec, cfg))) {
      CHECK(row.terms.size() == 4);
      CHECK_MESSAGE(row.residual <= 100 * row.budget, row.residual << " vs " << row.budget);
    }
  }
}

TEST_CASE("continued equation on the sector") {
  SolverOptions opt;
  opt.order = 16;
  std::vector<std::size_t> idx;
  const auto fo = testing::forcing_only();
  for (std::size_t i = 0; i < fo.grid.size(); i += 10) idx.push_back(i);
  {
    const auto cfg = select_sector(fo, 0.0);
    const auto sol = solve_fixed_point(fo, cfg, opt);
    const BorelField a(fo, cfg, sol.omega), b(fo, cfg, sol.omega, {0.125, 256});
    for (double r : {1.0, 3.0, 10.0}) CHECK(eaux2_sector_residual(a, b, std::polar(r, 0.1), idx).self_consistency == 0.0);
  }
  // Shift-only problem: the inner points q^{l1 - l0/k} tau fall in the disc.
  auto spec = testing::contraction();
  spec.terms.pop_back();
  const auto cfg = select_sector(spec, 0.0);
  const auto sol = solve_fixed_point(spec, cfg, opt);
  const BorelField a(spec, cfg, sol.omega), b(spec, cfg, sol.omega, {0.125, 256});
  double prev = 0.0;
  for (double r : {cfg.R, 1.2 * cfg.R, 1.5 * cfg.R}) {
    const auto row = eaux2_sector_residual(a, b, std::polar(r, 0.05), idx);
    CHECK(row.self_consistency <= 10 * 1e-12 * (1 + enorm(a(std::polar(r, 0.05)))));
    CHECK(std::isfinite(row.growth_ratio));
    prev = std::max(prev, row.growth_ratio);
  }
  // Refining the samples does not move the sup by much.
  double fine = prev;
  for (double r = cfg.R; r <= 1.5 * cfg.R; r += 0.05 * cfg.R)
    fine = std::max(fine, eaux2_sector_residual(a, b, std::polar(r, 0.05), idx).growth_ratio);
  CHECK(fine <= 1.5 * prev);
}
