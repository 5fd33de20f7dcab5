#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "fixtures.hpp"
#include "qsum/errors.hpp"
#include "qsum/solver.hpp"

using namespace qsum;

namespace {

double max_abs(const FourierFn& f) {
  double s = 0.0;
  for (auto v : f.values()) s = std::max(s, std::abs(v));
  return s;
}

FourierSeries random_omega(const ProblemSpec& spec, std::size_t N, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  FourierSeries w(N, FourierFn::zeros(spec.grid, spec.beta, spec.mu));
  for (std::size_t p = 1; p <= N; ++p) {
    const double a = g(rng), b = g(rng), s = 0.5 + std::abs(g(rng));
    w.coeff(p) = testing::gaussian_profile(spec.grid, 1.0, s, 0.2 * g(rng)) * cplx(a, b);
  }
  return w;
}

}  // namespace

TEST_CASE("H1 basics") {
  auto spec = testing::contraction();
  const auto cfg = select_sector(spec, 0.0);
  const std::size_t N = 8;

  auto no_forcing = spec;
  no_forcing.forcing.clear();
  const H1Operator h0(no_forcing, cfg, N);
  const auto z = h0.apply(h0.zero_series());
  for (std::size_t p = 1; p <= N; ++p) CHECK(max_abs(z.coeff(p)) == 0.0);

  auto forcing = testing::forcing_only();
  const H1Operator hf(forcing, cfg, N);
  const auto w = hf.apply(hf.zero_series());
  const auto& f0 = hf.inverse_taylor()[0];
  const auto expect = forcing.forcing[0].F.times(f0);
  CHECK(max_abs(w.coeff(1) - expect) < 1e-15);
  for (std::size_t p = 2; p <= N; ++p)
    CHECK(max_abs(w.coeff(p) - forcing.forcing[0].F.times(hf.inverse_taylor()[p - 1])) < 1e-15);
}

TEST_CASE("single shift term against a direct quadrature") {
  auto spec = testing::forcing_only();
  spec.forcing.clear();
  const double cA = 0.3;
  spec.terms.push_back({2, 0, 1, {{1.0, 0.5}}, testing::gaussian_profile(spec.grid, cA, 1.0)});
  const auto cfg = select_sector(spec, 0.0);
  const std::size_t N = 5;
  const H1Operator h(spec, cfg, N);
  FourierSeries w = h.zero_series();
  auto w1 = [](double m) { return cplx(std::exp(-m * m / 3.0), 0.2 * m * std::exp(-m * m)); };
  w.coeff(1) = FourierFn::sample(spec.grid, w1, 1.0, 2.0);
  const auto out = h.apply(w);
  const double q = 2.0;
  // coefficient 1 + l0 = 3: f_0 q^{-l0(l0-1)/2k} q^{(l1 - l0/k)} (1/sqrt(2pi)) (A * (w1 R))(m)
  const double pre = std::pow(q, -1.0) * std::pow(q, -2.0);
  const auto& g = spec.grid;
  for (std::size_t i = 0; i < g.size(); i += 7) {
    const double m = g.m(i);
    cplx acc = 0.0;
    for (std::size_t j = 0; j < g.size(); ++j) {
      const double m1 = g.m(j);
      const double wt = (j == 0 || j + 1 == g.size()) ? 0.5 : 1.0;
      acc += wt * cA * std::exp(-(m - m1) * (m - m1) / 2) * w1(m1) * (1.0 + 0.5 * cplx(0, m1));
    }
    acc *= g.step / std::sqrt(2 * kPi);
    const cplx f0 = 1.0 / (spec.Q(cplx(0, m)) - spec.RD(cplx(0, m)));
    CHECK(std::abs(out.coeff(3)[i] - f0 * pre * acc) < 1e-13);
  }
}

TEST_CASE("H1 is affine") {
  auto spec = testing::contraction();
  const auto cfg = select_sector(spec, 0.0);
  const std::size_t N = 8;
  const H1Operator h(spec, cfg, N);
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 3; ++trial) {
    const auto a = random_omega(spec, N, rng), b = random_omega(spec, N, rng);
    const double t = std::uniform_real_distribution<double>(0, 1)(rng);
    const auto lhs = h.apply(cplx(t) * a + cplx(1 - t) * b);
    const auto rhs = cplx(t) * h.apply(a) + cplx(1 - t) * h.apply(b);
    for (std::size_t p = 1; p <= N; ++p) CHECK(max_abs(lhs.coeff(p) - rhs.coeff(p)) < 1e-12);
  }
}

TEST_CASE("fixed point: forcing only and contraction regime") {
  const auto fo = testing::forcing_only();
  const auto cfg = select_sector(fo, 0.0);
  SolverOptions opt;
  opt.order = 12;
  const auto s0 = solve_fixed_point(fo, cfg, opt);
  CHECK(s0.iterations == 1);
  CHECK(s0.residual_1R <= opt.tol);

  const auto spec = testing::contraction();
  const auto c = select_sector(spec, 0.0);
  opt.order = 16;
  const auto sol = solve_fixed_point(spec, c, opt);
  CHECK(sol.iterations <= opt.order);
  CHECK(sol.residual_1R <= 1e-10 * (1 + sol.norm_1R));
  for (double r : sol.contraction_history) CHECK(r <= 0.55);
  for (double n : sol.norm_history) CHECK(n <= 2.0 * sol.norm_1R);
}

TEST_CASE("fixed point: seeded specs in the small-coupling regime") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const auto spec = testing::seeded(seed);
    for (const auto& c : check_structure(spec)) REQUIRE_MESSAGE(c.ok, c.name << ": " << c.witness);
    const auto cfg = select_sector(spec, 0.0);
    SolverOptions opt;
    opt.order = 16;
    const auto sol = solve_fixed_point(spec, cfg, opt);
    CHECK(sol.iterations <= opt.order);
    CHECK(sol.residual_1R <= 1e-10 * (1 + sol.norm_1R));
    for (double r : sol.contraction_history) CHECK_MESSAGE(r <= 0.55, "seed " << seed);
  }
}

TEST_CASE("fixed point: blow-up") {
  auto spec = testing::contraction(0.05 * 1e6);
  const auto cfg = select_sector(spec, 0.0);
  SolverOptions opt;
  opt.order = 12;
  try {
    solve_fixed_point(spec, cfg, opt);
    FAIL("expected NoContraction");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoContraction);
  }
  opt.force_triangular = true;
  const auto sol = solve_fixed_point(spec, cfg, opt);
  CHECK(sol.contraction_warning);
  CHECK(sol.iterations <= opt.order);
}

TEST_CASE("order budget") {
  auto spec = testing::contraction();
  const auto cfg = select_sector(spec, 0.0);
  CHECK_THROWS_AS(H1Operator(spec, cfg, 10, 15), Error);
}

TEST_CASE("assembly") {
  const auto spec = testing::contraction();
  const auto cfg = select_sector(spec, 0.0);
  SolverOptions opt;
  opt.order = 6;
  const auto sol = solve_fixed_point(spec, cfg, opt);
  const auto U = assemble_U_hat(sol, spec.params);
  CHECK(max_abs(U.coeff(1) - sol.omega.coeff(1)) == 0.0);
  CHECK(max_abs(U.coeff(3) - 8.0 * sol.omega.coeff(3)) < 1e-15 * max_abs(U.coeff(3)));
  const auto back = formal_q_borel(U, spec.params);
  for (std::size_t p = 1; p <= 6; ++p) CHECK(max_abs(back.coeff(p) - sol.omega.coeff(p)) <= 1e-15 * max_abs(sol.omega.coeff(p)));

  const MGrid g = MGrid::covering(40.0, 0.02);
  FourierSeries G(2, FourierFn::zeros(g, 1.0, 2.0));
  G.coeff(1) = testing::gaussian_profile(g, 1.0);
  const auto tab = assemble_u_hat(G, {0.0, cplx(0.3, 0.2)}, 0.5);
  CHECK(std::abs(tab[0][0] - 1.0) < 1e-8);
  CHECK(tab[1][1] == cplx(0.0));

  const double beta_prime = 0.5;
  const std::vector<cplx> zs{0.0, cplx(1, 0.4), cplx(-2, -0.5)};
  const auto uh = assemble_u_hat(U, zs, beta_prime);
  double integral = 0.0;
  for (std::size_t i = 0; i < spec.grid.size(); ++i) {
    const double m = std::abs(spec.grid.m(i));
    integral += std::pow(1 + m, -spec.mu) * std::exp(-(spec.beta - beta_prime) * m) * spec.grid.step;
  }
  for (std::size_t p = 1; p <= 6; ++p)
    for (std::size_t i = 0; i < zs.size(); ++i)
      CHECK(std::abs(uh[p - 1][i]) <= enorm(U.coeff(p)) * integral / std::sqrt(2 * kPi) * (1 + 1e-12));
  CHECK_THROWS_AS(assemble_u_hat(U, {cplx(0, 0.7)}, beta_prime), Error);
}

TEST_CASE("t-plane equation residual") {
  const auto fo = testing::forcing_only();
  const auto cfg = select_sector(fo, 0.0);
  SolverOptions opt;
  opt.order = 16;
  const auto s0 = solve_fixed_point(fo, cfg, opt);
  for (const auto& r : main_equation_residual(assemble_U_hat(s0, fo.params), fo)) CHECK(r.relative < 1e-10);

  const auto spec = testing::contraction();
  const auto c = select_sector(spec, 0.0);
  const auto sol = solve_fixed_point(spec, c, opt);
  for (const auto& r : main_equation_residual(assemble_U_hat(sol, spec.params), spec))
    if (r.counted) CHECK(r.relative <= 10 * 1e-10);
}

TEST_CASE("Borel image of the t-plane defect") {
  const auto spec = testing::contraction();
  const auto cfg = select_sector(spec, 0.0);
  const std::size_t N = 10;
  const H1Operator h(spec, cfg, N);
  std::mt19937_64 rng(12);
  const auto w = random_omega(spec, N, rng);
  const auto borel_defect = formal_q_borel(main_equation_defect(formal_q_laplace(w, spec.params), spec), spec.params);
  const auto expect = h.multiply_by_P(w - h.apply(w));
  for (std::size_t p = 1; p <= N; ++p) {
    const double scale = std::max(max_abs(expect.coeff(p)), 1e-300);
    CHECK(max_abs(borel_defect.coeff(p) - expect.coeff(p)) <= 1e-9 * scale);
  }
}
