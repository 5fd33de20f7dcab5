#pragma once

// Small problems shared by the test suites.

#include <cmath>
#include <random>

#include "qsum/geometry.hpp"

namespace qsum::testing {

inline FourierFn gaussian_profile(const MGrid& g, double scale, double width = 1.0, double shift = 0.0,
                                  double beta = 1.0, double mu = 2.0) {
  return FourierFn::sample(
      g, [=](double m) { return cplx(scale * std::exp(-(m - shift) * (m - shift) / (2 * width * width))); }, beta,
      mu);
}

/// q = 2, k = 1, d_D = 1, alpha_D = 1, Q = c(2+X), R_D = 3+X, forcing F_1.
inline ProblemSpec forcing_only(double c = 0.05, MGrid grid = MGrid(100, 0.1)) {
  ProblemSpec s;
  s.params = QParams(2.0, 1);
  s.Q = {{2.0 * c, c}};
  s.RD = {{3.0, 1.0}};
  s.alpha_D = 1.0;
  s.d_D = 1;
  s.beta = 1.0;
  s.mu = 2.0;
  s.grid = grid;
  s.forcing.push_back({1, gaussian_profile(grid, 1.0)});
  return s;
}

/// forcing_only plus one q-shift term (l0,l1,l2) = (1,0,1) and one Mahler term (1,0,2).
inline ProblemSpec contraction(double coupling = 0.05, double c = 0.05, MGrid grid = MGrid(100, 0.1)) {
  ProblemSpec s = forcing_only(c, grid);
  s.forcing.push_back({2, gaussian_profile(grid, 0.5, 0.8, 0.3)});
  s.terms.push_back({1, 0, 1, {{1.0, 0.5}}, gaussian_profile(grid, coupling, 1.0)});
  s.terms.push_back({1, 0, 2, {{0.5, 0.0}}, gaussian_profile(grid, coupling, 0.7, -0.2)});
  return s;
}

/// contraction() with couplings, profiles and shift orders drawn from a seed.
inline ProblemSpec seeded(std::uint64_t seed, MGrid grid = MGrid(100, 0.1)) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  auto between = [&](double a, double b) { return a + (b - a) * U(rng); };
  ProblemSpec s = forcing_only(0.05, grid);
  s.forcing[0].F = gaussian_profile(grid, between(0.5, 1.5), between(0.6, 1.4), between(-0.5, 0.5));
  s.forcing.push_back({2, gaussian_profile(grid, between(0.1, 0.8), between(0.6, 1.4), between(-0.5, 0.5))});
  const int l0a = U(rng) < 0.5 ? 1 : 2, l0b = U(rng) < 0.5 ? 1 : 2;
  s.terms.push_back({l0a, 0, 1, {{between(0.2, 1.0), between(0.0, 0.5)}},
                     gaussian_profile(grid, between(0.01, 0.08), between(0.5, 1.5), between(-0.5, 0.5))});
  s.terms.push_back({l0b, 0, 2, {{between(0.2, 1.0), 0.0}},
                     gaussian_profile(grid, between(0.01, 0.08), between(0.5, 1.5), between(-0.5, 0.5))});
  return s;
}

}  // namespace qsum::testing
