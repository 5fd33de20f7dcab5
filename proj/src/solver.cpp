#include "qsum/solver.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qsum/errors.hpp"

namespace qsum {

namespace {

const double kInvSqrt2Pi = 1.0 / std::sqrt(2.0 * kPi);

Rational shift_exponent(const MahlerTerm& t, int k) { return Rational(t.l1) - Rational(t.l0, k); }

FourierFn zero_on(const ProblemSpec& spec) { return FourierFn::zeros(spec.grid, spec.beta, spec.mu); }

bool is_zero(const FourierFn& f) {
  return std::all_of(f.values().begin(), f.values().end(), [](cplx v) { return v == cplx(0.0); });
}

}  // namespace

FourierFn coupling_convolution(const FourierFn& A, const Polynomial& R, const FourierFn& g) {
  return kInvSqrt2Pi * convolve(A, g.times([&](double m) { return R(cplx(0.0, m)); }));
}

H1Operator::H1Operator(const ProblemSpec& spec, const SectorConfig& config, std::size_t order,
                       std::size_t order_budget)
    : spec_(spec), config_(config), order_(order) {
  if (order < 1) fail(ErrorKind::InvalidArgument, "order must be >= 1");
  for (const auto& t : spec.terms)
    if (static_cast<std::size_t>(t.l2) * order > order_budget)
      fail(ErrorKind::OrderOverflow, "l2 * N = " + std::to_string(t.l2 * order) + " exceeds the budget " +
                                         std::to_string(order_budget));
  inv_ = inv_pm_taylor_grid(spec, order);
  pm_.assign(order + 1, zero_on(spec));
  const auto ex = exp_q_coefficients(order, spec.params.q());
  for (std::size_t i = 0; i < spec.grid.size(); ++i) {
    const cplx im(0.0, spec.grid.m(i));
    const cplx q = spec.Q(im), rd = spec.RD(im);
    pm_[0][i] = q - rd;
    double at = 1.0;
    for (std::size_t n = 1; n * static_cast<std::size_t>(spec.d_D) <= order; ++n) {
      at *= spec.alpha_tilde();
      pm_[n * static_cast<std::size_t>(spec.d_D)][i] = -rd * at * ex[n];
    }
  }
}

FourierSeries H1Operator::zero_series() const { return FourierSeries(order_, zero_on(spec_)); }

FourierSeries H1Operator::bracket(const FourierSeries& omega, bool with_forcing) const {
  if (omega.order() != order_) fail(ErrorKind::InvalidArgument, "series order does not match the operator");
  const QParams& P = spec_.params;
  FourierSeries out = zero_series();
  double dropped = 0.0;
  for (const auto& t : spec_.terms) {
    const double pre = 1.0 / q_pow(P.q(), borel_exponent(t.l0, P.k()));
    FourierSeries inner =
        cplx(pre) * apply_t_sigma(omega, static_cast<std::size_t>(t.l0), shift_exponent(t, P.k()), P, order_);
    if (t.l2 >= 2) {
      const auto p = static_cast<std::size_t>(t.l2);
      const FourierSeries dec = formal_deceleration(inner, p, P);
      for (std::size_t n = order_ / p + 1; n <= order_; ++n) dropped += enorm(dec.coeff(n));
      inner = mahler(dec, p, order_);
    }
    for (std::size_t n = 1; n <= order_; ++n) {
      if (is_zero(inner.coeff(n))) continue;
      out.coeff(n) += coupling_convolution(t.A, t.R, inner.coeff(n));
    }
  }
  if (with_forcing)
    for (const auto& f : spec_.forcing)
      if (static_cast<std::size_t>(f.j) <= order_) out.coeff(static_cast<std::size_t>(f.j)) += f.F;
  dropped_ = dropped;
  return out;
}

FourierSeries H1Operator::divide_by_P(const FourierSeries& s) const {
  FourierSeries out = zero_series();
  for (std::size_t n = 1; n <= order_; ++n) {
    FourierFn acc = zero_on(spec_);
    for (std::size_t p = 0; p + 1 <= n; ++p) {
      const FourierFn& b = s.coeff(n - p);
      if (is_zero(b)) continue;
      acc += inv_[p].times(b);
    }
    out.coeff(n) = acc;
  }
  return out;
}

FourierSeries H1Operator::multiply_by_P(const FourierSeries& s) const {
  FourierSeries out = zero_series();
  for (std::size_t n = 1; n <= order_; ++n) {
    FourierFn acc = zero_on(spec_);
    for (std::size_t p = 0; p + 1 <= n; ++p) acc += pm_[p].times(s.coeff(n - p));
    out.coeff(n) = acc;
  }
  return out;
}

FourierSeries H1Operator::apply(const FourierSeries& omega) const { return divide_by_P(bracket(omega)); }

BorelSolution solve_fixed_point(const ProblemSpec& spec, const SectorConfig& config, const SolverOptions& options) {
  if (options.order < 1) fail(ErrorKind::InvalidArgument, "order must be >= 1");
  const H1Operator H(spec, config, options.order, options.order_budget);
  BorelSolution sol{H.zero_series(), 0, {}, {}};
  double prev_step = -1.0;
  int above_one = 0;
  for (std::size_t it = 1; it <= options.max_iter; ++it) {
    FourierSeries next = H.apply(sol.omega);
    const double step = series_norm_1R(next - sol.omega, config.R);
    sol.omega = std::move(next);
    // A step below tol only confirms the previous iterate.
    sol.iterations = step <= options.tol ? it - 1 : it;
    sol.dropped_mass = H.last_dropped_mass();
    sol.norm_history.push_back(series_norm_1R(sol.omega, config.R));
    if (prev_step > 0.0) {
      const double ratio = step / prev_step;
      sol.contraction_history.push_back(ratio);
      above_one = ratio > 1.0 ? above_one + 1 : 0;
      if (above_one >= 3) {
        sol.contraction_warning = true;
        if (!options.force_triangular)
          fail(ErrorKind::NoContraction, "step ratio above 1 for 3 consecutive iterations (last " +
                                             std::to_string(ratio) + ")");
      }
    }
    prev_step = step;
    if (step <= options.tol) break;
  }
  sol.norm_1R = series_norm_1R(sol.omega, config.R);
  sol.residual_1R = series_norm_1R(sol.omega - H.apply(sol.omega), config.R);
  if (!(sol.residual_1R <= options.tol * (1.0 + sol.norm_1R)))
    fail(ErrorKind::NonConvergence, "fixed-point residual " + std::to_string(sol.residual_1R) +
                                        " above tolerance after " + std::to_string(sol.iterations) + " iterations");
  return sol;
}

FourierSeries assemble_U_hat(const BorelSolution& sol, const QParams& params) {
  return formal_q_laplace(sol.omega, params);
}

std::vector<std::vector<cplx>> assemble_u_hat(const FourierSeries& U, const std::vector<cplx>& z_points,
                                              double beta_prime) {
  std::vector<std::vector<cplx>> table(U.order(), std::vector<cplx>(z_points.size()));
  for (std::size_t p = 1; p <= U.order(); ++p)
    for (std::size_t i = 0; i < z_points.size(); ++i)
      table[p - 1][i] = inverse_fourier_eval(U.coeff(p), z_points[i], beta_prime);
  return table;
}

namespace {

struct EquationSides {
  FourierSeries lhs;
  std::vector<FourierSeries> rhs_terms;
};

EquationSides equation_sides(const FourierSeries& U, const ProblemSpec& spec) {
  const std::size_t N = U.order();
  const QParams& P = spec.params;
  const FourierFn zero = zero_on(spec);
  EquationSides s{FourierSeries(N, zero), {}};
  for (std::size_t n = 1; n <= N; ++n)
    s.lhs.coeff(n) = U.coeff(n).times([&](double m) { return spec.Q(cplx(0.0, m)); });

  // exp_q(alpha_D t^{d_D} sigma^{d_D/k}) R_D U as sum_n alpha_D^n/[n]_q! (t^{d_D} sigma^{d_D/k})^n.
  FourierSeries rdU(N, zero);
  for (std::size_t n = 1; n <= N; ++n)
    rdU.coeff(n) = U.coeff(n).times([&](double m) { return spec.RD(cplx(0.0, m)); });
  FourierSeries expo = rdU;
  FourierSeries iter = rdU;
  const auto d = static_cast<std::size_t>(spec.d_D);
  const Rational shift(spec.d_D, P.k());
  for (std::size_t n = 1; n * d <= N; ++n) {
    iter = apply_t_sigma(iter, d, shift, P, N);
    expo += cplx(std::pow(spec.alpha_D, static_cast<double>(n)) / q_factorial(static_cast<unsigned>(n), P.q())) * iter;
  }
  s.rhs_terms.push_back(expo);

  for (const auto& t : spec.terms) {
    FourierSeries v = apply_t_sigma(U, static_cast<std::size_t>(t.l0), Rational(t.l1), P, N);
    if (t.l2 >= 2) v = mahler(v, static_cast<std::size_t>(t.l2), N);
    FourierSeries c(N, zero);
    for (std::size_t n = 1; n <= N; ++n)
      if (!is_zero(v.coeff(n))) c.coeff(n) = coupling_convolution(t.A, t.R, v.coeff(n));
    s.rhs_terms.push_back(c);
  }

  FourierSeries f(N, zero);
  for (const auto& fj : spec.forcing)
    if (static_cast<std::size_t>(fj.j) <= N)
      f.coeff(static_cast<std::size_t>(fj.j)) += cplx(q_pow(P.q(), borel_exponent(fj.j, P.k()))) * fj.F;
  s.rhs_terms.push_back(f);
  return s;
}

}  // namespace

FourierSeries main_equation_defect(const FourierSeries& U, const ProblemSpec& spec) {
  const auto s = equation_sides(U, spec);
  FourierSeries out = s.lhs;
  for (const auto& r : s.rhs_terms) out -= r;
  return out;
}

std::vector<OrderResidual> main_equation_residual(const FourierSeries& U, const ProblemSpec& spec) {
  const auto s = equation_sides(U, spec);
  const std::size_t N = U.order();
  const int max_l0 = spec.max_l0();
  std::vector<OrderResidual> out;
  for (std::size_t n = 1; n <= N; ++n) {
    OrderResidual r;
    r.order = n;
    FourierFn diff = s.lhs.coeff(n);
    r.scale = enorm(diff);
    for (const auto& t : s.rhs_terms) {
      diff -= t.coeff(n);
      r.scale = std::max(r.scale, enorm(t.coeff(n)));
    }
    r.absolute = enorm(diff);
    r.relative = r.scale > 0.0 ? r.absolute / r.scale : 0.0;
    r.counted = static_cast<long>(n) <= static_cast<long>(N) - max_l0;
    out.push_back(r);
  }
  return out;
}

}  // namespace qsum
