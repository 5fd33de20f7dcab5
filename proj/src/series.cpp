#include "qsum/series.hpp"

#include <limits>

namespace qsum {

namespace {

CheckResult compare(const ScalarSeries& a, const ScalarSeries& b, double tol) {
  CheckResult r;
  for (std::size_t n = 1; n <= a.order(); ++n) {
    const double scale = std::max(std::abs(a.coeff(n)), std::abs(b.coeff(n)));
    // Subnormal coefficients carry fewer than 53 bits; only their exponents are checked.
    if (scale < std::numeric_limits<double>::min()) continue;
    ++r.compared;
    r.max_error = std::max(r.max_error, std::abs(a.coeff(n) - b.coeff(n)) / scale);
  }
  r.ok = r.max_error <= tol;
  return r;
}

}  // namespace

CheckResult borel_commutation_check(const ScalarSeries& u, std::size_t sigma, const Rational& j,
                                    const QParams& params) {
  const std::size_t target = u.order() + sigma;
  const ScalarSeries lhs = formal_q_borel(apply_t_sigma(u, sigma, j, params, target), params);
  const auto s = static_cast<std::int64_t>(sigma);
  const double pre = 1.0 / q_pow(params.q(), borel_exponent(s, params.k()));
  const ScalarSeries rhs =
      cplx(pre) * apply_t_sigma(formal_q_borel(u, params), sigma, j - Rational(s, params.k()), params, target);
  CheckResult r = compare(lhs, rhs, params.eps_rel());
  for (std::int64_t n = 1; n <= static_cast<std::int64_t>(u.order()); ++n) {
    const auto e = commutation_exponents(n, s, j, params.k());
    if (e.lhs != e.rhs) r.ok = false;
  }
  return r;
}

CheckResult mahler_deceleration_check(const ScalarSeries& u, std::size_t p, const QParams& params) {
  const std::size_t target = u.order() * p;
  const ScalarSeries lhs = formal_q_borel(mahler(u, p, target), params);
  const ScalarSeries rhs = mahler(formal_deceleration(formal_q_borel(u, params), p, params), p, target);
  CheckResult r = compare(lhs, rhs, params.eps_rel());
  for (std::int64_t n = 1; n <= static_cast<std::int64_t>(u.order()); ++n) {
    const Rational direct = -borel_exponent(static_cast<std::int64_t>(p) * n, params.k());
    const Rational composed =
        -borel_exponent(n, params.k()) + deceleration_exponent(n, static_cast<std::int64_t>(p), params.k());
    if (direct != composed) r.ok = false;
  }
  return r;
}

cplx evaluate(const ScalarSeries& s, cplx x) {
  cplx acc = 0.0;
  for (std::size_t n = s.order(); n >= 1; --n) acc = (acc + s.coeff(n)) * x;
  return acc;
}

}  // namespace qsum
