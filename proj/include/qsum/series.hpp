#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <boost/rational.hpp>

#include "qsum/errors.hpp"
#include "qsum/qcore.hpp"

namespace qsum {

using Rational = boost::rational<std::int64_t>;

inline double to_double(const Rational& r) {
  return static_cast<double>(r.numerator()) / static_cast<double>(r.denominator());
}

/// q raised to an exact rational exponent; the only place exponents become floats.
inline double q_pow(double q, const Rational& e) { return std::pow(q, to_double(e)); }

/// n(n-1)/(2k), the Borel weight exponent of the n-th coefficient.
inline Rational borel_exponent(std::int64_t n, std::int64_t k) { return Rational(n * (n - 1), 2 * k); }

/// Exponent of the formal deceleration factor at index n.
inline Rational deceleration_exponent(std::int64_t n, std::int64_t p, std::int64_t k) {
  return borel_exponent(n, k) - borel_exponent(p * n, k);
}

inline cplx zero_like(const cplx&) { return {0.0, 0.0}; }

/// Truncated power series sum_{n=1}^{N} a_n T^n with no constant term.
/// coeff(n) is the coefficient of T^n. C needs +, -, scalar * and zero_like().
template <class C>
class TruncatedSeries {
 public:
  TruncatedSeries(std::size_t order, const C& zero) : coeffs_(order, zero_like(zero)), zero_(zero_like(zero)) {}
  TruncatedSeries(std::vector<C> coeffs, const C& zero) : coeffs_(std::move(coeffs)), zero_(zero_like(zero)) {}

  std::size_t order() const noexcept { return coeffs_.size(); }
  const C& zero() const noexcept { return zero_; }

  const C& coeff(std::size_t n) const {
    check_index(n);
    return coeffs_[n - 1];
  }
  C& coeff(std::size_t n) {
    check_index(n);
    return coeffs_[n - 1];
  }
  const std::vector<C>& coeffs() const noexcept { return coeffs_; }

  TruncatedSeries& operator+=(const TruncatedSeries& o) {
    same_order(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] = coeffs_[i] + o.coeffs_[i];
    return *this;
  }
  TruncatedSeries& operator-=(const TruncatedSeries& o) {
    same_order(o);
    for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] = coeffs_[i] - o.coeffs_[i];
    return *this;
  }
  friend TruncatedSeries operator+(TruncatedSeries a, const TruncatedSeries& b) { return a += b; }
  friend TruncatedSeries operator-(TruncatedSeries a, const TruncatedSeries& b) { return a -= b; }
  friend TruncatedSeries operator*(cplx s, TruncatedSeries a) {
    for (auto& c : a.coeffs_) c = c * s;
    return a;
  }

  /// Multiplies coefficient n by factor(n).
  template <class F>
  TruncatedSeries scaled_by_index(F factor) const {
    TruncatedSeries out = *this;
    for (std::size_t n = 1; n <= order(); ++n) out.coeffs_[n - 1] = out.coeffs_[n - 1] * factor(n);
    return out;
  }

  /// Copy with a different truncation order (extra coefficients are zero).
  TruncatedSeries resized(std::size_t order) const {
    TruncatedSeries out(order, zero_);
    for (std::size_t n = 1; n <= std::min(order, this->order()); ++n) out.coeffs_[n - 1] = coeffs_[n - 1];
    return out;
  }

 private:
  void check_index(std::size_t n) const {
    if (n == 0 || n > coeffs_.size())
      fail(ErrorKind::InvalidArgument, "series index " + std::to_string(n) + " outside 1.." +
                                           std::to_string(coeffs_.size()));
  }
  void same_order(const TruncatedSeries& o) const {
    if (o.order() != order()) fail(ErrorKind::InvalidArgument, "series orders differ");
  }

  std::vector<C> coeffs_;
  C zero_;
};

using ScalarSeries = TruncatedSeries<cplx>;

template <class C>
TruncatedSeries<C> formal_q_borel(const TruncatedSeries<C>& u, const QParams& params) {
  return u.scaled_by_index([&](std::size_t n) {
    return cplx(1.0 / q_pow(params.q(), borel_exponent(static_cast<std::int64_t>(n), params.k())));
  });
}

template <class C>
TruncatedSeries<C> formal_q_laplace(const TruncatedSeries<C>& w, const QParams& params) {
  return w.scaled_by_index([&](std::size_t n) {
    return cplx(q_pow(params.q(), borel_exponent(static_cast<std::int64_t>(n), params.k())));
  });
}

/// t^sigma * U(q^j t) truncated at `target_order`: a_n q^{j n} lands on power n + sigma.
template <class C>
TruncatedSeries<C> apply_t_sigma(const TruncatedSeries<C>& u, std::size_t sigma, const Rational& j,
                                 const QParams& params, std::size_t target_order) {
  TruncatedSeries<C> out(target_order, u.zero());
  for (std::size_t n = 1; n <= u.order() && n + sigma <= target_order; ++n)
    out.coeff(n + sigma) =
        u.coeff(n) * cplx(q_pow(params.q(), j * Rational(static_cast<std::int64_t>(n))));
  return out;
}

/// U(T^p) truncated at `target_order`.
template <class C>
TruncatedSeries<C> mahler(const TruncatedSeries<C>& u, std::size_t p, std::size_t target_order) {
  if (p < 1) fail(ErrorKind::InvalidArgument, "mahler power must be >= 1");
  TruncatedSeries<C> out(target_order, u.zero());
  for (std::size_t n = 1; n <= u.order() && p * n <= target_order; ++n) out.coeff(p * n) = u.coeff(n);
  return out;
}

/// Coefficientwise q^{n(n-1)/(2k)} / q^{pn(pn-1)/(2k)}; the argument is left as is.
template <class C>
TruncatedSeries<C> formal_deceleration(const TruncatedSeries<C>& f, std::size_t p, const QParams& params) {
  if (p < 2) fail(ErrorKind::InvalidArgument, "deceleration needs p >= 2");
  return f.scaled_by_index([&](std::size_t n) {
    return cplx(q_pow(params.q(), deceleration_exponent(static_cast<std::int64_t>(n),
                                                        static_cast<std::int64_t>(p), params.k())));
  });
}

/// Exponents of q carried by the coefficient of xi^{n+sigma} on both sides of
/// B(T^sigma U(q^j T)) = xi^sigma q^{-sigma(sigma-1)/(2k)} (B U)(q^{j - sigma/k} xi).
struct CommutationExponents {
  Rational lhs;
  Rational rhs;
};

inline CommutationExponents commutation_exponents(std::int64_t n, std::int64_t sigma, const Rational& j,
                                                  std::int64_t k) {
  CommutationExponents e;
  e.lhs = j * Rational(n) - borel_exponent(n + sigma, k);
  e.rhs = -borel_exponent(n, k) + (j - Rational(sigma, k)) * Rational(n) - borel_exponent(sigma, k);
  return e;
}

struct CheckResult {
  bool ok = true;
  double max_error = 0.0;
  /// coefficients in the normal double range that entered max_error
  std::size_t compared = 0;
};

/// Evaluates both sides of the Borel/q-difference commutation rule on a scalar
/// series; relative discrepancy per coefficient.
CheckResult borel_commutation_check(const ScalarSeries& u, std::size_t sigma, const Rational& j,
                                    const QParams& params);

/// B(U(T^p)) against D_p(B U)(xi^p) on a scalar series.
CheckResult mahler_deceleration_check(const ScalarSeries& u, std::size_t p, const QParams& params);

/// Evaluates a scalar series at a complex point (Horner).
cplx evaluate(const ScalarSeries& s, cplx x);

}  // namespace qsum
