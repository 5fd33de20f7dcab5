#pragma once

#include <cstddef>
#include <functional>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "qsum/fourier.hpp"
#include "qsum/geometry.hpp"
#include "qsum/qcore.hpp"
#include "qsum/solver.hpp"

namespace qsum {

/// Vector-valued trapezoid integral with its last node-doubling difference.
struct Integration {
  std::vector<cplx> value;
  /// finest level minus the level before it.
  std::vector<cplx> difference;
  double error = 0.0;
  std::size_t nodes = 0;
  /// the same rule applied to |integrand|, componentwise
  std::vector<double> magnitude;
};

using LineIntegrand = std::function<std::vector<cplx>(double)>;

struct LineRule {
  double a = -1.0;
  double b = 1.0;
  /// intervals at the first level
  std::size_t intervals = 64;
  std::size_t max_doublings = 8;
  double rel_tol = 1e-10;
  /// Window growth per extension step; zero disables extension.
  double extend = 0.0;
  double max_width = 400.0;
  /// Number of doublings always performed, converged or not.
  std::size_t min_doublings = 1;
};

/// Trapezoid rule with node doubling. The window is widened while the
/// integrand at either end is not negligible against its peak.
Integration integrate_line(const LineIntegrand& f, const LineRule& rule);

/// Trapezoid in s = log|u| along arg u = theta_d.
struct RayQuadrature {
  double theta_d = 0.0;
  double s_min = -8.0;
  double s_max = 8.0;
  std::size_t nodes = 64;
  std::size_t max_doublings = 8;
  std::size_t min_doublings = 1;
  double certified_radius = std::numeric_limits<double>::infinity();

  /// Window around log|T| holding all but eps_abs of the order-k kernel mass,
  /// with base step width_fraction * sqrt(log q / k).
  static RayQuadrature around(double T_abs, double theta_d, const QParams& params, double width_fraction = 0.25);
};

/// The circle |x| = radius on the covering, truncated to [theta_min, theta_max].
struct CircleContour {
  double radius = 0.5;
  double theta_min = -8.0;
  double theta_max = 8.0;
  std::size_t nodes = 128;
  std::size_t max_doublings = 8;

  /// Window around theta holding all but eps_abs of a kernel of the given order.
  static CircleContour around(double radius, double theta, double order, double log_q, double width_fraction = 0.25);
};

struct QuadResult {
  cplx value;
  double error = 0.0;
  std::size_t nodes = 0;
};

/// 1/Theta of the given order: exp(order log^2 z / (2 log q) - log z / 2).
cplx inverse_theta(const CoveringPoint& z, double order, double log_q);

/// pi_{q,k} int Theta_k(T/u) f(u) du/u along the ray of quad.
QuadResult q_laplace(const std::function<cplx(cplx)>& f, const CoveringPoint& T, const RayQuadrature& quad,
                     const QParams& params);
Integration q_laplace_vector(const std::function<std::vector<cplx>(cplx)>& f, const CoveringPoint& T,
                             const RayQuadrature& quad, const QParams& params);

/// Analytic q-Borel transform over the circle x = radius e^{it}, t increasing.
QuadResult q_borel_analytic(const std::function<cplx(const CoveringPoint&)>& phi, const CoveringPoint& xi,
                            const CircleContour& contour, const QParams& params);

/// Orders of the deceleration kernel for a Mahler power p.
struct DecelerationOrders {
  double kernel;  ///< k / (p^2 - 1)
  double shift;   ///< (p^2 - p) / (2k)
};
DecelerationOrders deceleration_orders(int p, int k);

/// D_p(f)(h) by the contour integral with the argument shift x -> x q^{-shift}.
/// DomainViolation when the shifted circle leaves the disc where f is certified.
QuadResult deceleration_integral(const std::function<cplx(cplx)>& f, int p, const CoveringPoint& h,
                                 const CircleContour& contour, const QParams& params,
                                 double disc_radius = std::numeric_limits<double>::infinity());

/// D_p of a vector-valued map, sampled once on a full turn of the shifted
/// circle and reused for every h. For |h| up to the radius the contour
/// integral is evaluated term by term on the Taylor coefficients read off the
/// samples; the trapezoid sum there would lose every digit to cancellation.
class DecelerationContour {
 public:
  DecelerationContour(const std::function<std::vector<cplx>(cplx)>& g, int p, double radius,
                      std::size_t nodes_per_turn, const QParams& params);

  /// Value at h and the difference against the rule on every other node.
  Integration operator()(const CoveringPoint& h) const;

  double radius() const noexcept { return radius_; }

 private:
  DecelerationOrders orders_;
  double radius_;
  double log_q_;
  double half_width_;
  std::vector<std::vector<cplx>> samples_;
  /// Taylor coefficients times the deceleration factors, n = 0..K/2-1.
  std::vector<std::vector<cplx>> decelerated_coeffs_;
};

using SectorFunction = std::function<FourierFn(cplx)>;

struct FieldOptions {
  /// The truncated series is used on |tau| < series_fraction * R.
  double series_fraction = 0.25;
  std::size_t contour_nodes = 256;
};

/// omega(tau, .) on D(0, R) and on the sector, continued beyond the series
/// disc by the right-hand side of the continued auxiliary equation.
class BorelField {
 public:
  BorelField(const ProblemSpec& spec, const SectorConfig& config, const FourierSeries& omega,
             FieldOptions options = {});
  // The deceleration contours sample this object through a captured pointer.
  BorelField(const BorelField&) = delete;
  BorelField& operator=(const BorelField&) = delete;

  const FourierFn& operator()(cplx tau) const;
  FourierFn series_value(cplx tau) const;
  /// q^{-l0(l0-1)/2k} tau^{l0} omega(q^{l1 - l0/k} tau, .)
  FourierFn shifted(std::size_t term, cplx tau) const;
  /// D_{l2} of the shifted map at h over the circle |x| = R/2.
  const Integration& decelerated(std::size_t term, const CoveringPoint& h) const;
  /// Right-hand side of the continued equation at tau, using this field for
  /// every omega it needs.
  FourierFn rhs(cplx tau) const;

  double series_radius() const noexcept { return series_radius_; }
  double contour_radius() const noexcept { return config_.R / 2.0; }
  const ProblemSpec& spec() const noexcept { return spec_; }
  const SectorConfig& config() const noexcept { return config_; }
  const FourierSeries& series() const noexcept { return omega_; }
  SectorFunction as_function() const;

 private:
  struct KeyHash {
    std::size_t operator()(const std::pair<double, double>& k) const noexcept;
  };
  using Key = std::pair<double, double>;

  ProblemSpec spec_;
  SectorConfig config_;
  FourierSeries omega_;
  FieldOptions options_;
  double series_radius_;
  std::vector<DecelerationContour> contours_;
  std::vector<std::size_t> contour_of_term_;
  mutable std::unordered_map<Key, FourierFn, KeyHash> memo_;
  mutable std::vector<std::unordered_map<Key, Integration, KeyHash>> dec_memo_;
};

/// Constants shared by the G_q-sum operators.
struct SumSetup {
  QParams params{2.0, 1};
  double direction = 0.0;
  double alpha_tilde = 1.0;
  int d_D = 1;
  double beta_prime = 0.5;
  double certified_radius = std::numeric_limits<double>::infinity();
  double ray_width_fraction = 0.25;
  std::size_t ray_min_doublings = 1;
  double contour_radius = 0.25;
  std::size_t contour_nodes = 256;

  static SumSetup from(const ProblemSpec& spec, const SectorConfig& config);
  RayQuadrature ray(const CoveringPoint& t) const;
};

/// A transformed value with the error estimates behind it.
struct SumValue {
  cplx value;
  /// ray node doubling, propagated through the inverse Fourier transform
  double ray_error = 0.0;
  /// m-grid against its coarsening by 2
  double grid_error = 0.0;
  /// deceleration contour against every other node
  double contour_error = 0.0;
  /// machine epsilon times the integral of the absolute integrand; not part of the budget
  double rounding = 0.0;
  double budget() const noexcept { return ray_error + grid_error + contour_error; }
};

/// Inverse Fourier value at z with the m-step error estimate.
SumValue inverse_fourier_with_error(const FourierFn& f, cplx z, double beta_prime);

/// (pi_{q,k}/sqrt(2 pi)) int int Theta_k(t/u) omega(u,m) e^{imz} du/u dm.
SumValue gq_sum(const SectorFunction& omega, const CoveringPoint& t, cplx z, const SumSetup& setup);

/// As gq_sum with 1/exp_q(alpha_tilde u^{d_D}) inserted. ZeroDivision near a zero of exp_q.
SumValue expq_inverse_op(const SectorFunction& omega, const CoveringPoint& t, cplx z, const SumSetup& setup);

/// The kernel operator of a Mahler term with l2 >= 2: the Laplace-Fourier
/// integral of D_{l2}(x -> x^{l0} omega(q^{l1 - l0/k} x))(u^{l2}) / exp_q(alpha_tilde u^{d_D}).
SumValue g_ellk_op(const SectorFunction& omega, const MahlerTerm& term, const CoveringPoint& t, cplx z,
                   const SumSetup& setup);

struct Theorem2Term {
  std::string name;
  SumValue value;
};

struct Theorem2Row {
  CoveringPoint t{1.0, 0.0};
  cplx z;
  SumValue lhs;
  std::vector<Theorem2Term> terms;
  /// LHS - RHS
  cplx defect;
  double residual = 0.0;
  /// sum of every error estimate on both sides
  double budget = 0.0;
  /// sum of the rounding estimates on both sides
  double floor = 0.0;
};

/// |LHS - RHS| of the transformed equation for the G_q-sum at each point.
std::vector<Theorem2Row> theorem2_residual(const BorelField& field, const std::vector<std::pair<CoveringPoint, cplx>>& points,
                                           const SumSetup& setup);

struct SectorResidualRow {
  cplx tau;
  /// enorm of omega(tau) minus its value with the inner omega taken one
  /// continuation level deeper
  double self_consistency = 0.0;
  /// max over the m samples of the weighted omega against the growth profile
  double growth_ratio = 0.0;
};

SectorResidualRow eaux2_sector_residual(const BorelField& field, const BorelField& deeper, cplx tau,
                                        const std::vector<std::size_t>& m_indices, double alpha = 0.0);

/// Least squares of log|err| against (1, N, N^2).
struct GevreyFit {
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;
  /// log q / (2k)
  double target = 0.0;
  double relative_error = 0.0;
};
GevreyFit fit_gevrey(const std::vector<int>& orders, const std::vector<double>& log_errors, const QParams& params);

/// int e^{-x^2 - a x} dx by the trapezoid rule.
QuadResult gaussian_integral(double a, double rel_tol = 1e-13);

}  // namespace qsum
