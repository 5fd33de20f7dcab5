#pragma once

#include <cstddef>
#include <functional>
#include <vector>

#include "qsum/qcore.hpp"
#include "qsum/series.hpp"

namespace qsum {

/// Uniform grid m_i = (i - half) * step, i = 0..2*half, symmetric about 0.
/// The odd point count keeps differences m_i - m_j on the grid.
struct MGrid {
  std::size_t half = 0;
  double step = 0.0;

  MGrid() = default;
  MGrid(std::size_t half, double step);

  /// M = 40/beta and at least 2001 points.
  static MGrid defaults(double beta);
  /// Grid covering [-M, M] with the given step (M rounded up to a multiple of step).
  static MGrid covering(double M, double step);

  std::size_t size() const noexcept { return 2 * half + 1; }
  double extent() const noexcept { return static_cast<double>(half) * step; }
  double m(std::size_t i) const noexcept {
    return (static_cast<double>(i) - static_cast<double>(half)) * step;
  }
  /// Every second point of this grid, i.e. the grid with doubled step.
  MGrid coarsened() const;

  friend bool operator==(const MGrid& a, const MGrid& b) { return a.half == b.half && a.step == b.step; }
};

/// Samples of m -> f(m) on an MGrid, with the decay parameters of the weighted
/// sup-norm (1+|m|)^mu e^{beta|m|} |f(m)|.
class FourierFn {
 public:
  FourierFn() = default;
  FourierFn(MGrid grid, std::vector<cplx> values, double beta, double mu);

  static FourierFn zeros(const MGrid& grid, double beta, double mu);
  static FourierFn sample(const MGrid& grid, const std::function<cplx(double)>& f, double beta, double mu);

  const MGrid& grid() const noexcept { return grid_; }
  const std::vector<cplx>& values() const noexcept { return values_; }
  std::vector<cplx>& values() noexcept { return values_; }
  double beta() const noexcept { return beta_; }
  double mu() const noexcept { return mu_; }
  std::size_t size() const noexcept { return values_.size(); }
  cplx operator[](std::size_t i) const { return values_[i]; }
  cplx& operator[](std::size_t i) { return values_[i]; }

  FourierFn& operator+=(const FourierFn& o);
  FourierFn& operator-=(const FourierFn& o);
  friend FourierFn operator+(FourierFn a, const FourierFn& b) { return a += b; }
  friend FourierFn operator-(FourierFn a, const FourierFn& b) { return a -= b; }
  friend FourierFn operator*(FourierFn a, cplx s) {
    for (auto& v : a.values_) v *= s;
    return a;
  }
  friend FourierFn operator*(cplx s, FourierFn a) { return std::move(a) * s; }

  /// Pointwise product on a shared grid.
  FourierFn times(const FourierFn& o) const;
  /// Pointwise product with g(m).
  FourierFn times(const std::function<cplx(double)>& g) const;
  /// Restriction to a coarser grid that shares its points.
  FourierFn restricted(const MGrid& coarse) const;

 private:
  MGrid grid_;
  std::vector<cplx> values_;
  double beta_ = 1.0;
  double mu_ = 2.0;
};

inline FourierFn zero_like(const FourierFn& f) { return FourierFn::zeros(f.grid(), f.beta(), f.mu()); }

using FourierSeries = TruncatedSeries<FourierFn>;

void require_same_grid(const FourierFn& a, const FourierFn& b);

/// sup over the grid of (1+|m|)^mu e^{beta|m|} |f(m)|.
double enorm(const FourierFn& f);

/// Trapezoid approximation of (h * g)(m) = int h(m - m1) g(m1) dm1, zero
/// outside the grid. GridMismatch on different grids.
FourierFn convolve(const FourierFn& h, const FourierFn& g);

/// (1/sqrt(2 pi)) int f(m) e^{i m z} dm by the trapezoid rule.
/// StripViolation when |Im z| >= beta or |Im z| > beta_prime.
cplx inverse_fourier_eval(const FourierFn& f, cplx z, double beta_prime);

/// sum_p enorm(W_p) R^p.
double series_norm_1R(const FourierSeries& w, double R);

/// One sample of a Borel-plane function on the sector: |tau| and the m-profile.
struct SectorSample {
  double tau_abs = 1.0;
  FourierFn values;
};

/// Discrete sup of (1+|m|)^mu e^{beta|m|} |tau|^{-1}
/// exp(-k log^2|tau| / (2 log q) - alpha log|tau|) |omega(tau, m)|.
double series_norm_sector(const std::vector<SectorSample>& samples, double alpha, const QParams& params);

/// sup_m (1+|m|)^{mu-alpha} int dm1 / ((1+|m-m1|)^mu (1+|m1|)^{mu-deg}), by the
/// trapezoid rule on the grid.
double convolution_weight_bound(double mu, double alpha, double deg, const MGrid& grid);

}  // namespace qsum
