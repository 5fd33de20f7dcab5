#include "qsum/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qsum/errors.hpp"

namespace qsum {

MGrid::MGrid(std::size_t half_, double step_) : half(half_), step(step_) {
  if (!(step_ > 0.0)) fail(ErrorKind::InvalidArgument, "grid step must be positive");
}

MGrid MGrid::defaults(double beta) {
  if (!(beta > 0.0)) fail(ErrorKind::InvalidArgument, "beta must be positive");
  const double M = 40.0 / beta;
  return MGrid(1000, M / 1000.0);
}

MGrid MGrid::covering(double M, double step) {
  if (!(M > 0.0) || !(step > 0.0)) fail(ErrorKind::InvalidArgument, "grid extent and step must be positive");
  return MGrid(static_cast<std::size_t>(std::ceil(M / step - 1e-9)), step);
}

MGrid MGrid::coarsened() const {
  if (half % 2 != 0) fail(ErrorKind::GridMismatch, "grid half-size is odd; cannot coarsen");
  return MGrid(half / 2, 2.0 * step);
}

FourierFn::FourierFn(MGrid grid, std::vector<cplx> values, double beta, double mu)
    : grid_(grid), values_(std::move(values)), beta_(beta), mu_(mu) {
  if (values_.size() != grid_.size()) fail(ErrorKind::GridMismatch, "value count does not match grid");
  if (!(beta > 0.0)) fail(ErrorKind::InvalidArgument, "beta must be positive");
  if (!(mu > 1.0)) fail(ErrorKind::InvalidArgument, "mu must exceed 1");
}

FourierFn FourierFn::zeros(const MGrid& grid, double beta, double mu) {
  return FourierFn(grid, std::vector<cplx>(grid.size()), beta, mu);
}

FourierFn FourierFn::sample(const MGrid& grid, const std::function<cplx(double)>& f, double beta, double mu) {
  std::vector<cplx> v(grid.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.m(i));
  return FourierFn(grid, std::move(v), beta, mu);
}

void require_same_grid(const FourierFn& a, const FourierFn& b) {
  if (!(a.grid() == b.grid()))
    fail(ErrorKind::GridMismatch, "grids differ (" + std::to_string(a.size()) + " vs " +
                                      std::to_string(b.size()) + " points)");
}

FourierFn& FourierFn::operator+=(const FourierFn& o) {
  require_same_grid(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
  return *this;
}

FourierFn& FourierFn::operator-=(const FourierFn& o) {
  require_same_grid(*this, o);
  for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
  return *this;
}

FourierFn FourierFn::times(const FourierFn& o) const {
  require_same_grid(*this, o);
  FourierFn out = *this;
  for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] *= o.values_[i];
  return out;
}

FourierFn FourierFn::times(const std::function<cplx(double)>& g) const {
  FourierFn out = *this;
  for (std::size_t i = 0; i < values_.size(); ++i) out.values_[i] *= g(grid_.m(i));
  return out;
}

FourierFn FourierFn::restricted(const MGrid& coarse) const {
  const double ratio = coarse.step / grid_.step;
  const auto stride = static_cast<std::size_t>(std::llround(ratio));
  if (stride == 0 || std::abs(ratio - static_cast<double>(stride)) > 1e-9 || coarse.half * stride > grid_.half)
    fail(ErrorKind::GridMismatch, "coarse grid is not a sub-grid");
  std::vector<cplx> v(coarse.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = values_[grid_.half + (i - coarse.half) * stride];
  return FourierFn(coarse, std::move(v), beta_, mu_);
}

double enorm(const FourierFn& f) {
  double s = 0.0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    const double am = std::abs(f.grid().m(i));
    s = std::max(s, std::pow(1.0 + am, f.mu()) * std::exp(f.beta() * am) * std::abs(f[i]));
  }
  return s;
}

FourierFn convolve(const FourierFn& h, const FourierFn& g) {
  require_same_grid(h, g);
  const MGrid& grid = h.grid();
  const auto n = static_cast<std::ptrdiff_t>(grid.size());
  const auto c = static_cast<std::ptrdiff_t>(grid.half);
  std::vector<cplx> out(grid.size());
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    // h(m_i - m_j) sits at index i - j + c; only j in [i + c - n + 1, i + c] contributes.
    const std::ptrdiff_t j0 = std::max<std::ptrdiff_t>(0, i + c - n + 1);
    const std::ptrdiff_t j1 = std::min<std::ptrdiff_t>(n - 1, i + c);
    cplx acc = 0.0;
    for (std::ptrdiff_t j = j0; j <= j1; ++j) {
      const double w = (j == 0 || j == n - 1) ? 0.5 : 1.0;
      acc += w * h[static_cast<std::size_t>(i - j + c)] * g[static_cast<std::size_t>(j)];
    }
    out[static_cast<std::size_t>(i)] = acc * grid.step;
  }
  return FourierFn(grid, std::move(out), std::min(h.beta(), g.beta()), std::min(h.mu(), g.mu()));
}

cplx inverse_fourier_eval(const FourierFn& f, cplx z, double beta_prime) {
  const double im = std::abs(z.imag());
  if (im >= f.beta() || im > beta_prime)
    fail(ErrorKind::StripViolation, "|Im z| = " + std::to_string(im) + " outside the declared strip");
  const MGrid& grid = f.grid();
  const std::size_t n = grid.size();
  cplx acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = (i == 0 || i == n - 1) ? 0.5 : 1.0;
    acc += w * f[i] * std::exp(cplx(0.0, 1.0) * grid.m(i) * z);
  }
  return acc * grid.step / std::sqrt(2.0 * kPi);
}

double series_norm_1R(const FourierSeries& w, double R) {
  if (!(R > 0.0)) fail(ErrorKind::InvalidArgument, "R must be positive");
  double s = 0.0;
  double rp = 1.0;
  for (std::size_t p = 1; p <= w.order(); ++p) {
    rp *= R;
    s += enorm(w.coeff(p)) * rp;
  }
  return s;
}

double series_norm_sector(const std::vector<SectorSample>& samples, double alpha, const QParams& params) {
  double s = 0.0;
  for (const auto& smp : samples) {
    const double lt = std::log(smp.tau_abs);
    const double weight =
        std::exp(-static_cast<double>(params.k()) * lt * lt / (2.0 * params.log_q()) - alpha * lt) / smp.tau_abs;
    s = std::max(s, weight * enorm(smp.values));
  }
  return s;
}

double convolution_weight_bound(double mu, double alpha, double deg, const MGrid& grid) {
  const std::size_t n = grid.size();
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double m = grid.m(i);
    double acc = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double m1 = grid.m(j);
      const double w = (j == 0 || j == n - 1) ? 0.5 : 1.0;
      acc += w / (std::pow(1.0 + std::abs(m - m1), mu) * std::pow(1.0 + std::abs(m1), mu - deg));
    }
    best = std::max(best, std::pow(1.0 + std::abs(m), mu - alpha) * acc * grid.step);
  }
  return best;
}

}  // namespace qsum
