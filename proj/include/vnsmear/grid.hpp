#ifndef VNSMEAR_GRID_HPP
#define VNSMEAR_GRID_HPP

// Uniform position lattice and its discrete-Fourier-conjugate momentum
// lattice. Units are hbar = 1 throughout the core.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace vnsmear {

using Index = Eigen::Index;

template <typename Real>
using RealVector = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

/// Uniform grid x_j = x_min + j*dx on [x_min, x_max], j = 0..n-1.
template <typename Real>
class BasicGrid {
 public:
  BasicGrid(Real x_min, Real x_max, Index n) : x_min_(x_min), x_max_(x_max), n_(n) {
    if (!std::isfinite(x_min) || !std::isfinite(x_max)) {
      throw std::invalid_argument("grid bounds must be finite");
    }
    if (n < 2) {
      throw std::invalid_argument("grid needs at least 2 points, got " + std::to_string(n));
    }
    if (!(x_max > x_min)) {
      throw std::invalid_argument("grid requires x_max > x_min");
    }
    dx_ = (x_max - x_min) / static_cast<Real>(n - 1);
  }

  Real x_min() const { return x_min_; }
  Real x_max() const { return x_max_; }
  Index size() const { return n_; }
  Real spacing() const { return dx_; }
  Real span() const { return x_max_ - x_min_; }

  // The upper half is measured back from x_max so that a grid with
  // x_min == -x_max reflects onto itself exactly.
  Real point(Index j) const {
    if (2 * j == n_ - 1) return (x_min_ + x_max_) / 2;
    if (2 * j > n_ - 1) {
      return x_max_ - static_cast<Real>(n_ - 1 - j) * dx_;
    }
    return x_min_ + static_cast<Real>(j) * dx_;
  }

  RealVector<Real> points() const {
    RealVector<Real> x(n_);
    for (Index j = 0; j < n_; ++j) x[j] = point(j);
    return x;
  }

  /// Trapezoidal weights: dx in the interior, dx/2 at both ends.
  RealVector<Real> weights() const {
    RealVector<Real> w = RealVector<Real>::Constant(n_, dx_);
    w[0] = dx_ / 2;
    w[n_ - 1] = dx_ / 2;
    return w;
  }

  bool is_symmetric(Real rel_tol = Real(1e-12)) const {
    return std::abs(x_min_ + x_max_) <= rel_tol * std::max(std::abs(x_min_), std::abs(x_max_));
  }

  bool operator==(const BasicGrid&) const = default;

 private:
  Real x_min_;
  Real x_max_;
  Index n_;
  Real dx_{};
};

/// Momentum lattice conjugate to a BasicGrid:
/// p_j = -pi/dx + j * 2pi/(n dx), j = 0..n-1.
///
/// The lattice is periodic (p and p + n*dp alias), so its quadrature weights
/// are uniform dp. For every j in 1..n-1 the reflected point -p_j is p_{n-j};
/// p_0 has no partner.
template <typename Real>
class BasicMomentumGrid {
 public:
  explicit BasicMomentumGrid(const BasicGrid<Real>& g)
      : n_(g.size()), dp_(2 * std::numbers::pi_v<Real> / (static_cast<Real>(g.size()) * g.spacing())) {}

  Index size() const { return n_; }
  Real spacing() const { return dp_; }
  Real span() const { return static_cast<Real>(n_) * dp_; }
  Real p_min() const { return point(0); }

  // (j - n/2) dp equals -pi/dx + j dp and keeps p_j == -p_{n-j} exact.
  Real point(Index j) const { return (static_cast<Real>(2 * j - n_) / 2) * dp_; }

  /// Index of -p_j, or -1 for j == 0.
  Index mirror(Index j) const { return j == 0 ? Index{-1} : n_ - j; }

  RealVector<Real> points() const {
    RealVector<Real> p(n_);
    for (Index j = 0; j < n_; ++j) p[j] = point(j);
    return p;
  }

  RealVector<Real> weights() const { return RealVector<Real>::Constant(n_, dp_); }

 private:
  Index n_;
  Real dp_;
};

using Grid = BasicGrid<double>;
using MomentumGrid = BasicMomentumGrid<double>;

template <typename Real>
BasicGrid<Real> make_grid(Real x_min, Real x_max, Index n) {
  return BasicGrid<Real>(x_min, x_max, n);
}

template <typename Real>
BasicMomentumGrid<Real> conjugate_grid(const BasicGrid<Real>& g) {
  return BasicMomentumGrid<Real>(g);
}

/// Half-width rule of thumb for Gaussian studies: 8 * max(s, sigma).
template <typename Real>
Real recommended_half_width(Real s, Real sigma) {
  return 8 * std::max(s, sigma);
}

}  // namespace vnsmear

#endif  // VNSMEAR_GRID_HPP
