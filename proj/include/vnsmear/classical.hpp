#ifndef VNSMEAR_CLASSICAL_HPP
#define VNSMEAR_CLASSICAL_HPP

// Coarse-graining estimates. This is the only place SI units appear; the
// rest of the library works with hbar = 1.

#include <vnsmear/qstate.hpp>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace vnsmear {

namespace si {
/// Reduced Planck constant, J s.
inline constexpr double kHbar = 1.054571817e-34;
/// Proton rest mass, kg.
inline constexpr double kProtonMass = 1.67262192369e-27;
}  // namespace si

/// Cell size sigma (m) and ratio N = sigma / s.
struct CoarseGraining {
  double sigma;
  double ratio;
  double hbar = si::kHbar;

  CoarseGraining(double sigma_, double ratio_, double hbar_ = si::kHbar) : sigma(sigma_), ratio(ratio_), hbar(hbar_) {
    if (!(sigma > 0) || !(ratio > 0) || !(hbar > 0)) {
      throw std::invalid_argument("CoarseGraining: sigma, N and hbar must be positive");
    }
  }
};

/// Probability in [center - width/2, center + width/2] for a density sampled
/// on the grid; the density is taken piecewise linear between grid points so
/// cell edges need not coincide with grid points.
template <typename Real>
Real cell_mass(const BasicGrid<Real>& g, const RealVector<Real>& density, Real center, Real width) {
  if (density.size() != g.size()) throw std::invalid_argument("cell_mass: density length does not match grid");
  if (!(width > 0)) throw std::invalid_argument("cell_mass: width must be positive");
  const Real lo = center - width / 2;
  const Real hi = center + width / 2;
  const Real slack = Real(1e-12) * g.span();
  if (lo < g.x_min() - slack || hi > g.x_max() + slack) {
    throw std::invalid_argument("cell_mass: cell extends outside the grid");
  }
  const Real a = std::max(lo, g.x_min());
  const Real b = std::min(hi, g.x_max());
  const Real dx = g.spacing();

  auto value_at = [&](Real x) {
    Index j = std::clamp<Index>(static_cast<Index>(std::floor((x - g.x_min()) / dx)), 0, g.size() - 2);
    const Real t = (x - g.point(j)) / dx;
    return (1 - t) * density[j] + t * density[j + 1];
  };

  Real mass = 0;
  for (Index j = 0; j + 1 < g.size(); ++j) {
    const Real left = std::max(a, g.point(j));
    const Real right = std::min(b, g.point(j + 1));
    if (right <= left) continue;
    mass += (right - left) * (value_at(left) + value_at(right)) / 2;
  }
  return mass;
}

template <typename Real>
Real cell_mass(const BasicWaveFunction<Real>& psi, Real center, Real width) {
  return cell_mass(psi.grid(), RealVector<Real>(psi.amp().cwiseAbs2()), center, width);
}

template <typename Real>
Real cell_mass(const BasicDensityMatrix<Real>& rho, Real center, Real width) {
  if (rho.basis() != Basis::Position) throw std::invalid_argument("cell_mass: expected a position-basis matrix");
  return cell_mass(rho.grid(), RealVector<Real>(rho.mat().diagonal().real()), center, width);
}

/// Momentum binning scale hbar sqrt(4 + N^2) / sigma, in kg m/s for SI input.
inline double momentum_bin_scale(const CoarseGraining& cg) {
  return cg.hbar * std::sqrt(4 + cg.ratio * cg.ratio) / cg.sigma;
}

/// Binning scale (hbar = 1) divided by the momentum-diagonal width of the
/// smeared Gaussian. Identically 2.
template <typename Real>
Real dimensionless_bin_consistency(Real s, Real sigma) {
  if (!(s > 0) || !(sigma > 0)) throw std::invalid_argument("dimensionless_bin_consistency: s, sigma must be positive");
  const Real ratio = sigma / s;
  const Real scale = std::sqrt(4 + ratio * ratio) / sigma;
  const Real p_diag = std::sqrt(4 * s * s + sigma * sigma) / (2 * s * sigma);
  return scale / p_diag;
}

/// How many protons moving at `velocity` (m/s) carry the given momentum.
inline double proton_equivalent(double momentum, double velocity = 1e-6) {
  return momentum / (si::kProtonMass * velocity);
}

}  // namespace vnsmear

#endif  // VNSMEAR_CLASSICAL_HPP
