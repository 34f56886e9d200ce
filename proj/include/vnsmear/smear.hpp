#ifndef VNSMEAR_SMEAR_HPP
#define VNSMEAR_SMEAR_HPP

// Finite-accuracy (smeared) von Neumann position measurement.
//
// Tracing out an apparatus whose read-off states overlap as
//   <alpha_xbar | alpha_x> = k(x, xbar) ∝ exp(-(x - xbar)^2 / 2 sigma^2)
// multiplies the system kernel elementwise:
//   rho(x, xbar) -> k(x, xbar) rho(x, xbar).
// sigma -> 0 recovers exact position decoherence; sigma -> inf is the identity.

#include <vnsmear/qstate.hpp>

#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

namespace vnsmear {

enum class Convention {
  /// k(x, x) = 1, so the trace is unchanged. Used for every physical diagnostic.
  TracePreserving,
  /// Overlap carries the printed 1/sqrt(2 pi sigma^2) prefactor; not trace preserving.
  PaperPrefactor,
};

inline const char* to_string(Convention c) {
  return c == Convention::TracePreserving ? "trace_preserving" : "paper_prefactor";
}

/// Normalized Gaussian smearing function g(x, y, sigma). sigma = 0 stands for
/// the delta distribution: +inf on the diagonal, 0 elsewhere.
template <typename Real>
Real smearing_function(Real x, Real y, Real sigma) {
  if (!(sigma >= 0)) throw std::invalid_argument("smearing_function: sigma must be non-negative");
  if (sigma == 0) return x == y ? std::numeric_limits<Real>::infinity() : Real(0);
  const Real d = x - y;
  return std::exp(-d * d / (2 * sigma * sigma)) / std::sqrt(2 * std::numbers::pi_v<Real> * sigma * sigma);
}

template <typename Real>
struct BasicSmearKernel {
  Real sigma;
  Convention convention = Convention::TracePreserving;

  BasicSmearKernel(Real sigma_, Convention conv = Convention::TracePreserving) : sigma(sigma_), convention(conv) {
    if (!(sigma > 0)) throw std::invalid_argument("SmearKernel: sigma must be positive (may be +inf)");
    if (std::isinf(sigma) && conv == Convention::PaperPrefactor) {
      throw std::invalid_argument("SmearKernel: the printed prefactor vanishes for infinite sigma");
    }
  }

  Real operator()(Real x, Real xbar) const {
    if (std::isinf(sigma)) return Real(1);
    const Real d = x - xbar;
    const Real k = std::exp(-d * d / (2 * sigma * sigma));
    if (convention == Convention::PaperPrefactor) {
      return k / std::sqrt(2 * std::numbers::pi_v<Real> * sigma * sigma);
    }
    return k;
  }
};

using SmearKernel = BasicSmearKernel<double>;

/// Warning text when sigma is below twice the grid spacing. The result of the
/// channel is still meaningful there (it approaches exact decoherence).
template <typename Real>
std::optional<std::string> resolution_warning(const BasicGrid<Real>& g, const BasicSmearKernel<Real>& kern) {
  if (kern.sigma < 2 * g.spacing()) {
    return "sigma = " + std::to_string(double(kern.sigma)) + " is below 2*dx = " +
           std::to_string(double(2 * g.spacing())) + "; the channel is not resolved by the grid";
  }
  return std::nullopt;
}

template <typename Real>
BasicDensityMatrix<Real> apply_smeared_channel(const BasicDensityMatrix<Real>& rho, const BasicSmearKernel<Real>& kern) {
  if (rho.basis() != Basis::Position) {
    throw std::invalid_argument("apply_smeared_channel: expected a position-basis density matrix");
  }
  const RealVector<Real> x = rho.grid().points();
  const Index n = x.size();
  ComplexMatrix<Real> out = rho.mat();
  for (Index k = 0; k < n; ++k)
    for (Index j = 0; j < n; ++j) out(j, k) *= kern(x[j], x[k]);
  return BasicDensityMatrix<Real>(Basis::Position, rho.grid(), std::move(out));
}

/// Two Gaussian stages compose into one: 1/sigma_eff^2 = 1/sigma_1^2 + 1/sigma_2^2.
template <typename Real>
Real composed_sigma(Real sigma1, Real sigma2) {
  if (std::isinf(sigma1)) return sigma2;
  if (std::isinf(sigma2)) return sigma1;
  return sigma1 * sigma2 / std::hypot(sigma1, sigma2);
}

namespace detail {

template <typename Real>
void require_widths(Real s, Real sigma, const char* what) {
  if (!(s > 0) || !(sigma > 0) || !std::isfinite(s) || !std::isfinite(sigma)) {
    throw std::invalid_argument(std::string(what) + ": s and sigma must be positive and finite");
  }
}

template <typename Real>
BasicDensityMatrix<Real> unit_trace(Basis basis, const BasicGrid<Real>& g, ComplexMatrix<Real> m) {
  BasicDensityMatrix<Real> rho(basis, g, std::move(m));
  const Real tr = trace(rho);
  return BasicDensityMatrix<Real>(basis, g, rho.mat() / tr);
}

}  // namespace detail

/// Largest |after_jk| / |before_jk| over elements at least `min_offset` cells
/// off the diagonal. Elements where `before` is below 1e-12 of its maximum are
/// skipped.
template <typename Real>
Real offdiagonal_suppression(const BasicDensityMatrix<Real>& before, const BasicDensityMatrix<Real>& after,
                             Index min_offset) {
  if (before.size() != after.size()) throw std::invalid_argument("offdiagonal_suppression: size mismatch");
  const Real floor = Real(1e-12) * before.mat().cwiseAbs().maxCoeff();
  Real worst = 0;
  const Index n = before.size();
  for (Index k = 0; k < n; ++k) {
    for (Index j = 0; j < n; ++j) {
      if (std::abs(j - k) < min_offset) continue;
      const Real b = std::abs(before.mat()(j, k));
      if (b <= floor) continue;
      worst = std::max(worst, std::abs(after.mat()(j, k)) / b);
    }
  }
  return worst;
}

/// Largest relative spread max_a |rho(p_a, p_a - d) - mean_d| / |mean_d| along
/// the lines of constant p - pbar = d dp, for 0 <= d <= max_offset. Lines whose
/// mean is below 1e-3 of the d = 0 mean are ignored.
template <typename Real>
Real difference_line_variation(const BasicDensityMatrix<Real>& rho, Index max_offset) {
  const Index n = rho.size();
  if (max_offset < 0 || max_offset >= n) throw std::invalid_argument("difference_line_variation: bad offset");
  Real worst = 0;
  Real reference = 0;
  for (Index d = 0; d <= max_offset; ++d) {
    std::complex<Real> mean = 0;
    for (Index a = d; a < n; ++a) mean += rho.mat()(a, a - d);
    mean /= static_cast<Real>(n - d);
    if (d == 0) reference = std::abs(mean);
    if (std::abs(mean) < Real(1e-3) * reference) continue;
    for (Index a = d; a < n; ++a) worst = std::max(worst, std::abs(rho.mat()(a, a - d) - mean) / std::abs(mean));
  }
  return worst;
}

/// Smeared Gaussian state in the position basis,
///   exp(-(x - xbar)^2 / 2 sigma^2 - (x^2 + xbar^2) / 4 s^2),
/// with prefactor 1/sqrt(4 pi^2 s^2 sigma^2) (PaperPrefactor) or scaled to
/// unit quadrature trace (TracePreserving).
template <typename Real>
BasicDensityMatrix<Real> gaussian_closed_form_x(const BasicGrid<Real>& g, Real s, Real sigma,
                                                Convention conv = Convention::TracePreserving) {
  detail::require_widths(s, sigma, "gaussian_closed_form_x");
  const RealVector<Real> x = g.points();
  const Index n = x.size();
  ComplexMatrix<Real> m(n, n);
  for (Index k = 0; k < n; ++k) {
    for (Index j = 0; j < n; ++j) {
      const Real d = x[j] - x[k];
      m(j, k) = std::exp(-d * d / (2 * sigma * sigma) - (x[j] * x[j] + x[k] * x[k]) / (4 * s * s));
    }
  }
  if (conv == Convention::TracePreserving) return detail::unit_trace(Basis::Position, g, std::move(m));
  const Real pre = 1 / std::sqrt(4 * std::numbers::pi_v<Real> * std::numbers::pi_v<Real> * s * s * sigma * sigma);
  return BasicDensityMatrix<Real>(Basis::Position, g, m * pre);
}

/// Smeared Gaussian state in the momentum basis on conjugate_grid(g),
///   exp(-(p - pbar)^2 2 s^4 / (4 s^2 + sigma^2) - (p^2 + pbar^2) s^2 sigma^2 / (4 s^2 + sigma^2)),
/// with prefactor 2 sqrt(s^2) / sqrt(4 s^2 + sigma^2) (PaperPrefactor) or
/// scaled to unit quadrature trace (TracePreserving).
template <typename Real>
BasicDensityMatrix<Real> gaussian_closed_form_p(const BasicGrid<Real>& g, Real s, Real sigma,
                                                Convention conv = Convention::TracePreserving) {
  detail::require_widths(s, sigma, "gaussian_closed_form_p");
  const RealVector<Real> p = conjugate_grid(g).points();
  const Index n = p.size();
  const Real denom = 4 * s * s + sigma * sigma;
  const Real a = 2 * s * s * s * s / denom;
  const Real b = s * s * sigma * sigma / denom;
  ComplexMatrix<Real> m(n, n);
  for (Index k = 0; k < n; ++k) {
    for (Index j = 0; j < n; ++j) {
      const Real d = p[j] - p[k];
      m(j, k) = std::exp(-d * d * a - (p[j] * p[j] + p[k] * p[k]) * b);
    }
  }
  if (conv == Convention::TracePreserving) return detail::unit_trace(Basis::Momentum, g, std::move(m));
  const Real pre = 2 * std::sqrt(s * s) / std::sqrt(denom);
  return BasicDensityMatrix<Real>(Basis::Momentum, g, m * pre);
}

/// Gaussian-equivalent standard deviations of the four sections, in the
/// exp(-u^2 / 2 w^2) convention.
template <typename Real>
struct BasicSectionalWidths {
  Real x_diag;
  Real x_anti;
  Real p_diag;
  Real p_anti;

  /// x_diag * p_anti
  Real product_diag() const { return x_diag * p_anti; }
  /// x_anti * p_diag
  Real product_anti() const { return x_anti * p_diag; }

  std::array<Real, 4> as_array() const { return {x_diag, x_anti, p_diag, p_anti}; }
};

using SectionalWidths = BasicSectionalWidths<double>;

template <typename Real>
BasicSectionalWidths<Real> sectional_widths(Real s, Real sigma) {
  detail::require_widths(s, sigma, "sectional_widths");
  const Real root = std::sqrt(4 * s * s + sigma * sigma);
  return {s, s * sigma / root, root / (2 * s * sigma), 1 / (2 * s)};
}

/// Measured widths from a position-basis matrix and its momentum transform.
template <typename Real>
BasicSectionalWidths<Real> measured_widths(const BasicDensityMatrix<Real>& rho_x,
                                           const BasicDensityMatrix<Real>& rho_p) {
  if (rho_x.basis() != Basis::Position || rho_p.basis() != Basis::Momentum) {
    throw std::invalid_argument("measured_widths: expected (position, momentum) matrices");
  }
  return {sectional_width(rho_x, Section::Diagonal), sectional_width(rho_x, Section::AntiDiagonal),
          sectional_width(rho_p, Section::Diagonal), sectional_width(rho_p, Section::AntiDiagonal)};
}

/// Closed-form purity of the smeared Gaussian, (1 + 4 s^2 / sigma^2)^{-1/2}.
template <typename Real>
Real gaussian_purity(Real s, Real sigma) {
  detail::require_widths(s, sigma, "gaussian_purity");
  return 1 / std::sqrt(1 + 4 * s * s / (sigma * sigma));
}

// ---------------------------------------------------------------------------
// Regime classification

enum class Extent { Localized, Intermediate, Spread };

inline const char* to_string(Extent s) {
  switch (s) {
    case Extent::Localized: return "localized";
    case Extent::Intermediate: return "intermediate";
    case Extent::Spread: return "spread";
  }
  return "?";
}

/// The four rows of the regime table plus the catch-all.
enum class Regime {
  SigmaSmallSLarge = 1,
  SigmaSmallSSmall = 2,
  SigmaLargeSSmall = 3,
  SigmaLargeSLarge = 4,
  Intermediate = 0,
};

inline const char* to_string(Regime r) {
  switch (r) {
    case Regime::SigmaSmallSLarge: return "row1";
    case Regime::SigmaSmallSSmall: return "row2";
    case Regime::SigmaLargeSSmall: return "row3";
    case Regime::SigmaLargeSLarge: return "row4";
    case Regime::Intermediate: return "intermediate";
  }
  return "?";
}

inline const char* describe(Regime r) {
  switch (r) {
    case Regime::SigmaSmallSLarge: return "sigma->0, s->large";
    case Regime::SigmaSmallSSmall: return "sigma->0, s->0";
    case Regime::SigmaLargeSSmall: return "sigma->large, s->0";
    case Regime::SigmaLargeSLarge: return "sigma->large, s->large";
    case Regime::Intermediate: return "no table row";
  }
  return "?";
}

/// Flags in section order (x-diag, x-anti, p-diag, p-anti).
using SpreadPattern = std::array<Extent, 4>;

inline SpreadPattern table_pattern(Regime r) {
  using enum Extent;
  switch (r) {
    case Regime::SigmaSmallSLarge: return {Spread, Localized, Spread, Localized};
    case Regime::SigmaSmallSSmall: return {Localized, Localized, Spread, Spread};
    case Regime::SigmaLargeSSmall: return {Localized, Localized, Spread, Spread};
    case Regime::SigmaLargeSLarge: return {Spread, Spread, Localized, Localized};
    case Regime::Intermediate: break;
  }
  return {Intermediate, Intermediate, Intermediate, Intermediate};
}

template <typename Real>
struct BasicRegimeReport {
  Real s;
  Real sigma;
  BasicSectionalWidths<Real> widths;
  SpreadPattern pattern;
  Regime row;
};

using RegimeReport = BasicRegimeReport<double>;

template <typename Real>
Extent spread_flag(Real width, Real ref, Real factor) {
  if (width > factor * ref) return Extent::Spread;
  if (width < ref / factor) return Extent::Localized;
  return Extent::Intermediate;
}

/// Flags each analytic width against its reference scale (ref_x for the
/// position cuts, ref_p for the momentum cuts) and names the matching table
/// row. Rows 2 and 3 share one pattern; they are told apart by whether sigma
/// sits below or above ref_x.
template <typename Real>
BasicRegimeReport<Real> classify_regime(Real s, Real sigma, Real ref_x, Real ref_p, Real factor = 3) {
  if (!(ref_x > 0) || !(ref_p > 0)) throw std::invalid_argument("classify_regime: reference scales must be positive");
  if (!(factor >= 1)) throw std::invalid_argument("classify_regime: factor must be >= 1");
  const auto w = sectional_widths(s, sigma);
  const SpreadPattern pattern{spread_flag(w.x_diag, ref_x, factor), spread_flag(w.x_anti, ref_x, factor),
                              spread_flag(w.p_diag, ref_p, factor), spread_flag(w.p_anti, ref_p, factor)};
  Regime row = Regime::Intermediate;
  if (pattern == table_pattern(Regime::SigmaSmallSLarge)) {
    row = Regime::SigmaSmallSLarge;
  } else if (pattern == table_pattern(Regime::SigmaLargeSLarge)) {
    row = Regime::SigmaLargeSLarge;
  } else if (pattern == table_pattern(Regime::SigmaSmallSSmall)) {
    row = sigma <= ref_x ? Regime::SigmaSmallSSmall : Regime::SigmaLargeSSmall;
  }
  return {s, sigma, w, pattern, row};
}

}  // namespace vnsmear

#endif  // VNSMEAR_SMEAR_HPP
