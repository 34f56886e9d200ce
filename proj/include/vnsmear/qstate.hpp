#ifndef VNSMEAR_QSTATE_HPP
#define VNSMEAR_QSTATE_HPP

// Wavefunctions and density matrices on a 1-D grid, the position <-> momentum
// change of basis, and scalar diagnostics.
//
// Density matrices hold kernel values rho(x_j, xbar_k); quadrature weights are
// applied only where an integral is taken. Spectral quantities use the
// weight-symmetrized matrix S = W^{1/2} rho W^{1/2}, whose eigenvalues are the
// quadrature-consistent occupation probabilities.

#include <vnsmear/grid.hpp>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace vnsmear {

template <typename Real>
using ComplexMatrix = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Real>
using ComplexVector = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;

enum class Basis { Position, Momentum, Finite };

inline const char* to_string(Basis b) {
  switch (b) {
    case Basis::Position: return "position";
    case Basis::Momentum: return "momentum";
    case Basis::Finite: return "finite";
  }
  return "?";
}

/// Complex amplitudes psi(x_j), normalized under the grid quadrature.
template <typename Real>
class BasicWaveFunction {
 public:
  using Vector = ComplexVector<Real>;

  BasicWaveFunction(BasicGrid<Real> grid, Vector amp) : grid_(std::move(grid)), amp_(std::move(amp)) {
    if (amp_.size() != grid_.size()) {
      throw std::invalid_argument("wavefunction length does not match grid");
    }
    const Real norm = (grid_.weights().array() * amp_.array().abs2()).sum();
    if (!(std::abs(norm - 1) <= Real(1e-8))) {
      throw std::invalid_argument("wavefunction is not normalized (norm = " + std::to_string(double(norm)) + ")");
    }
  }

  const BasicGrid<Real>& grid() const { return grid_; }
  const Vector& amp() const { return amp_; }
  Index size() const { return amp_.size(); }

 private:
  BasicGrid<Real> grid_;
  Vector amp_;
};

template <typename Real>
class BasicDensityMatrix {
 public:
  using Scalar = std::complex<Real>;
  using Matrix = ComplexMatrix<Real>;

  /// Grid-backed matrix in the position or momentum basis. A momentum-basis
  /// matrix keeps the position grid it is conjugate to.
  BasicDensityMatrix(Basis basis, BasicGrid<Real> grid, Matrix mat)
      : basis_(basis), grid_(std::move(grid)), mat_(std::move(mat)) {
    if (basis == Basis::Finite) {
      throw std::invalid_argument("finite-basis density matrices carry no grid; use finite()");
    }
    if (mat_.rows() != grid_->size() || mat_.cols() != grid_->size()) {
      throw std::invalid_argument("density matrix shape does not match grid");
    }
  }

  static BasicDensityMatrix finite(Matrix mat) {
    if (mat.rows() != mat.cols() || mat.rows() == 0) {
      throw std::invalid_argument("density matrix must be square and non-empty");
    }
    return BasicDensityMatrix(std::move(mat));
  }

  Basis basis() const { return basis_; }
  bool has_grid() const { return grid_.has_value(); }
  const BasicGrid<Real>& grid() const {
    if (!grid_) throw std::logic_error("finite-basis density matrix has no grid");
    return *grid_;
  }
  const Matrix& mat() const { return mat_; }
  Index size() const { return mat_.rows(); }

  RealVector<Real> weights() const {
    switch (basis_) {
      case Basis::Position: return grid_->weights();
      case Basis::Momentum: return conjugate_grid(*grid_).weights();
      case Basis::Finite: break;
    }
    return RealVector<Real>::Ones(mat_.rows());
  }

  /// Lattice coordinates of the basis (x_j or p_j).
  RealVector<Real> coordinates() const {
    switch (basis_) {
      case Basis::Position: return grid_->points();
      case Basis::Momentum: return conjugate_grid(*grid_).points();
      case Basis::Finite: break;
    }
    throw std::logic_error("finite-basis density matrix has no coordinates");
  }

 private:
  explicit BasicDensityMatrix(Matrix mat) : basis_(Basis::Finite), mat_(std::move(mat)) {}

  Basis basis_;
  std::optional<BasicGrid<Real>> grid_;
  Matrix mat_;
};

using WaveFunction = BasicWaveFunction<double>;
using DensityMatrix = BasicDensityMatrix<double>;

// ---------------------------------------------------------------------------
// Construction

/// Gaussian packet (2 pi s^2)^{-1/4} exp(-(x - x0)^2 / 4s^2 + i p0 x),
/// renormalized under the grid quadrature.
template <typename Real>
BasicWaveFunction<Real> gaussian_packet(const BasicGrid<Real>& g, Real s, Real x0 = 0, Real p0 = 0) {
  if (!(s > 0) || !std::isfinite(s)) {
    throw std::invalid_argument("gaussian_packet: width s must be positive and finite");
  }
  const Real pre = std::pow(2 * std::numbers::pi_v<Real> * s * s, Real(-0.25));
  ComplexVector<Real> amp(g.size());
  for (Index j = 0; j < g.size(); ++j) {
    const Real x = g.point(j);
    const Real d = x - x0;
    amp[j] = std::polar(pre * std::exp(-d * d / (4 * s * s)), p0 * x);
  }
  const Real norm = (g.weights().array() * amp.array().abs2()).sum();
  if (!(std::abs(norm - 1) <= Real(1e-6))) {
    throw std::invalid_argument("gaussian_packet: normalization deficit " + std::to_string(double(1 - norm)) +
                                " (packet leaks out of the box or is under-resolved)");
  }
  amp /= std::sqrt(norm);
  return BasicWaveFunction<Real>(g, std::move(amp));
}

template <typename Real>
BasicDensityMatrix<Real> pure_density(const BasicWaveFunction<Real>& psi) {
  return BasicDensityMatrix<Real>(Basis::Position, psi.grid(), psi.amp() * psi.amp().adjoint());
}

// ---------------------------------------------------------------------------
// Quadrature-aware scalars

template <typename Real>
Real trace(const BasicDensityMatrix<Real>& rho) {
  return (rho.weights().array() * rho.mat().diagonal().real().array()).sum();
}

template <typename Real>
ComplexMatrix<Real> weight_symmetrized(const BasicDensityMatrix<Real>& rho) {
  const RealVector<Real> r = rho.weights().array().sqrt();
  return r.asDiagonal() * rho.mat() * r.asDiagonal();
}

template <typename Real>
Real hermiticity_error(const BasicDensityMatrix<Real>& rho) {
  return (rho.mat() - rho.mat().adjoint()).cwiseAbs().maxCoeff();
}

/// Ascending eigenvalues of the weight-symmetrized matrix.
template <typename Real>
RealVector<Real> spectrum(const BasicDensityMatrix<Real>& rho) {
  ComplexMatrix<Real> s = weight_symmetrized(rho);
  s = (s + s.adjoint()).eval() / Real(2);
  Eigen::SelfAdjointEigenSolver<ComplexMatrix<Real>> es(s, Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success) {
    throw std::runtime_error("spectrum: eigen decomposition failed");
  }
  return es.eigenvalues();
}

/// Tr rho^2 = sum_jk w_j w_k |rho_jk|^2.
template <typename Real>
Real purity(const BasicDensityMatrix<Real>& rho) {
  return weight_symmetrized(rho).squaredNorm();
}

/// Von Neumann entropy -sum lambda ln lambda, skipping eigenvalues below 1e-12.
template <typename Real>
Real entropy(const BasicDensityMatrix<Real>& rho) {
  const RealVector<Real> ev = spectrum(rho);
  Real h = 0;
  for (Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > Real(1e-12)) h -= ev[i] * std::log(ev[i]);
  }
  return std::max(h, Real(0));
}

struct InvariantReport {
  double hermiticity_error;
  double trace;
  double min_eigenvalue;

  bool ok(double herm_tol = 1e-10, double trace_tol = 1e-8, double psd_tol = 1e-8) const {
    return hermiticity_error <= herm_tol && std::abs(trace - 1) <= trace_tol && min_eigenvalue >= -psd_tol;
  }
};

template <typename Real>
InvariantReport check_invariants(const BasicDensityMatrix<Real>& rho) {
  return {double(hermiticity_error(rho)), double(trace(rho)), double(spectrum(rho)[0])};
}

/// max |a - b| / max |b|, the deviation measure used for matrix comparisons.
template <typename Derived1, typename Derived2>
double max_relative_deviation(const Eigen::MatrixBase<Derived1>& a, const Eigen::MatrixBase<Derived2>& b) {
  const double scale = double(b.cwiseAbs().maxCoeff());
  if (scale == 0) throw std::invalid_argument("max_relative_deviation: reference is identically zero");
  return double((a - b).cwiseAbs().maxCoeff()) / scale;
}

// ---------------------------------------------------------------------------
// Position <-> momentum

enum class TransformMethod { Auto, Direct, Fast };

/// Largest size handled by direct quadrature under TransformMethod::Auto.
inline constexpr Index kDirectTransformLimit = 512;

namespace detail {

// Unitary U_aj = exp(-i p_a x_j) / sqrt(n). With <p|x> ∝ exp(-i p x) and
// S = W^{1/2} rho W^{1/2}, the momentum kernel is U S U^† / dp.
template <typename Real>
ComplexMatrix<Real> fourier_matrix(const BasicGrid<Real>& g) {
  const auto pg = conjugate_grid(g);
  const Index n = g.size();
  const Real scale = 1 / std::sqrt(static_cast<Real>(n));
  ComplexMatrix<Real> u(n, n);
  for (Index j = 0; j < n; ++j) {
    const Real x = g.point(j);
    for (Index a = 0; a < n; ++a) u(a, j) = std::polar(scale, -pg.point(a) * x);
  }
  return u;
}

// Applies U (forward) or U^† (inverse) to every column of m through an FFT:
//   exp(-i p_a x_j) = exp(-i p_0 x_0) (-1)^j exp(-i a dp x_0) exp(-2 pi i a j / n).
template <typename Real>
ComplexMatrix<Real> fourier_columns(const BasicGrid<Real>& g, const ComplexMatrix<Real>& m, bool forward) {
  const auto pg = conjugate_grid(g);
  const Index n = g.size();
  const Real x0 = g.x_min();
  const Real dp = pg.spacing();
  const Real scale = 1 / std::sqrt(static_cast<Real>(n));
  const Real sign = forward ? Real(-1) : Real(1);

  std::vector<std::complex<Real>> pre(n), post(n);
  for (Index k = 0; k < n; ++k) {
    // forward: pre acts on j, post on a. inverse: the roles swap.
    const std::complex<Real> alt = (k % 2 == 0) ? Real(1) : Real(-1);
    const std::complex<Real> shift = std::polar(Real(1), sign * static_cast<Real>(k) * dp * x0);
    pre[k] = forward ? alt : shift;
    post[k] = forward ? shift : alt;
  }
  const std::complex<Real> global = std::polar(scale, sign * pg.p_min() * x0);

  Eigen::FFT<Real> fft;
  fft.SetFlag(Eigen::FFT<Real>::Unscaled);
  std::vector<std::complex<Real>> in(n), out(n);
  ComplexMatrix<Real> result(n, m.cols());
  for (Index c = 0; c < m.cols(); ++c) {
    for (Index k = 0; k < n; ++k) in[k] = pre[k] * m(k, c);
    if (forward) {
      fft.fwd(out, in);
    } else {
      fft.inv(out, in);
    }
    for (Index k = 0; k < n; ++k) result(k, c) = global * post[k] * out[k];
  }
  return result;
}

template <typename Real>
bool use_direct(TransformMethod method, Index n) {
  return method == TransformMethod::Direct || (method == TransformMethod::Auto && n <= kDirectTransformLimit);
}

// U s U^† (forward) or U^† s U (inverse).
template <typename Real>
ComplexMatrix<Real> conjugate_by_fourier(const BasicGrid<Real>& g, const ComplexMatrix<Real>& s, bool forward,
                                         TransformMethod method) {
  if (use_direct<Real>(method, g.size())) {
    const ComplexMatrix<Real> u = fourier_matrix(g);
    if (forward) return u * s * u.adjoint();
    return u.adjoint() * s * u;
  }
  const ComplexMatrix<Real> t = fourier_columns(g, s, forward);
  const ComplexMatrix<Real> t_adj = t.adjoint();
  return fourier_columns(g, t_adj, forward).adjoint();
}

}  // namespace detail

/// rho(p, pbar) = (1/2pi) ∫dx dxbar exp(-i p x + i pbar xbar) rho(x, xbar),
/// evaluated on the conjugate momentum lattice.
template <typename Real>
BasicDensityMatrix<Real> to_momentum(const BasicDensityMatrix<Real>& rho,
                                     TransformMethod method = TransformMethod::Auto) {
  if (rho.basis() != Basis::Position) {
    throw std::invalid_argument("to_momentum: expected a position-basis density matrix");
  }
  const auto& g = rho.grid();
  const Real dp = conjugate_grid(g).spacing();
  ComplexMatrix<Real> sp = detail::conjugate_by_fourier(g, weight_symmetrized(rho), true, method);
  return BasicDensityMatrix<Real>(Basis::Momentum, g, sp / dp);
}

template <typename Real>
BasicDensityMatrix<Real> to_position(const BasicDensityMatrix<Real>& rho,
                                     TransformMethod method = TransformMethod::Auto) {
  if (rho.basis() != Basis::Momentum) {
    throw std::invalid_argument("to_position: expected a momentum-basis density matrix");
  }
  const auto& g = rho.grid();
  const Real dp = conjugate_grid(g).spacing();
  const ComplexMatrix<Real> s = detail::conjugate_by_fourier(g, ComplexMatrix<Real>(rho.mat() * dp), false, method);
  const RealVector<Real> inv_root = g.weights().array().rsqrt();
  return BasicDensityMatrix<Real>(Basis::Position, g, inv_root.asDiagonal() * s * inv_root.asDiagonal());
}

// ---------------------------------------------------------------------------
// Sections

enum class Section { Diagonal, AntiDiagonal };

/// Second-moment width of |rho| along x = xbar (Diagonal) or x = -xbar
/// (AntiDiagonal), with the cut parametrized by the first coordinate:
/// w^2 = sum u^2 q(u) / sum q(u).
template <typename Real>
Real sectional_width(const BasicDensityMatrix<Real>& rho, Section section) {
  if (rho.basis() == Basis::Finite) {
    throw std::invalid_argument("sectional_width: finite-basis matrices have no coordinates");
  }
  const RealVector<Real> u = rho.coordinates();
  const RealVector<Real> w = rho.weights();
  const Index n = rho.size();
  const auto& m = rho.mat();

  if (section == Section::AntiDiagonal && rho.basis() == Basis::Position && !rho.grid().is_symmetric()) {
    throw std::invalid_argument("sectional_width: anti-diagonal cut needs a grid symmetric about 0");
  }

  Real mass = 0;
  Real moment = 0;
  for (Index j = 0; j < n; ++j) {
    Index k = j;
    if (section == Section::AntiDiagonal) {
      k = rho.basis() == Basis::Position ? n - 1 - j : conjugate_grid(rho.grid()).mirror(j);
      if (k < 0) continue;
    }
    const Real q = std::abs(m(j, k));
    if (!std::isfinite(q)) throw std::invalid_argument("sectional_width: non-finite matrix entry");
    mass += w[j] * q;
    moment += w[j] * q * u[j] * u[j];
  }
  if (!(mass > 0)) throw std::invalid_argument("sectional_width: cut is identically zero");
  return std::sqrt(moment / mass);
}

}  // namespace vnsmear

#endif  // VNSMEAR_QSTATE_HPP
