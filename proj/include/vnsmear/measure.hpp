#ifndef VNSMEAR_MEASURE_HPP
#define VNSMEAR_MEASURE_HPP

// Finite-dimensional measurement theory: generalized measurements, projective
// measurements, POVMs, ancilla (dilation) realization, and the von Neumann
// entangle / reduce / average / partial-trace pipeline.
//
// Joint system ⊗ ancilla index convention: row-major, system-major,
//   joint(i, a) = i * d_A + a.

#include <vnsmear/qstate.hpp>

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace vnsmear {

namespace tol {
inline constexpr double kAlgebra = 1e-10;
/// Outcomes less likely than this are treated as impossible.
inline constexpr double kImpossible = 1e-12;
}  // namespace tol

namespace detail {

template <typename Real>
Real unit_deviation(const ComplexMatrix<Real>& m) {
  return (m - ComplexMatrix<Real>::Identity(m.rows(), m.cols())).cwiseAbs().maxCoeff();
}

template <typename Real>
void require_square(const ComplexMatrix<Real>& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw std::invalid_argument(std::string(what) + ": matrix must be square and non-empty");
  }
}

template <typename Real>
Real min_hermitian_eigenvalue(const ComplexMatrix<Real>& m) {
  const ComplexMatrix<Real> h = (m + m.adjoint()) / Real(2);
  return Eigen::SelfAdjointEigenSolver<ComplexMatrix<Real>>(h, Eigen::EigenvaluesOnly).eigenvalues()[0];
}

template <typename Real>
void require_density(const ComplexMatrix<Real>& m, const char* what) {
  require_square(m, what);
  const Real herm = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (herm > Real(tol::kAlgebra)) {
    throw std::invalid_argument(std::string(what) + ": not Hermitian (deviation " + std::to_string(double(herm)) + ")");
  }
  const Real tr = m.trace().real();
  if (std::abs(tr - 1) > Real(tol::kAlgebra)) {
    throw std::invalid_argument(std::string(what) + ": trace " + std::to_string(double(tr)) + " is not 1");
  }
  if (min_hermitian_eigenvalue(m) < -Real(tol::kAlgebra)) {
    throw std::invalid_argument(std::string(what) + ": not positive semidefinite");
  }
}

template <typename Real>
void require_orthonormal_columns(const ComplexMatrix<Real>& b, const char* what) {
  const ComplexMatrix<Real> gram = b.adjoint() * b;
  if (unit_deviation(gram) > Real(tol::kAlgebra)) {
    throw std::invalid_argument(std::string(what) + ": columns are not orthonormal");
  }
}

}  // namespace detail

/// Finite-dimensional state, stored as a density matrix.
template <typename Real>
class BasicFiniteState {
 public:
  using Matrix = ComplexMatrix<Real>;
  using Vector = ComplexVector<Real>;

  explicit BasicFiniteState(Matrix mat) : mat_(std::move(mat)) { detail::require_density(mat_, "FiniteState"); }

  static BasicFiniteState pure(const Vector& v) {
    if (std::abs(v.squaredNorm() - 1) > Real(tol::kAlgebra)) {
      throw std::invalid_argument("FiniteState: state vector is not normalized");
    }
    return BasicFiniteState(Matrix(v * v.adjoint()));
  }

  Index dim() const { return mat_.rows(); }
  const Matrix& mat() const { return mat_; }

 private:
  Matrix mat_;
};

/// Measurement operators {M_k} with sum_k M_k^† M_k = 1.
template <typename Real>
class BasicMeasurementSet {
 public:
  using Matrix = ComplexMatrix<Real>;

  explicit BasicMeasurementSet(std::vector<Matrix> ops) : ops_(std::move(ops)) {
    if (ops_.empty()) throw std::invalid_argument("MeasurementSet: no operators");
    const Index d = ops_.front().rows();
    Matrix sum = Matrix::Zero(d, d);
    for (const auto& m : ops_) {
      detail::require_square(m, "MeasurementSet");
      if (m.rows() != d) throw std::invalid_argument("MeasurementSet: operators differ in dimension");
      sum += m.adjoint() * m;
    }
    if (detail::unit_deviation(sum) > Real(tol::kAlgebra)) {
      throw std::invalid_argument("MeasurementSet: completeness sum_k M_k^† M_k = 1 violated");
    }
  }

  const std::vector<Matrix>& ops() const { return ops_; }
  Index dim() const { return ops_.front().rows(); }
  std::size_t size() const { return ops_.size(); }

 private:
  std::vector<Matrix> ops_;
};

/// Hermitian positive effects {E_i} summing to the identity.
template <typename Real>
class BasicPovm {
 public:
  using Matrix = ComplexMatrix<Real>;

  explicit BasicPovm(std::vector<Matrix> effects) : effects_(std::move(effects)) {
    if (effects_.empty()) throw std::invalid_argument("Povm: no effects");
    const Index d = effects_.front().rows();
    Matrix sum = Matrix::Zero(d, d);
    for (const auto& e : effects_) {
      detail::require_square(e, "Povm");
      if (e.rows() != d) throw std::invalid_argument("Povm: effects differ in dimension");
      if ((e - e.adjoint()).cwiseAbs().maxCoeff() > Real(tol::kAlgebra)) {
        throw std::invalid_argument("Povm: effect is not Hermitian");
      }
      if (detail::min_hermitian_eigenvalue(e) < -Real(tol::kAlgebra)) {
        throw std::invalid_argument("Povm: effect is not positive semidefinite");
      }
      sum += e;
    }
    if (detail::unit_deviation(sum) > Real(tol::kAlgebra)) {
      throw std::invalid_argument("Povm: effects do not sum to the identity");
    }
  }

  const std::vector<Matrix>& effects() const { return effects_; }
  Index dim() const { return effects_.front().rows(); }
  std::size_t size() const { return effects_.size(); }

  std::vector<Real> probabilities(const BasicFiniteState<Real>& rho) const {
    std::vector<Real> p;
    p.reserve(effects_.size());
    for (const auto& e : effects_) p.push_back((e * rho.mat()).trace().real());
    return p;
  }

 private:
  std::vector<Matrix> effects_;
};

/// State on H_S ⊗ H_A.
template <typename Real>
class BasicJointState {
 public:
  using Matrix = ComplexMatrix<Real>;

  BasicJointState(Index dim_system, Index dim_ancilla, Matrix mat)
      : dim_s_(dim_system), dim_a_(dim_ancilla), mat_(std::move(mat)) {
    if (dim_s_ < 1 || dim_a_ < 1 || mat_.rows() != dim_s_ * dim_a_) {
      throw std::invalid_argument("JointState: matrix size does not match d_S * d_A");
    }
    detail::require_density(mat_, "JointState");
  }

  Index dim_system() const { return dim_s_; }
  Index dim_ancilla() const { return dim_a_; }
  const Matrix& mat() const { return mat_; }

 private:
  Index dim_s_;
  Index dim_a_;
  Matrix mat_;
};

using FiniteState = BasicFiniteState<double>;
using MeasurementSet = BasicMeasurementSet<double>;
using Povm = BasicPovm<double>;
using JointState = BasicJointState<double>;

template <typename Real>
struct MeasurementResult {
  BasicFiniteState<Real> state;
  Real probability;
};

template <typename Real>
std::vector<Real> outcome_probabilities(const BasicFiniteState<Real>& rho, const BasicMeasurementSet<Real>& set) {
  if (rho.dim() != set.dim()) throw std::invalid_argument("outcome_probabilities: dimension mismatch");
  std::vector<Real> p;
  p.reserve(set.size());
  for (const auto& m : set.ops()) p.push_back((rho.mat() * m.adjoint() * m).trace().real());
  return p;
}

/// p_k = Tr[rho M_k^† M_k]; rho -> M_k rho M_k^† / p_k.
template <typename Real>
MeasurementResult<Real> apply_measurement(const BasicFiniteState<Real>& rho, const BasicMeasurementSet<Real>& set,
                                          std::size_t k) {
  if (k >= set.size()) throw std::out_of_range("apply_measurement: outcome index out of range");
  if (rho.dim() != set.dim()) throw std::invalid_argument("apply_measurement: dimension mismatch");
  const auto& m = set.ops()[k];
  const Real p = (rho.mat() * m.adjoint() * m).trace().real();
  if (p <= Real(tol::kImpossible)) {
    throw std::domain_error("apply_measurement: outcome " + std::to_string(k) + " has negligible probability");
  }
  ComplexMatrix<Real> post = m * rho.mat() * m.adjoint() / p;
  post = (post + post.adjoint()).eval() / Real(2);
  return {BasicFiniteState<Real>(std::move(post)), p};
}

/// Hermitian, idempotent and mutually orthogonal operators.
template <typename Real>
bool is_projective(const BasicMeasurementSet<Real>& set) {
  const auto& ops = set.ops();
  for (std::size_t k = 0; k < ops.size(); ++k) {
    if ((ops[k] - ops[k].adjoint()).cwiseAbs().maxCoeff() > Real(tol::kAlgebra)) return false;
    for (std::size_t l = 0; l < ops.size(); ++l) {
      const ComplexMatrix<Real> prod = ops[k] * ops[l];
      const ComplexMatrix<Real> expected = k == l ? ops[k] : ComplexMatrix<Real>::Zero(set.dim(), set.dim());
      if ((prod - expected).cwiseAbs().maxCoeff() > Real(tol::kAlgebra)) return false;
    }
  }
  return true;
}

/// E_i = M_i^† M_i.
template <typename Real>
BasicPovm<Real> povm_from(const BasicMeasurementSet<Real>& set) {
  std::vector<ComplexMatrix<Real>> effects;
  effects.reserve(set.size());
  for (const auto& m : set.ops()) {
    ComplexMatrix<Real> e = m.adjoint() * m;
    effects.push_back((e + e.adjoint()) / Real(2));
  }
  return BasicPovm<Real>(std::move(effects));
}

/// Embeds |v> ⊗ |w> in the joint space.
template <typename Real>
ComplexVector<Real> tensor(const ComplexVector<Real>& v, const ComplexVector<Real>& w) {
  return Eigen::kroneckerProduct(v, w).eval();
}

template <typename Real>
ComplexMatrix<Real> tensor(const ComplexMatrix<Real>& a, const ComplexMatrix<Real>& b) {
  return Eigen::kroneckerProduct(a, b).eval();
}

/// Effects realized by a unitary coupling to an ancilla prepared in |alpha>
/// followed by a projective measurement in {|lambda_i alpha_j>}:
///   E_i = sum_j <alpha|U^†|lambda_i alpha_j><lambda_i alpha_j|U|alpha>.
/// Basis vectors are the columns of sys_basis and anc_basis.
template <typename Real>
BasicPovm<Real> povm_from_ancilla(const ComplexMatrix<Real>& u, const ComplexVector<Real>& alpha,
                                  const ComplexMatrix<Real>& sys_basis, const ComplexMatrix<Real>& anc_basis) {
  const Index ds = sys_basis.rows();
  const Index da = anc_basis.rows();
  detail::require_square(sys_basis, "povm_from_ancilla");
  detail::require_square(anc_basis, "povm_from_ancilla");
  if (u.rows() != ds * da || u.cols() != ds * da) {
    throw std::invalid_argument("povm_from_ancilla: unitary size does not match d_S * d_A");
  }
  if (alpha.size() != da || std::abs(alpha.squaredNorm() - 1) > Real(tol::kAlgebra)) {
    throw std::invalid_argument("povm_from_ancilla: ancilla state must be a unit vector of size d_A");
  }
  if (detail::unit_deviation(ComplexMatrix<Real>(u.adjoint() * u)) > Real(tol::kAlgebra)) {
    throw std::invalid_argument("povm_from_ancilla: coupling is not unitary");
  }
  detail::require_orthonormal_columns(sys_basis, "povm_from_ancilla (system basis)");
  detail::require_orthonormal_columns(anc_basis, "povm_from_ancilla (ancilla basis)");

  // U (1 ⊗ |alpha>): maps system states to joint states.
  const ComplexMatrix<Real> embed = u * tensor(ComplexMatrix<Real>(ComplexMatrix<Real>::Identity(ds, ds)),
                                               ComplexMatrix<Real>(alpha));
  std::vector<ComplexMatrix<Real>> effects;
  effects.reserve(ds);
  for (Index i = 0; i < ds; ++i) {
    ComplexMatrix<Real> e = ComplexMatrix<Real>::Zero(ds, ds);
    for (Index j = 0; j < da; ++j) {
      const ComplexVector<Real> ray = tensor(ComplexVector<Real>(sys_basis.col(i)), ComplexVector<Real>(anc_basis.col(j)));
      // Row vector <lambda_i alpha_j| U |alpha> acting on the system.
      const Eigen::Matrix<std::complex<Real>, 1, Eigen::Dynamic> k = ray.adjoint() * embed;
      e += k.adjoint() * k;
    }
    effects.push_back((e + e.adjoint()) / Real(2));
  }
  return BasicPovm<Real>(std::move(effects));
}

/// Direct route: P(lambda_i) = sum_j <lambda_i alpha_j| U (rho ⊗ |alpha><alpha|) U^† |lambda_i alpha_j>.
template <typename Real>
std::vector<Real> joint_projective_probabilities(const ComplexMatrix<Real>& u, const ComplexVector<Real>& alpha,
                                                 const ComplexMatrix<Real>& sys_basis,
                                                 const ComplexMatrix<Real>& anc_basis,
                                                 const BasicFiniteState<Real>& rho) {
  const Index ds = sys_basis.rows();
  const Index da = anc_basis.rows();
  const ComplexMatrix<Real> joint = u * tensor(rho.mat(), ComplexMatrix<Real>(alpha * alpha.adjoint())) * u.adjoint();
  std::vector<Real> p(ds, Real(0));
  for (Index i = 0; i < ds; ++i) {
    for (Index j = 0; j < da; ++j) {
      const ComplexVector<Real> ray = tensor(ComplexVector<Real>(sys_basis.col(i)), ComplexVector<Real>(anc_basis.col(j)));
      p[i] += (ray.adjoint() * joint * ray)(0, 0).real();
    }
  }
  return p;
}

/// Closed-form result of the von Neumann entangling evolution,
///   sum_{jk} c_j c_k^* |lambda_j>|alpha_j><alpha_k|<lambda_k|,
/// with |lambda_j> the standard system basis and |alpha_j> the j-th column of
/// readoffs (d_A x d_S).
template <typename Real>
BasicJointState<Real> von_neumann_entangle(const ComplexVector<Real>& c, const ComplexMatrix<Real>& readoffs) {
  const Index ds = c.size();
  if (ds == 0 || readoffs.cols() != ds) {
    throw std::invalid_argument("von_neumann_entangle: need one read-off state per coefficient");
  }
  if (std::abs(c.squaredNorm() - 1) > Real(tol::kAlgebra)) {
    throw std::invalid_argument("von_neumann_entangle: coefficients are not normalized");
  }
  detail::require_orthonormal_columns(readoffs, "von_neumann_entangle (read-off states)");
  const Index da = readoffs.rows();
  ComplexVector<Real> psi = ComplexVector<Real>::Zero(ds * da);
  for (Index j = 0; j < ds; ++j) psi.segment(j * da, da) += c[j] * readoffs.col(j);
  return BasicJointState<Real>(ds, da, psi * psi.adjoint());
}

namespace detail {

// Unitary V with V|from> = |to>: complete both vectors to orthonormal bases
// whose first columns are exactly |from> and |to>, then V = B_to B_from^†.
template <typename Real>
ComplexMatrix<Real> transport_unitary(const ComplexVector<Real>& from, const ComplexVector<Real>& to) {
  auto completion = [](const ComplexVector<Real>& v) {
    const Index d = v.size();
    ComplexMatrix<Real> seed(d, d + 1);
    seed << v, ComplexMatrix<Real>::Identity(d, d);
    ComplexMatrix<Real> q = Eigen::HouseholderQR<ComplexMatrix<Real>>(seed).householderQ() *
                            ComplexMatrix<Real>::Identity(d, d);
    const std::complex<Real> phase = v.dot(q.col(0));
    q.col(0) *= std::conj(phase);
    return q;
  };
  return completion(to) * completion(from).adjoint();
}

}  // namespace detail

/// Builds H_int = sum_i |lambda_i><lambda_i| ⊗ A_i with generators chosen so
/// that exp(-i A_i T)|alpha> = |alpha_i>, and returns exp(-i H_int T).
/// The generators are one admissible choice, not a unique one.
template <typename Real>
ComplexMatrix<Real> von_neumann_unitary(const ComplexVector<Real>& alpha, const ComplexMatrix<Real>& readoffs, Real t) {
  const Index ds = readoffs.cols();
  const Index da = readoffs.rows();
  if (alpha.size() != da) throw std::invalid_argument("von_neumann_unitary: ancilla dimension mismatch");
  if (!(t > 0)) throw std::invalid_argument("von_neumann_unitary: interaction time must be positive");
  const std::complex<Real> i_unit(0, 1);
  ComplexMatrix<Real> h = ComplexMatrix<Real>::Zero(ds * da, ds * da);
  for (Index i = 0; i < ds; ++i) {
    const ComplexMatrix<Real> v = detail::transport_unitary<Real>(alpha, readoffs.col(i));
    ComplexMatrix<Real> a = (i_unit * v.log() / t).eval();
    a = (a + a.adjoint()).eval() / Real(2);
    h.block(i * da, i * da, da, da) = a;
  }
  const ComplexMatrix<Real> gen = (-i_unit * t * h).eval();
  return gen.exp();
}

/// |lambda_i>|a_i><a_i|<lambda_i| for the read-off pairing of branch i.
template <typename Real>
ComplexMatrix<Real> branch_projector(const ComplexMatrix<Real>& readoffs, Index i) {
  const Index ds = readoffs.cols();
  if (i < 0 || i >= ds) throw std::out_of_range("branch_projector: branch index out of range");
  const ComplexVector<Real> ray =
      tensor(ComplexVector<Real>(ComplexVector<Real>::Unit(ds, i)), ComplexVector<Real>(readoffs.col(i)));
  return ray * ray.adjoint();
}

template <typename Real>
Real outcome_probability(const BasicJointState<Real>& rho, const ComplexMatrix<Real>& projector) {
  return (projector * rho.mat()).trace().real();
}

/// rho -> P rho P^† / Tr(P rho).
template <typename Real>
BasicJointState<Real> reduce(const BasicJointState<Real>& rho, const ComplexMatrix<Real>& projector) {
  if (projector.rows() != rho.mat().rows() || projector.cols() != rho.mat().cols()) {
    throw std::invalid_argument("reduce: projector size mismatch");
  }
  const Real p = outcome_probability(rho, projector);
  if (p <= Real(tol::kImpossible)) throw std::domain_error("reduce: outcome has negligible probability");
  ComplexMatrix<Real> post = projector * rho.mat() * projector.adjoint() / p;
  post = (post + post.adjoint()).eval() / Real(2);
  return BasicJointState<Real>(rho.dim_system(), rho.dim_ancilla(), std::move(post));
}

/// rho_r = sum_j P_j rho P_j^†. The family must carry all of rho's weight.
template <typename Real>
BasicJointState<Real> statistical_average(const BasicJointState<Real>& rho,
                                          const std::vector<ComplexMatrix<Real>>& projectors) {
  const Index d = rho.mat().rows();
  ComplexMatrix<Real> avg = ComplexMatrix<Real>::Zero(d, d);
  for (const auto& p : projectors) {
    if (p.rows() != d || p.cols() != d) throw std::invalid_argument("statistical_average: projector size mismatch");
    avg += p * rho.mat() * p.adjoint();
  }
  const Real deficit = 1 - avg.trace().real();
  if (std::abs(deficit) > Real(1e-8)) {
    throw std::invalid_argument("statistical_average: incomplete projector family (trace deficit " +
                                std::to_string(double(deficit)) + ")");
  }
  avg = (avg + avg.adjoint()).eval() / Real(2);
  return BasicJointState<Real>(rho.dim_system(), rho.dim_ancilla(), std::move(avg));
}

enum class Keep { System, Ancilla };

template <typename Real>
BasicFiniteState<Real> partial_trace(const BasicJointState<Real>& rho, Keep keep) {
  const Index ds = rho.dim_system();
  const Index da = rho.dim_ancilla();
  const auto& m = rho.mat();
  ComplexMatrix<Real> out;
  if (keep == Keep::System) {
    out = ComplexMatrix<Real>::Zero(ds, ds);
    for (Index i = 0; i < ds; ++i)
      for (Index k = 0; k < ds; ++k)
        for (Index a = 0; a < da; ++a) out(i, k) += m(i * da + a, k * da + a);
  } else {
    out = ComplexMatrix<Real>::Zero(da, da);
    for (Index a = 0; a < da; ++a)
      for (Index b = 0; b < da; ++b)
        for (Index i = 0; i < ds; ++i) out(a, b) += m(i * da + a, i * da + b);
  }
  return BasicFiniteState<Real>(std::move(out));
}

// ---------------------------------------------------------------------------
// Seeded random objects for property checks and the demo.

/// Haar-distributed unitary via QR of a complex Ginibre matrix with the
/// phases of R's diagonal removed.
template <typename Real, typename Rng>
ComplexMatrix<Real> random_unitary(Index d, Rng& rng) {
  std::normal_distribution<Real> normal;
  ComplexMatrix<Real> z(d, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i) z(i, j) = {normal(rng), normal(rng)};
  Eigen::HouseholderQR<ComplexMatrix<Real>> qr(z);
  ComplexMatrix<Real> q = qr.householderQ() * ComplexMatrix<Real>::Identity(d, d);
  const ComplexMatrix<Real> r = qr.matrixQR().template triangularView<Eigen::Upper>();
  for (Index j = 0; j < d; ++j) {
    const Real mag = std::abs(r(j, j));
    if (mag > 0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

template <typename Real, typename Rng>
ComplexVector<Real> random_unit_vector(Index d, Rng& rng) {
  std::normal_distribution<Real> normal;
  ComplexVector<Real> v(d);
  for (Index i = 0; i < d; ++i) v[i] = {normal(rng), normal(rng)};
  return v / v.norm();
}

/// Mixed state W W^† / Tr with W a d x d Ginibre matrix.
template <typename Real, typename Rng>
BasicFiniteState<Real> random_mixed_state(Index d, Rng& rng) {
  std::normal_distribution<Real> normal;
  ComplexMatrix<Real> w(d, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < d; ++i) w(i, j) = {normal(rng), normal(rng)};
  ComplexMatrix<Real> m = w * w.adjoint();
  m /= m.trace().real();
  m = (m + m.adjoint()).eval() / Real(2);
  return BasicFiniteState<Real>(std::move(m));
}

/// Random complete measurement: the first d columns of a random unitary form
/// an isometry V with V^† V = 1; its d-row blocks are the M_k.
template <typename Real, typename Rng>
BasicMeasurementSet<Real> random_measurement_set(Index d, std::size_t outcomes, Rng& rng) {
  const Index big = d * static_cast<Index>(outcomes);
  const ComplexMatrix<Real> u = random_unitary<Real>(big, rng);
  std::vector<ComplexMatrix<Real>> ops;
  ops.reserve(outcomes);
  for (std::size_t k = 0; k < outcomes; ++k) ops.push_back(u.block(static_cast<Index>(k) * d, 0, d, d));
  return BasicMeasurementSet<Real>(std::move(ops));
}

}  // namespace vnsmear

#endif  // VNSMEAR_MEASURE_HPP
