#include "ppsd/hilbert.hpp"

#include <cmath>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>

namespace ppsd {

StateVector::StateVector(Vector amplitudes, double tol) : amp_(std::move(amplitudes)) {
  if (amp_.size() == 0) throw InvariantError("StateVector: empty amplitude vector");
  if (!amp_.allFinite()) throw InvariantError("StateVector: non-finite amplitude");
  const double n = amp_.norm();
  if (std::abs(n - 1.0) > tol) {
    throw InvariantError("StateVector: norm " + std::to_string(n) + " is not 1");
  }
}

StateVector StateVector::normalized(const Vector& v) {
  const double n = v.norm();
  if (!(n > 0.0) || !std::isfinite(n)) throw InvariantError("StateVector: cannot normalize vector");
  return StateVector(v / n, 1e-10);
}

StateVector StateVector::basis(Eigen::Index dim, Eigen::Index k) {
  if (k < 0 || k >= dim) throw DimensionError("basis index out of range");
  Vector v = Vector::Zero(dim);
  v(k) = 1.0;
  return StateVector(std::move(v));
}

DensityMatrix StateVector::density() const { return DensityMatrix(projector()); }

StateVector StateVector::gauge_fixed(double cutoff) const {
  for (Eigen::Index i = 0; i < amp_.size(); ++i) {
    if (std::abs(amp_(i)) > cutoff) {
      const Complex phase = std::conj(amp_(i)) / std::abs(amp_(i));
      return StateVector::normalized(amp_ * phase);
    }
  }
  return *this;
}

DensityMatrix::DensityMatrix(Matrix m, const Tolerances& tol) : m_(std::move(m)) {
  require_square(m_, "DensityMatrix");
  if (m_.rows() == 0) throw InvariantError("DensityMatrix: empty matrix");
  if (!m_.allFinite()) throw InvariantError("DensityMatrix: non-finite entry");
  if (hermiticity_defect(m_) > tol.hermiticity) {
    throw InvariantError("DensityMatrix: not Hermitian (defect " +
                         std::to_string(hermiticity_defect(m_)) + ")");
  }
  const Complex tr = m_.trace();
  if (std::abs(tr - 1.0) > tol.trace) {
    throw InvariantError("DensityMatrix: trace " + std::to_string(tr.real()) + " is not 1");
  }
  const double lo = min_eigenvalue(m_);
  if (lo < tol.min_eigenvalue) {
    throw InvariantError("DensityMatrix: negative eigenvalue " + std::to_string(lo));
  }
}

DensityMatrix DensityMatrix::maximally_mixed(Eigen::Index dim) {
  return DensityMatrix(Matrix::Identity(dim, dim) / static_cast<double>(dim));
}

void GridSpec::validate(int min_points) const {
  if (!(x_min < x_max) || !std::isfinite(x_min) || !std::isfinite(x_max)) {
    throw InvariantError("GridSpec: require finite x_min < x_max");
  }
  if (n_points < min_points) {
    throw InvariantError("GridSpec: need at least " + std::to_string(min_points) + " points, got " +
                         std::to_string(n_points));
  }
}

RealVector GridSpec::points() const {
  return RealVector::LinSpaced(n_points, x_min, x_max);
}

double purity(const DensityMatrix& rho) {
  // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
  return rho.matrix().squaredNorm();
}

Complex expectation(const Operator& op, const StateVector& psi) {
  require_square(op, "expectation");
  require_same_dim(op.rows(), psi.dim(), "expectation");
  return psi.amplitudes().dot(op * psi.amplitudes());
}

double variance(const Operator& op, const StateVector& psi) {
  if (!is_hermitian(op)) throw InvariantError("variance: operator is not Hermitian");
  require_same_dim(op.rows(), psi.dim(), "variance");
  const Vector v = op * psi.amplitudes();
  const double mean = psi.amplitudes().dot(v).real();
  return v.squaredNorm() - mean * mean;
}

PauliOperators pauli_operators() {
  PauliOperators p;
  p.x = Operator::Zero(2, 2);
  p.x(0, 1) = p.x(1, 0) = 1.0;
  p.y = Operator::Zero(2, 2);
  p.y(0, 1) = -kI;
  p.y(1, 0) = kI;
  p.z = Operator::Zero(2, 2);
  p.z(0, 0) = 1.0;
  p.z(1, 1) = -1.0;
  p.minus = Operator::Zero(2, 2);
  p.minus(1, 0) = 1.0;
  p.plus = p.minus.adjoint();
  return p;
}

FockOperators fock_operators(Eigen::Index dim) {
  if (dim < 2) throw DimensionError("fock_operators: dim must be >= 2");
  FockOperators f;
  f.a = Operator::Zero(dim, dim);
  for (Eigen::Index k = 1; k < dim; ++k) f.a(k - 1, k) = std::sqrt(static_cast<double>(k));
  f.a_dag = f.a.adjoint();
  f.n = Operator::Zero(dim, dim);
  for (Eigen::Index k = 0; k < dim; ++k) f.n(k, k) = static_cast<double>(k);
  return f;
}

StateVector coherent_state(Complex alpha, Eigen::Index dim) {
  if (dim < 1) throw DimensionError("coherent_state: dim must be positive");
  Vector c(dim);
  c(0) = std::exp(-0.5 * std::norm(alpha));
  for (Eigen::Index k = 1; k < dim; ++k) c(k) = c(k - 1) * alpha / std::sqrt(static_cast<double>(k));
  const double leak = std::norm(c(dim - 1));
  if (dim > 1 && leak >= 1e-10) {
    throw TruncationError("coherent_state: top Fock level holds " + std::to_string(leak) +
                          "; increase dim");
  }
  return StateVector::normalized(c);
}

Operator position_operator(const GridSpec& grid) {
  grid.validate(2);
  return grid.points().cast<Complex>().asDiagonal();
}

Operator identity(Eigen::Index dim) { return Operator::Identity(dim, dim); }

Operator kron(const Operator& a, const Operator& b) { return Eigen::kroneckerProduct(a, b).eval(); }

Operator embed(const Operator& op, std::size_t site, std::span<const Eigen::Index> dims) {
  if (site >= dims.size()) throw DimensionError("embed: site out of range");
  require_same_dim(op.rows(), dims[site], "embed");
  Operator out = Operator::Identity(1, 1);
  for (std::size_t k = 0; k < dims.size(); ++k) {
    out = kron(out, k == site ? op : identity(dims[k]));
  }
  return out;
}

double trace_distance(const Matrix& a, const Matrix& b) {
  require_same_dim(a.rows(), b.rows(), "trace_distance");
  const Matrix diff = a - b;
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (diff + diff.adjoint()), Eigen::EigenvaluesOnly);
  return 0.5 * es.eigenvalues().cwiseAbs().sum();
}

double fidelity(const StateVector& a, const StateVector& b) {
  require_same_dim(a.dim(), b.dim(), "fidelity");
  return std::norm(a.amplitudes().dot(b.amplitudes()));
}

double min_eigenvalue(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

double operator_norm(const Operator& op) {
  if (op.size() == 0) return 0.0;
  Eigen::JacobiSVD<Matrix> svd(op);
  return svd.singularValues()(0);
}

namespace {

Vector gaussian_vector(Eigen::Index n, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = g(rng);
    const double im = g(rng);
    v(i) = Complex(re, im);
  }
  return v;
}

}  // namespace

StateVector random_state(Eigen::Index dim, std::mt19937_64& rng) {
  return random_state_in(dim, dim, rng);
}

StateVector random_state_in(Eigen::Index dim, Eigen::Index support, std::mt19937_64& rng) {
  if (support < 1 || support > dim) throw DimensionError("random_state_in: bad support size");
  Vector v = Vector::Zero(dim);
  v.head(support) = gaussian_vector(support, rng);
  return StateVector::normalized(v);
}

DensityMatrix random_density(Eigen::Index dim, Eigen::Index rank, std::mt19937_64& rng) {
  if (rank < 1 || rank > dim) throw DimensionError("random_density: bad rank");
  Matrix g(dim, rank);
  for (Eigen::Index c = 0; c < rank; ++c) g.col(c) = gaussian_vector(dim, rng);
  Matrix rho = g * g.adjoint();
  rho /= rho.trace();
  rho = 0.5 * (rho + rho.adjoint()).eval();
  return DensityMatrix(std::move(rho));
}

}  // namespace ppsd
