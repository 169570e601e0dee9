#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "ppsd/core.hpp"

namespace ppsd {

class DensityMatrix;

/** Unit-norm pure state. */
class StateVector {
 public:
  /// Throws InvariantError unless |amplitudes| = 1 within tol.
  explicit StateVector(Vector amplitudes, double tol = 1e-12);

  /// Scales v to unit norm; throws InvariantError for a zero or non-finite vector.
  static StateVector normalized(const Vector& v);
  static StateVector basis(Eigen::Index dim, Eigen::Index k);

  Eigen::Index dim() const { return amp_.size(); }
  const Vector& amplitudes() const { return amp_; }
  Complex operator[](Eigen::Index i) const { return amp_(i); }

  /// |psi><psi|
  Operator projector() const { return amp_ * amp_.adjoint(); }
  DensityMatrix density() const;

  /// Global phase fixed so the first amplitude with modulus above cutoff is real positive.
  StateVector gauge_fixed(double cutoff = 1e-8) const;

 private:
  Vector amp_;
};

/** Hermitian, unit-trace, positive semidefinite matrix. */
class DensityMatrix {
 public:
  /// Validates the invariants; throws InvariantError on violation.
  explicit DensityMatrix(Matrix m, const Tolerances& tol = {});

  static DensityMatrix maximally_mixed(Eigen::Index dim);

  Eigen::Index dim() const { return m_.rows(); }
  const Matrix& matrix() const { return m_; }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

 private:
  Matrix m_;
};

/** Uniform position grid standing in for continuum position kets. */
struct GridSpec {
  double x_min = -5.0;
  double x_max = 5.0;
  int n_points = 128;

  /// Throws InvariantError unless x_min < x_max and n_points >= min_points.
  void validate(int min_points = 8) const;
  double spacing() const { return (x_max - x_min) / (n_points - 1); }
  RealVector points() const;
};

double purity(const DensityMatrix& rho);

/// <psi|op|psi>
Complex expectation(const Operator& op, const StateVector& psi);

/// <op^2> - <op>^2 for Hermitian op; throws InvariantError otherwise.
double variance(const Operator& op, const StateVector& psi);

struct PauliOperators {
  Operator x, y, z;
  Operator plus;   ///< sigma_+ = |+><-|
  Operator minus;  ///< sigma_- = |-><+|
};

/// Basis ordering (|+>, |->): sigma_z = diag(1, -1).
PauliOperators pauli_operators();

struct FockOperators {
  Operator a, a_dag, n;
};

/**
 * Ladder operators truncated to `dim` levels.
 *
 * [a, a_dag] equals the identity except for the (dim-1, dim-1) entry,
 * which is -(dim-1).
 */
FockOperators fock_operators(Eigen::Index dim);

/// Truncated coherent state. Throws TruncationError when the top level holds >= 1e-10.
StateVector coherent_state(Complex alpha, Eigen::Index dim);

/// Diagonal matrix of grid abscissae.
Operator position_operator(const GridSpec& grid);

Operator identity(Eigen::Index dim);
Operator kron(const Operator& a, const Operator& b);

/// op acting on factor `site` of a tensor product with the given factor dimensions.
Operator embed(const Operator& op, std::size_t site, std::span<const Eigen::Index> dims);

/// 0.5 * trace norm of (a - b) for Hermitian a, b.
double trace_distance(const Matrix& a, const Matrix& b);

/// |<a|b>|^2
double fidelity(const StateVector& a, const StateVector& b);

/// Smallest eigenvalue of the Hermitian part of m.
double min_eigenvalue(const Matrix& m);

/// Spectral norm (largest singular value).
double operator_norm(const Operator& op);

/// Haar-random pure state.
StateVector random_state(Eigen::Index dim, std::mt19937_64& rng);

/// Haar-random state supported on the first `support` basis vectors.
StateVector random_state_in(Eigen::Index dim, Eigen::Index support, std::mt19937_64& rng);

/// Random mixed state of the given rank (Ginibre construction).
DensityMatrix random_density(Eigen::Index dim, Eigen::Index rank, std::mt19937_64& rng);

}  // namespace ppsd
