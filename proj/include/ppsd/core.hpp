#pragma once

#include <complex>
#include <stdexcept>
#include <string>

#include <Eigen/Dense>

namespace ppsd {

using Complex = std::complex<double>;

/** Dense complex matrix; every operator and superoperator is stored this way. */
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

/** Square complex matrix acting on a finite-dimensional Hilbert space. */
using Operator = Matrix;

inline constexpr Complex kI{0.0, 1.0};

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Value-type invariant broken (non-Hermitian, non-unit trace, negative rate, ...).
class InvariantError : public Error {
 public:
  using Error::Error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A truncated Fock space is too small for the requested state.
class TruncationError : public Error {
 public:
  using Error::Error;
};

/// Numerical integration left the admissible state manifold.
class IntegrationError : public Error {
 public:
  using Error::Error;
};

/// Malformed user input (unknown model, missing parameter, bad file).
class InputError : public Error {
 public:
  using Error::Error;
};

/** Absolute tolerances used by the state invariants. */
struct Tolerances {
  double hermiticity = 1e-12;
  double trace = 1e-12;
  double min_eigenvalue = -1e-10;
  double norm = 1e-12;
};

inline void require_square(const Matrix& m, const char* what) {
  if (m.rows() != m.cols()) {
    throw DimensionError(std::string(what) + ": matrix is not square");
  }
}

inline void require_same_dim(Eigen::Index a, Eigen::Index b, const char* what) {
  if (a != b) {
    throw DimensionError(std::string(what) + ": dimension mismatch (" + std::to_string(a) +
                         " vs " + std::to_string(b) + ")");
  }
}

/// Largest absolute entry of A - A^dagger.
inline double hermiticity_defect(const Matrix& a) {
  return (a - a.adjoint()).cwiseAbs().maxCoeff();
}

inline bool is_hermitian(const Matrix& a, double tol = 1e-12) {
  return a.rows() == a.cols() && hermiticity_defect(a) <= tol;
}

/// Worker count for internal parallel loops; honours PPSD_LAB_THREADS.
unsigned thread_count();

}  // namespace ppsd
