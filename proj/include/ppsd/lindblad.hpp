#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ppsd/core.hpp"
#include "ppsd/hilbert.hpp"
#include "ppsd/ode.hpp"

namespace ppsd {

/// Largest dimension whose d^2 x d^2 superoperator is formed for null-space searches.
inline constexpr Eigen::Index kDenseDimLimit = 40;

/// Largest dimension whose superoperator exponential is formed densely and cached.
inline constexpr Eigen::Index kDenseExpmDimLimit = 16;

struct LindbladTerm {
  double rate = 0.0;  ///< gamma_i >= 0
  Operator op;        ///< L_i
  std::string label;  ///< optional, e.g. "mode2:a_dag"
};

/**
 * Hamiltonian plus rate-weighted jump operators:
 *
 *   d rho/dt = -i[H, rho] + sum_i gamma_i (L_i rho L_i^+ - {L_i^+ L_i, rho}/2),   hbar = 1.
 */
struct LindbladModel {
  Operator hamiltonian;
  std::vector<LindbladTerm> terms;
  Eigen::Index dim = 0;
  std::string label;
  std::string basis_note;

  /// Throws InvariantError / DimensionError if H is not Hermitian, a rate is
  /// negative, or an operator has the wrong shape.
  void validate() const;
};

/// Builds and validates a model; dim is taken from the Hamiltonian.
LindbladModel make_model(Operator hamiltonian, std::vector<LindbladTerm> terms, std::string label,
                         std::string basis_note = {});

/**
 * Dense generator acting on column-stacked density matrices,
 * vec(rho) = [rho(:,0); rho(:,1); ...], so vec(A rho B) = (B^T kron A) vec(rho).
 */
struct Superoperator {
  Eigen::Index dim = 0;  ///< Hilbert-space dimension d; matrix is d^2 x d^2
  Matrix matrix;

  Matrix apply(const Matrix& rho) const;
};

Vector vectorize(const Matrix& rho);
Matrix unvectorize(const Vector& v, Eigen::Index dim);

/**
 * Matrix-free form of the generator, L[rho] = G rho + rho G^+ + sum_i gamma_i L_i rho L_i^+
 * with G = -iH - (1/2) sum_i gamma_i L_i^+ L_i.
 *
 * When H and every L_i are diagonal the action reduces to an entrywise rate
 * matrix, which is what makes position-grid models cheap.
 */
class Generator {
 public:
  explicit Generator(const LindbladModel& model);

  Eigen::Index dim() const { return dim_; }
  bool diagonal() const { return diagonal_; }

  Matrix apply(const Matrix& rho) const;

  /// Entrywise rates R with L[rho]_ij = R_ij rho_ij; only valid when diagonal().
  const Matrix& rate_matrix() const { return rates_; }

  /// Frobenius norm of the d^2 x d^2 superoperator, evaluated without forming it.
  double norm() const { return norm_; }

  /// ||L[rho]||_F / ||L||_F; zero for the zero generator applied to anything.
  double relative_action(const Matrix& rho) const;

 private:
  Eigen::Index dim_;
  Matrix g_;
  std::vector<std::pair<double, Operator>> jumps_;
  bool diagonal_;
  Matrix rates_;
  double norm_;
};

Superoperator build_liouvillian(const LindbladModel& model);

/// L[rho] without forming the superoperator.
Matrix apply_liouvillian(const LindbladModel& model, const Matrix& rho);

/// Frobenius norm of the superoperator (the scale used by every relative test).
double liouvillian_norm(const LindbladModel& model);

enum class Method { exact_exponential, adaptive_rk };

const char* to_string(Method m);
Method method_from_string(const std::string& s);

struct Trajectory {
  std::vector<double> times;
  std::vector<DensityMatrix> states;
  std::vector<double> purities;
};

/**
 * Reusable propagator for one model.
 *
 * exact_exponential uses the entrywise exponential for diagonal generators,
 * a cached dense exp(L dt) for dim <= kDenseExpmDimLimit, and otherwise the
 * action exp(L dt) rho from a Taylor series on substeps short against a
 * spectral bound of L.
 * adaptive_rk integrates rho directly (rtol 1e-10, atol 1e-12).
 * Every output is re-symmetrized and checked; deviations beyond 1e-8 raise
 * IntegrationError.
 */
class Propagator {
 public:
  Propagator(const LindbladModel& model, Method method, OdeOptions options = {});

  /// times must be ascending with times[0] >= 0; rho0 is the state at t = 0.
  Trajectory run(const DensityMatrix& rho0, std::span<const double> times);

  /// The method actually used after the large-dimension fallback.
  Method effective_method() const { return effective_; }
  const Generator& generator() const { return gen_; }

 private:
  const Matrix& step_matrix(double dt);
  Matrix exp_action(const Matrix& rho, double dt) const;

  Generator gen_;
  Method effective_;
  OdeOptions options_;
  Matrix dense_;  // superoperator, only for the dense exact path
  double bound_ = 0.0;  // 2 ||G|| + sum gamma ||L||^2 >= ||L|| as a map
  std::vector<std::pair<double, Matrix>> step_cache_;
};

Trajectory propagate(const LindbladModel& model, const DensityMatrix& rho0,
                     std::span<const double> times, Method method = Method::exact_exponential);

std::pair<std::vector<double>, std::vector<double>> purity_trajectory(const Trajectory& traj);

struct StationarySet {
  std::vector<DensityMatrix> states;
  Eigen::Index null_dimension = 0;
  /// Set when no null vector was detected; a finite-dimensional generator always has one.
  bool detection_failed = false;
};

/**
 * Null space of L (singular values below tol * ||L||) turned into stationary
 * density matrices. Hermitian null vectors are split into positive and
 * negative parts, both of which are fixed points of a trace-preserving
 * positive semigroup; a linearly independent subset, purest first, is kept.
 */
StationarySet stationary_states(const LindbladModel& model, double tol = 1e-10);

/// ||L[I/d]|| < tol * ||L||
bool is_unital(const LindbladModel& model, double tol = 1e-10);

}  // namespace ppsd
