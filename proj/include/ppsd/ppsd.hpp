#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ppsd/core.hpp"
#include "ppsd/hilbert.hpp"
#include "ppsd/lindblad.hpp"

namespace ppsd {

enum class Verdict { ppsd_trajectory, stationary_only, no_ppsd };

const char* to_string(Verdict v);

struct PpsdReport {
  double residual = 0.0;  ///< purity-loss rate at `state`
  StateVector state;
  bool is_stationary = false;
  double consistency_gap = 0.0;    ///< max trace distance, pure path vs Liouvillian path
  double max_impurity = 0.0;       ///< max 1 - tr(rho(t)^2) along the Liouvillian path
  double max_path_residual = 0.0;  ///< max residual along the pure path
  Verdict verdict = Verdict::no_ppsd;
};

struct SearchConfig {
  int n_restarts = 64;
  std::uint64_t seed = 0;
  /// Absolute residual threshold; unset means 1e-9 * residual_scale(model).
  std::optional<double> residual_tol;
  int max_iterations = 400;  ///< simplex iterations per restart
  int polish_iterations = 4000;
  double dedupe_fidelity = 0.99;
  double stationarity_tol = 1e-6;  ///< on ||L[|psi><psi|]|| / ||L||
  double consistency_tol = 1e-6;   ///< on the trace-distance gap
  int consistency_steps = 20;

  void validate() const;
};

/**
 * Sum_i gamma_i (<L_i^+ L_i> - <L_i><L_i^+>), the instantaneous purity-loss
 * rate of |psi><psi| divided by two. Zero is necessary for the state to stay pure.
 */
double ppsd_residual(const LindbladModel& model, const StateVector& psi);

/// Per-term contributions gamma_i (||L_i psi||^2 - |<L_i>|^2), in model order.
std::vector<double> residual_terms(const LindbladModel& model, const StateVector& psi);

/// sum_i gamma_i ||L_i||^2; the natural scale of the residual.
double residual_scale(const LindbladModel& model);

/// H + i sum_i gamma_i (<L_i^+> L_i - <L_i^+ L_i>/2 - L_i^+ L_i / 2)
Operator effective_hamiltonian(const LindbladModel& model, const StateVector& psi);

struct PureTrajectory {
  std::vector<double> times;
  std::vector<StateVector> states;
  /// Largest |norm - 1| accumulated per unit time before renormalization.
  double max_norm_drift_rate = 0.0;
};

/**
 * Integrates d psi/dt = -i H_eff(psi) psi with adaptive Runge-Kutta.
 *
 * The radial component (whose rate is exactly ppsd_residual) is removed from
 * the right-hand side, so the ray |psi><psi| follows the purity-preserving
 * equation while the norm only drifts by integration error. psi is
 * renormalized after every accepted step; a per-step drift above 1e-3 raises
 * IntegrationError.
 */
PureTrajectory evolve_pure_nonlinear(const LindbladModel& model, const StateVector& psi0,
                                     std::span<const double> times);

/**
 * Runs the pure nonlinear evolution and the Liouvillian evolution of
 * |psi0><psi0| on t_k = k t_max / n_steps and compares them.
 *
 * tol is dimensionless: the residual passes below tol * residual_scale,
 * the gap below tol, stationarity below tol relative to ||L||.
 */
PpsdReport consistency_check(const LindbladModel& model, const StateVector& psi0, double t_max,
                             int n_steps, double tol);

/**
 * Multi-start minimization of ppsd_residual over the unit sphere.
 *
 * Restart r starts from a perturbed basis vector (even r, cycling through the
 * basis) or a Haar-random state (odd r), runs a downhill simplex on the
 * 2*dim real coordinates and polishes with projected gradient descent.
 * Hits below the residual tolerance are ordered by (residual, amplitudes),
 * deduplicated by fidelity and classified; non-stationary hits are
 * consistency-checked over one residual time scale.
 */
std::vector<PpsdReport> ppsd_search(const LindbladModel& model, const SearchConfig& config);

/// Minimum residual found by the same multi-start descent (no filtering).
double ppsd_min_residual(const LindbladModel& model, const SearchConfig& config);

struct UnravelingResult {
  double max_residual = 0.0;
  std::vector<double> residuals;  ///< per time sample
};

/**
 * Checks a candidate decomposition rho(t) = sum_k p_k(t) |psi_k(t)><psi_k(t)|
 * against the master equation: at each sample the spectral norm of
 * L[rho(t)] - d rho/dt, the derivative taken by three-point finite differences.
 *
 * weights[k][j] = p_k(t_j); trajectories[k][j] = psi_k(t_j).
 */
UnravelingResult unraveling_check(const LindbladModel& model,
                                  const std::vector<std::vector<double>>& weights,
                                  const std::vector<std::vector<StateVector>>& trajectories,
                                  std::span<const double> times);

/// Candidate given as functions of time; sampled on a grid that is doubled until
/// the maximal residual is stable to two significant digits.
double unraveling_check_refined(const LindbladModel& model,
                                const std::function<std::vector<double>(double)>& weights,
                                const std::function<std::vector<StateVector>(double)>& states,
                                double t0, double t1, int initial_points = 9);

struct HistoryChain {
  std::vector<double> times;
  std::vector<Operator> projectors;
  std::vector<StateVector> chain_states;  ///< normalized state after each projection
  double chain_weight = 1.0;              ///< ||P_n ... P_1 psi0||^2
};

/// Throws InvariantError unless every projector is Hermitian, idempotent and rank one.
HistoryChain history_chain(const StateVector& psi0, std::span<const double> times,
                           const std::vector<Operator>& projectors);

}  // namespace ppsd
