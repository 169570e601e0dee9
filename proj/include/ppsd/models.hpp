#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ppsd/core.hpp"
#include "ppsd/hilbert.hpp"
#include "ppsd/lindblad.hpp"

namespace ppsd {

enum class ModelName {
  dephasing_qubit,
  position_decoherence,
  thermal_qubit,
  damped_oscillator,
  three_level_atom,
  multimode,
  phase_damped_oscillator,
  depolarizing,
  squeezed_vacuum_decay,
  nonadiabatic_driven,
  walls_collet_milburn,
  grw,
  csl,
};

const char* to_string(ModelName name);
/// Throws InputError for an unknown name.
ModelName model_name_from_string(const std::string& s);

/**
 * A catalog entry plus its parameters.
 *
 * dim overrides the default truncation of Fock-space models (for multimode it
 * is the per-mode dimension); grid is used by position-space models only.
 */
struct ModelSpec {
  ModelName name = ModelName::dephasing_qubit;
  std::map<std::string, double> params;
  std::optional<Eigen::Index> dim;
  std::optional<GridSpec> grid;
};

/** Thermal bath in terms of the mean number of quanta. */
struct ThermalParams {
  double gamma0 = 1.0;
  double N = 0.0;

  void validate() const;
};

struct ParamInfo {
  std::string key;
  std::string units;
  std::optional<double> default_value;  ///< unset means required
};

struct ModelInfo {
  ModelName name;
  std::string summary;
  std::string anchor;  ///< the family of master equation the entry stands for
  std::vector<ParamInfo> params;
  std::string default_size;
  bool unital;
};

/// All 13 entries in declaration order.
const std::vector<ModelInfo>& model_catalog();
const ModelInfo& model_info(ModelName name);

/**
 * Builds the Lindblad model for a catalog entry.
 *
 * Throws InputError for missing, unknown or invalid parameters, and when the
 * GRW grid is too coarse for the requested alpha.
 */
LindbladModel catalog_model(const ModelSpec& spec);

/// Dimension catalog_model(spec) would produce.
Eigen::Index model_dimension(const ModelSpec& spec);

/**
 * The model's natural reference state: the lower qubit level, the Fock
 * vacuum, the lowest atomic level or the central grid point.
 */
StateVector ground_state(const ModelSpec& spec);

/// Off-diagonals times exp(-2 gamma t); qubit only.
DensityMatrix dephasing_closed_form(const DensityMatrix& rho0, double gamma, double t);

/// Entry (i, j) times exp(-gamma t (x_i - x_j)^2).
DensityMatrix position_closed_form(const DensityMatrix& rho0, const GridSpec& grid, double gamma, double t);

/// Real roots in [0, 1] of (2N+1) p^2 - 2N p + N = 0.
std::vector<double> thermal_qubit_ppsd_roots(double N);

/**
 * Purity-loss rate of sum_i sqrt(p_i)|i> for the thermal three-level atom:
 * gamma1 (N1+1) p3 (1-p1) + gamma1 N1 p1 (1-p3) + gamma2 (N2+1) p3 (1-p2) + gamma2 N2 p2 (1-p3).
 * Independent of the relative phases.
 */
double three_level_ppsd_condition(double p1, double p2, double p3, double gamma1, double gamma2, double N1,
                                  double N2);

struct FeasibilityRow {
  double p2;
  std::vector<double> p1_roots;     ///< real roots of the condition with p3 = 1 - p1 - p2, ascending
  std::vector<double> p1_plus_p2;
};

/// Solves the three-level condition for p1 at each p2, with p3 eliminated.
std::vector<FeasibilityRow> three_level_feasibility_scan(double gamma1, double gamma2, double N1, double N2,
                                                         std::span<const double> p2_grid);

/// Smallest p2 in [0, 1] at which a real p1 root exists (bisection on the discriminant); nullopt if none.
std::optional<double> three_level_min_feasible_p2(double gamma1, double gamma2, double N1, double N2);

/// (p1, p2) solving the condition on the edge p3 = 0.
std::array<double, 2> three_level_p3_zero_solution(double gamma1, double gamma2, double N1, double N2);

/// (1 + coth r)^(-1), the ground-level weight of the squeezed-bath candidate state.
double squeezed_ground_weight(double r);

/// Zero-residual state of the squeezed-vacuum model; basis (|e>, |g>).
StateVector squeezed_ppsd_state(double r, double theta);

/// cosh(r) |e><g| + e^(i theta) sinh(r) |g><e|
Operator squeezed_jump_operator(double r, double theta);

/**
 * Bloch vector of the squeezed-vacuum model at time t, with the squeezing
 * phase tied to the initial phase by theta = -2 delta.
 */
std::array<double, 3> squeezed_bloch_solution(const std::array<double, 3>& n0, double gamma, double r,
                                              double delta, double t);

/// Same closed form for an arbitrary squeezing phase.
std::array<double, 3> squeezed_bloch_solution_theta(const std::array<double, 3>& n0, double gamma, double r,
                                                    double theta, double t);

/// Bloch vector of sqrt(p_g)|g> + e^(i delta) sqrt(p_e)|e>.
std::array<double, 3> squeezed_initial_bloch(double p_e, double delta);

struct PurityPoint {
  double t;
  double purity;  ///< |n|^2
};

/// |n(t)|^2 starting from the candidate state's weights with phase delta.
std::vector<PurityPoint> fig3_purity_curve(double gamma0, double r, double theta, double delta,
                                           std::span<const double> times);

struct NonadiabaticParams {
  double m = 1.0;
  double omega0 = 1.0;
  double kappa = 1.0;
  double mu = 0.0;
  double xi = 1.0;
  double gamma = 1.0;
  double alpha = 0.0;
  double kT = 1.0;

  static NonadiabaticParams from(const std::map<std::string, double>& params);
  void validate() const;
};

/// F_+ = A x + B p with A = (1 + i mu/kappa)/2, B = i/(m omega0 kappa), hbar = 1.
Operator nonadiabatic_f_plus(const NonadiabaticParams& p, Eigen::Index dim);

struct ResidualBound {
  double residual;
  double bound;
};

/**
 * Residual of psi under the frozen-parameter model and the lower bound
 * xi^2 gamma e^(-alpha/kT) / (m omega0 kappa) that follows from [F_+, F_-].
 * The bound is exact for states vanishing on the two highest Fock levels.
 */
ResidualBound nonadiabatic_residual_bound(const NonadiabaticParams& p, const StateVector& psi);

/// Entry (i, j) times exp[lambda t (exp(-alpha (x_i - x_j)^2 / 4) - 1)].
DensityMatrix grw_closed_form(const DensityMatrix& rho0, const GridSpec& grid, double lambda, double alpha,
                              double t);

struct FixedPointResult {
  std::vector<StateVector> states;
  bool commuting = true;
  double max_relative_action = 0.0;
};

/**
 * Common eigenvectors of a model whose jump operators are all Hermitian.
 *
 * A generic real combination of the operators is diagonalized and the
 * eigenvectors are refined within degenerate blocks of the Hamiltonian, so
 * each returned state is an eigenvector of every L_i. Throws InvariantError
 * for a non-Hermitian jump operator; a non-commuting family yields an empty
 * list with commuting = false.
 */
FixedPointResult hermitian_lindblad_fixed_points(const LindbladModel& model);

}  // namespace ppsd
