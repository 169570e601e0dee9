#include "ppsd/models.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include <Eigen/Eigenvalues>

#include "ppsd/parallel.hpp"
#include "ppsd/ppsd.hpp"

namespace ppsd {

namespace {

const std::vector<ModelInfo>& catalog_table() {
  static const std::vector<ModelInfo> table = {
      {ModelName::dephasing_qubit, "qubit dephasing, L = Z", "measurement of the Z Pauli observable",
       {{"gamma", "1/time", std::nullopt}}, "2; basis (|1>, |0>)", true},
      {ModelName::position_decoherence, "position measurement on a grid, L = x (double-commutator rate 2 gamma)",
       "position decoherence of a continuous variable", {{"gamma", "1/(time length^2)", std::nullopt}},
       "grid [-5, 5] x 128", true},
      {ModelName::thermal_qubit, "thermally damped qubit, L = sigma_-, sigma_+",
       "homogeneous Markovian master equation of a two-level system",
       {{"gamma0", "1/time", std::nullopt}, {"N", "mean number of quanta", std::nullopt}},
       "2; basis (|+>, |->)", false},
      {ModelName::damped_oscillator, "thermally damped harmonic oscillator, L = a, a_dag",
       "widely used master equation of a damped oscillator",
       {{"gamma0", "1/time", std::nullopt}, {"N", "mean number of quanta", std::nullopt},
        {"omega", "1/time", 0.0}},
       "40 Fock levels", false},
      {ModelName::three_level_atom, "three-level atom in a thermal field, L = sigma_ij",
       "quantum-optical master equation of a three-level atom",
       {{"gamma1", "1/time", std::nullopt}, {"gamma2", "1/time", std::nullopt},
        {"N1", "mean number of quanta", std::nullopt}, {"N2", "mean number of quanta", std::nullopt}},
       "3; basis (|1>, |2>, |3>)", false},
      {ModelName::multimode, "uncoupled damped normal modes", "mutually uncoupled normal coordinates",
       {{"modes", "count (1-3)", 2.0}, {"gamma1", "1/time", 1.0}, {"N1", "mean number of quanta", 0.0},
        {"gamma2", "1/time", 1.0}, {"N2", "mean number of quanta", 0.0}, {"gamma3", "1/time", 1.0},
        {"N3", "mean number of quanta", 0.0}},
       "4 Fock levels per mode", false},
      {ModelName::phase_damped_oscillator, "phase-damped oscillator, H = omega0 N, L = N",
       "phase damped harmonic oscillator", {{"gamma", "1/time", std::nullopt}, {"omega0", "1/time", 1.0}},
       "10 Fock levels", true},
      {ModelName::depolarizing, "generalized depolarizing channel, L = X, Y, Z",
       "generalized one-qubit depolarizing channel",
       {{"gamma_x", "1/time", std::nullopt}, {"gamma_y", "1/time", std::nullopt},
        {"gamma_z", "1/time", std::nullopt}},
       "2; basis (|0>, |1>)", true},
      {ModelName::squeezed_vacuum_decay, "qubit in a squeezed vacuum, L = cosh r |e><g| + e^(i theta) sinh r |g><e|",
       "two-level system in a squeezed field vacuum",
       {{"gamma0", "1/time", std::nullopt}, {"r", "squeezing", std::nullopt}, {"theta", "rad", 0.0}},
       "2; basis (|e>, |g>)", false},
      {ModelName::nonadiabatic_driven, "driven damped oscillator at frozen parameters, L = F_+, F_-",
       "externally driven damped harmonic oscillator",
       {{"m", "mass", 1.0}, {"omega0", "1/time", 1.0}, {"kappa", "1/time", 1.0}, {"mu", "1/time", 0.0},
        {"xi", "dimensionless", 1.0}, {"gamma", "1/time", 1.0}, {"alpha", "energy", 0.0},
        {"kT", "energy", 1.0}},
       "40 Fock levels", false},
      {ModelName::walls_collet_milburn, "measured object, L = N with rate epsilon^2 / gamma",
       "master equation for the object of measurement",
       {{"epsilon", "1/time", std::nullopt}, {"gamma", "1/time", std::nullopt}}, "10 Fock levels", true},
      {ModelName::grw, "spontaneous localization, Gaussian jump family on a grid",
       "Ghirardi-Rimini-Weber master equation",
       {{"lambda", "1/time", std::nullopt}, {"alpha", "1/length^2", std::nullopt}}, "grid [-5, 5] x 128", true},
      {ModelName::csl, "continuous spontaneous localization, 2 sites x 2 modes, L = N_i^(k)",
       "bosonic number operators of continuous spontaneous localization", {{"lambda", "1/time", std::nullopt}},
       "2 levels per site and mode (dim 16)", true},
  };
  return table;
}

/// Parameter lookup with defaults, rejecting unknown keys.
class Params {
 public:
  explicit Params(const ModelSpec& spec) : info_(model_info(spec.name)), values_(spec.params) {
    for (const auto& [k, v] : values_) {
      const auto it = std::find_if(info_.params.begin(), info_.params.end(),
                                   [&](const ParamInfo& p) { return p.key == k; });
      if (it == info_.params.end()) {
        throw InputError(std::string(to_string(spec.name)) + ": unknown parameter '" + k + "'");
      }
      if (!std::isfinite(v)) throw InputError(std::string(to_string(spec.name)) + ": parameter '" + k + "' is not finite");
    }
  }

  double get(const std::string& key) const {
    if (const auto it = values_.find(key); it != values_.end()) return it->second;
    for (const auto& p : info_.params) {
      if (p.key == key && p.default_value) return *p.default_value;
    }
    throw InputError(std::string(to_string(info_.name)) + ": missing parameter '" + key + "'");
  }

  double rate(const std::string& key) const {
    const double v = get(key);
    if (v < 0.0) throw InputError(std::string(to_string(info_.name)) + ": '" + key + "' must be >= 0");
    return v;
  }

  double positive(const std::string& key) const {
    const double v = get(key);
    if (!(v > 0.0)) throw InputError(std::string(to_string(info_.name)) + ": '" + key + "' must be > 0");
    return v;
  }

 private:
  const ModelInfo& info_;
  const std::map<std::string, double>& values_;
};

Eigen::Index default_dim(ModelName name) {
  switch (name) {
    case ModelName::damped_oscillator:
    case ModelName::nonadiabatic_driven:
      return 40;
    case ModelName::phase_damped_oscillator:
    case ModelName::walls_collet_milburn:
      return 10;
    case ModelName::multimode:
      return 4;
    case ModelName::csl:
      return 2;
    default:
      return 0;
  }
}

Eigen::Index fock_dim(const ModelSpec& spec) {
  const Eigen::Index d = spec.dim.value_or(default_dim(spec.name));
  if (d < 2) throw InputError(std::string(to_string(spec.name)) + ": dim must be >= 2");
  return d;
}

GridSpec model_grid(const ModelSpec& spec) {
  const GridSpec g = spec.grid.value_or(GridSpec{});
  try {
    g.validate(8);
  } catch (const InvariantError& e) {
    throw InputError(std::string(to_string(spec.name)) + ": " + e.what());
  }
  return g;
}

int mode_count(const Params& p) {
  const double m = p.get("modes");
  if (m != std::floor(m) || m < 1 || m > 3) throw InputError("multimode: modes must be 1, 2 or 3");
  return static_cast<int>(m);
}

void add_term(std::vector<LindbladTerm>& terms, double rate, Operator op, std::string label) {
  if (rate > 0.0) terms.push_back({rate, std::move(op), std::move(label)});
}

Operator zero(Eigen::Index d) { return Operator::Zero(d, d); }

LindbladModel build_grw(const ModelSpec& spec, const Params& p) {
  const double lambda = p.rate("lambda");
  const double alpha = p.positive("alpha");
  const GridSpec grid = model_grid(spec);
  const RealVector x = grid.points();
  const double h = grid.spacing();
  const Eigen::Index d = grid.n_points;

  // The s-integral runs over the whole line; the quadrature extends past the grid
  // until the Gaussian tails are negligible.
  const double margin = 6.0 / std::sqrt(alpha);
  const int extra = static_cast<int>(std::ceil(margin / h));
  const double s0 = grid.x_min - extra * h;
  const int n_s = d + 2 * extra;
  const double norm = std::sqrt(alpha / std::numbers::pi);

  RealVector check = RealVector::Zero(d);
  std::vector<LindbladTerm> terms;
  terms.reserve(static_cast<std::size_t>(n_s));
  for (int k = 0; k < n_s; ++k) {
    const double s = s0 + k * h;
    const double w = (k == 0 || k == n_s - 1) ? 0.5 * h : h;
    const RealVector g = (-0.5 * alpha * (x.array() - s).square()).exp();
    check += norm * w * g.cwiseAbs2();
    if (g.maxCoeff() < 1e-30) continue;
    terms.push_back({lambda * norm * w, Operator(g.cast<Complex>().asDiagonal()), "s=" + std::to_string(s)});
  }
  const double defect = (check.array() - 1.0).abs().maxCoeff();
  if (defect > 1e-9) {
    throw InputError("grw: grid spacing " + std::to_string(h) + " too coarse for alpha = " + std::to_string(alpha) +
                     " (quadrature defect " + std::to_string(defect) + ")");
  }
  if (lambda == 0.0) terms.clear();
  return make_model(zero(d), std::move(terms), "grw",
                    "grid position basis; s-quadrature with spacing equal to the grid spacing");
}

}  // namespace

const char* to_string(ModelName name) {
  switch (name) {
    case ModelName::dephasing_qubit: return "dephasing_qubit";
    case ModelName::position_decoherence: return "position_decoherence";
    case ModelName::thermal_qubit: return "thermal_qubit";
    case ModelName::damped_oscillator: return "damped_oscillator";
    case ModelName::three_level_atom: return "three_level_atom";
    case ModelName::multimode: return "multimode";
    case ModelName::phase_damped_oscillator: return "phase_damped_oscillator";
    case ModelName::depolarizing: return "depolarizing";
    case ModelName::squeezed_vacuum_decay: return "squeezed_vacuum_decay";
    case ModelName::nonadiabatic_driven: return "nonadiabatic_driven";
    case ModelName::walls_collet_milburn: return "walls_collet_milburn";
    case ModelName::grw: return "grw";
    case ModelName::csl: return "csl";
  }
  return "unknown";
}

ModelName model_name_from_string(const std::string& s) {
  for (const auto& info : catalog_table()) {
    if (s == to_string(info.name)) return info.name;
  }
  throw InputError("unknown model '" + s + "'");
}

void ThermalParams::validate() const {
  if (!(gamma0 > 0.0)) throw InputError("ThermalParams: gamma0 must be > 0");
  if (!(N >= 0.0)) throw InputError("ThermalParams: N must be >= 0");
}

const std::vector<ModelInfo>& model_catalog() { return catalog_table(); }

const ModelInfo& model_info(ModelName name) {
  return catalog_table()[static_cast<std::size_t>(name)];
}

Eigen::Index model_dimension(const ModelSpec& spec) {
  switch (spec.name) {
    case ModelName::dephasing_qubit:
    case ModelName::thermal_qubit:
    case ModelName::depolarizing:
    case ModelName::squeezed_vacuum_decay:
      return 2;
    case ModelName::three_level_atom:
      return 3;
    case ModelName::position_decoherence:
    case ModelName::grw:
      return model_grid(spec).n_points;
    case ModelName::multimode: {
      const int modes = mode_count(Params(spec));
      Eigen::Index d = 1;
      for (int k = 0; k < modes; ++k) d *= fock_dim(spec);
      return d;
    }
    case ModelName::csl: {
      const Eigen::Index f = fock_dim(spec);
      return f * f * f * f;
    }
    default:
      return fock_dim(spec);
  }
}

LindbladModel catalog_model(const ModelSpec& spec) {
  const Params p(spec);
  const std::string name = to_string(spec.name);

  switch (spec.name) {
    case ModelName::dephasing_qubit: {
      const auto s = pauli_operators();
      std::vector<LindbladTerm> terms;
      add_term(terms, p.rate("gamma"), s.z, "Z");
      return make_model(zero(2), std::move(terms), name, "basis (|1>, |0>), Z = diag(1, -1)");
    }
    case ModelName::position_decoherence: {
      const GridSpec grid = model_grid(spec);
      std::vector<LindbladTerm> terms;
      add_term(terms, 2.0 * p.rate("gamma"), position_operator(grid), "x");
      return make_model(zero(grid.n_points), std::move(terms), name,
                        "grid position basis; rate 2 gamma so off-diagonals decay as exp(-gamma t (x - x')^2)");
    }
    case ModelName::thermal_qubit: {
      const ThermalParams th{p.get("gamma0"), p.get("N")};
      th.validate();
      const auto s = pauli_operators();
      std::vector<LindbladTerm> terms;
      add_term(terms, th.gamma0 * (th.N + 1.0), s.minus, "sigma_-");
      add_term(terms, th.gamma0 * th.N, s.plus, "sigma_+");
      return make_model(zero(2), std::move(terms), name, "basis (|+>, |->), sigma_- = |-><+|, ground |->");
    }
    case ModelName::damped_oscillator: {
      const ThermalParams th{p.get("gamma0"), p.get("N")};
      th.validate();
      const auto f = fock_operators(fock_dim(spec));
      std::vector<LindbladTerm> terms;
      add_term(terms, th.gamma0 * (th.N + 1.0), f.a, "a");
      add_term(terms, th.gamma0 * th.N, f.a_dag, "a_dag");
      return make_model(p.get("omega") * f.n, std::move(terms), name, "Fock basis |0>, |1>, ...");
    }
    case ModelName::three_level_atom: {
      const double g1 = p.rate("gamma1"), g2 = p.rate("gamma2");
      const double n1 = p.rate("N1"), n2 = p.rate("N2");
      auto sigma = [](int i, int j) {
        Operator s = zero(3);
        s(i, j) = 1.0;
        return s;
      };
      std::vector<LindbladTerm> terms;
      add_term(terms, g1 * (n1 + 1.0), sigma(0, 2), "sigma_13");
      add_term(terms, g1 * n1, sigma(2, 0), "sigma_31");
      add_term(terms, g2 * (n2 + 1.0), sigma(1, 2), "sigma_23");
      add_term(terms, g2 * n2, sigma(2, 1), "sigma_32");
      return make_model(zero(3), std::move(terms), name, "basis (|1>, |2>, |3>) ascending in energy, sigma_ij = |i><j|");
    }
    case ModelName::multimode: {
      const int modes = mode_count(p);
      const Eigen::Index md = fock_dim(spec);
      const std::vector<Eigen::Index> dims(static_cast<std::size_t>(modes), md);
      const auto f = fock_operators(md);
      std::vector<LindbladTerm> terms;
      Eigen::Index d = 1;
      for (int k = 0; k < modes; ++k) d *= md;
      for (int k = 0; k < modes; ++k) {
        const std::string idx = std::to_string(k + 1);
        const ThermalParams th{p.get("gamma" + idx), p.get("N" + idx)};
        if (th.gamma0 < 0.0 || th.N < 0.0) throw InputError("multimode: rates and N must be >= 0");
        const auto site = static_cast<std::size_t>(k);
        add_term(terms, th.gamma0 * (th.N + 1.0), embed(f.a, site, dims), "mode" + idx + ":a");
        add_term(terms, th.gamma0 * th.N, embed(f.a_dag, site, dims), "mode" + idx + ":a_dag");
      }
      return make_model(zero(d), std::move(terms), name, "tensor product of Fock bases, mode 1 most significant");
    }
    case ModelName::phase_damped_oscillator: {
      const auto f = fock_operators(fock_dim(spec));
      std::vector<LindbladTerm> terms;
      add_term(terms, p.rate("gamma"), f.n, "N");
      return make_model(p.get("omega0") * f.n, std::move(terms), name, "Fock basis |0>, |1>, ...");
    }
    case ModelName::depolarizing: {
      const auto s = pauli_operators();
      std::vector<LindbladTerm> terms;
      add_term(terms, p.rate("gamma_x"), s.x, "X");
      add_term(terms, p.rate("gamma_y"), s.y, "Y");
      add_term(terms, p.rate("gamma_z"), s.z, "Z");
      return make_model(zero(2), std::move(terms), name, "basis (|0>, |1>), Z = diag(1, -1)");
    }
    case ModelName::squeezed_vacuum_decay: {
      const double r = p.get("r");
      if (r < 0.0) throw InputError("squeezed_vacuum_decay: r must be >= 0");
      std::vector<LindbladTerm> terms;
      add_term(terms, p.rate("gamma0"), squeezed_jump_operator(r, p.get("theta")), "C");
      return make_model(zero(2), std::move(terms), name,
                        "basis (|e>, |g>), C = cosh r |e><g| + e^(i theta) sinh r |g><e|");
    }
    case ModelName::nonadiabatic_driven: {
      NonadiabaticParams np = NonadiabaticParams::from(spec.params);
      np.validate();
      const Eigen::Index d = fock_dim(spec);
      const Operator fp = nonadiabatic_f_plus(np, d);
      const double base = np.xi * np.xi * np.gamma;
      std::vector<LindbladTerm> terms;
      add_term(terms, base, fp, "F_+");
      add_term(terms, base * std::exp(-np.alpha / np.kT), fp.adjoint(), "F_-");
      return make_model(np.omega0 * fock_operators(d).n, std::move(terms), name,
                        "Fock basis of the frequency-omega0 oscillator, hbar = 1");
    }
    case ModelName::walls_collet_milburn: {
      const double eps = p.get("epsilon");
      const double g = p.positive("gamma");
      std::vector<LindbladTerm> terms;
      add_term(terms, eps * eps / g, fock_operators(fock_dim(spec)).n, "N");
      return make_model(zero(fock_dim(spec)), std::move(terms), name, "Fock basis |0>, |1>, ...");
    }
    case ModelName::grw:
      return build_grw(spec, p);
    case ModelName::csl: {
      const double lambda = p.rate("lambda");
      const Eigen::Index f = fock_dim(spec);
      const std::vector<Eigen::Index> dims(4, f);
      const Operator n = fock_operators(f).n;
      std::vector<LindbladTerm> terms;
      for (std::size_t site = 0; site < 2; ++site) {
        for (std::size_t mode = 0; mode < 2; ++mode) {
          add_term(terms, lambda, embed(n, 2 * site + mode, dims),
                   "N_" + std::to_string(site + 1) + "^(" + std::to_string(mode + 1) + ")");
        }
      }
      return make_model(zero(f * f * f * f), std::move(terms), name,
                        "factors (site1 mode1, site1 mode2, site2 mode1, site2 mode2), Fock basis each");
    }
  }
  throw InputError("unknown model");
}

StateVector ground_state(const ModelSpec& spec) {
  const Eigen::Index d = model_dimension(spec);
  switch (spec.name) {
    case ModelName::dephasing_qubit:
    case ModelName::thermal_qubit:
    case ModelName::squeezed_vacuum_decay:
      return StateVector::basis(2, 1);
    case ModelName::position_decoherence:
    case ModelName::grw:
      return StateVector::basis(d, d / 2);
    default:
      return StateVector::basis(d, 0);
  }
}

DensityMatrix dephasing_closed_form(const DensityMatrix& rho0, double gamma, double t) {
  require_same_dim(rho0.dim(), 2, "dephasing_closed_form");
  Matrix m = rho0.matrix();
  const double f = std::exp(-2.0 * gamma * t);
  m(0, 1) *= f;
  m(1, 0) *= f;
  return DensityMatrix(m);
}

DensityMatrix position_closed_form(const DensityMatrix& rho0, const GridSpec& grid, double gamma, double t) {
  grid.validate(2);
  require_same_dim(rho0.dim(), grid.n_points, "position_closed_form");
  const RealVector x = grid.points();
  Matrix m = rho0.matrix();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) m(i, j) *= std::exp(-gamma * t * std::pow(x(i) - x(j), 2));
  }
  return DensityMatrix(m);
}

std::vector<double> thermal_qubit_ppsd_roots(double N) {
  if (!(N >= 0.0)) throw InputError("thermal_qubit_ppsd_roots: N must be >= 0");
  const double a = 2.0 * N + 1.0, b = -2.0 * N, c = N;
  const double disc = b * b - 4.0 * a * c;  // = -4 (N^2 + N)
  std::vector<double> roots;
  if (disc < 0.0) return roots;
  const double s = std::sqrt(disc);
  for (double p : {(-b - s) / (2.0 * a), (-b + s) / (2.0 * a)}) {
    if (p >= 0.0 && p <= 1.0 && (roots.empty() || roots.back() != p)) roots.push_back(p);
  }
  return roots;
}

double three_level_ppsd_condition(double p1, double p2, double p3, double gamma1, double gamma2, double N1,
                                  double N2) {
  if (p1 < 0.0 || p2 < 0.0 || p3 < 0.0 || std::abs(p1 + p2 + p3 - 1.0) > 1e-10) {
    throw InputError("three_level_ppsd_condition: (p1, p2, p3) is not on the probability simplex");
  }
  return gamma1 * (N1 + 1.0) * p3 * (1.0 - p1) + gamma1 * N1 * p1 * (1.0 - p3) +
         gamma2 * (N2 + 1.0) * p3 * (1.0 - p2) + gamma2 * N2 * p2 * (1.0 - p3);
}

namespace {

/// Coefficients of the condition as a quadratic in p1 with p3 = 1 - p1 - p2.
std::array<double, 3> three_level_quadratic(double p2, double g1, double g2, double n1, double n2) {
  const double q = 1.0 - p2;
  const double a = g1 * (n1 + 1.0) + g1 * n1;
  const double b = -g1 * (n1 + 1.0) * (q + 1.0) + g1 * n1 * p2 - g2 * (n2 + 1.0) * (1.0 - p2) + g2 * n2 * p2;
  const double c = g1 * (n1 + 1.0) * q + g2 * (n2 + 1.0) * (1.0 - p2) * q + g2 * n2 * p2 * p2;
  return {a, b, c};
}

double discriminant(double p2, double g1, double g2, double n1, double n2) {
  const auto [a, b, c] = three_level_quadratic(p2, g1, g2, n1, n2);
  return b * b - 4.0 * a * c;
}

}  // namespace

std::vector<FeasibilityRow> three_level_feasibility_scan(double gamma1, double gamma2, double N1, double N2,
                                                         std::span<const double> p2_grid) {
  std::vector<FeasibilityRow> rows(p2_grid.size());
  parallel_for(rows.size(), [&](std::size_t k) {
    FeasibilityRow row{p2_grid[k], {}, {}};
    const auto [a, b, c] = three_level_quadratic(row.p2, gamma1, gamma2, N1, N2);
    if (a == 0.0) {
      if (b != 0.0) row.p1_roots.push_back(-c / b);
    } else {
      const double disc = b * b - 4.0 * a * c;
      if (disc >= 0.0) {
        // Stable form avoids cancellation in the smaller root.
        const double q = -0.5 * (b + std::copysign(std::sqrt(disc), b));
        double r1 = q / a;
        double r2 = q != 0.0 ? c / q : r1;
        if (r1 > r2) std::swap(r1, r2);
        row.p1_roots = {r1, r2};
      }
    }
    for (double p1 : row.p1_roots) row.p1_plus_p2.push_back(p1 + row.p2);
    rows[k] = std::move(row);
  });
  return rows;
}

std::optional<double> three_level_min_feasible_p2(double gamma1, double gamma2, double N1, double N2) {
  constexpr int n = 4000;
  double prev = 0.0;
  if (discriminant(0.0, gamma1, gamma2, N1, N2) >= 0.0) return 0.0;
  for (int k = 1; k <= n; ++k) {
    const double p2 = static_cast<double>(k) / n;
    if (discriminant(p2, gamma1, gamma2, N1, N2) >= 0.0) {
      double lo = prev, hi = p2;
      for (int it = 0; it < 100; ++it) {
        const double mid = 0.5 * (lo + hi);
        (discriminant(mid, gamma1, gamma2, N1, N2) >= 0.0 ? hi : lo) = mid;
      }
      return hi;
    }
    prev = p2;
  }
  return std::nullopt;
}

std::array<double, 2> three_level_p3_zero_solution(double gamma1, double gamma2, double N1, double N2) {
  // With p3 = 0 the condition is gamma1 N1 p1 + gamma2 N2 p2 = 0 on p1 + p2 = 1.
  const double denom = gamma1 * N1 - gamma2 * N2;
  if (denom == 0.0) throw InputError("three_level_p3_zero_solution: degenerate parameters");
  const double p1 = -gamma2 * N2 / denom;
  return {p1, 1.0 - p1};
}

double squeezed_ground_weight(double r) {
  if (!(r > 0.0)) throw InputError("squeezed_ground_weight: r must be > 0");
  return 1.0 / (1.0 + 1.0 / std::tanh(r));
}

Operator squeezed_jump_operator(double r, double theta) {
  Operator c = Operator::Zero(2, 2);
  c(0, 1) = std::cosh(r);
  c(1, 0) = std::polar(std::sinh(r), theta);
  return c;
}

StateVector squeezed_ppsd_state(double r, double theta) {
  const double pg = squeezed_ground_weight(r);
  Vector v(2);
  v(0) = std::polar(std::sqrt(1.0 - pg), -0.5 * theta);
  v(1) = std::sqrt(pg);
  return StateVector::normalized(v);
}

std::array<double, 3> squeezed_bloch_solution_theta(const std::array<double, 3>& n0, double gamma, double r,
                                                    double theta, double t) {
  // Transverse generator (gamma/2)(-cosh 2r I + sinh 2r R) with R a reflection, R^2 = I.
  const double c2 = std::cosh(2.0 * r), s2 = std::sinh(2.0 * r);
  const double ct = std::cos(theta), st = std::sin(theta);
  const double fast = std::exp(-0.5 * gamma * t * (c2 + s2));
  const double slow = std::exp(-0.5 * gamma * t * (c2 - s2));
  const double sum = 0.5 * (slow + fast), diff = 0.5 * (slow - fast);
  const double nx = sum * n0[0] + diff * (ct * n0[0] + st * n0[1]);
  const double ny = sum * n0[1] + diff * (st * n0[0] - ct * n0[1]);
  const double decay = std::exp(-gamma * t * c2);
  const double nz = decay * n0[2] + (1.0 - decay) / c2;
  return {nx, ny, nz};
}

std::array<double, 3> squeezed_bloch_solution(const std::array<double, 3>& n0, double gamma, double r,
                                              double delta, double t) {
  return squeezed_bloch_solution_theta(n0, gamma, r, -2.0 * delta, t);
}

std::array<double, 3> squeezed_initial_bloch(double p_e, double delta) {
  if (!(p_e >= 0.0 && p_e <= 1.0)) throw InputError("squeezed_initial_bloch: p_e must lie in [0, 1]");
  const double amp = 2.0 * std::sqrt(p_e * (1.0 - p_e));
  return {amp * std::cos(delta), -amp * std::sin(delta), 2.0 * p_e - 1.0};
}

std::vector<PurityPoint> fig3_purity_curve(double gamma0, double r, double theta, double delta,
                                           std::span<const double> times) {
  const double p_e = 1.0 - squeezed_ground_weight(r);
  const auto n0 = squeezed_initial_bloch(p_e, delta);
  std::vector<PurityPoint> out;
  out.reserve(times.size());
  for (double t : times) {
    const auto n = squeezed_bloch_solution_theta(n0, gamma0, r, theta, t);
    out.push_back({t, n[0] * n[0] + n[1] * n[1] + n[2] * n[2]});
  }
  return out;
}

NonadiabaticParams NonadiabaticParams::from(const std::map<std::string, double>& params) {
  ModelSpec spec{ModelName::nonadiabatic_driven, params, std::nullopt, std::nullopt};
  const Params p(spec);
  return {p.get("m"), p.get("omega0"), p.get("kappa"), p.get("mu"),
          p.get("xi"), p.get("gamma"), p.get("alpha"), p.get("kT")};
}

void NonadiabaticParams::validate() const {
  if (!(m > 0.0) || !(omega0 > 0.0) || !(kappa > 0.0)) {
    throw InputError("nonadiabatic_driven: m, omega0 and kappa must be > 0");
  }
  if (gamma < 0.0 || alpha < 0.0) throw InputError("nonadiabatic_driven: gamma and alpha must be >= 0");
  if (!(kT > 0.0)) throw InputError("nonadiabatic_driven: kT must be > 0");
}

Operator nonadiabatic_f_plus(const NonadiabaticParams& p, Eigen::Index dim) {
  p.validate();
  const auto f = fock_operators(dim);
  const Operator x = std::sqrt(1.0 / (2.0 * p.m * p.omega0)) * (f.a + f.a_dag);
  const Operator mom = kI * std::sqrt(p.m * p.omega0 / 2.0) * (f.a_dag - f.a);
  const Complex A = 0.5 * Complex(1.0, p.mu / p.kappa);
  const Complex B = kI / (p.m * p.omega0 * p.kappa);
  return A * x + B * mom;
}

ResidualBound nonadiabatic_residual_bound(const NonadiabaticParams& p, const StateVector& psi) {
  p.validate();
  std::map<std::string, double> params = {{"m", p.m},         {"omega0", p.omega0}, {"kappa", p.kappa},
                                          {"mu", p.mu},       {"xi", p.xi},         {"gamma", p.gamma},
                                          {"alpha", p.alpha}, {"kT", p.kT}};
  const LindbladModel model = catalog_model({ModelName::nonadiabatic_driven, params, psi.dim(), std::nullopt});
  const double bound = p.xi * p.xi * p.gamma * std::exp(-p.alpha / p.kT) / (p.m * p.omega0 * p.kappa);
  return {ppsd_residual(model, psi), bound};
}

DensityMatrix grw_closed_form(const DensityMatrix& rho0, const GridSpec& grid, double lambda, double alpha,
                              double t) {
  grid.validate(2);
  require_same_dim(rho0.dim(), grid.n_points, "grw_closed_form");
  const RealVector x = grid.points();
  Matrix m = rho0.matrix();
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      m(i, j) *= std::exp(lambda * t * (std::exp(-alpha * std::pow(x(i) - x(j), 2) / 4.0) - 1.0));
    }
  }
  return DensityMatrix(m);
}

FixedPointResult hermitian_lindblad_fixed_points(const LindbladModel& model) {
  model.validate();
  FixedPointResult res;
  bool all_diagonal = true;
  for (const auto& t : model.terms) {
    if (!is_hermitian(t.op, 1e-12)) {
      throw InvariantError("hermitian_lindblad_fixed_points: jump operator '" + t.label + "' is not Hermitian");
    }
    const Matrix off = t.op - Matrix(t.op.diagonal().asDiagonal());
    all_diagonal = all_diagonal && off.cwiseAbs().maxCoeff() == 0.0;
  }

  auto commute = [](const Operator& a, const Operator& b) {
    const double scale = std::max(1.0, operator_norm(a) * operator_norm(b));
    return (a * b - b * a).cwiseAbs().maxCoeff() <= 1e-10 * scale;
  };
  if (!all_diagonal) {
    for (std::size_t i = 0; i < model.terms.size(); ++i) {
      for (std::size_t j = i + 1; j < model.terms.size(); ++j) {
        if (!commute(model.terms[i].op, model.terms[j].op)) {
          res.commuting = false;
          return res;
        }
      }
    }
  }

  // A generic real combination separates every joint eigenspace of a commuting family.
  const Eigen::Index d = model.dim;
  std::vector<StateVector> states;
  const bool h_diagonal = (model.hamiltonian - Matrix(model.hamiltonian.diagonal().asDiagonal())).cwiseAbs().maxCoeff() == 0.0;
  if (all_diagonal && h_diagonal) {
    for (Eigen::Index k = 0; k < d; ++k) states.push_back(StateVector::basis(d, k));
  } else {
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> u(0.5, 1.5);
    Matrix combo = Matrix::Zero(d, d);
    for (const auto& t : model.terms) combo += u(rng) * t.op / std::max(1.0, operator_norm(t.op));
    bool h_commutes = true;
    for (const auto& t : model.terms) h_commutes = h_commutes && commute(model.hamiltonian, t.op);
    if (h_commutes && model.hamiltonian.cwiseAbs().maxCoeff() > 0.0) {
      combo += std::sqrt(2.0) / 7.0 * model.hamiltonian / std::max(1.0, operator_norm(model.hamiltonian));
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (combo + combo.adjoint()));
    for (Eigen::Index k = 0; k < d; ++k) states.push_back(StateVector::normalized(es.eigenvectors().col(k)).gauge_fixed());
  }

  const Generator gen(model);
  for (auto& s : states) res.max_relative_action = std::max(res.max_relative_action, gen.relative_action(s.projector()));
  res.states = std::move(states);
  return res;
}

}  // namespace ppsd
