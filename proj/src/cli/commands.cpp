#include "ppsd/cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <ostream>
#include <random>

#include <CLI11.hpp>

#include "ppsd/models.hpp"
#include "ppsd/ppsd.hpp"

namespace ppsd::cli {

namespace {

std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) out[static_cast<std::size_t>(k)] = n == 1 ? a : a + (b - a) * k / (n - 1);
  return out;
}

std::string label_of(const ModelSource& src, const LindbladModel& model) {
  return src.spec ? std::string(to_string(src.spec->name)) : model.label;
}

std::string amplitudes_text(const StateVector& s) {
  std::string out;
  for (Eigen::Index i = 0; i < s.dim(); ++i) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g:%.12g", s[i].real(), s[i].imag());
    out += (i ? ";" : "") + std::string(buf);
  }
  return out;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

Json opt(const std::vector<double>& v, std::size_t i) { return i < v.size() ? Json(v[i]) : Json(nullptr); }

}  // namespace

void RunConfig::validate() const {
  if (!(t_max > 0.0)) throw InputError("--t-max must be > 0");
  if (n_steps < 2) throw InputError("--steps must be >= 2");
  if (format != "csv" && format != "json") throw InputError("--format must be csv or json");
}

ResultRecord cmd_simulate(const RunConfig& config) {
  config.validate();
  const LindbladModel model = resolve(config.source);
  const StateVector psi = parse_state(config.state, config.source, model);
  require_same_dim(psi.dim(), model.dim, "simulate: state vs model");

  const auto times = linspace(0.0, config.t_max, config.n_steps + 1);
  Propagator prop(model, config.method);
  const Trajectory traj = prop.run(psi.density(), times);

  ResultRecord rec{.command = "simulate", .model_label = label_of(config.source, model),
                   .params = describe_params(config.source), .seed = config.seed};
  rec.columns = {"t", "purity", "trace_error", "min_eigenvalue"};
  const bool qubit = model.dim == 2;
  if (qubit) rec.columns.insert(rec.columns.end(), {"n_x", "n_y", "n_z"});
  const auto s = pauli_operators();
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Matrix& rho = traj.states[k].matrix();
    std::vector<Json> row = {times[k], traj.purities[k], std::abs(rho.trace() - 1.0), min_eigenvalue(rho)};
    if (qubit) {
      for (const Operator* p : {&s.x, &s.y, &s.z}) row.emplace_back((rho * *p).trace().real());
    }
    rec.rows.push_back(std::move(row));
  }
  rec.notes.push_back(std::string("method: ") + to_string(prop.effective_method()));
  rec.notes.push_back("state: " + config.state);
  return rec;
}

ResultRecord cmd_ppsd_check(const ModelSource& source, const std::string& state, double t_max, int n_steps,
                            double tol) {
  if (n_steps < 2) throw InputError("--steps must be >= 2");
  if (!(tol > 0.0)) throw InputError("--tol must be > 0");
  const LindbladModel model = resolve(source);
  const StateVector psi = parse_state(state, source, model);
  require_same_dim(psi.dim(), model.dim, "ppsd-check: state vs model");
  const double scale = residual_scale(model);
  if (!(t_max > 0.0)) t_max = scale > 0.0 ? 1.0 / scale : 1.0;

  const PpsdReport rep = consistency_check(model, psi, t_max, n_steps, tol);
  ResultRecord rec{.command = "ppsd-check", .model_label = label_of(source, model), .params = describe_params(source)};
  rec.columns = {"residual", "is_stationary", "consistency_gap", "max_impurity", "max_path_residual", "verdict"};
  rec.rows.push_back({rep.residual, rep.is_stationary, rep.consistency_gap, rep.max_impurity, rep.max_path_residual,
                      to_string(rep.verdict)});
  rec.notes.push_back("state: " + state);
  rec.notes.push_back("t_max: " + format_number(t_max) + ", steps: " + std::to_string(n_steps) +
                      ", tol: " + format_number(tol));
  return rec;
}

ResultRecord cmd_ppsd_search(const ModelSource& source, int restarts, std::uint64_t seed, double tol) {
  SearchConfig cfg;
  cfg.n_restarts = restarts;
  cfg.seed = seed;
  if (tol > 0.0) cfg.residual_tol = tol;
  cfg.validate();
  const LindbladModel model = resolve(source);
  const auto reports = ppsd_search(model, cfg);

  ResultRecord rec{.command = "ppsd-search", .model_label = label_of(source, model),
                   .params = describe_params(source), .seed = seed};
  rec.columns = {"index", "residual", "is_stationary", "consistency_gap", "max_path_residual", "verdict", "amplitudes"};
  for (std::size_t i = 0; i < reports.size(); ++i) {
    const auto& r = reports[i];
    rec.rows.push_back({static_cast<double>(i), r.residual, r.is_stationary, r.consistency_gap, r.max_path_residual,
                        to_string(r.verdict), amplitudes_text(r.state)});
  }
  rec.notes.push_back("restarts: " + std::to_string(restarts));
  if (reports.empty()) rec.notes.push_back("no PPSD states found");
  return rec;
}

namespace {

ResultRecord reproduce_eq3() {
  ResultRecord rec{.command = "reproduce eq3", .model_label = "dephasing_qubit", .params = "gamma=1", .seed = 7};
  const double gamma = 1.0;
  const auto model = catalog_model({ModelName::dephasing_qubit, {{"gamma", gamma}}, {}, {}});
  const auto times = linspace(0.0, 2.0, 41);
  Vector v(2);
  v << 1.0, 1.0;
  const StateVector plus = StateVector::normalized(v);
  const Trajectory traj = propagate(model, plus.density(), times);
  rec.columns = {"t", "rho10", "rho10_closed_form", "purity", "purity_closed_form"};
  double err = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const DensityMatrix cf = dephasing_closed_form(plus.density(), gamma, times[k]);
    err = std::max(err, (traj.states[k].matrix() - cf.matrix()).cwiseAbs().maxCoeff());
    rec.rows.push_back({times[k], traj.states[k](1, 0).real(), cf(1, 0).real(), traj.purities[k], purity(cf)});
  }
  std::mt19937_64 rng(7);
  for (int i = 0; i < 20; ++i) {
    const DensityMatrix rho0 = random_density(2, 1 + i % 2, rng);
    const Trajectory tr = propagate(model, rho0, times);
    for (std::size_t k = 0; k < times.size(); ++k) {
      err = std::max(err, (tr.states[k].matrix() - dephasing_closed_form(rho0, gamma, times[k]).matrix())
                              .cwiseAbs()
                              .maxCoeff());
    }
  }
  rec.add_check("closed_form_agreement", err < 1e-9, "max entrywise error " + sci(err) + " < 1e-9");
  const double p_end = traj.purities.back();
  const double expected = 0.5 * (1.0 + std::exp(-4.0 * gamma * 2.0));
  rec.add_check("purity_end", std::abs(p_end - expected) < 1e-9,
                "purity(2) = " + format_number(p_end) + " vs " + format_number(expected));
  return rec;
}

ResultRecord reproduce_eq5() {
  ResultRecord rec{.command = "reproduce eq5", .model_label = "position_decoherence", .params = "gamma=1;grid=-5:5:64"};
  const GridSpec grid{-5.0, 5.0, 64};
  const auto model = catalog_model({ModelName::position_decoherence, {{"gamma", 1.0}}, {}, grid});
  const RealVector x = grid.points();
  Vector psi = ((-(x.array() - 1.5).square() / (2 * 0.49)).exp() + (-(x.array() + 1.5).square() / (2 * 0.49)).exp())
                   .matrix()
                   .cast<Complex>();
  const StateVector s0 = StateVector::normalized(psi);
  const auto times = linspace(0.0, 1.0, 11);
  const Trajectory traj = propagate(model, s0.density(), times);
  rec.columns = {"t", "max_error", "purity", "coherence_pm1.5"};
  double err = 0.0;
  Eigen::Index ia = 0, ib = 0;
  (x.array() - 1.5).abs().minCoeff(&ia);
  (x.array() + 1.5).abs().minCoeff(&ib);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const DensityMatrix cf = position_closed_form(s0.density(), grid, 1.0, times[k]);
    const double e = (traj.states[k].matrix() - cf.matrix()).cwiseAbs().maxCoeff();
    err = std::max(err, e);
    rec.rows.push_back({times[k], e, traj.purities[k], std::abs(traj.states[k](ia, ib))});
  }
  rec.add_check("closed_form_agreement", err < 1e-8, "max entrywise error " + sci(err) + " < 1e-8");
  return rec;
}

ResultRecord reproduce_eq16() {
  ResultRecord rec{.command = "reproduce eq16", .model_label = "thermal_qubit", .params = "gamma0=1", .seed = 0};
  rec.columns = {"N", "discriminant", "roots", "search_hits", "hit_verdicts", "min_residual"};
  bool roots_ok = true, search_ok = true;
  for (double N : {0.0, 0.1, 0.5, 1.0, 2.0}) {
    const auto roots = thermal_qubit_ppsd_roots(N);
    const auto model = catalog_model({ModelName::thermal_qubit, {{"gamma0", 1.0}, {"N", N}}, {}, {}});
    SearchConfig cfg;
    const auto hits = ppsd_search(model, cfg);
    const double min_res = ppsd_min_residual(model, cfg);
    std::string root_text, verdicts;
    for (double r : roots) root_text += (root_text.empty() ? "" : ";") + format_number(r);
    for (const auto& h : hits) verdicts += (verdicts.empty() ? "" : ";") + std::string(to_string(h.verdict));
    rec.rows.push_back({N, -4.0 * (N * N + N), root_text, static_cast<double>(hits.size()), verdicts, min_res});
    if (N == 0.0) {
      roots_ok = roots_ok && roots.size() == 1 && roots[0] == 0.0;
      search_ok = search_ok && hits.size() == 1 && hits[0].verdict == Verdict::stationary_only &&
                  fidelity(hits[0].state, StateVector::basis(2, 1)) > 1.0 - 1e-8;
    } else {
      roots_ok = roots_ok && roots.empty();
      search_ok = search_ok && hits.empty();
    }
  }
  rec.add_check("roots_only_at_N0", roots_ok, "real roots exist only for N = 0 (p = 0)");
  rec.add_check("search_matches_roots", search_ok, "one stationary ground-state hit at N = 0, none otherwise");
  return rec;
}

ResultRecord reproduce_fig2() {
  const double g1 = 1.0, g2 = 0.01, n1 = 0.4, n2 = 0.0004;
  ResultRecord rec{.command = "reproduce fig2", .model_label = "three_level_atom",
                   .params = "gamma1=1;gamma2=0.01;N1=0.4;N2=0.0004"};
  const auto grid = linspace(0.8, 1.0, 201);
  const auto rows = three_level_feasibility_scan(g1, g2, n1, n2, grid);
  rec.columns = {"p2", "p1_low", "p1_high", "p1_plus_p2_low", "p1_plus_p2_high"};
  bool sums_ok = true;
  for (const auto& r : rows) {
    rec.rows.push_back({r.p2, opt(r.p1_roots, 0), opt(r.p1_roots, 1), opt(r.p1_plus_p2, 0), opt(r.p1_plus_p2, 1)});
    for (double s : r.p1_plus_p2) sums_ok = sums_ok && s > 1.0;
  }
  const auto p2_min = three_level_min_feasible_p2(g1, g2, n1, n2);
  rec.add_check("min_feasible_p2", p2_min && *p2_min > 0.83 && *p2_min < 0.90,
                "minimal feasible p2 = " + (p2_min ? format_number(*p2_min) : std::string("none")) + " in (0.83, 0.90)");
  rec.add_check("p1_plus_p2_exceeds_one", sums_ok, "p1 + p2 > 1 on both branches for every feasible p2");
  const auto edge = three_level_p3_zero_solution(g1, g2, n1, n2);
  rec.add_check("p3_zero_negative", edge[0] < 0.0 || edge[1] < 0.0,
                "p3 = 0 forces p1 = " + format_number(edge[0]) + ", p2 = " + format_number(edge[1]));
  return rec;
}

ResultRecord reproduce_fig3() {
  const double gamma0 = 1.0, r = 0.2, theta = std::numbers::pi, delta = -std::numbers::pi / 2;
  ResultRecord rec{.command = "reproduce fig3", .model_label = "squeezed_vacuum_decay",
                   .params = "gamma0=1;r=0.2;theta=pi;delta=-pi/2"};
  const auto times = linspace(0.0, 3.0, 100);
  const auto curve = fig3_purity_curve(gamma0, r, theta, delta, times);
  const auto model = catalog_model({ModelName::squeezed_vacuum_decay, {{"gamma0", gamma0}, {"r", r}, {"theta", theta}}, {}, {}});
  const double p_e = 1.0 - squeezed_ground_weight(r);
  Vector v(2);
  v << std::polar(std::sqrt(p_e), delta), std::sqrt(1.0 - p_e);
  const Trajectory traj = propagate(model, StateVector::normalized(v).density(), times);

  rec.columns = {"t", "P_closed_form", "P_propagated"};
  double agree = 0.0;
  bool below = true, decreasing = true;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const double pp = 2.0 * traj.purities[k] - 1.0;
    agree = std::max(agree, std::abs(pp - curve[k].purity));
    if (times[k] >= 0.05 && !(curve[k].purity < 1.0 - 1e-6)) below = false;
    if (k > 0 && !(curve[k].purity < curve[k - 1].purity)) decreasing = false;
    rec.rows.push_back({times[k], curve[k].purity, pp});
  }
  rec.add_check("P0_is_one", std::abs(curve[0].purity - 1.0) < 1e-10, "P(0) = " + format_number(curve[0].purity));
  rec.add_check("P_below_one", below, "P(t) < 1 - 1e-6 for t >= 0.05");
  rec.add_check("P_strictly_decreasing", decreasing, "P decreases on all 100 samples");
  rec.add_check("propagation_agreement", agree < 1e-7, "max |P_closed - P_propagated| = " + sci(agree) + " < 1e-7");
  return rec;
}

ResultRecord reproduce_b13() {
  const double r = 0.2, theta = std::numbers::pi;
  ResultRecord rec{.command = "reproduce b13", .model_label = "squeezed_vacuum_decay", .params = "gamma0=1;r=0.2;theta=pi",
                   .seed = 0};
  const auto model = catalog_model({ModelName::squeezed_vacuum_decay, {{"gamma0", 1.0}, {"r", r}, {"theta", theta}}, {}, {}});
  const auto hits = ppsd_search(model, SearchConfig{});
  const StateVector closed = squeezed_ppsd_state(r, theta);
  const Operator c = squeezed_jump_operator(r, theta);
  const double expected_mod = std::sqrt(std::sinh(2.0 * r) / 2.0);

  rec.columns = {"index", "residual", "fidelity_closed_form", "eigenvalue_modulus", "eigen_residual", "is_stationary",
                 "consistency_gap", "verdict", "amplitudes"};
  bool found = false, all_no_ppsd = !hits.empty();
  for (std::size_t i = 0; i < hits.size(); ++i) {
    const auto& h = hits[i];
    const Complex lambda = expectation(c, h.state);
    const double eres = (c * h.state.amplitudes() - lambda * h.state.amplitudes()).norm();
    const double fid = fidelity(h.state, closed);
    found = found || fid > 1.0 - 1e-8;
    all_no_ppsd = all_no_ppsd && h.verdict == Verdict::no_ppsd;
    rec.rows.push_back({static_cast<double>(i), h.residual, fid, std::abs(lambda), eres, h.is_stationary,
                        h.consistency_gap, to_string(h.verdict), amplitudes_text(h.state)});
  }
  const Complex lambda = expectation(c, closed);
  const double eres = (c * closed.amplitudes() - lambda * closed.amplitudes()).norm();
  rec.add_check("closed_form_found", found, "a search hit matches the closed-form state within fidelity 1 - 1e-8");
  rec.add_check("eigenvalue", eres < 1e-12 && std::abs(std::abs(lambda) - expected_mod) < 1e-10,
                "|lambda| = " + format_number(std::abs(lambda)) + " vs sqrt(sinh(2r)/2) = " + format_number(expected_mod));
  rec.add_check("no_trajectory", all_no_ppsd, "every zero-residual state fails the consistency check");
  rec.notes.push_back("hits: " + std::to_string(hits.size()) +
                      " (the jump operator has two eigenvectors, eigenvalues +lambda and -lambda)");
  return rec;
}

ResultRecord reproduce_b16() {
  ResultRecord rec{.command = "reproduce b16", .model_label = "nonadiabatic_driven", .params = "dim=40", .seed = 16};
  const std::vector<NonadiabaticParams> snaps = {
      {1.0, 1.0, 1.0, 0.0, 1.0, 1.0, 0.0, 1.0},   {2.0, 0.5, 1.5, 0.3, 0.8, 1.2, 0.5, 1.0},
      {0.5, 2.0, 0.7, -0.4, 1.1, 0.6, 1.0, 0.5},  {1.3, 1.7, 2.0, 1.0, 0.5, 2.0, 0.2, 2.0},
      {0.8, 0.9, 1.1, 0.1, 1.5, 0.9, 3.0, 1.5}};
  constexpr Eigen::Index dim = 40;
  std::mt19937_64 rng(16);
  rec.columns = {"snapshot", "bound", "min_residual", "min_margin", "commutator_error"};
  bool bound_ok = true, comm_ok = true;
  for (std::size_t s = 0; s < snaps.size(); ++s) {
    const auto& p = snaps[s];
    const Operator fp = nonadiabatic_f_plus(p, dim);
    const Operator comm = fp * fp.adjoint() - fp.adjoint() * fp;
    const double c = 1.0 / (p.m * p.omega0 * p.kappa);
    const Eigen::Index b = dim - 1;
    const double cerr = (comm.topLeftCorner(b, b) - c * Operator::Identity(b, b)).cwiseAbs().maxCoeff();
    comm_ok = comm_ok && cerr < 1e-10 * std::max(1.0, c);
    double min_res = std::numeric_limits<double>::infinity(), min_margin = min_res, bound = 0.0;
    for (int i = 0; i < 100; ++i) {
      const StateVector psi = random_state_in(dim, dim - 2, rng);
      const auto rb = nonadiabatic_residual_bound(p, psi);
      bound = rb.bound;
      min_res = std::min(min_res, rb.residual);
      min_margin = std::min(min_margin, rb.residual - rb.bound);
    }
    bound_ok = bound_ok && min_margin >= -1e-9;
    rec.rows.push_back({static_cast<double>(s), bound, min_res, min_margin, cerr});
  }
  rec.add_check("commutator", comm_ok, "[F+, F-] = 1/(m omega0 kappa) on the untruncated block");
  rec.add_check("residual_bound", bound_ok, "residual >= bound - 1e-9 for 100 states at each snapshot");
  return rec;
}

ResultRecord reproduce_grw() {
  const double lambda = 1.0, alpha = 1.0;
  ResultRecord rec{.command = "reproduce grw", .model_label = "grw", .params = "lambda=1;alpha=1;grid=-5:5:128"};
  const GridSpec grid{};
  const auto model = catalog_model({ModelName::grw, {{"lambda", lambda}, {"alpha", alpha}}, {}, grid});
  const RealVector x = grid.points();
  const Vector psi = ((-(x.array() - 2.0).square() / 0.5).exp() + (-(x.array() + 2.0).square() / 0.5).exp())
                         .matrix()
                         .cast<Complex>();
  const StateVector s0 = StateVector::normalized(psi);
  const std::vector<double> times = {0.0, 0.25, 0.5, 1.0};
  const Trajectory traj = propagate(model, s0.density(), times);
  rec.columns = {"t", "max_error", "purity"};
  double err = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const DensityMatrix cf = grw_closed_form(s0.density(), grid, lambda, alpha, times[k]);
    const double e = (traj.states[k].matrix() - cf.matrix()).cwiseAbs().maxCoeff();
    err = std::max(err, e);
    rec.rows.push_back({times[k], e, traj.purities[k]});
  }
  rec.add_check("closed_form_agreement", err < 1e-7, "max entrywise error " + sci(err) + " < 1e-7");
  return rec;
}

ResultRecord reproduce_coherent() {
  ResultRecord rec{.command = "reproduce coherent", .model_label = "damped_oscillator",
                   .params = "gamma0=1;N=0;dim=40;alpha=1"};
  const auto model = catalog_model({ModelName::damped_oscillator, {{"gamma0", 1.0}, {"N", 0.0}}, 40, {}});
  const StateVector psi0 = coherent_state({1.0, 0.0}, 40);
  const auto times = linspace(0.0, 2.0, 21);
  const Trajectory traj = propagate(model, psi0.density(), times);
  const PureTrajectory pure = evolve_pure_nonlinear(model, psi0, times);
  const PpsdReport rep = consistency_check(model, psi0, 2.0, 20, 1e-6);

  rec.columns = {"t", "purity_liouvillian", "trace_distance_pure_path", "fidelity_pure_vs_damped_coherent"};
  double max_dev = 0.0;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const StateVector coh = coherent_state({std::exp(-0.5 * times[k]), 0.0}, 40);
    const double td = trace_distance(pure.states[k].projector(), traj.states[k].matrix());
    const double fid = fidelity(pure.states[k], coh);
    max_dev = std::max(max_dev, 1.0 - fid);
    rec.rows.push_back({times[k], traj.purities[k], td, fid});
  }
  rec.add_check("report_consistent", std::abs(rep.max_impurity - (1.0 - *std::min_element(traj.purities.begin(), traj.purities.end()))) < 1e-7,
                "report max impurity " + sci(rep.max_impurity));
  rec.add_check("pure_path_is_damped_coherent", max_dev < 1e-8,
                "pure path stays |alpha e^(-t/2)>, max infidelity " + sci(max_dev));
  rec.notes.push_back(std::string("verdict: ") + to_string(rep.verdict) + ", consistency gap " + sci(rep.consistency_gap) +
                      ", residual " + sci(rep.residual));
  return rec;
}

}  // namespace

const std::vector<std::string>& reproduce_targets() {
  static const std::vector<std::string> t = {"eq3", "eq5", "eq16", "fig2", "fig3", "b13", "b16", "grw", "coherent"};
  return t;
}

ResultRecord cmd_reproduce(const std::string& target) {
  if (target == "eq3") return reproduce_eq3();
  if (target == "eq5") return reproduce_eq5();
  if (target == "eq16") return reproduce_eq16();
  if (target == "fig2") return reproduce_fig2();
  if (target == "fig3") return reproduce_fig3();
  if (target == "b13") return reproduce_b13();
  if (target == "b16") return reproduce_b16();
  if (target == "grw") return reproduce_grw();
  if (target == "coherent") return reproduce_coherent();
  throw InputError("unknown reproduction target '" + target + "'");
}

ResultRecord cmd_list_models() {
  ResultRecord rec{.command = "list-models"};
  rec.columns = {"name", "params", "default_size", "unital", "anchor", "summary"};
  for (const auto& m : model_catalog()) {
    std::string params;
    for (const auto& p : m.params) {
      params += (params.empty() ? "" : "; ") + p.key + " [" + p.units + "]";
      if (p.default_value) params += " = " + format_number(*p.default_value);
    }
    rec.rows.push_back({to_string(m.name), params, m.default_size, m.unital, m.anchor, m.summary});
  }
  return rec;
}

namespace {

struct ModelFlags {
  std::string model;
  std::string model_file;
  std::vector<std::string> params;
  long dim = 0;
  std::string grid;

  void attach(CLI::App* app) {
    app->add_option("--model", model, "catalog model name (see list-models)");
    app->add_option("--model-file", model_file, "JSON model file");
    app->add_option("--param", params, "model parameter key=value (repeatable)");
    app->add_option("--dim", dim, "Fock truncation (per mode for multimode)");
    app->add_option("--grid", grid, "position grid x_min:x_max:n_points");
  }

  ModelSource source() const {
    return make_source(model, model_file, params, dim > 0 ? std::optional<long>(dim) : std::nullopt, grid);
  }
};

struct OutputFlags {
  std::string output;
  std::string format = "csv";

  void attach(CLI::App* app) {
    app->add_option("--output,-o", output, "output path (default stdout)");
    app->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));
  }

  void emit(const ResultRecord& rec, std::ostream& out) const {
    write_output(format == "json" ? render_json(rec) : render_csv(rec), output, out);
  }
};

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Purity-preserving dynamics laboratory for Lindblad models", "ppsd_lab"};
  app.require_subcommand(1);
  app.set_version_flag("--version", PPSD_LAB_VERSION);

  ModelFlags mf;
  OutputFlags of;
  RunConfig rc;
  std::string method = "exact";
  std::string state = "ground";
  double t_max = 0.0;
  int steps = 20;
  double tol = 1e-6;
  int restarts = 64;
  std::uint64_t seed = 0;
  std::string target;

  auto* sim = app.add_subcommand("simulate", "propagate a state and tabulate purity");
  mf.attach(sim);
  of.attach(sim);
  sim->add_option("--state", rc.state, "initial state");
  sim->add_option("--t-max", rc.t_max, "final time")->required();
  sim->add_option("--steps", rc.n_steps, "number of time steps");
  sim->add_option("--method", method, "exact or rk");
  sim->add_option("--seed", rc.seed, "recorded seed");

  auto* check = app.add_subcommand("ppsd-check", "residual and consistency verdict for one state");
  mf.attach(check);
  of.attach(check);
  check->add_option("--state", state, "pure state to test");
  check->add_option("--t-max", t_max, "consistency horizon (default 1/residual scale)");
  check->add_option("--steps", steps, "consistency samples");
  check->add_option("--tol", tol, "dimensionless tolerance");

  auto* search = app.add_subcommand("ppsd-search", "multi-start search for zero-residual states");
  mf.attach(search);
  of.attach(search);
  search->add_option("--restarts", restarts, "number of restarts");
  search->add_option("--seed", seed, "search seed");
  double search_tol = 0.0;
  search->add_option("--tol", search_tol, "absolute residual tolerance (default 1e-9 x scale)");

  auto* repro = app.add_subcommand("reproduce", "rerun a published check");
  of.attach(repro);
  repro->add_option("target", target, "target")->required()->check(CLI::IsMember(reproduce_targets()));

  auto* list = app.add_subcommand("list-models", "show the model catalog");
  of.attach(list);

  auto* exp = app.add_subcommand("export-model", "write a catalog model as a model file");
  mf.attach(exp);
  exp->add_option("--output,-o", of.output, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kInputError;
  }

  try {
    if (sim->parsed()) {
      rc.source = mf.source();
      rc.method = method_from_string(method);
      rc.format = of.format;
      rc.output_path = of.output;
      of.emit(cmd_simulate(rc), out);
      return kOk;
    }
    if (check->parsed()) {
      of.emit(cmd_ppsd_check(mf.source(), state, t_max, steps, tol), out);
      return kOk;
    }
    if (search->parsed()) {
      const auto rec = cmd_ppsd_search(mf.source(), restarts, seed, search_tol);
      if (rec.rows.empty()) err << "no PPSD states found\n";
      of.emit(rec, out);
      return kOk;
    }
    if (repro->parsed()) {
      const auto rec = cmd_reproduce(target);
      of.emit(rec, out);
      for (const auto& c : rec.checks) {
        if (!c.pass) err << "reproduce " << target << ": " << c.name << " failed: " << c.detail << '\n';
      }
      return rec.passed() ? kOk : kMismatch;
    }
    if (list->parsed()) {
      of.emit(cmd_list_models(), out);
      return kOk;
    }
    if (exp->parsed()) {
      const LindbladModel model = resolve(mf.source());
      write_output(model_to_json(model).dump(1) + "\n", of.output, out);
      return kOk;
    }
  } catch (const InputError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const TruncationError& e) {
    err << "error: " << e.what() << '\n';
    return kInputError;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kNumericalError;
  }
  return kInputError;
}

}  // namespace ppsd::cli
