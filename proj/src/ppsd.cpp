#include "ppsd/ppsd.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

#include "ppsd/ode.hpp"
#include "ppsd/parallel.hpp"

namespace ppsd {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::ppsd_trajectory:
      return "ppsd_trajectory";
    case Verdict::stationary_only:
      return "stationary_only";
    case Verdict::no_ppsd:
      return "no_ppsd";
  }
  return "no_ppsd";
}

void SearchConfig::validate() const {
  if (n_restarts < 1) throw InputError("SearchConfig: n_restarts must be positive");
  if (max_iterations < 1 || polish_iterations < 0) throw InputError("SearchConfig: bad iteration budget");
  if (residual_tol && !(*residual_tol > 0.0)) throw InputError("SearchConfig: residual_tol must be > 0");
  if (!(dedupe_fidelity > 0.0 && dedupe_fidelity < 1.0)) {
    throw InputError("SearchConfig: dedupe_fidelity must lie in (0, 1)");
  }
  if (!(stationarity_tol > 0.0) || !(consistency_tol > 0.0)) {
    throw InputError("SearchConfig: tolerances must be positive");
  }
  if (consistency_steps < 2) throw InputError("SearchConfig: consistency_steps must be >= 2");
}

namespace {

/// Residual of the ray through an arbitrary nonzero vector.
double ray_residual(const LindbladModel& model, const Vector& v) {
  const double n2 = v.squaredNorm();
  double r = 0.0;
  for (const auto& t : model.terms) {
    if (t.rate == 0.0) continue;
    const Vector lv = t.op * v;
    const Complex mean = v.dot(lv) / n2;
    r += t.rate * (lv - mean * v).squaredNorm() / n2;
  }
  return r;
}

/// Derivative of the residual with respect to conj(psi) for unit psi.
Vector residual_gradient(const LindbladModel& model, const Vector& psi) {
  Vector g = Vector::Zero(psi.size());
  for (const auto& t : model.terms) {
    if (t.rate == 0.0) continue;
    const Vector lv = t.op * psi;
    const Vector ldv = t.op.adjoint() * psi;
    const Complex mean = psi.dot(lv);
    g += t.rate * (t.op.adjoint() * lv - std::conj(mean) * lv - mean * ldv);
  }
  return g - psi.dot(g) * psi;
}

struct Candidate {
  double residual;
  Vector psi;
};

Vector to_complex(const RealVector& x) {
  const Eigen::Index d = x.size() / 2;
  Vector v(d);
  for (Eigen::Index i = 0; i < d; ++i) v(i) = Complex(x(2 * i), x(2 * i + 1));
  return v;
}

RealVector to_real(const Vector& v) {
  RealVector x(2 * v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    x(2 * i) = v(i).real();
    x(2 * i + 1) = v(i).imag();
  }
  return x;
}

/// Nelder-Mead on R^n; returns the best vertex.
template <class F>
RealVector nelder_mead(const F& f, const RealVector& x0, double step, int max_iter, double ftol) {
  const Eigen::Index n = x0.size();
  std::vector<RealVector> pts(n + 1, x0);
  std::vector<double> vals(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) pts[i + 1](i) += step;
  for (Eigen::Index i = 0; i <= n; ++i) vals[i] = f(pts[i]);

  std::vector<Eigen::Index> order(n + 1);
  for (int it = 0; it < max_iter; ++it) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return vals[a] < vals[b]; });
    const auto best = order.front();
    const auto worst = order.back();
    const auto second = order[n - 1];
    if (vals[worst] - vals[best] <= ftol) break;

    RealVector centroid = RealVector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i) centroid += pts[order[i]];
    centroid /= static_cast<double>(n);

    const RealVector xr = centroid + (centroid - pts[worst]);
    const double fr = f(xr);
    if (fr < vals[best]) {
      const RealVector xe = centroid + 2.0 * (centroid - pts[worst]);
      const double fe = f(xe);
      if (fe < fr) {
        pts[worst] = xe;
        vals[worst] = fe;
      } else {
        pts[worst] = xr;
        vals[worst] = fr;
      }
      continue;
    }
    if (fr < vals[second]) {
      pts[worst] = xr;
      vals[worst] = fr;
      continue;
    }
    const bool outside = fr < vals[worst];
    const RealVector xc = outside ? RealVector(centroid + 0.5 * (xr - centroid))
                                  : RealVector(centroid + 0.5 * (pts[worst] - centroid));
    const double fc = f(xc);
    if (fc < (outside ? fr : vals[worst])) {
      pts[worst] = xc;
      vals[worst] = fc;
      continue;
    }
    for (Eigen::Index i = 0; i <= n; ++i) {
      if (i == best) continue;
      pts[i] = pts[best] + 0.5 * (pts[i] - pts[best]);
      vals[i] = f(pts[i]);
    }
  }
  const auto it = std::min_element(vals.begin(), vals.end());
  return pts[static_cast<std::size_t>(it - vals.begin())];
}

/// Riemannian Polak-Ribiere conjugate gradient on the unit sphere with Armijo backtracking.
Candidate polish(const LindbladModel& model, Vector psi, double scale, int max_iter) {
  psi.normalize();
  double r = ray_residual(model, psi);
  Vector g = residual_gradient(model, psi);
  Vector dir = -g;
  double step = 1.0 / std::max(scale, 1e-300);
  const double floor = 1e-32 * scale;

  for (int it = 0; it < max_iter && r > floor; ++it) {
    const double g2 = g.squaredNorm();
    if (g2 <= 1e-34 * scale * scale) break;
    double slope = 2.0 * dir.dot(g).real();
    if (slope >= 0.0) {
      dir = -g;
      slope = -2.0 * g2;
    }
    double s = step * 2.0;
    Vector trial;
    double rt = r;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      trial = (psi + s * dir).normalized();
      rt = ray_residual(model, trial);
      if (rt <= r + 1e-4 * s * slope) {
        accepted = true;
        break;
      }
      s *= 0.5;
    }
    if (!accepted || rt >= r) break;
    step = s;
    psi = trial;
    r = rt;
    const Vector g_new = residual_gradient(model, psi);
    const Vector g_old = g - psi.dot(g) * psi;
    const double beta = std::max(0.0, g_new.dot(g_new - g_old).real() / std::max(g2, 1e-300));
    Vector moved = dir - psi.dot(dir) * psi;
    dir = -g_new + beta * moved;
    g = g_new;
  }
  return {std::max(r, 0.0), psi};
}

std::mt19937_64 restart_rng(std::uint64_t seed, int restart) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed & 0xffffffffu), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(restart), 0x5eedu};
  return std::mt19937_64(seq);
}

Vector start_vector(Eigen::Index dim, int restart, std::mt19937_64& rng) {
  std::normal_distribution<double> g(0.0, 1.0);
  Vector noise(dim);
  for (Eigen::Index i = 0; i < dim; ++i) {
    const double re = g(rng);
    const double im = g(rng);
    noise(i) = Complex(re, im);
  }
  if (restart % 2 == 1) return noise.normalized();
  Vector v = 0.25 * noise / std::sqrt(static_cast<double>(dim));
  v((restart / 2) % dim) += 1.0;
  return v.normalized();
}

std::vector<Candidate> run_restarts(const LindbladModel& model, const SearchConfig& config) {
  model.validate();
  config.validate();
  const double scale = residual_scale(model);
  std::vector<Candidate> out(static_cast<std::size_t>(config.n_restarts));

  parallel_for(out.size(), [&](std::size_t r) {
    auto rng = restart_rng(config.seed, static_cast<int>(r));
    const Vector v0 = start_vector(model.dim, static_cast<int>(r), rng);
    Vector v = v0;
    if (scale > 0.0) {
      auto objective = [&](const RealVector& x) {
        const Vector c = to_complex(x);
        if (c.norm() < 1e-12) return std::numeric_limits<double>::infinity();
        return ray_residual(model, c);
      };
      v = to_complex(nelder_mead(objective, to_real(v0), 0.2, config.max_iterations, 1e-14 * scale));
      if (v.norm() < 1e-12) v = v0;
    }
    out[r] = polish(model, v, scale, config.polish_iterations);
  });
  return out;
}

bool lexicographic_less(const Vector& a, const Vector& b) {
  for (Eigen::Index i = 0; i < a.size(); ++i) {
    if (a(i).real() != b(i).real()) return a(i).real() < b(i).real();
    if (a(i).imag() != b(i).imag()) return a(i).imag() < b(i).imag();
  }
  return false;
}

}  // namespace

double ppsd_residual(const LindbladModel& model, const StateVector& psi) {
  require_same_dim(model.dim, psi.dim(), "ppsd_residual");
  const auto terms = residual_terms(model, psi);
  return std::accumulate(terms.begin(), terms.end(), 0.0);
}

std::vector<double> residual_terms(const LindbladModel& model, const StateVector& psi) {
  require_same_dim(model.dim, psi.dim(), "residual_terms");
  std::vector<double> out;
  out.reserve(model.terms.size());
  for (const auto& t : model.terms) {
    const Vector lv = t.op * psi.amplitudes();
    const Complex mean = psi.amplitudes().dot(lv);
    // deviation form: no cancellation near zero
    out.push_back(t.rate * (lv - mean * psi.amplitudes()).squaredNorm());
  }
  return out;
}

double residual_scale(const LindbladModel& model) {
  double s = 0.0;
  for (const auto& t : model.terms) {
    if (t.rate == 0.0) continue;
    const double n = operator_norm(t.op);
    s += t.rate * n * n;
  }
  return s;
}

Operator effective_hamiltonian(const LindbladModel& model, const StateVector& psi) {
  require_same_dim(model.dim, psi.dim(), "effective_hamiltonian");
  Operator h = model.hamiltonian;
  const Eigen::Index d = model.dim;
  for (const auto& t : model.terms) {
    if (t.rate == 0.0) continue;
    const Operator ldl = t.op.adjoint() * t.op;
    const Complex mean_ld = expectation(t.op.adjoint(), psi);
    const Complex mean_ldl = expectation(ldl, psi);
    h += kI * t.rate * (mean_ld * t.op - 0.5 * mean_ldl * Operator::Identity(d, d) - 0.5 * ldl);
  }
  return h;
}

PureTrajectory evolve_pure_nonlinear(const LindbladModel& model, const StateVector& psi0,
                                     std::span<const double> times) {
  model.validate();
  require_same_dim(model.dim, psi0.dim(), "evolve_pure_nonlinear");
  if (times.empty() || times[0] < 0.0) throw InputError("evolve_pure_nonlinear: times must start at >= 0");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) throw InputError("evolve_pure_nonlinear: times must be ascending");
  }

  struct Jump {
    double rate;
    Operator l, ldl;
  };
  std::vector<Jump> jumps;
  for (const auto& t : model.terms) {
    if (t.rate != 0.0) jumps.push_back({t.rate, t.op, t.op.adjoint() * t.op});
  }
  const Operator h = model.hamiltonian;

  auto rhs = [&](double, const Vector& v) -> Vector {
    const double n2 = v.squaredNorm();
    Vector f = -kI * (h * v);
    double radial = 0.0;
    for (const auto& j : jumps) {
      const Vector lv = j.l * v;
      const Complex mean = v.dot(lv) / n2;
      const double mean_ldl = lv.squaredNorm() / n2;
      f += j.rate * (std::conj(mean) * lv - 0.5 * mean_ldl * v - 0.5 * (j.ldl * v));
      radial += j.rate * (mean_ldl - std::norm(mean));
    }
    f += radial * v;
    return f;
  };

  PureTrajectory out;
  out.times.assign(times.begin(), times.end());
  out.states.reserve(times.size());

  DormandPrince<Vector> rk(rhs, OdeOptions{});
  Vector psi = psi0.amplitudes();
  double t = 0.0;
  double t_prev = 0.0;
  auto on_accept = [&](double t_now, Vector& y) {
    const double drift = std::abs(y.norm() - 1.0);
    if (drift > 1e-3) {
      throw IntegrationError("evolve_pure_nonlinear: norm drift " + std::to_string(drift) +
                             " in one step at t=" + std::to_string(t_now));
    }
    const double dt = t_now - t_prev;
    if (dt > 0.0) out.max_norm_drift_rate = std::max(out.max_norm_drift_rate, drift / dt);
    t_prev = t_now;
    y.normalize();
  };
  for (double tk : times) {
    rk.advance(psi, t, tk, on_accept);
    out.states.push_back(StateVector::normalized(psi));
  }
  return out;
}

namespace {

PpsdReport check_with(Propagator& prop, const LindbladModel& model, const StateVector& psi0, double t_max,
                      int n_steps, double tol) {
  if (!(t_max > 0.0) || n_steps < 1) throw InputError("consistency_check: need t_max > 0 and n_steps >= 1");
  std::vector<double> times(static_cast<std::size_t>(n_steps) + 1);
  for (int k = 0; k <= n_steps; ++k) times[static_cast<std::size_t>(k)] = t_max * k / n_steps;

  const PureTrajectory pure = evolve_pure_nonlinear(model, psi0, times);
  const Trajectory mixed = prop.run(psi0.density(), times);

  PpsdReport rep{.residual = ppsd_residual(model, psi0), .state = psi0};
  rep.is_stationary = prop.generator().relative_action(psi0.projector()) < tol;
  for (std::size_t k = 0; k < times.size(); ++k) {
    rep.consistency_gap =
        std::max(rep.consistency_gap, trace_distance(pure.states[k].projector(), mixed.states[k].matrix()));
    rep.max_impurity = std::max(rep.max_impurity, 1.0 - mixed.purities[k]);
    rep.max_path_residual = std::max(rep.max_path_residual, ppsd_residual(model, pure.states[k]));
  }

  const double rtol = tol * residual_scale(model);
  const bool residual_ok = rep.max_path_residual <= rtol;
  if (residual_ok && rep.is_stationary) {
    rep.verdict = Verdict::stationary_only;
  } else if (residual_ok && rep.consistency_gap < tol) {
    rep.verdict = Verdict::ppsd_trajectory;
  } else {
    rep.verdict = Verdict::no_ppsd;
  }
  return rep;
}

}  // namespace

PpsdReport consistency_check(const LindbladModel& model, const StateVector& psi0, double t_max,
                             int n_steps, double tol) {
  Propagator prop(model, Method::exact_exponential);
  return check_with(prop, model, psi0, t_max, n_steps, tol);
}

double ppsd_min_residual(const LindbladModel& model, const SearchConfig& config) {
  const auto cands = run_restarts(model, config);
  double best = std::numeric_limits<double>::infinity();
  for (const auto& c : cands) best = std::min(best, c.residual);
  return best;
}

std::vector<PpsdReport> ppsd_search(const LindbladModel& model, const SearchConfig& config) {
  const double scale = residual_scale(model);
  const double tol = config.residual_tol.value_or(1e-9 * scale);
  std::vector<Candidate> cands = run_restarts(model, config);

  std::vector<Candidate> hits;
  for (auto& c : cands) {
    if (c.residual < tol || (scale == 0.0 && c.residual == 0.0)) {
      c.psi = StateVector::normalized(c.psi).gauge_fixed().amplitudes();
      hits.push_back(std::move(c));
    }
  }
  std::stable_sort(hits.begin(), hits.end(), [](const Candidate& a, const Candidate& b) {
    if (a.residual != b.residual) return a.residual < b.residual;
    return lexicographic_less(a.psi, b.psi);
  });

  std::vector<StateVector> kept;
  for (const auto& h : hits) {
    const StateVector s = StateVector::normalized(h.psi);
    bool dup = false;
    for (const auto& k : kept) {
      if (fidelity(k, s) >= config.dedupe_fidelity) {
        dup = true;
        break;
      }
    }
    if (!dup) kept.push_back(s);
  }

  std::vector<PpsdReport> reports;
  if (kept.empty()) return reports;
  Propagator prop(model, Method::exact_exponential);
  const double t_max = scale > 0.0 ? 1.0 / scale : 1.0;
  for (const auto& s : kept) {
    const double stat = prop.generator().relative_action(s.projector());
    PpsdReport rep{.residual = ppsd_residual(model, s), .state = s};
    rep.is_stationary = stat < config.stationarity_tol;
    if (rep.is_stationary) {
      rep.verdict = Verdict::stationary_only;
    } else {
      const PpsdReport chk = check_with(prop, model, s, t_max, config.consistency_steps, config.consistency_tol);
      rep.consistency_gap = chk.consistency_gap;
      rep.max_impurity = chk.max_impurity;
      rep.max_path_residual = chk.max_path_residual;
      rep.verdict = (rep.max_path_residual < tol && chk.consistency_gap < config.consistency_tol)
                        ? Verdict::ppsd_trajectory
                        : Verdict::no_ppsd;
    }
    reports.push_back(std::move(rep));
  }
  return reports;
}

namespace {

/// Weights of the three-point derivative at nodes (x0, x1, x2), evaluated at x.
std::array<double, 3> three_point_weights(double x0, double x1, double x2, double x) {
  return {((x - x1) + (x - x2)) / ((x0 - x1) * (x0 - x2)), ((x - x0) + (x - x2)) / ((x1 - x0) * (x1 - x2)),
          ((x - x0) + (x - x1)) / ((x2 - x0) * (x2 - x1))};
}

double hermitian_spectral_norm(const Matrix& m) {
  Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (m + m.adjoint()), Eigen::EigenvaluesOnly);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

UnravelingResult unraveling_check(const LindbladModel& model, const std::vector<std::vector<double>>& weights,
                                  const std::vector<std::vector<StateVector>>& trajectories,
                                  std::span<const double> times) {
  const std::size_t n = times.size();
  if (n < 3) throw InputError("unraveling_check: need at least 3 time samples");
  if (weights.size() != trajectories.size() || weights.empty()) {
    throw InputError("unraveling_check: one weight series per trajectory required");
  }
  for (std::size_t k = 1; k < n; ++k) {
    if (!(times[k] > times[k - 1])) throw InputError("unraveling_check: times must be ascending");
  }
  for (std::size_t k = 0; k < weights.size(); ++k) {
    if (weights[k].size() != n || trajectories[k].size() != n) {
      throw InputError("unraveling_check: series length differs from the time grid");
    }
  }
  for (std::size_t j = 0; j < n; ++j) {
    double total = 0.0;
    for (const auto& w : weights) total += w[j];
    if (std::abs(total - 1.0) > 1e-10) {
      throw InvariantError("unraveling_check: weights sum to " + std::to_string(total) + " at sample " +
                           std::to_string(j));
    }
  }

  const Generator gen(model);
  std::vector<Matrix> rho(n, Matrix::Zero(model.dim, model.dim));
  for (std::size_t k = 0; k < weights.size(); ++k) {
    for (std::size_t j = 0; j < n; ++j) {
      require_same_dim(trajectories[k][j].dim(), model.dim, "unraveling_check");
      rho[j] += weights[k][j] * trajectories[k][j].projector();
    }
  }

  UnravelingResult res;
  res.residuals.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t a = j == 0 ? 0 : (j == n - 1 ? n - 3 : j - 1);
    const auto w = three_point_weights(times[a], times[a + 1], times[a + 2], times[j]);
    const Matrix deriv = w[0] * rho[a] + w[1] * rho[a + 1] + w[2] * rho[a + 2];
    res.residuals[j] = hermitian_spectral_norm(gen.apply(rho[j]) - deriv);
    res.max_residual = std::max(res.max_residual, res.residuals[j]);
  }
  return res;
}

double unraveling_check_refined(const LindbladModel& model,
                                const std::function<std::vector<double>(double)>& weights,
                                const std::function<std::vector<StateVector>(double)>& states, double t0,
                                double t1, int initial_points) {
  if (!(t1 > t0) || initial_points < 3) throw InputError("unraveling_check_refined: bad grid");
  auto evaluate = [&](int points) {
    std::vector<double> times(static_cast<std::size_t>(points));
    for (int j = 0; j < points; ++j) times[static_cast<std::size_t>(j)] = t0 + (t1 - t0) * j / (points - 1);
    std::vector<std::vector<double>> w;
    std::vector<std::vector<StateVector>> s;
    for (std::size_t j = 0; j < times.size(); ++j) {
      const auto wj = weights(times[j]);
      const auto sj = states(times[j]);
      if (wj.size() != sj.size()) throw InputError("unraveling_check_refined: weight/state count mismatch");
      if (j == 0) {
        w.assign(wj.size(), {});
        s.assign(sj.size(), {});
      }
      for (std::size_t k = 0; k < wj.size(); ++k) {
        w[k].push_back(wj[k]);
        s[k].push_back(sj[k]);
      }
    }
    return unraveling_check(model, w, s, times).max_residual;
  };

  int points = initial_points;
  double prev = evaluate(points);
  for (int level = 0; level < 12; ++level) {
    points = 2 * (points - 1) + 1;
    const double cur = evaluate(points);
    const double ref = std::max(std::abs(cur), 1e-300);
    if (std::abs(cur - prev) <= 0.005 * ref || cur < 1e-12) return cur;
    prev = cur;
  }
  return prev;
}

HistoryChain history_chain(const StateVector& psi0, std::span<const double> times,
                           const std::vector<Operator>& projectors) {
  if (times.size() != projectors.size()) throw InputError("history_chain: one projector per time required");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) throw InputError("history_chain: times must be ascending");
  }
  for (const auto& p : projectors) {
    require_same_dim(p.rows(), psi0.dim(), "history_chain");
    require_square(p, "history_chain");
    if (hermiticity_defect(p) > 1e-10 || (p * p - p).cwiseAbs().maxCoeff() > 1e-10 ||
        std::abs(p.trace() - 1.0) > 1e-10) {
      throw InvariantError("history_chain: every projector must be Hermitian, idempotent and rank one");
    }
  }

  HistoryChain chain;
  chain.times.assign(times.begin(), times.end());
  chain.projectors = projectors;
  Vector cur = psi0.amplitudes();
  for (const auto& p : projectors) {
    const Vector next = p * cur;
    const double w = next.squaredNorm();
    if (w <= 1e-300) {
      chain.chain_weight = 0.0;
      break;
    }
    chain.chain_weight *= w;
    cur = next / std::sqrt(w);
    chain.chain_states.push_back(StateVector::normalized(cur));
  }
  return chain;
}

}  // namespace ppsd
