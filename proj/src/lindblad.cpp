#include "ppsd/lindblad.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>
#include <unsupported/Eigen/KroneckerProduct>
#include <unsupported/Eigen/MatrixFunctions>

namespace ppsd {

namespace {

bool is_diagonal_matrix(const Matrix& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (i != j && m(i, j) != Complex(0.0)) return false;
    }
  }
  return true;
}

Complex inner(const Matrix& a, const Matrix& b) {  // tr(a^+ b)
  return (a.conjugate().cwiseProduct(b)).sum();
}

}  // namespace

void LindbladModel::validate() const {
  if (dim < 1) throw DimensionError("LindbladModel: dim must be positive");
  require_square(hamiltonian, "LindbladModel hamiltonian");
  require_same_dim(hamiltonian.rows(), dim, "LindbladModel hamiltonian");
  if (!hamiltonian.allFinite()) throw InvariantError("LindbladModel: non-finite Hamiltonian");
  if (hermiticity_defect(hamiltonian) > 1e-12) {
    throw InvariantError("LindbladModel '" + label + "': Hamiltonian is not Hermitian");
  }
  for (std::size_t k = 0; k < terms.size(); ++k) {
    const auto& t = terms[k];
    if (!(t.rate >= 0.0) || !std::isfinite(t.rate)) {
      throw InvariantError("LindbladModel '" + label + "': term " + std::to_string(k) +
                           " has negative or non-finite rate");
    }
    require_square(t.op, "LindbladModel term");
    require_same_dim(t.op.rows(), dim, "LindbladModel term");
    if (!t.op.allFinite()) throw InvariantError("LindbladModel: non-finite Lindblad operator");
  }
}

LindbladModel make_model(Operator hamiltonian, std::vector<LindbladTerm> terms, std::string label,
                         std::string basis_note) {
  LindbladModel m;
  m.dim = hamiltonian.rows();
  m.hamiltonian = std::move(hamiltonian);
  m.terms = std::move(terms);
  m.label = std::move(label);
  m.basis_note = std::move(basis_note);
  m.validate();
  return m;
}

Vector vectorize(const Matrix& rho) {
  return Eigen::Map<const Vector>(rho.data(), rho.size());
}

Matrix unvectorize(const Vector& v, Eigen::Index dim) {
  require_same_dim(v.size(), dim * dim, "unvectorize");
  return Eigen::Map<const Matrix>(v.data(), dim, dim);
}

Matrix Superoperator::apply(const Matrix& rho) const {
  require_same_dim(rho.rows(), dim, "Superoperator::apply");
  return unvectorize(matrix * vectorize(rho), dim);
}

Generator::Generator(const LindbladModel& model) : dim_(model.dim) {
  model.validate();
  const Eigen::Index d = dim_;
  g_ = -kI * model.hamiltonian;
  diagonal_ = is_diagonal_matrix(model.hamiltonian);
  for (const auto& t : model.terms) {
    if (t.rate == 0.0) continue;
    g_ -= 0.5 * t.rate * (t.op.adjoint() * t.op);
    jumps_.emplace_back(t.rate, t.op);
    diagonal_ = diagonal_ && is_diagonal_matrix(t.op);
  }

  if (diagonal_) {
    const Vector g = g_.diagonal();
    rates_.resize(d, d);
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index i = 0; i < d; ++i) rates_(i, j) = g(i) + std::conj(g(j));
    }
    for (const auto& [rate, op] : jumps_) {
      const Vector l = op.diagonal();
      rates_.noalias() += rate * (l * l.adjoint());
    }
    norm_ = rates_.norm();
    return;
  }

  // ||I(x)G + conj(G)(x)I + sum_k gamma_k conj(L_k)(x)L_k||_F^2 from traces of the factors.
  const double dd = static_cast<double>(d);
  const Complex tr_g = g_.trace();
  double sq = 2.0 * dd * g_.squaredNorm() + 2.0 * std::real(std::conj(tr_g) * std::conj(tr_g));
  const std::size_t k = jumps_.size();
  if (k > 0) {
    Matrix stacked(d * d, static_cast<Eigen::Index>(k));
    for (std::size_t a = 0; a < k; ++a) {
      const auto& [rate, op] = jumps_[a];
      stacked.col(static_cast<Eigen::Index>(a)) = vectorize(op);
      sq += 4.0 * rate * std::real(std::conj(op.trace()) * inner(g_, op));
    }
    const Matrix gram = stacked.adjoint() * stacked;
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) {
        sq += jumps_[a].first * jumps_[b].first *
              std::norm(gram(static_cast<Eigen::Index>(a), static_cast<Eigen::Index>(b)));
      }
    }
  }
  norm_ = std::sqrt(std::max(sq, 0.0));
}

Matrix Generator::apply(const Matrix& rho) const {
  require_same_dim(rho.rows(), dim_, "Generator::apply");
  if (diagonal_) return rates_.cwiseProduct(rho);
  Matrix out = g_ * rho;
  out.noalias() += rho * g_.adjoint();
  Matrix tmp(dim_, dim_);
  for (const auto& [rate, op] : jumps_) {
    tmp.noalias() = op * rho;
    out.noalias() += rate * (tmp * op.adjoint());
  }
  return out;
}

double Generator::relative_action(const Matrix& rho) const {
  const double a = apply(rho).norm();
  if (norm_ == 0.0) return a == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return a / norm_;
}

Superoperator build_liouvillian(const LindbladModel& model) {
  model.validate();
  const Eigen::Index d = model.dim;
  const Matrix id = Matrix::Identity(d, d);
  Matrix g = -kI * model.hamiltonian;
  for (const auto& t : model.terms) g -= 0.5 * t.rate * (t.op.adjoint() * t.op);

  Superoperator s;
  s.dim = d;
  s.matrix = Eigen::kroneckerProduct(id, g).eval();
  s.matrix += Eigen::kroneckerProduct(g.conjugate().eval(), id).eval();
  for (const auto& t : model.terms) {
    if (t.rate == 0.0) continue;
    s.matrix += t.rate * Eigen::kroneckerProduct(t.op.conjugate().eval(), t.op).eval();
  }
  return s;
}

Matrix apply_liouvillian(const LindbladModel& model, const Matrix& rho) {
  return Generator(model).apply(rho);
}

double liouvillian_norm(const LindbladModel& model) { return Generator(model).norm(); }

const char* to_string(Method m) {
  return m == Method::exact_exponential ? "exact_exponential" : "adaptive_rk";
}

Method method_from_string(const std::string& s) {
  if (s == "exact_exponential" || s == "exact" || s == "expm") return Method::exact_exponential;
  if (s == "adaptive_rk" || s == "rk") return Method::adaptive_rk;
  throw InputError("unknown propagation method '" + s + "'");
}

namespace {

DensityMatrix checked_state(Matrix m, double t) {
  m = (0.5 * (m + m.adjoint())).eval();
  Tolerances tol;
  tol.trace = 1e-8;
  tol.min_eigenvalue = -1e-8;
  try {
    return DensityMatrix(std::move(m), tol);
  } catch (const InvariantError& e) {
    throw IntegrationError("propagation left the state space at t=" + std::to_string(t) + ": " +
                           e.what());
  }
}

void check_times(std::span<const double> times) {
  if (times.empty()) throw InputError("propagate: empty time list");
  if (!(times[0] >= 0.0)) throw InputError("propagate: times must start at t >= 0");
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (!(times[k] > times[k - 1])) throw InputError("propagate: times must be strictly ascending");
  }
}

}  // namespace

Propagator::Propagator(const LindbladModel& model, Method method, OdeOptions options)
    : gen_(model), effective_(method), options_(options) {
  if (method == Method::exact_exponential && !gen_.diagonal()) {
    if (model.dim <= kDenseExpmDimLimit) {
      dense_ = build_liouvillian(model).matrix;
    } else {
      Matrix g = -kI * model.hamiltonian;
      for (const auto& t : model.terms) {
        g -= 0.5 * t.rate * t.op.adjoint() * t.op;
        const double n = operator_norm(t.op);
        bound_ += t.rate * n * n;
      }
      bound_ += 2.0 * operator_norm(g);
    }
  }
}

const Matrix& Propagator::step_matrix(double dt) {
  for (const auto& [gap, m] : step_cache_) {
    if (std::abs(gap - dt) <= 1e-13 * std::max(1.0, dt)) return m;
  }
  step_cache_.emplace_back(dt, (dense_ * dt).exp().eval());
  return step_cache_.back().second;
}

Matrix Propagator::exp_action(const Matrix& rho, double dt) const {
  const int substeps = std::max(1, static_cast<int>(std::ceil(bound_ * dt)));
  const double h = dt / substeps;
  Matrix v = rho;
  for (int s = 0; s < substeps; ++s) {
    Matrix term = v;
    Matrix sum = v;
    for (int k = 1; k <= 60; ++k) {
      term = gen_.apply(term) * (h / k);
      sum += term;
      if (term.norm() <= 1e-17 * sum.norm()) break;
    }
    v = std::move(sum);
  }
  return v;
}

Trajectory Propagator::run(const DensityMatrix& rho0, std::span<const double> times) {
  check_times(times);
  require_same_dim(rho0.dim(), gen_.dim(), "propagate");

  Trajectory traj;
  traj.times.assign(times.begin(), times.end());
  traj.states.reserve(times.size());
  traj.purities.reserve(times.size());

  auto record = [&](Matrix m, double t) {
    traj.states.push_back(checked_state(std::move(m), t));
    traj.purities.push_back(purity(traj.states.back()));
  };

  if (effective_ == Method::exact_exponential && gen_.diagonal()) {
    const Matrix& r = gen_.rate_matrix();
    for (double t : times) {
      record((r * t).array().exp().matrix().cwiseProduct(rho0.matrix()), t);
    }
    return traj;
  }

  Matrix rho = rho0.matrix();
  double now = 0.0;

  if (effective_ == Method::exact_exponential) {
    for (double t : times) {
      const double dt = t - now;
      if (dt > 0.0) {
        rho = dense_.size() > 0 ? unvectorize(step_matrix(dt) * vectorize(rho), gen_.dim()) : exp_action(rho, dt);
      }
      now = t;
      rho = (0.5 * (rho + rho.adjoint())).eval();
      record(rho, t);
    }
    return traj;
  }

  DormandPrince<Matrix> rk([this](double, const Matrix& y) { return gen_.apply(y); }, options_);
  for (double t : times) {
    rk.advance(rho, now, t, [](double, Matrix& y) { y = (0.5 * (y + y.adjoint())).eval(); });
    record(rho, t);
  }
  return traj;
}

Trajectory propagate(const LindbladModel& model, const DensityMatrix& rho0,
                     std::span<const double> times, Method method) {
  Propagator p(model, method);
  return p.run(rho0, times);
}

std::pair<std::vector<double>, std::vector<double>> purity_trajectory(const Trajectory& traj) {
  std::vector<double> p;
  p.reserve(traj.states.size());
  for (const auto& s : traj.states) p.push_back(purity(s));
  return {traj.times, p};
}

namespace {

/// Splits Hermitian null-space elements into trace-normalized positive and negative parts.
std::vector<Matrix> positive_parts(const std::vector<Matrix>& hermitian) {
  std::vector<Matrix> out;
  for (const auto& h : hermitian) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(h);
    const RealVector& w = es.eigenvalues();
    const double cut = 1e-12 * w.cwiseAbs().maxCoeff();
    Matrix pos = Matrix::Zero(h.rows(), h.cols());
    Matrix neg = Matrix::Zero(h.rows(), h.cols());
    for (Eigen::Index k = 0; k < w.size(); ++k) {
      const Vector v = es.eigenvectors().col(k);
      if (w(k) > cut) pos += w(k) * (v * v.adjoint());
      if (w(k) < -cut) neg -= w(k) * (v * v.adjoint());
    }
    for (Matrix* m : {&pos, &neg}) {
      const double tr = m->trace().real();
      if (tr > 0.0) out.push_back(*m / tr);
    }
  }
  return out;
}

}  // namespace

StationarySet stationary_states(const LindbladModel& model, double tol) {
  const Generator gen(model);
  const Eigen::Index d = model.dim;
  const double scale = gen.norm();

  std::vector<Matrix> null_basis;
  if (gen.diagonal()) {
    const Matrix& r = gen.rate_matrix();
    for (Eigen::Index j = 0; j < d; ++j) {
      for (Eigen::Index i = 0; i < d; ++i) {
        if (std::abs(r(i, j)) <= tol * scale) {
          Matrix e = Matrix::Zero(d, d);
          e(i, j) = 1.0;
          null_basis.push_back(std::move(e));
        }
      }
    }
  } else {
    if (d > kDenseDimLimit) {
      throw DimensionError("stationary_states: dense null-space search limited to dim <= " +
                           std::to_string(kDenseDimLimit));
    }
    const Matrix l = build_liouvillian(model).matrix;
    Eigen::BDCSVD<Matrix> svd(l, Eigen::ComputeFullV);
    const RealVector& sv = svd.singularValues();
    for (Eigen::Index k = 0; k < sv.size(); ++k) {
      if (sv(k) <= tol * scale) null_basis.push_back(unvectorize(svd.matrixV().col(k), d));
    }
  }

  StationarySet result;
  result.null_dimension = static_cast<Eigen::Index>(null_basis.size());
  if (null_basis.empty()) {
    result.detection_failed = true;
    return result;
  }

  // Hermitian and anti-Hermitian parts of each null vector are again null vectors.
  std::vector<Matrix> hermitian;
  for (const auto& v : null_basis) {
    for (const Matrix& h : {Matrix(0.5 * (v + v.adjoint())), Matrix(-0.5 * kI * (v - v.adjoint()))}) {
      Matrix r = h;
      for (const auto& q : hermitian) r -= inner(q, r).real() * q;
      const double n = r.norm();
      if (n > 1e-8 * std::max(1.0, h.norm())) hermitian.push_back(r / n);
    }
  }

  std::vector<Matrix> candidates = positive_parts(hermitian);
  std::stable_sort(candidates.begin(), candidates.end(), [](const Matrix& a, const Matrix& b) {
    return a.squaredNorm() > b.squaredNorm();
  });

  std::vector<Vector> span;
  for (const auto& c : candidates) {
    if (static_cast<Eigen::Index>(result.states.size()) >= result.null_dimension) break;
    Vector v = vectorize(c);
    for (const auto& q : span) v -= q.dot(v) * q;
    if (v.norm() <= 1e-8 * c.norm()) continue;
    if (gen.relative_action(c) >= tol) continue;
    span.push_back(v / v.norm());
    try {
      result.states.emplace_back(0.5 * (c + c.adjoint()));
    } catch (const InvariantError&) {
      span.pop_back();
    }
  }
  return result;
}

bool is_unital(const LindbladModel& model, double tol) {
  const Generator gen(model);
  return gen.relative_action(Matrix::Identity(model.dim, model.dim) / static_cast<double>(model.dim)) <
         tol;
}

}  // namespace ppsd
