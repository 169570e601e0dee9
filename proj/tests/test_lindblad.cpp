#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <unsupported/Eigen/MatrixFunctions>

#include "ppsd/lindblad.hpp"
#include "ppsd/models.hpp"

using namespace ppsd;

namespace {

/// Textbook dissipator, used as the reference for every faster path.
Matrix reference_action(const LindbladModel& m, const Matrix& rho) {
  Matrix out = -kI * (m.hamiltonian * rho - rho * m.hamiltonian);
  for (const auto& t : m.terms) {
    const Matrix ldl = t.op.adjoint() * t.op;
    out += t.rate * (t.op * rho * t.op.adjoint() - 0.5 * (ldl * rho + rho * ldl));
  }
  return out;
}

LindbladModel random_model(Eigen::Index d, int n_terms, std::mt19937_64& rng) {
  std::normal_distribution<double> g;
  auto rnd = [&] {
    Matrix m(d, d);
    for (Eigen::Index i = 0; i < d; ++i) {
      for (Eigen::Index j = 0; j < d; ++j) m(i, j) = Complex(g(rng), g(rng));
    }
    return m;
  };
  const Matrix h = rnd();
  std::vector<LindbladTerm> terms;
  for (int k = 0; k < n_terms; ++k) terms.push_back({0.3 + 0.1 * k, rnd() / std::sqrt(double(d)), {}});
  return make_model(0.5 * (h + h.adjoint()), std::move(terms), "random");
}

std::vector<ModelSpec> desk_catalog() {
  return {
      {ModelName::dephasing_qubit, {{"gamma", 1.0}}, {}, {}},
      {ModelName::position_decoherence, {{"gamma", 0.5}}, {}, GridSpec{-3, 3, 16}},
      {ModelName::thermal_qubit, {{"gamma0", 1.0}, {"N", 0.3}}, {}, {}},
      {ModelName::damped_oscillator, {{"gamma0", 1.0}, {"N", 0.2}, {"omega", 0.7}}, 8, {}},
      {ModelName::three_level_atom, {{"gamma1", 1.0}, {"gamma2", 0.3}, {"N1", 0.4}, {"N2", 0.1}}, {}, {}},
      {ModelName::multimode, {{"modes", 2}, {"gamma1", 1.0}, {"N1", 0.2}, {"gamma2", 0.5}, {"N2", 0.0}}, 3, {}},
      {ModelName::phase_damped_oscillator, {{"gamma", 0.4}}, 6, {}},
      {ModelName::depolarizing, {{"gamma_x", 0.2}, {"gamma_y", 0.5}, {"gamma_z", 1.0}}, {}, {}},
      {ModelName::squeezed_vacuum_decay, {{"gamma0", 1.0}, {"r", 0.3}, {"theta", 0.8}}, {}, {}},
      {ModelName::nonadiabatic_driven, {{"mu", 0.3}, {"alpha", 0.5}}, 8, {}},
      {ModelName::walls_collet_milburn, {{"epsilon", 0.5}, {"gamma", 1.0}}, 6, {}},
      {ModelName::grw, {{"lambda", 1.0}, {"alpha", 1.0}}, {}, GridSpec{-3, 3, 16}},
      {ModelName::csl, {{"lambda", 0.5}}, {}, {}},
  };
}

double max_rate(const LindbladModel& m) {
  double r = 0.0;
  for (const auto& t : m.terms) r = std::max(r, t.rate * std::pow(operator_norm(t.op), 2));
  return std::max(r, 1e-3);
}

}  // namespace

TEST(Lindblad, VectorizationIsColumnStacking) {
  Matrix m(2, 2);
  m << 1.0, 2.0, 3.0, 4.0;
  const Vector v = vectorize(m);
  EXPECT_EQ(v(1), Complex(3.0, 0.0));
  EXPECT_EQ(v(2), Complex(2.0, 0.0));
  EXPECT_EQ((unvectorize(v, 2) - m).norm(), 0.0);
}

TEST(Lindblad, SuperoperatorAndMatrixFreeActionAgreeWithReference) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 5; ++trial) {
    const auto model = random_model(4, 1 + trial % 3, rng);
    const auto rho = random_density(4, 4, rng).matrix();
    const Matrix ref = reference_action(model, rho);
    EXPECT_LT((build_liouvillian(model).apply(rho) - ref).norm(), 1e-12);
    EXPECT_LT((apply_liouvillian(model, rho) - ref).norm(), 1e-12);
  }
}

TEST(Lindblad, MatrixFreeNormEqualsDenseFrobenius) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    const auto model = random_model(3 + trial % 2, 2, rng);
    EXPECT_NEAR(liouvillian_norm(model), build_liouvillian(model).matrix.norm(), 1e-10);
  }
  for (const auto& spec : desk_catalog()) {
    const auto model = catalog_model(spec);
    if (model.dim > 16) continue;
    EXPECT_NEAR(liouvillian_norm(model), build_liouvillian(model).matrix.norm(), 1e-9 * liouvillian_norm(model))
        << to_string(spec.name);
  }
}

TEST(Lindblad, DiagonalFastPathMatchesReference) {
  const auto model = catalog_model({ModelName::position_decoherence, {{"gamma", 1.0}}, {}, GridSpec{-2, 2, 9}});
  const Generator gen(model);
  ASSERT_TRUE(gen.diagonal());
  std::mt19937_64 rng(1);
  const auto rho = random_density(9, 3, rng).matrix();
  EXPECT_LT((gen.apply(rho) - reference_action(model, rho)).norm(), 1e-12);
}

TEST(Lindblad, ModelValidation) {
  const auto s = pauli_operators();
  EXPECT_THROW(make_model(s.plus, {}, "bad"), InvariantError);
  EXPECT_THROW(make_model(s.z, {{-1.0, s.x, {}}}, "bad"), InvariantError);
  EXPECT_THROW(make_model(s.z, {{1.0, identity(3), {}}}, "bad"), DimensionError);
}

TEST(Lindblad, TimesMustBeAscending) {
  const auto model = catalog_model({ModelName::dephasing_qubit, {{"gamma", 1.0}}, {}, {}});
  const auto rho = StateVector::basis(2, 0).density();
  const std::vector<double> bad = {0.0, 0.5, 0.4};
  EXPECT_THROW(propagate(model, rho, bad), InputError);
  const std::vector<double> neg = {-0.1, 0.5};
  EXPECT_THROW(propagate(model, rho, neg), InputError);
  EXPECT_THROW(method_from_string("euler"), InputError);
  EXPECT_EQ(method_from_string("rk"), Method::adaptive_rk);
}

TEST(Lindblad, DephasingMatchesClosedForm) {
  const auto model = catalog_model({ModelName::dephasing_qubit, {{"gamma", 1.0}}, {}, {}});
  std::mt19937_64 rng(17);
  std::vector<double> times;
  for (int k = 0; k <= 20; ++k) times.push_back(0.1 * k);
  for (int i = 0; i < 5; ++i) {
    const auto rho0 = random_density(2, 2, rng);
    for (Method m : {Method::exact_exponential, Method::adaptive_rk}) {
      const auto traj = propagate(model, rho0, times, m);
      for (std::size_t k = 0; k < times.size(); ++k) {
        const auto cf = dephasing_closed_form(rho0, 1.0, times[k]);
        EXPECT_LT((traj.states[k].matrix() - cf.matrix()).cwiseAbs().maxCoeff(), 1e-9);
      }
    }
  }
}

TEST(Lindblad, SemigroupProperty) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (const auto& spec : desk_catalog()) {
    const auto model = catalog_model(spec);
    const auto rho0 = random_density(model.dim, 2, rng);
    Propagator prop(model, Method::exact_exponential);
    for (int i = 0; i < 50; ++i) {
      const double t = u(rng) / max_rate(model), s = u(rng) / max_rate(model);
      const std::vector<double> ts = {t};
      const auto mid = prop.run(rho0, ts).states[0];
      const std::vector<double> ss = {s};
      const auto two_step = prop.run(mid, ss).states[0];
      const std::vector<double> total = {t + s};
      const auto one_step = prop.run(rho0, total).states[0];
      ASSERT_LT((two_step.matrix() - one_step.matrix()).cwiseAbs().maxCoeff(), 1e-8) << to_string(spec.name);
    }
  }
}

TEST(Lindblad, MethodsAgreeOnCatalog) {
  std::mt19937_64 rng(29);
  for (const auto& spec : desk_catalog()) {
    const auto model = catalog_model(spec);
    const auto rho0 = random_density(model.dim, 2, rng);
    const double t_end = 5.0 / max_rate(model);
    std::vector<double> times;
    for (int k = 0; k <= 10; ++k) times.push_back(t_end * k / 10);
    const auto a = propagate(model, rho0, times, Method::exact_exponential);
    const auto b = propagate(model, rho0, times, Method::adaptive_rk);
    for (std::size_t k = 0; k < times.size(); ++k) {
      EXPECT_LT((a.states[k].matrix() - b.states[k].matrix()).cwiseAbs().maxCoeff(), 1e-7) << to_string(spec.name);
    }
  }
}

TEST(Lindblad, TaylorActionMatchesDenseExponential) {
  // dim 20 takes the Taylor path; the dense exponential is the oracle.
  const auto model = catalog_model({ModelName::damped_oscillator, {{"gamma0", 1.0}, {"N", 0.3}, {"omega", 1.0}}, 20, {}});
  Propagator prop(model, Method::exact_exponential);
  std::mt19937_64 rng(31);
  const auto rho0 = random_density(20, 3, rng);
  const std::vector<double> times = {0.0, 0.37, 1.5};
  const auto traj = prop.run(rho0, times);
  const Matrix l = build_liouvillian(model).matrix;
  for (std::size_t k = 0; k < times.size(); ++k) {
    const Matrix step = Matrix(l * times[k]).exp();
    const Matrix ref = unvectorize(step * vectorize(rho0.matrix()), 20);
    EXPECT_LT((traj.states[k].matrix() - ref).cwiseAbs().maxCoeff(), 1e-10);
  }
}

TEST(Lindblad, TrajectoriesKeepInvariants) {
  std::mt19937_64 rng(37);
  for (const auto& spec : desk_catalog()) {
    const auto model = catalog_model(spec);
    const auto rho0 = random_density(model.dim, 1, rng);
    std::vector<double> times;
    for (int k = 0; k <= 8; ++k) times.push_back(k * 0.5 / max_rate(model));
    const auto traj = propagate(model, rho0, times);
    for (const auto& s : traj.states) {
      EXPECT_NEAR(s.matrix().trace().real(), 1.0, 1e-10);
      EXPECT_LT(hermiticity_defect(s.matrix()), 1e-12);
      EXPECT_GT(min_eigenvalue(s.matrix()), -1e-9);
    }
  }
}

TEST(Lindblad, StationaryStatesOfAmplitudeDamping) {
  const auto model = catalog_model({ModelName::thermal_qubit, {{"gamma0", 1.0}, {"N", 0.0}}, {}, {}});
  const auto set = stationary_states(model);
  ASSERT_EQ(set.states.size(), 1u);
  EXPECT_EQ(set.null_dimension, 1);
  EXPECT_NEAR(set.states[0](1, 1).real(), 1.0, 1e-10);
}

TEST(Lindblad, StationaryStatesOfThermalQubit) {
  const double N = 0.5;
  const auto model = catalog_model({ModelName::thermal_qubit, {{"gamma0", 1.0}, {"N", N}}, {}, {}});
  const auto set = stationary_states(model);
  ASSERT_EQ(set.states.size(), 1u);
  // detailed balance: p_+ / p_- = N / (N + 1)
  EXPECT_NEAR(set.states[0](0, 0).real(), N / (2 * N + 1), 1e-10);
}

TEST(Lindblad, StationaryStatesOfDephasingAreBasisStates) {
  const auto model = catalog_model({ModelName::dephasing_qubit, {{"gamma", 1.0}}, {}, {}});
  const auto set = stationary_states(model);
  EXPECT_EQ(set.null_dimension, 2);
  ASSERT_EQ(set.states.size(), 2u);
  for (const auto& s : set.states) EXPECT_NEAR(purity(s), 1.0, 1e-10);
}

TEST(Lindblad, Unitality) {
  EXPECT_TRUE(is_unital(catalog_model({ModelName::depolarizing, {{"gamma_x", 1}, {"gamma_y", 0.2}, {"gamma_z", 0.0}}, {}, {}})));
  EXPECT_FALSE(is_unital(catalog_model({ModelName::thermal_qubit, {{"gamma0", 1}, {"N", 0.4}}, {}, {}})));
  for (const auto& spec : desk_catalog()) {
    EXPECT_EQ(is_unital(catalog_model(spec)), model_info(spec.name).unital) << to_string(spec.name);
  }
}
