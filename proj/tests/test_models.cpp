#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ppsd/models.hpp"
#include "ppsd/ppsd.hpp"

using namespace ppsd;

TEST(Catalog, HasAllEntriesInOrder) {
  const auto& cat = model_catalog();
  ASSERT_EQ(cat.size(), 13u);
  for (std::size_t i = 0; i < cat.size(); ++i) {
    EXPECT_EQ(static_cast<std::size_t>(cat[i].name), i);
    EXPECT_EQ(model_name_from_string(to_string(cat[i].name)), cat[i].name);
    EXPECT_FALSE(cat[i].anchor.empty());
  }
}

TEST(Catalog, Errors) {
  EXPECT_THROW(model_name_from_string("lossy_cavity"), InputError);
  EXPECT_THROW(catalog_model({ModelName::thermal_qubit, {{"gamma0", 1.0}}, {}, {}}), InputError);
  EXPECT_THROW(catalog_model({ModelName::dephasing_qubit, {{"gamma", 1.0}, {"N", 0.0}}, {}, {}}), InputError);
  EXPECT_THROW(catalog_model({ModelName::dephasing_qubit, {{"gamma", -1.0}}, {}, {}}), InputError);
  EXPECT_THROW(catalog_model({ModelName::thermal_qubit, {{"gamma0", 1.0}, {"N", -0.5}}, {}, {}}), InputError);
  // alpha = 400 puts the Gaussian width well below a grid spacing of 10/31
  EXPECT_THROW(catalog_model({ModelName::grw, {{"lambda", 1.0}, {"alpha", 400.0}}, {}, GridSpec{-5, 5, 32}}),
               InputError);
  EXPECT_THROW(catalog_model({ModelName::multimode, {{"modes", 4.0}}, {}, {}}), InputError);
}

TEST(Catalog, DephasingAndThermalTerms) {
  const auto deph = catalog_model({ModelName::dephasing_qubit, {{"gamma", 1.0}}, {}, {}});
  ASSERT_EQ(deph.terms.size(), 1u);
  EXPECT_EQ(deph.terms[0].rate, 1.0);
  EXPECT_LT((deph.terms[0].op - pauli_operators().z).norm(), 1e-15);

  const auto th = catalog_model({ModelName::thermal_qubit, {{"gamma0", 1.0}, {"N", 0.0}}, {}, {}});
  ASSERT_EQ(th.terms.size(), 1u);
  EXPECT_EQ(th.terms[0].rate, 1.0);
  EXPECT_LT((th.terms[0].op - pauli_operators().minus).norm(), 1e-15);
}

TEST(Catalog, DimensionsMatchBuiltModels) {
  const std::vector<ModelSpec> specs = {
      {ModelName::damped_oscillator, {{"gamma0", 1}, {"N", 0}}, {}, {}},
      {ModelName::multimode, {{"modes", 3.0}}, 3, {}},
      {ModelName::csl, {{"lambda", 1.0}}, {}, {}},
      {ModelName::position_decoherence, {{"gamma", 1.0}}, {}, GridSpec{-2, 2, 17}},
  };
  for (const auto& s : specs) EXPECT_EQ(catalog_model(s).dim, model_dimension(s));
  EXPECT_EQ(model_dimension(specs[0]), 40);
  EXPECT_EQ(model_dimension(specs[1]), 27);
  EXPECT_EQ(model_dimension(specs[2]), 16);
}

TEST(ClosedForms, DephasingValues) {
  Matrix m(2, 2);
  m << 0.5, 0.5, 0.5, 0.5;
  const DensityMatrix rho(m);
  EXPECT_LT((dephasing_closed_form(rho, 1.0, 0.0).matrix() - m).norm(), 1e-15);
  EXPECT_NEAR(dephasing_closed_form(rho, 1.0, 0.5).matrix()(1, 0).real(), 0.183940, 1e-6);
  const DensityMatrix diag(Matrix(Vector::Constant(2, 0.5).asDiagonal()));
  EXPECT_LT((dephasing_closed_form(diag, 3.0, 7.0).matrix() - diag.matrix()).norm(), 1e-15);
  EXPECT_THROW(dephasing_closed_form(DensityMatrix::maximally_mixed(3), 1.0, 1.0), DimensionError);
}

TEST(ClosedForms, PositionFactor) {
  const GridSpec g{-1.0, 1.0, 9};  // spacing 0.25, so indices 0 and 4 are one length apart
  const DensityMatrix rho = StateVector::normalized(Vector::Ones(9)).density();
  const Matrix out = position_closed_form(rho, g, 1.0, 1.0).matrix();
  EXPECT_NEAR((out(0, 4) / rho.matrix()(0, 4)).real(), 0.367879, 1e-6);
  for (Eigen::Index i = 0; i < 9; ++i) EXPECT_NEAR(out(i, i).real(), rho.matrix()(i, i).real(), 1e-15);
}

TEST(ClosedForms, ThermalQubitRoots) {
  const auto r0 = thermal_qubit_ppsd_roots(0.0);
  ASSERT_EQ(r0.size(), 1u);
  EXPECT_EQ(r0[0], 0.0);
  EXPECT_TRUE(thermal_qubit_ppsd_roots(1.0).empty());
  EXPECT_TRUE(thermal_qubit_ppsd_roots(0.5).empty());
  EXPECT_THROW(thermal_qubit_ppsd_roots(-1.0), InputError);
}

TEST(ThreeLevel, ConditionValues) {
  EXPECT_NEAR(three_level_ppsd_condition(0.3, 0.7, 0.0, 1, 1, 0, 0), 0.0, 1e-15);
  EXPECT_NEAR(three_level_ppsd_condition(0.25, 0.25, 0.5, 1, 1, 0, 0), 0.75, 1e-15);
  EXPECT_THROW(three_level_ppsd_condition(0.5, 0.6, 0.0, 1, 1, 0, 0), InputError);
}

TEST(ThreeLevel, ConditionEqualsModelResidual) {
  const double g1 = 1.0, g2 = 0.3, n1 = 0.4, n2 = 0.2;
  const auto model = catalog_model({ModelName::three_level_atom, {{"gamma1", g1}, {"gamma2", g2}, {"N1", n1}, {"N2", n2}}, {}, {}});
  std::mt19937_64 rng(5);
  for (int i = 0; i < 20; ++i) {
    const auto psi = random_state(3, rng);
    const auto p = psi.amplitudes().cwiseAbs2();
    EXPECT_NEAR(ppsd_residual(model, psi), three_level_ppsd_condition(p(0), p(1), p(2), g1, g2, n1, n2), 1e-13);
  }
}

TEST(ThreeLevel, PaperRegimeFeasibility) {
  const double g1 = 1.0, g2 = 0.01, n1 = 0.4, n2 = 0.0004;
  const auto p2min = three_level_min_feasible_p2(g1, g2, n1, n2);
  ASSERT_TRUE(p2min);
  EXPECT_GT(*p2min, 0.83);
  EXPECT_LT(*p2min, 0.90);

  std::vector<double> grid;
  for (int k = 0; k <= 100; ++k) grid.push_back(0.8 + 0.002 * k);
  for (const auto& row : three_level_feasibility_scan(g1, g2, n1, n2, grid)) {
    if (row.p2 < *p2min - 1e-9) {
      EXPECT_TRUE(row.p1_roots.empty());
    }
    for (std::size_t k = 0; k < row.p1_roots.size(); ++k) {
      EXPECT_GT(row.p1_plus_p2[k], 1.0);
      // the root really zeroes the condition, so p3 = 1 - p1 - p2 < 0 is unphysical
      const double p1 = row.p1_roots[k];
      const double p3 = 1.0 - p1 - row.p2;
      const double val = g1 * (n1 + 1) * p3 * (1 - p1) + g1 * n1 * p1 * (1 - p3) + g2 * (n2 + 1) * p3 * (1 - row.p2) +
                         g2 * n2 * row.p2 * (1 - p3);
      EXPECT_NEAR(val, 0.0, 1e-12);
    }
  }
  const auto edge = three_level_p3_zero_solution(g1, g2, n1, n2);
  EXPECT_LT(std::min(edge[0], edge[1]), 0.0);
  EXPECT_NEAR(edge[0] + edge[1], 1.0, 1e-15);
}

TEST(Squeezed, CandidateState) {
  EXPECT_NEAR(squeezed_ground_weight(0.2), 0.16484, 1e-5);
  EXPECT_THROW(squeezed_ground_weight(0.0), InputError);
  const double pi = std::numbers::pi;
  for (double r : {0.1, 0.2, 0.5}) {
    for (double theta : {0.0, pi / 2, pi}) {
      const auto psi = squeezed_ppsd_state(r, theta);
      const Operator c = squeezed_jump_operator(r, theta);
      const Complex lambda = expectation(c, psi);
      EXPECT_LT((c * psi.amplitudes() - lambda * psi.amplitudes()).norm(), 1e-12);
      EXPECT_NEAR(std::abs(lambda), std::sqrt(std::sinh(2 * r) / 2), 1e-12);
      const auto model = catalog_model({ModelName::squeezed_vacuum_decay, {{"gamma0", 1.0}, {"r", r}, {"theta", theta}}, {}, {}});
      EXPECT_LT(ppsd_residual(model, psi), 1e-12);
    }
  }
}

TEST(Squeezed, BlochSolutionMatchesPropagation) {
  const double r = 0.3, theta = 0.7, gamma = 1.3;
  const auto model = catalog_model({ModelName::squeezed_vacuum_decay, {{"gamma0", gamma}, {"r", r}, {"theta", theta}}, {}, {}});
  std::mt19937_64 rng(9);
  const auto psi = random_state(2, rng);
  const Matrix& m = psi.projector();
  // basis (|e>, |g>): n = (2 Re rho_eg, -2 Im rho_eg, rho_ee - rho_gg)
  auto bloch = [](const Matrix& rho) {
    return std::array<double, 3>{2 * rho(1, 0).real(), 2 * rho(1, 0).imag(), (rho(0, 0) - rho(1, 1)).real()};
  };
  const std::vector<double> times = {0.0, 0.4, 1.5};
  const auto traj = propagate(model, psi.density(), times);
  for (std::size_t k = 0; k < times.size(); ++k) {
    const auto expect = squeezed_bloch_solution_theta(bloch(m), gamma, r, theta, times[k]);
    const auto got = bloch(traj.states[k].matrix());
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(got[i], expect[i], 1e-10);
  }
}

TEST(Squeezed, BlochLimits) {
  const std::array<double, 3> n0 = {0.6, 0.0, 0.8};
  const auto at0 = squeezed_bloch_solution(n0, 1.0, 0.2, 0.3, 0.0);
  for (int i = 0; i < 3; ++i) EXPECT_NEAR(at0[i], n0[i], 1e-15);
  // without squeezing the upper pole is an exact pure fixed point
  const auto top = squeezed_bloch_solution({0, 0, 1}, 1.0, 0.0, 0.0, 5.0);
  EXPECT_NEAR(top[0] * top[0] + top[1] * top[1] + top[2] * top[2], 1.0, 1e-15);
}

TEST(Squeezed, Fig3Curve) {
  const double pi = std::numbers::pi;
  std::vector<double> times;
  for (int k = 0; k < 100; ++k) times.push_back(3.0 * k / 99);
  const auto curve = fig3_purity_curve(1.0, 0.2, pi, -pi / 2, times);
  EXPECT_NEAR(curve[0].purity, 1.0, 1e-10);
  for (std::size_t k = 1; k < curve.size(); ++k) EXPECT_LT(curve[k].purity, curve[k - 1].purity);
}

TEST(Squeezed, Fig3DerivativeAtZeroSqueezing) {
  // r = 0: n_xy' = -gamma n_xy / 2 and n_z' = -gamma (n_z - 1)
  const double pe = 0.3, delta = 0.4, gamma = 1.0, h = 1e-5;
  const auto n = squeezed_initial_bloch(pe, delta);
  const double slope = 2 * (n[0] * (-0.5 * gamma * n[0]) + n[1] * (-0.5 * gamma * n[1]) + n[2] * (-gamma * (n[2] - 1)));
  auto purity_at = [&](double t) {
    const auto m = squeezed_bloch_solution_theta(n, gamma, 0.0, 0.0, t);
    return m[0] * m[0] + m[1] * m[1] + m[2] * m[2];
  };
  EXPECT_NEAR((purity_at(h) - purity_at(0.0)) / h, slope, 1e-4);
  EXPECT_THROW(squeezed_initial_bloch(1.5, 0.0), InputError);
}

TEST(Nonadiabatic, BoundAndCommutator) {
  NonadiabaticParams p;
  const auto rb = nonadiabatic_residual_bound(p, StateVector::basis(40, 0));
  EXPECT_NEAR(rb.bound, 1.0, 1e-15);
  EXPECT_GE(rb.residual, rb.bound - 1e-9);

  p.mu = 0.7;
  p.kappa = 2.0;
  const Eigen::Index d = 20;
  const Operator fp = nonadiabatic_f_plus(p, d);
  const Matrix comm = fp * fp.adjoint() - fp.adjoint() * fp;
  const double expected = 1.0 / (p.m * p.omega0 * p.kappa);
  // truncation spoils only the last level
  EXPECT_LT((comm.topLeftCorner(d - 1, d - 1) - expected * Matrix::Identity(d - 1, d - 1)).cwiseAbs().maxCoeff(), 1e-12);

  p.m = 0.0;
  EXPECT_THROW(nonadiabatic_f_plus(p, d), InputError);
}

TEST(Grw, ClosedFormProperties) {
  const GridSpec g{-2.0, 2.0, 33};
  std::mt19937_64 rng(12);
  const auto rho = random_density(33, 2, rng);
  const Matrix out = grw_closed_form(rho, g, 0.5, 1.0, 2.0).matrix();
  for (Eigen::Index i = 0; i < 33; ++i) EXPECT_NEAR(std::abs(out(i, i) - rho.matrix()(i, i)), 0.0, 1e-15);
  // far apart points lose coherence at rate lambda
  EXPECT_NEAR(std::abs(out(0, 32) / rho.matrix()(0, 32)), std::exp(-0.5 * 2.0 * (1 - std::exp(-4.0))), 1e-12);
}

TEST(Grw, CatalogMatchesClosedForm) {
  const GridSpec g{-3.0, 3.0, 25};
  const auto model = catalog_model({ModelName::grw, {{"lambda", 1.0}, {"alpha", 2.0}}, {}, g});
  std::mt19937_64 rng(13);
  const auto rho = random_density(25, 3, rng);
  const std::vector<double> times = {0.0, 0.7};
  const auto traj = propagate(model, rho, times);
  const Matrix expect = grw_closed_form(rho, g, 1.0, 2.0, 0.7).matrix();
  EXPECT_LT((traj.states[1].matrix() - expect).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(FixedPoints, HermitianFamilies) {
  const std::vector<ModelSpec> specs = {
      {ModelName::phase_damped_oscillator, {{"gamma", 1.0}}, 10, {}},
      {ModelName::walls_collet_milburn, {{"epsilon", 1.0}, {"gamma", 2.0}}, 10, {}},
      {ModelName::grw, {{"lambda", 1.0}, {"alpha", 1.0}}, {}, GridSpec{-3, 3, 32}},
      {ModelName::csl, {{"lambda", 1.0}}, {}, {}},
  };
  for (const auto& s : specs) {
    const auto model = catalog_model(s);
    const auto fp = hermitian_lindblad_fixed_points(model);
    EXPECT_TRUE(fp.commuting);
    EXPECT_EQ(static_cast<Eigen::Index>(fp.states.size()), model.dim);
    EXPECT_LT(fp.max_relative_action, 1e-10);
  }
}

TEST(FixedPoints, NonCommutingAndNonHermitian) {
  const auto dep = catalog_model({ModelName::depolarizing, {{"gamma_x", 1}, {"gamma_y", 0}, {"gamma_z", 1}}, {}, {}});
  const auto fp = hermitian_lindblad_fixed_points(dep);
  EXPECT_FALSE(fp.commuting);
  EXPECT_TRUE(fp.states.empty());
  const auto th = catalog_model({ModelName::thermal_qubit, {{"gamma0", 1}, {"N", 0}}, {}, {}});
  EXPECT_THROW(hermitian_lindblad_fixed_points(th), InvariantError);
}

TEST(Multimode, ResidualIsSumOverModes) {
  const auto both = catalog_model({ModelName::multimode, {{"modes", 2.0}, {"N1", 0.3}, {"N2", 0.1}, {"gamma2", 0.5}}, 3, {}});
  const auto m1 = catalog_model({ModelName::damped_oscillator, {{"gamma0", 1.0}, {"N", 0.3}}, 3, {}});
  const auto m2 = catalog_model({ModelName::damped_oscillator, {{"gamma0", 0.5}, {"N", 0.1}}, 3, {}});
  std::mt19937_64 rng(21);
  for (int i = 0; i < 5; ++i) {
    const auto a = random_state(3, rng);
    const auto b = random_state(3, rng);
    const StateVector prod(kron(a.amplitudes(), b.amplitudes()));
    EXPECT_NEAR(ppsd_residual(both, prod), ppsd_residual(m1, a) + ppsd_residual(m2, b), 1e-12);
  }
}

TEST(Depolarizing, ResidualNeverBelowSmallestPair) {
  // sum of Pauli variances is 2 for any pure qubit state, each term at most 1
  const double gx = 0.2, gy = 0.5, gz = 0.9;
  const auto model = catalog_model({ModelName::depolarizing, {{"gamma_x", gx}, {"gamma_y", gy}, {"gamma_z", gz}}, {}, {}});
  std::mt19937_64 rng(22);
  for (int i = 0; i < 200; ++i) {
    EXPECT_GE(ppsd_residual(model, random_state(2, rng)), gx + gy - 1e-12);
  }
}

TEST(DampedOscillator, ThermalResidualFloor) {
  // the a_dag term alone contributes gamma0 N (<a a_dag> - |<a>|^2) >= gamma0 N below the truncation edge
  const double n = 0.4;
  const auto model = catalog_model({ModelName::damped_oscillator, {{"gamma0", 1.0}, {"N", n}}, 30, {}});
  std::mt19937_64 rng(23);
  for (int i = 0; i < 50; ++i) {
    const auto psi = random_state_in(30, 10, rng);
    EXPECT_GE(ppsd_residual(model, psi), n - 1e-12);
  }
}

TEST(GroundState, Conventions) {
  EXPECT_EQ(ground_state({ModelName::thermal_qubit, {{"gamma0", 1}, {"N", 0}}, {}, {}}).amplitudes()(1), Complex(1, 0));
  EXPECT_EQ(ground_state({ModelName::damped_oscillator, {{"gamma0", 1}, {"N", 0}}, 5, {}}).amplitudes()(0), Complex(1, 0));
  EXPECT_EQ(ground_state({ModelName::grw, {{"lambda", 1}, {"alpha", 1}}, {}, GridSpec{-1, 1, 9}}).amplitudes()(4),
            Complex(1, 0));
}
