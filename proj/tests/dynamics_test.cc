/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "pedavar/dynamics.h"
#include "pedavar/error.h"
#include "testing/random_fields.h"

namespace pedavar {
namespace {

constexpr double kPi = std::numbers::pi;

ModelConfig linear_config(double nu, double alpha = 0.0, double beta = 0.0, double gamma = 0.0,
                          double dt = 1e-3) {
  ModelConfig cfg;
  cfg.phys = PhysParams{alpha, beta, gamma, nu};
  cfg.dt = dt;
  cfg.linear = true;
  return cfg;
}

ModelConfig nonlinear_config(double dt = 0.01) {
  ModelConfig cfg;
  cfg.phys = PhysParams{1.0, 0.5, 0.5, 0.05};
  cfg.dt = dt;
  cfg.linear = false;
  return cfg;
}

StateField random_constrained(const Model & model, std::uint64_t seed, double amplitude = 0.5) {
  return model.constrain(testing::smooth_state(model.grid(), seed, amplitude));
}

TEST(DiagnoseWTest, ZeroAndNondivergentFlows) {
  Grid g(16, 12, 7);
  EXPECT_EQ(diagnose_w(Field3(g), Field3(g)).max_abs(), 0.0);

  // u = -Dy psi, v = Dx psi with psi independent of z.
  Field3 psi(g);
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) psi(i, j, k) = std::sin(g.x(i) + 2 * g.y(j)) + std::cos(3 * g.y(j));
  Field3 u = horizontal_derivative(psi, Axis::kY);
  u *= -1.0;
  const Field3 v = horizontal_derivative(psi, Axis::kX);
  EXPECT_LE(diagnose_w(u, v).max_abs(), 1e-13);
}

TEST(DiagnoseWTest, AnalyticProfile) {
  Grid g(64, 8, 33, 1.0);
  Field3 u(g);
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) u(i, j, k) = std::sin(g.x(i)) * g.z(k) * (1.0 - g.z(k));
  const Field3 w = diagnose_w(u, Field3(g));
  double err = 0.0;
  for (int k = 0; k < g.nz(); ++k) {
    const double z = g.z(k);
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i)
        err = std::max(err, std::abs(w(i, j, k) + std::cos(g.x(i)) * (z * z / 2 - z * z * z / 3)));
  }
  EXPECT_LE(err, 2e-3);
}

TEST(DiagnosePressureTest, HydrostaticOracles) {
  Grid g(6, 6, 33, 1.0);
  Field2 ps(g.nx(), g.ny());
  for (int j = 0; j < g.ny(); ++j)
    for (int i = 0; i < g.nx(); ++i) ps(i, j) = 0.1 * i - 0.3 * j;

  const Field3 p0 = diagnose_pressure(Field3(g), ps, 2.0);
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) EXPECT_EQ(p0(i, j, k), ps(i, j));

  Field3 theta(g), theta_z(g);
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        theta(i, j, k) = 0.7;
        theta_z(i, j, k) = g.z(k);
      }
  const Field3 pc = diagnose_pressure(theta, ps, 2.0);
  const Field3 pz = diagnose_pressure(theta_z, ps, 2.0);
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) {
        EXPECT_NEAR(pc(i, j, k), ps(i, j) + 2.0 * 0.7 * g.z(k), 1e-14);
        EXPECT_NEAR(pz(i, j, k) - ps(i, j), g.z(k) * g.z(k), 1e-3);
      }
  EXPECT_THROW(diagnose_pressure(theta, Field2(3, 3), 1.0), Error);
}

TEST(RigidLidTest, ZeroInputGivesZero) {
  Grid g(16, 16, 7);
  const RigidLidResult r = project_rigid_lid(Field3(g), Field3(g));
  EXPECT_EQ(r.gu.max_abs(), 0.0);
  EXPECT_EQ(r.gv.max_abs(), 0.0);
  for (double p : r.surface_pressure.values()) EXPECT_EQ(p, 0.0);
}

TEST(RigidLidTest, NondivergentInputUnchanged) {
  Grid g(16, 12, 7);
  std::mt19937_64 rng(21);
  Field3 psi = testing::white_noise(g, rng);
  Field3 gu = horizontal_derivative(psi, Axis::kY);
  gu *= -1.0;
  Field3 gv = horizontal_derivative(psi, Axis::kX);
  gu.zero_boundaries();
  gv.zero_boundaries();
  const RigidLidResult r = project_rigid_lid(gu, gv);
  EXPECT_LE((r.gu - gu).max_abs(), 1e-10);
  EXPECT_LE((r.gv - gv).max_abs(), 1e-10);
  for (double p : r.surface_pressure.values()) EXPECT_LE(std::abs(p), 1e-10);
}

TEST(RigidLidTest, RandomInputSatisfiesConstraint) {
  Grid g(16, 20, 9, 0.8);
  RigidLidProjector projector(g);
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 5; ++trial) {
    const auto r = projector.project(testing::white_noise(g, rng), testing::white_noise(g, rng));
    EXPECT_LE(max_depth_integrated_divergence(r.gu, r.gv), 1e-10);
    EXPECT_LE(r.relative_residual, RigidLidProjector::kResidualTolerance);
    double mean = 0.0;
    for (double p : r.surface_pressure.values()) mean += p;
    EXPECT_LE(std::abs(mean) / g.slab(), 1e-12);
    for (double v : r.gu.level(0)) EXPECT_EQ(v, 0.0);
    for (double v : r.gv.level(g.nz() - 1)) EXPECT_EQ(v, 0.0);
  }
}

TEST(RigidLidTest, ProjectionIsSymmetricAndIdempotent) {
  Grid g(12, 10, 6, 1.3);
  RigidLidProjector projector(g);
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 5; ++trial) {
    Field3 au = testing::white_noise(g, rng), av = testing::white_noise(g, rng);
    Field3 bu = testing::white_noise(g, rng), bv = testing::white_noise(g, rng);
    Field3 pau = au, pav = av, pbu = bu, pbv = bv;
    projector.apply(pau, pav);
    projector.apply(pbu, pbv);
    const double lhs = inner(pau, bu) + inner(pav, bv);
    const double rhs = inner(au, pbu) + inner(av, pbv);
    const double scale = std::sqrt((inner(au, au) + inner(av, av)) * (inner(bu, bu) + inner(bv, bv)));
    EXPECT_LE(std::abs(lhs - rhs), 1e-13 * scale);
    Field3 qu = pau, qv = pav;
    projector.apply(qu, qv);
    EXPECT_LE((qu - pau).max_abs(), 1e-12);
    EXPECT_LE((qv - pav).max_abs(), 1e-12);
  }
}

TEST(TendencyTest, ZeroStateNoForcing) {
  Grid g(8, 8, 5);
  for (bool linear : {true, false}) {
    ModelConfig cfg = nonlinear_config();
    cfg.linear = linear;
    Model model(g, cfg);
    const StateField t = model.tendency(StateField(g));
    EXPECT_EQ(t.u.max_abs() + t.v.max_abs() + t.theta.max_abs(), 0.0);
  }
}

TEST(TendencyTest, DiffusionEigenvalue) {
  Grid g(64, 4, 65, 1.0);
  const double a = g.depth(), nu = 0.3;
  Model model(g, linear_config(nu));
  StateField x(g);
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) x.u(i, j, k) = std::sin(g.x(i)) * std::sin(2 * kPi * g.z(k) / a);
  x.u.zero_boundaries();
  const StateField t = model.tendency(x);
  const double rate = -nu * (1.0 + 4 * kPi * kPi / (a * a));
  double err = 0.0, scale = 0.0;
  for (std::size_t n = 0; n < x.u.size(); ++n) {
    err = std::max(err, std::abs(t.u[n] - rate * x.u[n]));
    scale = std::max(scale, std::abs(rate * x.u[n]));
  }
  EXPECT_LE(err / scale, 0.02);
}

TEST(TendencyTest, CoriolisSigns) {
  Grid g(8, 8, 5);
  Model model(g, linear_config(1e-3, 0.5, 0.0, 0.0));
  StateField with_v(g), with_u(g);
  for (int k = 1; k < g.nz() - 1; ++k) {
    for (double & v : with_v.v.level(k)) v = 1.0;
    for (double & v : with_u.u.level(k)) v = 1.0;
  }
  EXPECT_NEAR(model.tendency(with_v).u(3, 3, 2), 0.5, 1e-12);
  EXPECT_NEAR(model.tendency(with_u).v(3, 3, 2), -0.5, 1e-12);
}

TEST(TendencyTest, BoundariesAndConstraint) {
  Grid g(12, 12, 7);
  ModelConfig cfg = nonlinear_config();
  cfg.forcing = Forcing::wind(g, 0.3);
  Model model(g, cfg);
  const StateField x = random_constrained(model, 3);
  const StateField t = model.tendency(x);
  for (const Field3 * f : {&t.u, &t.v, &t.theta}) {
    for (double v : f->level(0)) EXPECT_EQ(v, 0.0);
    for (double v : f->level(g.nz() - 1)) EXPECT_EQ(v, 0.0);
  }
  EXPECT_LE(max_depth_integrated_divergence(t.u, t.v), 1e-10);
}

TEST(CflTest, DiffusiveAndAdvectiveLimits) {
  Grid g(8, 8, 5, kPi);   // dx = dy = dz = pi / 4
  const double h = kPi / 4;
  Model model(g, linear_config(1.0));
  EXPECT_NEAR(model.cfl_check(StateField(g)), 0.5 * h * h / 6.0, 1e-15);

  Model slow(g, linear_config(1e-4));
  StateField x(g);
  for (int k = 1; k < g.nz() - 1; ++k)
    for (double & v : x.u.level(k)) v = 2.0;
  const double dt1 = slow.cfl_check(x);
  EXPECT_NEAR(dt1, 0.5 * g.dx() / 2.0, 1e-15);
  x *= 2.0;
  EXPECT_NEAR(slow.cfl_check(x), 0.5 * dt1, 1e-15);
}

TEST(CflTest, ReturnedStepIsStable) {
  Grid g(16, 16, 9);
  ModelConfig cfg = nonlinear_config();
  Model probe(g, cfg);
  const StateField x0 = random_constrained(probe, 17, 1.0);
  cfg.dt = probe.cfl_check(x0);
  Model model(g, cfg);
  const double n0 = norm(x0);
  StateField x = x0;
  for (int n = 0; n < 100; ++n) {
    cfg.dt = std::min(cfg.dt, model.cfl_check(x));
    x = Model(g, cfg).step(x);
  }
  EXPECT_LE(norm(x), 10.0 * n0);
}

TEST(StepTest, ZeroStateAndCflViolation) {
  Grid g(8, 8, 5);
  Model model(g, nonlinear_config());
  const StateField z = model.step(StateField(g));
  EXPECT_EQ(z, StateField(g));

  ModelConfig cfg = nonlinear_config(10.0);
  Model bad(g, cfg);
  try {
    bad.step(StateField(g));
    FAIL() << "expected CflError";
  } catch (const CflError & e) {
    EXPECT_NEAR(e.allowed_dt(), bad.cfl_check(StateField(g)), 1e-15);
    EXPECT_NE(std::string(e.what()).find("allowed dt"), std::string::npos);
  }
}

TEST(StepTest, PureDiffusionDecaysEnergy) {
  Grid g(16, 16, 9);
  ModelConfig cfg = linear_config(0.1);
  Model probe(g, cfg);
  cfg.dt = 0.9 * probe.cfl_check(StateField(g));
  Model model(g, cfg);
  StateField x = random_constrained(model, 5, 1.0);
  double e = inner(x, x);
  for (int n = 0; n < 100; ++n) {
    x = model.step(x);
    const double e1 = inner(x, x);
    EXPECT_LE(e1, e);
    e = e1;
  }
}

TEST(IntegrateTest, ZeroStepsAndComposition) {
  Grid g(12, 12, 7);
  ModelConfig cfg = nonlinear_config();
  cfg.forcing = Forcing::wind(g, 0.2);
  Model model(g, cfg);
  const StateField x0 = random_constrained(model, 8);
  EXPECT_EQ(model.integrate(x0, 0), x0);
  const StateField direct = model.integrate(x0, 7);
  const StateField split = model.integrate(model.integrate(x0, 3), 4);
  EXPECT_EQ(direct, split);
}

TEST(IntegrateTest, RecorderSeesEveryState) {
  Grid g(8, 8, 5);
  Model model(g, nonlinear_config());
  int calls = 0;
  model.integrate(random_constrained(model, 2), 5, [&](int step, const StateField &) {
    EXPECT_EQ(step, calls);
    ++calls;
  });
  EXPECT_EQ(calls, 6);
}

TEST(IntegrateTest, NanAborts) {
  Grid g(8, 8, 5);
  Model model(g, nonlinear_config());
  StateField x(g);
  x.theta(2, 2, 2) = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(model.integrate(x, 3), Error);
}

TEST(IntegrateTest, SecondOrderSelfConvergence) {
  Grid g(16, 16, 9);
  const double horizon = 0.4;
  auto run = [&](int nsteps) {
    ModelConfig cfg = nonlinear_config(horizon / nsteps);
    cfg.forcing = Forcing::wind(g, 0.5);
    Model model(g, cfg);
    return model.integrate(random_constrained(model, 12, 1.0), nsteps);
  };
  const StateField ref = run(512);
  const double e1 = norm(run(16) - ref);
  const double e2 = norm(run(32) - ref);
  EXPECT_GE(std::log2(e1 / e2), 1.8);
}

TEST(InvariantsTest, ConstraintAndDirichletAlongTrajectory) {
  Grid g(16, 16, 9);
  ModelConfig cfg = nonlinear_config(0.02);
  cfg.forcing = Forcing::wind(g, 0.5);
  Model model(g, cfg);
  model.integrate(random_constrained(model, 31, 1.0), 60, [&](int, const StateField & x) {
    EXPECT_LE(max_depth_integrated_divergence(x.u, x.v), 1e-9);
    for (const Field3 * f : {&x.u, &x.v, &x.theta}) {
      for (double v : f->level(0)) ASSERT_EQ(v, 0.0);
      for (double v : f->level(g.nz() - 1)) ASSERT_EQ(v, 0.0);
    }
  });
}

TEST(InvariantsTest, LinearZeroStaysZero) {
  Grid g(8, 8, 5);
  Model model(g, linear_config(0.1, 1.0, 0.3, 0.2, 0.01));
  EXPECT_EQ(model.integrate(StateField(g), 20), StateField(g));
}

TEST(InvariantsTest, TranslationEquivariance) {
  Grid g(12, 12, 7);
  ModelConfig cfg = nonlinear_config();
  cfg.forcing = Forcing::wind(g, 0.4);
  Model model(g, cfg);
  const StateField x0 = random_constrained(model, 44);
  for (int k : {1, 5}) {
    const StateField a = model.integrate(shift(x0, Axis::kX, k), 10);
    const StateField b = shift(model.integrate(x0, 10), Axis::kX, k);
    EXPECT_LE(norm(a - b), 1e-12 * norm(b));
  }
}

TEST(ForcingTest, WindProfileValidation) {
  Grid g(8, 8, 6);
  Forcing f = Forcing::wind(g, 1.0);
  EXPECT_EQ(f.depth_profile[1], 0.5);
  EXPECT_EQ(f.depth_profile[2], 0.5);
  const StateField field = f.evaluate(g);
  EXPECT_NEAR(field.u(3, 0, 1), 0.5, 1e-15);
  EXPECT_NEAR(field.u(3, 4, 2), 0.5 * std::cos(g.y(4)), 1e-15);
  EXPECT_EQ(field.v.max_abs(), 0.0);
  f.depth_profile[0] = 0.1;
  EXPECT_THROW(f.evaluate(g), Error);
}

}  // namespace
}  // namespace pedavar
