/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <vector>

#include "pedavar/error.h"
#include "pedavar/grid.h"
#include "pedavar/snapshot.h"
#include "testing/random_fields.h"

namespace pedavar {
namespace {

double max_abs_diff(const Field3 & f, const std::function<double(int, int, int)> & exact,
                    int k_begin = 0, int k_end = -1) {
  const Grid & g = f.grid();
  if (k_end < 0) k_end = g.nz();
  double m = 0.0;
  for (int k = k_begin; k < k_end; ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) m = std::max(m, std::abs(f(i, j, k) - exact(i, j, k)));
  return m;
}

Field3 filled(const Grid & g, const std::function<double(double, double, double)> & fn) {
  Field3 f(g);
  for (int k = 0; k < g.nz(); ++k)
    for (int j = 0; j < g.ny(); ++j)
      for (int i = 0; i < g.nx(); ++i) f(i, j, k) = fn(g.x(i), g.y(j), g.z(k));
  return f;
}

TEST(GridTest, RejectsTooSmallGrids) {
  EXPECT_THROW(Grid(3, 8, 5), Error);
  EXPECT_THROW(Grid(8, 8, 2), Error);
  EXPECT_THROW(Grid(8, 8, 5, 0.0), Error);
  Grid g(8, 6, 5, 2.0);
  EXPECT_DOUBLE_EQ(g.dz(), 0.5);
  EXPECT_DOUBLE_EQ(g.dx(), 2.0 * std::numbers::pi / 8);
  EXPECT_DOUBLE_EQ(g.vertical_weight(0), 0.25);
  EXPECT_DOUBLE_EQ(g.vertical_weight(2), 0.5);
}

TEST(HorizontalDerivativeTest, ConstantGivesExactZero) {
  Grid g(16, 8, 5);
  Field3 f = filled(g, [](double, double, double) {return 3.0;});
  for (Axis axis : {Axis::kX, Axis::kY}) {
    for (int order : {1, 2, 3}) {
      EXPECT_EQ(horizontal_derivative(f, axis, order).max_abs(), 0.0);
    }
  }
}

TEST(HorizontalDerivativeTest, SineMatchesAnalyticDerivatives) {
  Grid g(64, 4, 3);
  Field3 f = filled(g, [](double x, double, double) {return std::sin(x);});
  const Field3 d1 = horizontal_derivative(f, Axis::kX, 1);
  EXPECT_LE(max_abs_diff(d1, [&](int i, int, int) {return std::cos(g.x(i));}), 0.005);
  const Field3 d2 = horizontal_derivative(f, Axis::kX, 2);
  EXPECT_LE(max_abs_diff(d2, [&](int i, int, int) {return -std::sin(g.x(i));}), 0.01);
}

TEST(HorizontalDerivativeTest, StencilMustFit) {
  Grid g(8, 4, 3);
  Field3 f(g);
  EXPECT_NO_THROW(horizontal_derivative(f, Axis::kX, 2));
  EXPECT_THROW(horizontal_derivative(f, Axis::kX, 3), Error);
}

TEST(HorizontalDerivativeTest, CommutesWithPeriodicShift) {
  Grid g(12, 10, 4);
  std::mt19937_64 rng(7);
  const Field3 f = testing::white_noise(g, rng);
  for (Axis axis : {Axis::kX, Axis::kY}) {
    for (Axis shift_axis : {Axis::kX, Axis::kY}) {
      for (int k : {-13, -1, 1, 5}) {
        EXPECT_EQ(horizontal_derivative(shift(f, shift_axis, k), axis),
                  shift(horizontal_derivative(f, axis), shift_axis, k));
      }
    }
  }
}

TEST(VerticalDerivativeTest, QuadraticProfile) {
  Grid g(4, 4, 33, 1.0);
  Field3 f = filled(g, [](double, double, double z) {return z * (1.0 - z);});
  const Field3 d = vertical_derivative(f);
  EXPECT_LE(max_abs_diff(d, [&](int, int, int k) {return 1.0 - 2.0 * g.z(k);}, 1, g.nz() - 1), 0.01);
}

TEST(VerticalDerivativeTest, ConstantAndAffine) {
  Grid g(4, 4, 9, 2.0);
  EXPECT_EQ(vertical_derivative(filled(g, [](double, double, double) {return -1.5;})).max_abs(), 0.0);
  const Field3 d = vertical_derivative(filled(g, [](double, double, double z) {return 3.0 * z - 1.0;}));
  EXPECT_LE(max_abs_diff(d, [](int, int, int) {return 3.0;}), 1e-13);
}

TEST(CumulativeIntegralTest, TrapezoidOracles) {
  Grid g(4, 4, 33, 1.0);
  EXPECT_EQ(cumulative_vertical_integral(Field3(g)).max_abs(), 0.0);
  const Field3 one = cumulative_vertical_integral(filled(g, [](double, double, double) {return 1.0;}));
  EXPECT_LE(max_abs_diff(one, [&](int, int, int k) {return g.z(k);}), 1e-15);
  const Field3 lin = cumulative_vertical_integral(filled(g, [](double, double, double z) {return z;}));
  EXPECT_LE(max_abs_diff(lin, [&](int, int, int k) {return 0.5 * g.z(k) * g.z(k);}), 1e-3);
}

TEST(CumulativeIntegralTest, ExactlyZeroAtBottom) {
  Grid g(6, 5, 7, 1.3);
  std::mt19937_64 rng(3);
  const Field3 c = cumulative_vertical_integral(testing::white_noise(g, rng, 10.0));
  for (double v : c.level(0)) EXPECT_EQ(v, 0.0);
}

// Adjoint consistency of every linear operator of the module.
TEST(AdjointConsistencyTest, TransposeIdentity) {
  Grid g(8, 6, 7, 0.7);
  std::mt19937_64 rng(11);
  using Op = std::function<Field3(const Field3 &)>;
  struct Pair {const char * name; Op fwd; Op adj;};
  const std::vector<Pair> ops = {
    {"dx", [](const Field3 & f) {return horizontal_derivative(f, Axis::kX);},
           [](const Field3 & f) {return horizontal_derivative_adjoint(f, Axis::kX);}},
    {"dy2", [](const Field3 & f) {return horizontal_derivative(f, Axis::kY, 2);},
            [](const Field3 & f) {return horizontal_derivative_adjoint(f, Axis::kY, 2);}},
    {"dx3", [](const Field3 & f) {return horizontal_derivative(f, Axis::kX, 3);},
            [](const Field3 & f) {return horizontal_derivative_adjoint(f, Axis::kX, 3);}},
    {"dz", vertical_derivative, vertical_derivative_adjoint},
    {"cumint", cumulative_vertical_integral, cumulative_vertical_integral_adjoint},
    {"laplacian", laplacian, laplacian_adjoint},
  };
  for (const auto & op : ops) {
    for (int trial = 0; trial < 5; ++trial) {
      const Field3 f = testing::white_noise(g, rng);
      const Field3 h = testing::white_noise(g, rng);
      const double lhs = inner(op.fwd(f), h);
      const double rhs = inner(f, op.adj(h));
      EXPECT_LE(std::abs(lhs - rhs), 1e-12 * norm(f) * norm(h)) << op.name;
    }
  }
}

TEST(LaplacianTest, SymmetricOnPrognosticFields) {
  Grid g(8, 8, 6);
  std::mt19937_64 rng(5);
  Field3 f = testing::white_noise(g, rng);
  Field3 h = testing::white_noise(g, rng);
  f.zero_boundaries();
  h.zero_boundaries();
  EXPECT_NEAR(inner(laplacian(f), h), inner(f, laplacian(h)), 1e-12 * norm(f) * norm(h));
  EXPECT_LT(inner(laplacian(f), f), 0.0);
}

// Independent oracle for the norms: explicit periodic stencils on raw arrays.
struct NaiveColumnField {
  int nx, ny, nz;
  double dx, dy, dz;
  std::vector<double> v;
  double at(int i, int j, int k) const {
    i = (i % nx + nx) % nx;
    j = (j % ny + ny) % ny;
    return v[i + nx * (j + ny * k)];
  }
};

NaiveColumnField naive_dx(const NaiveColumnField & f) {
  NaiveColumnField o = f;
  for (int k = 0; k < f.nz; ++k)
    for (int j = 0; j < f.ny; ++j)
      for (int i = 0; i < f.nx; ++i)
        o.v[i + f.nx * (j + f.ny * k)] = (f.at(i + 1, j, k) - f.at(i - 1, j, k)) / (2 * f.dx);
  return o;
}

NaiveColumnField naive_dy(const NaiveColumnField & f) {
  NaiveColumnField o = f;
  for (int k = 0; k < f.nz; ++k)
    for (int j = 0; j < f.ny; ++j)
      for (int i = 0; i < f.nx; ++i)
        o.v[i + f.nx * (j + f.ny * k)] = (f.at(i, j + 1, k) - f.at(i, j - 1, k)) / (2 * f.dy);
  return o;
}

NaiveColumnField naive_dz(const NaiveColumnField & f) {
  NaiveColumnField o = f;
  const int l = f.nz - 1;
  for (int j = 0; j < f.ny; ++j)
    for (int i = 0; i < f.nx; ++i)
      for (int k = 0; k < f.nz; ++k) {
        double d;
        if (k == 0) d = (-3 * f.at(i, j, 0) + 4 * f.at(i, j, 1) - f.at(i, j, 2)) / (2 * f.dz);
        else if (k == l) d = (3 * f.at(i, j, l) - 4 * f.at(i, j, l - 1) + f.at(i, j, l - 2)) / (2 * f.dz);
        else d = (f.at(i, j, k + 1) - f.at(i, j, k - 1)) / (2 * f.dz);
        o.v[i + f.nx * (j + f.ny * k)] = d;
      }
  return o;
}

double naive_sq(const NaiveColumnField & f) {
  double total = 0.0;
  for (int k = 0; k < f.nz; ++k) {
    const double w = (k == 0 || k == f.nz - 1) ? 0.5 * f.dz : f.dz;
    for (int j = 0; j < f.ny; ++j)
      for (int i = 0; i < f.nx; ++i) total += w * f.dx * f.dy * f.at(i, j, k) * f.at(i, j, k);
  }
  return total;
}

TEST(NormTest, MatchesBruteForceQuadrature) {
  Grid g(16, 12, 9, 1.0);
  const double a = g.depth();
  StateField x(g);
  x.u = filled(g, [&](double xx, double, double z) {return std::sin(xx) * std::sin(std::numbers::pi * z / a);});
  NormParams p{2, 3.0};

  NaiveColumnField base{g.nx(), g.ny(), g.nz(), g.dx(), g.dy(), g.dz(),
                        std::vector<double>(x.u.values().begin(), x.u.values().end())};
  double sum_f = 0.0, sum_grad = 0.0;
  for (int px = 0; px <= p.m; ++px) {
    for (int py = 0; px + py <= p.m; ++py) {
      NaiveColumnField d = base;
      for (int n = 0; n < px; ++n) d = naive_dx(d);
      for (int n = 0; n < py; ++n) d = naive_dy(d);
      sum_f += naive_sq(d);
      sum_grad += naive_sq(naive_dx(d)) + naive_sq(naive_dy(d)) + naive_sq(naive_dz(d));
    }
  }
  EXPECT_NEAR(norm_2m(x, p), std::sqrt(sum_f), 1e-12 * std::sqrt(sum_f));
  EXPECT_NEAR(norm_U(x, p), std::sqrt(sum_f + sum_grad), 1e-12 * std::sqrt(sum_f + sum_grad));
}

TEST(NormTest, ZeroStateAndKWeighting) {
  Grid g(12, 12, 7);
  NormParams p{2, 9.0};
  EXPECT_EQ(norm_U(StateField(g), p), 0.0);
  EXPECT_EQ(norm_2m(StateField(g), p), 0.0);
  const Field3 shape = testing::smooth_field(g, 42);
  StateField only_u(g), only_theta(g);
  only_u.u = shape;
  only_theta.theta = shape;
  EXPECT_NEAR(norm_U(only_theta, p) / norm_U(only_u, p), 3.0, 1e-13);
  EXPECT_NEAR(norm_2m(only_theta, p) / norm_2m(only_u, p), 3.0, 1e-13);
}

TEST(NormTest, HomogeneousAndOrdered) {
  Grid g(12, 10, 7);
  NormParams p{2, 4.0};
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const StateField x = testing::smooth_state(g, seed);
    EXPECT_GE(norm_U(x, p), norm_2m(x, p));
    EXPECT_GT(norm_2m(x, p), 0.0);
    for (double c : {-2.5, 0.1, 7.0}) {
      EXPECT_NEAR(norm_U(c * x, p), std::abs(c) * norm_U(x, p), 1e-13 * std::abs(c) * norm_U(x, p));
      EXPECT_NEAR(norm_2m(c * x, p), std::abs(c) * norm_2m(x, p), 1e-13 * std::abs(c) * norm_2m(x, p));
    }
  }
}

TEST(NormTest, ParameterValidation) {
  Grid g(8, 8, 5);
  EXPECT_THROW(norm_U(StateField(g), NormParams{1, 1.0}), Error);
  EXPECT_THROW(norm_U(StateField(g), NormParams{2, 0.0}), Error);
  // m = 3 needs 2 (m + 1) <= 8.
  EXPECT_NO_THROW(norm_U(StateField(g), NormParams{3, 1.0}));
  EXPECT_THROW(norm_U(StateField(g), NormParams{4, 1.0}), Error);
  EXPECT_DOUBLE_EQ(NormParams::minimal_K(1.0, 0.1, 0.5, 2.0), 800.0);
  EXPECT_DOUBLE_EQ(NormParams::minimal_K(0.1, 1.0, 5.0, 2.0), 40.0);
}

TEST(SnapshotTest, HeaderLayoutAndRoundTrip) {
  Grid g(5, 4, 3, 0.75);
  std::mt19937_64 rng(1);
  const Field3 f = testing::white_noise(g, rng);
  const auto dir = std::filesystem::temp_directory_path() / "pedavar_grid_test";
  std::filesystem::create_directories(dir);
  const auto path = dir / "f.peda";
  write_snapshot(path, f);

  std::ifstream in(path, std::ios::binary);
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  ASSERT_EQ(bytes.size(), 4u + 4u * 4u + 8u + 8u * f.size());
  EXPECT_EQ(std::string(bytes.data(), 4), "PEDA");
  std::uint32_t header[4];
  std::memcpy(header, bytes.data() + 4, sizeof(header));
  EXPECT_EQ(header[0], kSnapshotVersion);
  EXPECT_EQ(header[1], 5u);
  EXPECT_EQ(header[2], 4u);
  EXPECT_EQ(header[3], 3u);
  double depth, first, second;
  std::memcpy(&depth, bytes.data() + 20, 8);
  std::memcpy(&first, bytes.data() + 28, 8);
  std::memcpy(&second, bytes.data() + 36, 8);
  EXPECT_EQ(depth, 0.75);
  EXPECT_EQ(first, f(0, 0, 0));
  EXPECT_EQ(second, f(1, 0, 0));   // x varies fastest

  EXPECT_EQ(read_snapshot(path), f);

  std::ofstream bad(dir / "bad.peda", std::ios::binary);
  bad << "NOPE";
  bad.close();
  EXPECT_THROW(read_snapshot(dir / "bad.peda"), Error);
  std::filesystem::remove_all(dir);
}

}  // namespace
}  // namespace pedavar
