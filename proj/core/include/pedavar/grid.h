/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace pedavar {

// -----------------------------------------------------------------------------
/// Collocated grid on T^2 x [0, a].
///
/// x and y are periodic on [0, 2pi) with nx, ny cells; z has nz levels
/// including both boundaries, z_0 = 0 and z_{nz-1} = a. Storage order is
/// x fastest, then y, then z.
class Grid {
 public:
  Grid(int nx, int ny, int nz, double depth = 1.0);

  int nx() const {return nx_;}
  int ny() const {return ny_;}
  int nz() const {return nz_;}
  double depth() const {return depth_;}
  double dx() const {return dx_;}
  double dy() const {return dy_;}
  double dz() const {return dz_;}

  std::size_t slab() const {return static_cast<std::size_t>(nx_) * ny_;}
  std::size_t size() const {return slab() * nz_;}
  std::size_t index(int i, int j, int k) const {
    return static_cast<std::size_t>(i) + static_cast<std::size_t>(nx_) *
           (static_cast<std::size_t>(j) + static_cast<std::size_t>(ny_) * k);
  }

  double x(int i) const {return i * dx_;}
  double y(int j) const {return j * dy_;}
  double z(int k) const {return k * dz_;}

  /// Trapezoid weight of level k (dz inside, dz/2 on both boundaries).
  double vertical_weight(int k) const;
  /// Sum of the interior trapezoid weights, a - dz.
  double interior_depth() const {return (nz_ - 2) * dz_;}
  double cell_area() const {return dx_ * dy_;}

  std::string shape() const;

  bool operator==(const Grid & other) const;
  bool operator!=(const Grid & other) const {return !(*this == other);}

 private:
  int nx_, ny_, nz_;
  double depth_;
  double dx_, dy_, dz_;
};

// -----------------------------------------------------------------------------
/// Horizontal (single level) field, used for the surface pressure.
class Field2 {
 public:
  Field2(int nx, int ny) : nx_(nx), ny_(ny), values_(static_cast<std::size_t>(nx) * ny, 0.0) {}
  int nx() const {return nx_;}
  int ny() const {return ny_;}
  double & operator()(int i, int j) {return values_[i + static_cast<std::size_t>(nx_) * j];}
  double operator()(int i, int j) const {return values_[i + static_cast<std::size_t>(nx_) * j];}
  std::span<double> values() {return values_;}
  std::span<const double> values() const {return values_;}

 private:
  int nx_, ny_;
  std::vector<double> values_;
};

// -----------------------------------------------------------------------------
class Field3 {
 public:
  explicit Field3(const Grid & grid) : grid_(grid), values_(grid.size(), 0.0) {}

  const Grid & grid() const {return grid_;}
  std::size_t size() const {return values_.size();}

  double & operator()(int i, int j, int k) {return values_[grid_.index(i, j, k)];}
  double operator()(int i, int j, int k) const {return values_[grid_.index(i, j, k)];}
  double & operator[](std::size_t n) {return values_[n];}
  double operator[](std::size_t n) const {return values_[n];}

  std::span<double> values() {return values_;}
  std::span<const double> values() const {return values_;}
  std::span<double> level(int k) {return std::span<double>(values_).subspan(k * grid_.slab(), grid_.slab());}
  std::span<const double> level(int k) const {
    return std::span<const double>(values_).subspan(k * grid_.slab(), grid_.slab());
  }

  Field3 & operator+=(const Field3 & rhs);
  Field3 & operator-=(const Field3 & rhs);
  Field3 & operator*=(double s);
  /// this += s * x
  void axpy(double s, const Field3 & x);
  void zero();
  /// Zero both z-boundary levels (Dirichlet condition of prognostic fields).
  void zero_boundaries();
  bool all_finite() const;
  double max_abs() const;

  bool operator==(const Field3 & other) const {return grid_ == other.grid_ && values_ == other.values_;}

 private:
  Grid grid_;
  std::vector<double> values_;
};

Field3 operator+(Field3 lhs, const Field3 & rhs);
Field3 operator-(Field3 lhs, const Field3 & rhs);
Field3 operator*(double s, Field3 f);

// -----------------------------------------------------------------------------
/// Prognostic state X = (u, v, theta); every component vanishes at z = 0, a.
struct StateField {
  Field3 u, v, theta;

  explicit StateField(const Grid & grid) : u(grid), v(grid), theta(grid) {}
  StateField(Field3 u_, Field3 v_, Field3 theta_)
    : u(std::move(u_)), v(std::move(v_)), theta(std::move(theta_)) {}

  const Grid & grid() const {return u.grid();}

  StateField & operator+=(const StateField & rhs);
  StateField & operator-=(const StateField & rhs);
  StateField & operator*=(double s);
  void axpy(double s, const StateField & x);
  void zero();
  void zero_boundaries();
  bool all_finite() const;

  bool operator==(const StateField & other) const {
    return u == other.u && v == other.v && theta == other.theta;
  }
};

StateField operator+(StateField lhs, const StateField & rhs);
StateField operator-(StateField lhs, const StateField & rhs);
StateField operator*(double s, StateField x);

// -----------------------------------------------------------------------------
// Quadrature: rectangle rule in x,y and trapezoid in z.

/// Weighted inner product sum_k w_k dx dy f g.
double inner(const Field3 & f, const Field3 & g);
/// Sum of the three component inner products.
double inner(const StateField & x, const StateField & y);
double norm(const Field3 & f);
double norm(const StateField & x);
/// Trapezoid integral of f over [0, a] at every horizontal point.
Field2 depth_integral(const Field3 & f);

// -----------------------------------------------------------------------------
// Differential operators. Every linear operator has an adjoint with respect to
// inner() above.

enum class Axis {kX, kY};

/// Centered second-order difference with periodic wrap, applied `order` times.
Field3 horizontal_derivative(const Field3 & f, Axis axis, int order = 1);
Field3 horizontal_derivative_adjoint(const Field3 & f, Axis axis, int order = 1);
Field2 horizontal_derivative(const Field2 & f, Axis axis, double spacing);

/// Centered differences at interior levels, one-sided second order at z = 0, a.
Field3 vertical_derivative(const Field3 & f);
Field3 vertical_derivative_adjoint(const Field3 & f);

/// Trapezoid cumulative integral from z = 0; zero at level 0.
Field3 cumulative_vertical_integral(const Field3 & f);
Field3 cumulative_vertical_integral_adjoint(const Field3 & f);

/// Compact 7-point Laplacian at interior levels, zero on z-boundaries.
/// Self-adjoint on fields vanishing at the z-boundaries.
Field3 laplacian(const Field3 & f);
Field3 laplacian_adjoint(const Field3 & f);

/// Periodic shift by k cells: result(i) = f(i - k).
Field3 shift(const Field3 & f, Axis axis, int k);
StateField shift(const StateField & x, Axis axis, int k);

// -----------------------------------------------------------------------------
/// Dense nz x nz operator acting identically on every column.
class ColumnOperator {
 public:
  ColumnOperator(const Grid & grid, std::vector<double> matrix);

  Field3 apply(const Field3 & f) const;
  /// Adjoint under the trapezoid-weighted inner product, W^-1 A^T W.
  ColumnOperator adjoint() const;
  double entry(int row, int col) const {return matrix_[row * nz_ + col];}

 private:
  Grid grid_;
  int nz_;
  std::vector<double> matrix_;
};

ColumnOperator vertical_derivative_operator(const Grid & grid);
ColumnOperator cumulative_integral_operator(const Grid & grid);
ColumnOperator vertical_second_derivative_operator(const Grid & grid);

// -----------------------------------------------------------------------------
struct NormParams {
  int m = 2;
  double K = 1.0;

  void validate() const;
  /// K >= 2 max(4a^2/nu^2, 2 gamma beta), the weight required by the energy estimate.
  static double minimal_K(double depth, double nu, double gamma, double beta);
};

/// ||f||^2_{2,m}: sum over horizontal multi-indices |alpha| <= m.
double norm2m_squared(const Field3 & f, int m);
/// ||grad f||^2_{2,m} with grad = (d/dx, d/dy, d/dz).
double grad_norm2m_squared(const Field3 & f, int m);

/// ||X||^2_{2,m} with theta weighted by K.
double state_norm2m_squared(const StateField & x, const NormParams & p);
double state_grad_norm2m_squared(const StateField & x, const NormParams & p);

double norm_2m(const StateField & x, const NormParams & p);
/// ||X||_{U^{m+1}} = (||X||^2_{2,m} + ||grad X||^2_{2,m})^{1/2}.
double norm_U(const StateField & x, const NormParams & p);

}  // namespace pedavar
