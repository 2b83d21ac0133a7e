/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "pedavar/grid.h"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <utility>

#include "pedavar/error.h"

namespace pedavar {

// -----------------------------------------------------------------------------
Grid::Grid(int nx, int ny, int nz, double depth)
  : nx_(nx), ny_(ny), nz_(nz), depth_(depth)
{
  if (nx < 4 || ny < 4 || nz < 3) {
    throw Error("grid: need nx >= 4, ny >= 4, nz >= 3, got " + std::to_string(nx) + "x" +
                std::to_string(ny) + "x" + std::to_string(nz));
  }
  if (!(depth > 0.0) || !std::isfinite(depth)) throw Error("grid: depth must be positive");
  dx_ = 2.0 * std::numbers::pi / nx;
  dy_ = 2.0 * std::numbers::pi / ny;
  dz_ = depth / (nz - 1);
}

double Grid::vertical_weight(int k) const {
  return (k == 0 || k == nz_ - 1) ? 0.5 * dz_ : dz_;
}

std::string Grid::shape() const {
  std::ostringstream os;
  os << nx_ << "x" << ny_ << "x" << nz_ << " (a=" << depth_ << ")";
  return os.str();
}

bool Grid::operator==(const Grid & other) const {
  return nx_ == other.nx_ && ny_ == other.ny_ && nz_ == other.nz_ && depth_ == other.depth_;
}

// -----------------------------------------------------------------------------
namespace {

void check_same_grid(const Grid & a, const Grid & b, const char * what) {
  if (a != b) throw Error(std::string(what) + ": grid mismatch " + a.shape() + " vs " + b.shape());
}

}  // namespace

Field3 & Field3::operator+=(const Field3 & rhs) {
  check_same_grid(grid_, rhs.grid_, "Field3 +=");
  for (std::size_t n = 0; n < values_.size(); ++n) values_[n] += rhs.values_[n];
  return *this;
}

Field3 & Field3::operator-=(const Field3 & rhs) {
  check_same_grid(grid_, rhs.grid_, "Field3 -=");
  for (std::size_t n = 0; n < values_.size(); ++n) values_[n] -= rhs.values_[n];
  return *this;
}

Field3 & Field3::operator*=(double s) {
  for (double & v : values_) v *= s;
  return *this;
}

void Field3::axpy(double s, const Field3 & x) {
  check_same_grid(grid_, x.grid_, "Field3 axpy");
  for (std::size_t n = 0; n < values_.size(); ++n) values_[n] += s * x.values_[n];
}

void Field3::zero() {std::fill(values_.begin(), values_.end(), 0.0);}

void Field3::zero_boundaries() {
  auto bottom = level(0);
  auto top = level(grid_.nz() - 1);
  std::fill(bottom.begin(), bottom.end(), 0.0);
  std::fill(top.begin(), top.end(), 0.0);
}

bool Field3::all_finite() const {
  return std::all_of(values_.begin(), values_.end(), [](double v) {return std::isfinite(v);});
}

double Field3::max_abs() const {
  double m = 0.0;
  for (double v : values_) m = std::max(m, std::abs(v));
  return m;
}

Field3 operator+(Field3 lhs, const Field3 & rhs) {return lhs += rhs;}
Field3 operator-(Field3 lhs, const Field3 & rhs) {return lhs -= rhs;}
Field3 operator*(double s, Field3 f) {return f *= s;}

// -----------------------------------------------------------------------------
StateField & StateField::operator+=(const StateField & rhs) {
  u += rhs.u; v += rhs.v; theta += rhs.theta;
  return *this;
}

StateField & StateField::operator-=(const StateField & rhs) {
  u -= rhs.u; v -= rhs.v; theta -= rhs.theta;
  return *this;
}

StateField & StateField::operator*=(double s) {
  u *= s; v *= s; theta *= s;
  return *this;
}

void StateField::axpy(double s, const StateField & x) {
  u.axpy(s, x.u); v.axpy(s, x.v); theta.axpy(s, x.theta);
}

void StateField::zero() {u.zero(); v.zero(); theta.zero();}

void StateField::zero_boundaries() {
  u.zero_boundaries(); v.zero_boundaries(); theta.zero_boundaries();
}

bool StateField::all_finite() const {
  return u.all_finite() && v.all_finite() && theta.all_finite();
}

StateField operator+(StateField lhs, const StateField & rhs) {return lhs += rhs;}
StateField operator-(StateField lhs, const StateField & rhs) {return lhs -= rhs;}
StateField operator*(double s, StateField x) {return x *= s;}

// -----------------------------------------------------------------------------
double inner(const Field3 & f, const Field3 & g) {
  check_same_grid(f.grid(), g.grid(), "inner");
  const Grid & grid = f.grid();
  double total = 0.0;
  for (int k = 0; k < grid.nz(); ++k) {
    auto a = f.level(k);
    auto b = g.level(k);
    double s = 0.0;
    for (std::size_t n = 0; n < a.size(); ++n) s += a[n] * b[n];
    total += grid.vertical_weight(k) * s;
  }
  return total * grid.cell_area();
}

double inner(const StateField & x, const StateField & y) {
  return inner(x.u, y.u) + inner(x.v, y.v) + inner(x.theta, y.theta);
}

double norm(const Field3 & f) {return std::sqrt(inner(f, f));}
double norm(const StateField & x) {return std::sqrt(inner(x, x));}

Field2 depth_integral(const Field3 & f) {
  const Grid & grid = f.grid();
  Field2 out(grid.nx(), grid.ny());
  auto dst = out.values();
  for (int k = 0; k < grid.nz(); ++k) {
    const double w = grid.vertical_weight(k);
    auto src = f.level(k);
    for (std::size_t n = 0; n < src.size(); ++n) dst[n] += w * src[n];
  }
  return out;
}

// -----------------------------------------------------------------------------
namespace {

void centered_x(std::span<const double> src, std::span<double> dst, int nx, int ny, double scale) {
  for (int j = 0; j < ny; ++j) {
    const double * s = src.data() + static_cast<std::size_t>(nx) * j;
    double * d = dst.data() + static_cast<std::size_t>(nx) * j;
    d[0] = scale * (s[1] - s[nx - 1]);
    for (int i = 1; i < nx - 1; ++i) d[i] = scale * (s[i + 1] - s[i - 1]);
    d[nx - 1] = scale * (s[0] - s[nx - 2]);
  }
}

void centered_y(std::span<const double> src, std::span<double> dst, int nx, int ny, double scale) {
  for (int j = 0; j < ny; ++j) {
    const int jp = (j + 1) % ny;
    const int jm = (j + ny - 1) % ny;
    const double * sp = src.data() + static_cast<std::size_t>(nx) * jp;
    const double * sm = src.data() + static_cast<std::size_t>(nx) * jm;
    double * d = dst.data() + static_cast<std::size_t>(nx) * j;
    for (int i = 0; i < nx; ++i) d[i] = scale * (sp[i] - sm[i]);
  }
}

Field3 derivative_once(const Field3 & f, Axis axis) {
  const Grid & g = f.grid();
  Field3 out(g);
  for (int k = 0; k < g.nz(); ++k) {
    if (axis == Axis::kX) {
      centered_x(f.level(k), out.level(k), g.nx(), g.ny(), 0.5 / g.dx());
    } else {
      centered_y(f.level(k), out.level(k), g.nx(), g.ny(), 0.5 / g.dy());
    }
  }
  return out;
}

}  // namespace

Field3 horizontal_derivative(const Field3 & f, Axis axis, int order) {
  const Grid & g = f.grid();
  if (order < 1) throw Error("horizontal_derivative: order must be >= 1");
  if (2 * order > std::min(g.nx(), g.ny())) {
    throw Error("horizontal_derivative: grid " + g.shape() + " too small for order " +
                std::to_string(order));
  }
  Field3 out = derivative_once(f, axis);
  for (int n = 1; n < order; ++n) out = derivative_once(out, axis);
  return out;
}

Field3 horizontal_derivative_adjoint(const Field3 & f, Axis axis, int order) {
  // The centered periodic difference is antisymmetric and commutes with the
  // level weights.
  Field3 out = horizontal_derivative(f, axis, order);
  if (order % 2 == 1) out *= -1.0;
  return out;
}

Field2 horizontal_derivative(const Field2 & f, Axis axis, double spacing) {
  Field2 out(f.nx(), f.ny());
  if (axis == Axis::kX) {
    centered_x(f.values(), out.values(), f.nx(), f.ny(), 0.5 / spacing);
  } else {
    centered_y(f.values(), out.values(), f.nx(), f.ny(), 0.5 / spacing);
  }
  return out;
}

// -----------------------------------------------------------------------------
ColumnOperator::ColumnOperator(const Grid & grid, std::vector<double> matrix)
  : grid_(grid), nz_(grid.nz()), matrix_(std::move(matrix))
{
  if (matrix_.size() != static_cast<std::size_t>(nz_) * nz_) {
    throw Error("ColumnOperator: matrix must be nz x nz");
  }
}

Field3 ColumnOperator::apply(const Field3 & f) const {
  check_same_grid(grid_, f.grid(), "ColumnOperator::apply");
  Field3 out(grid_);
  for (int k = 0; k < nz_; ++k) {
    auto dst = out.level(k);
    for (int j = 0; j < nz_; ++j) {
      const double a = matrix_[k * nz_ + j];
      if (a == 0.0) continue;
      auto src = f.level(j);
      for (std::size_t n = 0; n < dst.size(); ++n) dst[n] += a * src[n];
    }
  }
  return out;
}

ColumnOperator ColumnOperator::adjoint() const {
  std::vector<double> t(matrix_.size());
  for (int k = 0; k < nz_; ++k) {
    for (int j = 0; j < nz_; ++j) {
      t[j * nz_ + k] = matrix_[k * nz_ + j] * grid_.vertical_weight(k) / grid_.vertical_weight(j);
    }
  }
  return ColumnOperator(grid_, std::move(t));
}

ColumnOperator vertical_derivative_operator(const Grid & grid) {
  const int nz = grid.nz();
  const double h = 0.5 / grid.dz();
  std::vector<double> a(static_cast<std::size_t>(nz) * nz, 0.0);
  a[0 * nz + 0] = -3.0 * h;
  a[0 * nz + 1] = 4.0 * h;
  a[0 * nz + 2] = -1.0 * h;
  for (int k = 1; k < nz - 1; ++k) {
    a[k * nz + k - 1] = -h;
    a[k * nz + k + 1] = h;
  }
  const int l = nz - 1;
  a[l * nz + l] = 3.0 * h;
  a[l * nz + l - 1] = -4.0 * h;
  a[l * nz + l - 2] = 1.0 * h;
  return ColumnOperator(grid, std::move(a));
}

ColumnOperator cumulative_integral_operator(const Grid & grid) {
  const int nz = grid.nz();
  const double dz = grid.dz();
  std::vector<double> a(static_cast<std::size_t>(nz) * nz, 0.0);
  for (int k = 1; k < nz; ++k) {
    a[k * nz + 0] = 0.5 * dz;
    for (int j = 1; j < k; ++j) a[k * nz + j] = dz;
    a[k * nz + k] = 0.5 * dz;
  }
  return ColumnOperator(grid, std::move(a));
}

ColumnOperator vertical_second_derivative_operator(const Grid & grid) {
  const int nz = grid.nz();
  const double h2 = 1.0 / (grid.dz() * grid.dz());
  std::vector<double> a(static_cast<std::size_t>(nz) * nz, 0.0);
  for (int k = 1; k < nz - 1; ++k) {
    a[k * nz + k - 1] = h2;
    a[k * nz + k] = -2.0 * h2;
    a[k * nz + k + 1] = h2;
  }
  return ColumnOperator(grid, std::move(a));
}

Field3 vertical_derivative(const Field3 & f) {
  return vertical_derivative_operator(f.grid()).apply(f);
}

Field3 vertical_derivative_adjoint(const Field3 & f) {
  return vertical_derivative_operator(f.grid()).adjoint().apply(f);
}

Field3 cumulative_vertical_integral(const Field3 & f) {
  return cumulative_integral_operator(f.grid()).apply(f);
}

Field3 cumulative_vertical_integral_adjoint(const Field3 & f) {
  return cumulative_integral_operator(f.grid()).adjoint().apply(f);
}

namespace {

// Horizontal compact Laplacian at interior levels only.
Field3 horizontal_laplacian_interior(const Field3 & f) {
  const Grid & g = f.grid();
  const int nx = g.nx(), ny = g.ny();
  const double cx = 1.0 / (g.dx() * g.dx());
  const double cy = 1.0 / (g.dy() * g.dy());
  Field3 out(g);
  for (int k = 1; k < g.nz() - 1; ++k) {
    auto s = f.level(k);
    auto d = out.level(k);
    for (int j = 0; j < ny; ++j) {
      const std::size_t row = static_cast<std::size_t>(nx) * j;
      const std::size_t rp = static_cast<std::size_t>(nx) * ((j + 1) % ny);
      const std::size_t rm = static_cast<std::size_t>(nx) * ((j + ny - 1) % ny);
      for (int i = 0; i < nx; ++i) {
        const int ip = (i + 1 == nx) ? 0 : i + 1;
        const int im = (i == 0) ? nx - 1 : i - 1;
        const double c = s[row + i];
        d[row + i] = cx * (s[row + ip] - 2.0 * c + s[row + im]) +
                     cy * (s[rp + i] - 2.0 * c + s[rm + i]);
      }
    }
  }
  return out;
}

}  // namespace

Field3 laplacian(const Field3 & f) {
  Field3 out = horizontal_laplacian_interior(f);
  out += vertical_second_derivative_operator(f.grid()).apply(f);
  return out;
}

Field3 laplacian_adjoint(const Field3 & f) {
  // The horizontal part is symmetric and restricted to interior levels.
  Field3 out = horizontal_laplacian_interior(f);
  out += vertical_second_derivative_operator(f.grid()).adjoint().apply(f);
  return out;
}

Field3 shift(const Field3 & f, Axis axis, int k) {
  const Grid & g = f.grid();
  Field3 out(g);
  const int nx = g.nx(), ny = g.ny();
  for (int l = 0; l < g.nz(); ++l) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        const int si = axis == Axis::kX ? ((i - k) % nx + nx) % nx : i;
        const int sj = axis == Axis::kY ? ((j - k) % ny + ny) % ny : j;
        out(i, j, l) = f(si, sj, l);
      }
    }
  }
  return out;
}

StateField shift(const StateField & x, Axis axis, int k) {
  return StateField(shift(x.u, axis, k), shift(x.v, axis, k), shift(x.theta, axis, k));
}

// -----------------------------------------------------------------------------
void NormParams::validate() const {
  if (m < 2) throw Error("norm: m must be >= 2, got " + std::to_string(m));
  if (!(K > 0.0) || !std::isfinite(K)) throw Error("norm: K must be positive");
}

double NormParams::minimal_K(double depth, double nu, double gamma, double beta) {
  return 2.0 * std::max(4.0 * depth * depth / (nu * nu), 2.0 * gamma * beta);
}

namespace {

void check_stencil(const Grid & g, int order) {
  if (2 * order > std::min(g.nx(), g.ny())) {
    throw Error("norm: grid " + g.shape() + " too small for derivative order " +
                std::to_string(order));
  }
}

// Calls fn(d) for every horizontal derivative d = dx^p dy^q f with p + q <= m.
template <typename Fn>
void for_each_multi_index(const Field3 & f, int m, Fn && fn) {
  check_stencil(f.grid(), m + 1);
  Field3 dxp = f;
  for (int p = 0; p <= m; ++p) {
    if (p > 0) dxp = horizontal_derivative(dxp, Axis::kX);
    Field3 d = dxp;
    for (int q = 0; p + q <= m; ++q) {
      if (q > 0) d = horizontal_derivative(d, Axis::kY);
      fn(d);
    }
  }
}

}  // namespace

double norm2m_squared(const Field3 & f, int m) {
  double total = 0.0;
  for_each_multi_index(f, m, [&](const Field3 & d) {total += inner(d, d);});
  return total;
}

double grad_norm2m_squared(const Field3 & f, int m) {
  const ColumnOperator dz = vertical_derivative_operator(f.grid());
  double total = 0.0;
  for_each_multi_index(f, m, [&](const Field3 & d) {
    const Field3 gx = horizontal_derivative(d, Axis::kX);
    const Field3 gy = horizontal_derivative(d, Axis::kY);
    const Field3 gz = dz.apply(d);
    total += inner(gx, gx) + inner(gy, gy) + inner(gz, gz);
  });
  return total;
}

double state_norm2m_squared(const StateField & x, const NormParams & p) {
  p.validate();
  return norm2m_squared(x.u, p.m) + norm2m_squared(x.v, p.m) + p.K * norm2m_squared(x.theta, p.m);
}

double state_grad_norm2m_squared(const StateField & x, const NormParams & p) {
  p.validate();
  return grad_norm2m_squared(x.u, p.m) + grad_norm2m_squared(x.v, p.m) +
         p.K * grad_norm2m_squared(x.theta, p.m);
}

double norm_2m(const StateField & x, const NormParams & p) {
  return std::sqrt(state_norm2m_squared(x, p));
}

double norm_U(const StateField & x, const NormParams & p) {
  return std::sqrt(state_norm2m_squared(x, p) + state_grad_norm2m_squared(x, p));
}

}  // namespace pedavar
