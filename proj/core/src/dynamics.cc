/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "pedavar/dynamics.h"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdio>
#include <limits>
#include <mutex>
#include <sstream>

#include "pedavar/error.h"

namespace pedavar {

// -----------------------------------------------------------------------------
void PhysParams::validate() const {
  if (!(nu > 0.0) || !std::isfinite(nu)) throw Error("physics: nu must be > 0");
  if (!(alpha >= 0.0) || !std::isfinite(alpha)) throw Error("physics: alpha must be >= 0");
  if (!(beta >= 0.0) || !std::isfinite(beta)) throw Error("physics: beta must be >= 0");
  if (!(gamma >= 0.0) || !std::isfinite(gamma)) throw Error("physics: gamma must be >= 0");
}

void ModelConfig::validate() const {
  phys.validate();
  if (!(dt > 0.0) || !std::isfinite(dt)) throw Error("model: dt must be > 0");
  if (forcing.mode == ForcingMode::kLinearRhs && !forcing.rhs) {
    throw Error("model: linear_rhs forcing needs F1, F2, F3");
  }
}

Forcing Forcing::linear_rhs(StateField f) {
  Forcing out;
  out.mode = ForcingMode::kLinearRhs;
  out.rhs = std::move(f);
  return out;
}

std::vector<double> Forcing::default_wind_profile(const Grid & grid) {
  std::vector<double> g(grid.nz(), 0.0);
  if (grid.nz() >= 4) {
    g[1] = 0.5;
    g[2] = 0.5;
  } else {
    g[1] = 1.0;
  }
  return g;
}

Forcing Forcing::wind(const Grid & grid, double tau0) {
  Forcing out;
  out.mode = ForcingMode::kWind;
  out.tau0 = tau0;
  out.depth_profile = default_wind_profile(grid);
  return out;
}

StateField Forcing::evaluate(const Grid & grid) const {
  StateField f(grid);
  switch (mode) {
    case ForcingMode::kNone:
      break;
    case ForcingMode::kLinearRhs:
      if (!rhs || rhs->grid() != grid) throw Error("forcing: F1, F2, F3 not on model grid");
      f = *rhs;
      f.zero_boundaries();
      break;
    case ForcingMode::kWind: {
      if (depth_profile.size() != static_cast<std::size_t>(grid.nz())) {
        throw Error("forcing: wind depth profile needs nz entries");
      }
      double total = 0.0;
      for (double g : depth_profile) {
        if (g < 0.0) throw Error("forcing: wind depth profile must be nonnegative");
        total += g;
      }
      if (std::abs(total - 1.0) > 1e-12) throw Error("forcing: wind depth profile must sum to 1");
      if (depth_profile.front() != 0.0 || depth_profile.back() != 0.0) {
        throw Error("forcing: wind depth profile must vanish on z-boundaries");
      }
      for (int k = 0; k < grid.nz(); ++k) {
        for (int j = 0; j < grid.ny(); ++j) {
          const double s = tau0 * std::cos(grid.y(j)) * depth_profile[k];
          for (int i = 0; i < grid.nx(); ++i) f.u(i, j, k) = s;
        }
      }
      break;
    }
  }
  return f;
}

// -----------------------------------------------------------------------------
Field3 diagnose_w(const Field3 & u, const Field3 & v) {
  Field3 div = horizontal_derivative(u, Axis::kX);
  div += horizontal_derivative(v, Axis::kY);
  Field3 w = cumulative_vertical_integral(div);
  w *= -1.0;
  return w;
}

Field3 diagnose_pressure(const Field3 & theta, const Field2 & surface_pressure, double beta) {
  const Grid & g = theta.grid();
  if (surface_pressure.nx() != g.nx() || surface_pressure.ny() != g.ny()) {
    throw Error("diagnose_pressure: surface pressure shape does not match grid " + g.shape());
  }
  Field3 p = cumulative_vertical_integral(theta);
  p *= beta;
  auto ps = surface_pressure.values();
  for (int k = 0; k < g.nz(); ++k) {
    auto lev = p.level(k);
    for (std::size_t n = 0; n < lev.size(); ++n) lev[n] += ps[n];
  }
  return p;
}

double max_depth_integrated_divergence(const Field3 & u, const Field3 & v) {
  Field3 div = horizontal_derivative(u, Axis::kX);
  div += horizontal_derivative(v, Axis::kY);
  const Field2 col = depth_integral(div);
  double m = 0.0;
  for (double c : col.values()) m = std::max(m, std::abs(c));
  return m;
}

// -----------------------------------------------------------------------------
struct RigidLidProjector::Plans {
  fftw_plan forward = nullptr;
  fftw_plan backward = nullptr;
  int nx = 0, ny = 0;
  std::size_t nc = 0;

  ~Plans() {
    if (forward) fftw_destroy_plan(forward);
    if (backward) fftw_destroy_plan(backward);
  }
};

namespace {

std::mutex & fftw_planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwBuffer {
  explicit FftwBuffer(std::size_t bytes) : ptr(fftw_malloc(bytes)) {
    if (!ptr) throw Error("rigid lid: fftw_malloc failed");
  }
  ~FftwBuffer() {fftw_free(ptr);}
  FftwBuffer(const FftwBuffer &) = delete;
  FftwBuffer & operator=(const FftwBuffer &) = delete;
  void * ptr;
};

}  // namespace

RigidLidProjector::RigidLidProjector(const Grid & grid)
  : grid_(grid), plans_(std::make_unique<Plans>())
{
  const int nx = grid.nx(), ny = grid.ny();
  const int ncx = nx / 2 + 1;
  plans_->nx = nx;
  plans_->ny = ny;
  plans_->nc = static_cast<std::size_t>(ny) * ncx;
  {
    // Plans are made once on fftw_malloc'd buffers; execution uses the new-array
    // interface on buffers with the same alignment.
    std::lock_guard<std::mutex> lock(fftw_planner_mutex());
    FftwBuffer real(sizeof(double) * grid.slab());
    FftwBuffer spec(sizeof(fftw_complex) * plans_->nc);
    plans_->forward = fftw_plan_dft_r2c_2d(ny, nx, static_cast<double *>(real.ptr),
                                           static_cast<fftw_complex *>(spec.ptr), FFTW_ESTIMATE);
    plans_->backward = fftw_plan_dft_c2r_2d(ny, nx, static_cast<fftw_complex *>(spec.ptr),
                                            static_cast<double *>(real.ptr), FFTW_ESTIMATE);
  }
  if (!plans_->forward || !plans_->backward) throw Error("rigid lid: FFTW planning failed");

  inverse_symbol_.assign(plans_->nc, 0.0);
  const double dx = grid.dx(), dy = grid.dy();
  for (int j = 0; j < ny; ++j) {
    const double sy = std::sin(2.0 * M_PI * j / ny) / dy;
    for (int i = 0; i < ncx; ++i) {
      const double sx = std::sin(2.0 * M_PI * i / nx) / dx;
      const double lambda = -(sx * sx + sy * sy);
      // Null space of the centered Laplacian: kx, ky each 0 or Nyquist.
      if (std::abs(lambda) > 1e-10) {
        inverse_symbol_[static_cast<std::size_t>(j) * ncx + i] = 1.0 / lambda;
      }
    }
  }
}

RigidLidProjector::~RigidLidProjector() = default;

Field2 RigidLidProjector::solve(const Field2 & rhs) const {
  const std::size_t n = grid_.slab();
  FftwBuffer real(sizeof(double) * n);
  FftwBuffer spec(sizeof(fftw_complex) * plans_->nc);
  auto * r = static_cast<double *>(real.ptr);
  auto * c = static_cast<fftw_complex *>(spec.ptr);
  std::copy(rhs.values().begin(), rhs.values().end(), r);
  fftw_execute_dft_r2c(plans_->forward, r, c);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t m = 0; m < plans_->nc; ++m) {
    const double s = inverse_symbol_[m] * scale;
    c[m][0] *= s;
    c[m][1] *= s;
  }
  fftw_execute_dft_c2r(plans_->backward, c, r);
  Field2 p(grid_.nx(), grid_.ny());
  std::copy(r, r + n, p.values().begin());
  return p;
}

namespace {

double l2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace

RigidLidProjector::Result RigidLidProjector::project(const Field3 & gu_in, const Field3 & gv_in) const {
  if (gu_in.grid() != grid_ || gv_in.grid() != grid_) {
    throw Error("rigid lid: tendency grid does not match projector grid " + grid_.shape());
  }
  Field3 gu = gu_in, gv = gv_in;
  gu.zero_boundaries();
  gv.zero_boundaries();
  const double a_int = grid_.interior_depth();
  const Field2 div_u = horizontal_derivative(depth_integral(gu), Axis::kX, grid_.dx());
  const Field2 div_v = horizontal_derivative(depth_integral(gv), Axis::kY, grid_.dy());
  Field2 rhs(grid_.nx(), grid_.ny());
  for (std::size_t n = 0; n < grid_.slab(); ++n) {
    rhs.values()[n] = (div_u.values()[n] + div_v.values()[n]) / a_int;
  }
  Field2 ps = solve(rhs);

  // Residual of (Dx Dx + Dy Dy) p_s = rhs relative to the size of its terms.
  const Field2 px = horizontal_derivative(ps, Axis::kX, grid_.dx());
  const Field2 py = horizontal_derivative(ps, Axis::kY, grid_.dy());
  const Field2 pxx = horizontal_derivative(px, Axis::kX, grid_.dx());
  const Field2 pyy = horizontal_derivative(py, Axis::kY, grid_.dy());
  std::vector<double> res(grid_.slab());
  for (std::size_t n = 0; n < res.size(); ++n) {
    res[n] = pxx.values()[n] + pyy.values()[n] - rhs.values()[n];
  }
  const double scale = (l2(div_u.values()) + l2(div_v.values())) / a_int;
  const double rel = scale > 0.0 ? l2(res) / scale : 0.0;
  if (!(rel <= kResidualTolerance)) {
    std::ostringstream os;
    os << "rigid lid: Poisson solve did not converge (relative residual " << rel << ")";
    throw Error(os.str());
  }

  for (int k = 1; k < grid_.nz() - 1; ++k) {
    auto lu = gu.level(k);
    auto lv = gv.level(k);
    for (std::size_t n = 0; n < lu.size(); ++n) {
      lu[n] -= px.values()[n];
      lv[n] -= py.values()[n];
    }
  }
  return Result{std::move(gu), std::move(gv), std::move(ps), rel};
}

void RigidLidProjector::apply(Field3 & gu, Field3 & gv) const {
  Result r = project(gu, gv);
  gu = std::move(r.gu);
  gv = std::move(r.gv);
}

RigidLidResult project_rigid_lid(const Field3 & gu, const Field3 & gv) {
  RigidLidProjector projector(gu.grid());
  auto r = projector.project(gu, gv);
  return RigidLidResult{std::move(r.gu), std::move(r.gv), std::move(r.surface_pressure)};
}

// -----------------------------------------------------------------------------
Model::Model(const Grid & grid, ModelConfig cfg)
  : grid_(grid), cfg_(std::move(cfg)),
    projector_(std::make_shared<RigidLidProjector>(grid)),
    forcing_(cfg_.forcing.evaluate(grid)),
    ddz_(vertical_derivative_operator(grid)), ddz_adj_(ddz_.adjoint()),
    cumint_(cumulative_integral_operator(grid)), cumint_adj_(cumint_.adjoint())
{
  cfg_.validate();
}

StateField Model::tendency(const StateField & x, const StateField * extra) const {
  const PhysParams & ph = cfg_.phys;
  const Field3 & u = x.u;
  const Field3 & v = x.v;
  const Field3 & th = x.theta;

  const Field3 ux = horizontal_derivative(u, Axis::kX);
  const Field3 vy = horizontal_derivative(v, Axis::kY);
  const Field3 tx = horizontal_derivative(th, Axis::kX);
  const Field3 ty = horizontal_derivative(th, Axis::kY);
  Field3 w = cumint_.apply(ux + vy);
  w *= -1.0;
  const Field3 px = cumint_.apply(tx);   // d/dx of the hydrostatic part, over beta
  const Field3 py = cumint_.apply(ty);

  StateField g(grid_);
  g.u = laplacian(u);
  g.u *= ph.nu;
  g.u.axpy(ph.alpha, v);
  g.u.axpy(-ph.beta, px);
  g.v = laplacian(v);
  g.v *= ph.nu;
  g.v.axpy(-ph.alpha, u);
  g.v.axpy(-ph.beta, py);
  g.theta = laplacian(th);
  g.theta *= ph.nu;
  g.theta.axpy(-ph.gamma, w);

  if (!cfg_.linear) {
    const Field3 uy = horizontal_derivative(u, Axis::kY);
    const Field3 vx = horizontal_derivative(v, Axis::kX);
    const Field3 uz = ddz_.apply(u);
    const Field3 vz = ddz_.apply(v);
    const Field3 tz = ddz_.apply(th);
    for (std::size_t n = 0; n < u.size(); ++n) {
      g.u[n] -= u[n] * ux[n] + v[n] * uy[n] + w[n] * uz[n];
      g.v[n] -= u[n] * vx[n] + v[n] * vy[n] + w[n] * vz[n];
      g.theta[n] -= u[n] * tx[n] + v[n] * ty[n] + w[n] * tz[n];
    }
  }

  if (cfg_.forcing.mode != ForcingMode::kNone) g += forcing_;
  if (extra) g += *extra;

  g.theta.zero_boundaries();
  projector_->apply(g.u, g.v);
  return g;
}

double Model::cfl_check(const StateField & x) const {
  const double h = std::min({grid_.dx(), grid_.dy(), grid_.dz()});
  double limit = h * h / (6.0 * cfg_.phys.nu);
  const double umax = x.u.max_abs();
  const double vmax = x.v.max_abs();
  const double wmax = diagnose_w(x.u, x.v).max_abs();
  if (umax > 0.0) limit = std::min(limit, grid_.dx() / umax);
  if (vmax > 0.0) limit = std::min(limit, grid_.dy() / vmax);
  if (wmax > 0.0) limit = std::min(limit, grid_.dz() / wmax);
  return 0.5 * limit;
}

void Model::check_cfl(const StateField & x) const {
  const double allowed = cfl_check(x);
  if (cfg_.dt > allowed) {
    std::ostringstream os;
    os.precision(6);
    os << "CFL violation: dt = " << cfg_.dt << " exceeds allowed dt = " << allowed;
    throw CflError(os.str(), allowed);
  }
}

StepStages Model::step_stages(const StateField & x, const StateField * extra_start,
                              const StateField * extra_end) const {
  if (x.grid() != grid_) throw Error("step: state grid " + x.grid().shape() + " != model grid " + grid_.shape());
  check_cfl(x);
  const double dt = cfg_.dt;
  StateField g0 = tendency(x, extra_start);
  StateField stage = x;
  stage.axpy(dt, g0);
  StateField g1 = tendency(stage, extra_end);
  StateField next = x;
  next.axpy(0.5 * dt, g0);
  next.axpy(0.5 * dt, g1);
  return StepStages{std::move(next), std::move(stage), std::move(g0), std::move(g1)};
}

StateField Model::step(const StateField & x) const {
  return step_stages(x).next;
}

StateField Model::integrate(const StateField & x0, int nsteps, const Recorder & recorder) const {
  if (nsteps < 0) throw Error("integrate: nsteps must be >= 0");
  StateField x = x0;
  if (recorder) recorder(0, x);
  for (int n = 1; n <= nsteps; ++n) {
    x = step(x);
    if (!x.all_finite()) {
      throw NanError("integrate: non-finite state after step " + std::to_string(n));
    }
    if (recorder) recorder(n, x);
  }
  return x;
}

Trajectory Model::trajectory(const StateField & x0, int nsteps) const {
  Trajectory traj;
  traj.reserve(nsteps + 1);
  integrate(x0, nsteps, [&](int, const StateField & x) {traj.push_back(x);});
  return traj;
}

StateField Model::constrain(const StateField & x) const {
  StateField out = x;
  out.theta.zero_boundaries();
  projector_->apply(out.u, out.v);
  return out;
}

// -----------------------------------------------------------------------------
double kinetic_energy(const StateField & x) {
  return 0.5 * (inner(x.u, x.u) + inner(x.v, x.v));
}

DiagnosticsWriter::DiagnosticsWriter(const std::filesystem::path & path, double dt, int step_offset)
  : out_(path), dt_(dt), offset_(step_offset)
{
  if (!out_) throw Error("diagnostics: cannot open " + path.string());
  out_ << "step,time,kinetic_energy,theta_sq,max_div\n";
}

void DiagnosticsWriter::record(int step, const StateField & x) {
  const int s = step + offset_;
  char line[256];
  std::snprintf(line, sizeof(line), "%d,%.10g,%.17g,%.17g,%.6e\n", s, s * dt_, kinetic_energy(x),
                inner(x.theta, x.theta), max_depth_integrated_divergence(x.u, x.v));
  out_ << line;
}

}  // namespace pedavar
