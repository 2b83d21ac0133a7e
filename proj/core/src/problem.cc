/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "pedavar/problem.h"

#include <cmath>
#include <string>

#include "pedavar/error.h"

namespace pedavar {

// -----------------------------------------------------------------------------
double VarianceSpec::variance(int k) const {
  const double s = level_sd.empty() ? sd : level_sd[k];
  return s * s;
}

void VarianceSpec::validate(const Grid & grid, const char * name) const {
  auto bad = [](double s) {return !(s > 0.0) || !std::isfinite(s);};
  if (level_sd.empty()) {
    if (bad(sd)) throw Error(std::string("background: sd for ") + name + " must be positive");
    return;
  }
  if (static_cast<int>(level_sd.size()) != grid.nz()) {
    throw Error(std::string("background: level sd for ") + name + " needs " + std::to_string(grid.nz()) +
                " values, got " + std::to_string(level_sd.size()));
  }
  for (double s : level_sd) {
    if (bad(s)) throw Error(std::string("background: level sd for ") + name + " must be positive");
  }
}

void BackgroundCovariance::validate(const Grid & grid) const {
  u.validate(grid, "u");
  v.validate(grid, "v");
  theta.validate(grid, "theta");
}

namespace {

void scale_by_inverse_variance(Field3 & f, const VarianceSpec & spec) {
  const Grid & g = f.grid();
  for (int k = 0; k < g.nz(); ++k) {
    const double s = 1.0 / spec.variance(k);
    for (double & val : f.level(k)) val *= s;
  }
}

}  // namespace

StateField BackgroundCovariance::apply_inverse(const StateField & d) const {
  StateField out = d;
  scale_by_inverse_variance(out.u, u);
  scale_by_inverse_variance(out.v, v);
  scale_by_inverse_variance(out.theta, theta);
  return out;
}

double BackgroundCovariance::norm_squared(const StateField & d) const {
  return inner(d, apply_inverse(d));
}

// -----------------------------------------------------------------------------
void AssimProblem::validate() const {
  cfg.validate();
  if (nsteps < 1) throw Error("assim: window must contain at least one step");
  if (background.grid() != grid) throw Error("assim: background grid " + background.grid().shape() +
                                             " != problem grid " + grid.shape());
  B.validate(grid);
  if (!(omega >= 0.0) || !std::isfinite(omega)) throw Error("assim: omega must be >= 0");
  if (jb_norm == BackgroundNorm::kSobolev) sobolev.validate();
  floats.validate(grid);
  obs.validate(nsteps, floats);
}

ObsIndex::ObsIndex(const AssimProblem & problem) : by_step_(problem.nsteps + 1) {
  for (const ObsRecord & r : problem.obs.records) {
    const int idx = problem.floats.index_of(r.float_id);
    if (idx < 0) throw Error("obs: unknown float id " + std::to_string(r.float_id));
    if (r.time_index < 0 || r.time_index > problem.nsteps) {
      throw Error("obs: time index " + std::to_string(r.time_index) + " outside window");
    }
    by_step_[r.time_index].push_back({idx, {r.x, r.y}});
    ++count_;
  }
}

// -----------------------------------------------------------------------------
StateField effective_initial_state(const Model & model, const AssimProblem & problem, const StateField & x0) {
  if (!problem.freeze_theta) return model.constrain(x0);
  StateField x = x0;
  x.theta = problem.background.theta;
  return model.constrain(x);
}

void apply_control_mask(const AssimProblem & problem, StateField & g) {
  if (problem.freeze_theta) g.theta.zero();
}

StateField background_departure(const AssimProblem & problem, const StateField & x0) {
  StateField d = x0 - problem.background;
  apply_control_mask(problem, d);
  return d;
}

Field3 sobolev_gradient(const Field3 & f, int m) {
  const Grid & g = f.grid();
  const ColumnOperator dz = vertical_derivative_operator(g);
  const ColumnOperator dz_adj = dz.adjoint();
  Field3 out(g);
  for (int p = 0; p <= m; ++p) {
    for (int q = 0; p + q <= m; ++q) {
      Field3 d = f;
      if (p > 0) d = horizontal_derivative(d, Axis::kX, p);
      if (q > 0) d = horizontal_derivative(d, Axis::kY, q);
      Field3 t = d;
      t += horizontal_derivative_adjoint(horizontal_derivative(d, Axis::kX), Axis::kX);
      t += horizontal_derivative_adjoint(horizontal_derivative(d, Axis::kY), Axis::kY);
      t += dz_adj.apply(dz.apply(d));
      if (q > 0) t = horizontal_derivative_adjoint(t, Axis::kY, q);
      if (p > 0) t = horizontal_derivative_adjoint(t, Axis::kX, p);
      out += t;
    }
  }
  return out;
}

StateField background_hessian(const AssimProblem & problem, const StateField & dx) {
  StateField d = dx;
  apply_control_mask(problem, d);
  StateField h(problem.grid);
  if (problem.jb_norm == BackgroundNorm::kCovariance) {
    h = problem.B.apply_inverse(d);
  } else {
    const int m = problem.sobolev.m;
    h.u = sobolev_gradient(d.u, m);
    h.v = sobolev_gradient(d.v, m);
    h.theta = sobolev_gradient(d.theta, m);
    h.theta *= problem.sobolev.K;
  }
  apply_control_mask(problem, h);
  return h;
}

double background_cost(const AssimProblem & problem, const StateField & x0) {
  const StateField d = background_departure(problem, x0);
  if (problem.jb_norm == BackgroundNorm::kCovariance) return 0.5 * problem.B.norm_squared(d);
  const double n = norm_U(d, problem.sobolev);
  return 0.5 * n * n;
}

StateField background_gradient(const AssimProblem & problem, const StateField & x0) {
  return background_hessian(problem, background_departure(problem, x0));
}

}  // namespace pedavar
