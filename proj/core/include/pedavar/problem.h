/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <vector>

#include "pedavar/dynamics.h"
#include "pedavar/floats.h"
#include "pedavar/grid.h"

namespace pedavar {

/// Background standard deviation of one variable, optionally varying by level.
struct VarianceSpec {
  double sd = 1.0;
  std::vector<double> level_sd;   ///< empty, or one value per z-level

  double variance(int k) const;
  void validate(const Grid & grid, const char * name) const;
};

/// Diagonal background error covariance.
struct BackgroundCovariance {
  VarianceSpec u, v, theta;

  void validate(const Grid & grid) const;
  /// B^{-1} d, pointwise.
  StateField apply_inverse(const StateField & d) const;
  /// sum of q d^2 / sigma^2 over the grid, q the quadrature weights.
  double norm_squared(const StateField & d) const;
};

enum class BackgroundNorm {
  kCovariance,   ///< Jb = 1/2 ||X0 - Xb||_B^2
  kSobolev,      ///< Jb = 1/2 ||X0 - Xb||_{U^{m+1}}^2
};

/// Everything that defines one variational assimilation.
struct AssimProblem {
  AssimProblem(const Grid & g, ModelConfig c, int n, StateField xb)
    : grid(g), cfg(std::move(c)), nsteps(n), background(std::move(xb)) {}

  Grid grid;
  ModelConfig cfg;
  int nsteps;
  StateField background;
  BackgroundCovariance B;
  double omega = 1.0;
  FloatSet floats;
  ObsSet obs;
  bool freeze_theta = false;
  BackgroundNorm jb_norm = BackgroundNorm::kCovariance;
  NormParams sobolev;            ///< used when jb_norm == kSobolev

  void validate() const;
};

struct CostBreakdown {
  double J = 0.0;
  double Jo = 0.0;
  double Jb = 0.0;
  double gnorm = 0.0;   ///< norm of the gradient when it was computed, else 0
};

/// Observation records grouped by time index, float indices resolved.
struct ObsIndex {
  struct Entry {
    int float_index;
    Vec2 position;
  };
  explicit ObsIndex(const AssimProblem & problem);
  /// Entries observed at step n (empty for unobserved steps).
  const std::vector<Entry> & at(int n) const {return by_step_[n];}
  std::size_t count() const {return count_;}

 private:
  std::vector<std::vector<Entry>> by_step_;
  std::size_t count_ = 0;
};

/// Initial state actually integrated: theta reset to background when frozen,
/// then projected onto the rigid-lid subspace.
StateField effective_initial_state(const Model & model, const AssimProblem & problem, const StateField & x0);

/// Background departure X0 - Xb with the frozen components removed.
StateField background_departure(const AssimProblem & problem, const StateField & x0);
double background_cost(const AssimProblem & problem, const StateField & x0);
/// Gradient of background_cost w.r.t. the quadrature inner product.
StateField background_gradient(const AssimProblem & problem, const StateField & x0);
/// Applies the (linear) Jb Hessian to an increment.
StateField background_hessian(const AssimProblem & problem, const StateField & dx);

/// Gradient of 1/2 ||f||^2_{U^{m+1}} for one field.
Field3 sobolev_gradient(const Field3 & f, int m);

/// Zeroes the theta part of a control-space vector when theta is frozen.
void apply_control_mask(const AssimProblem & problem, StateField & g);

}  // namespace pedavar
