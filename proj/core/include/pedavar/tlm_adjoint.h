/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <functional>
#include <vector>

#include "pedavar/dynamics.h"
#include "pedavar/floats.h"
#include "pedavar/problem.h"

namespace pedavar {

/// Nonlinear trajectory stored at every step, with the float positions.
struct Checkpoints {
  Trajectory states;                        ///< nsteps + 1 states
  std::vector<std::vector<Vec2>> floats;    ///< nsteps + 1 position sets
  double z0 = 0.5;

  int nsteps() const {return static_cast<int>(states.size()) - 1;}
  std::size_t nfloats() const {return floats.empty() ? 0 : floats.front().size();}
};

Checkpoints make_checkpoints(const Model & model, const StateField & x0, const FloatSet & fs0, int nsteps);

/// A state-space vector paired with one (x, y) vector per float. Used both for
/// tangent perturbations and for adjoint variables.
struct StateAndFloats {
  StateField x;
  std::vector<Vec2> xi;

  explicit StateAndFloats(const Grid & grid, std::size_t nfloats = 0) : x(grid), xi(nfloats) {}
  StateAndFloats(StateField s, std::vector<Vec2> p) : x(std::move(s)), xi(std::move(p)) {}
};

using TangentState = StateAndFloats;
using AdjointState = StateAndFloats;

/// Quadrature inner product on the state part plus Euclidean on floats.
double inner(const StateAndFloats & a, const StateAndFloats & b);

// -----------------------------------------------------------------------------
/// Tangent-linear and adjoint of one model step at a given state. Inputs to
/// the tangent map are restricted to prognostic values (z-boundaries zeroed),
/// and adjoint outputs are restricted the same way.
class LinearizedStep {
 public:
  explicit LinearizedStep(const Model & model) : model_(model) {}

  StateField tendency_tl(const StateField & x, const StateField & dx) const;
  StateField tendency_ad(const StateField & x, const StateField & ax) const;

  /// Heun step; `stage` is X + dt G(X) at the linearization state.
  StateField step_tl(const StateField & x, const StateField & stage, const StateField & dx) const;
  StateField step_ad(const StateField & x, const StateField & stage, const StateField & lx) const;

 private:
  const Model & model_;
};

/// Tangent-linear and adjoint of the composite step (model, floats) along a
/// checkpointed trajectory.
class LinearizedModel {
 public:
  LinearizedModel(const Model & model, const Checkpoints & ckpt);

  const Checkpoints & checkpoints() const {return ckpt_;}

  /// Maps a perturbation at step n to step n + 1.
  TangentState tlm_step(int n, const TangentState & d) const;
  /// Transpose of tlm_step(n, .).
  AdjointState adj_step(int n, const AdjointState & l) const;

  using TangentObserver = std::function<void(int step, const TangentState &)>;
  using AdjointInjector = std::function<void(int step, AdjointState &)>;

  /// Runs the tangent model over the window; observer sees steps 0..N.
  TangentState tlm(const TangentState & d0, const TangentObserver & observer = {}) const;
  /// Runs the adjoint backwards from step N; inject may add forcing at each
  /// step (N..0) before the sweep continues.
  AdjointState adj(const AdjointState & lN, const AdjointInjector & inject = {}) const;

 private:
  void check(int n, std::size_t nfloats) const;

  const Model & model_;
  const Checkpoints & ckpt_;
  LinearizedStep step_;
  std::vector<StateField> stages_;
};

// -----------------------------------------------------------------------------
struct CostAndGradient {
  CostBreakdown cost;
  StateField gradient;
};

/// Jo = 1/2 sum of squared wrapped position mismatches along a float path.
double observation_cost(const ObsIndex & index, const std::vector<std::vector<Vec2>> & float_path);

/// Nonlinear forward run of the assimilation problem from control x0.
struct ForwardRun {
  Checkpoints ckpt;
  CostBreakdown cost;
};
ForwardRun run_forward(const Model & model, const AssimProblem & problem, const StateField & x0);

/// J(X0) and its gradient w.r.t. the quadrature inner product, via one
/// nonlinear forward run and one adjoint sweep.
CostAndGradient grad_cost(const StateField & x0, const AssimProblem & problem);

}  // namespace pedavar
