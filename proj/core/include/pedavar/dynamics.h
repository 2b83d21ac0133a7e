/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "pedavar/grid.h"

namespace pedavar {

// -----------------------------------------------------------------------------
struct PhysParams {
  double alpha = 1.0;   ///< Coriolis coefficient
  double beta = 0.1;    ///< buoyancy / pressure coupling
  double gamma = 0.1;   ///< background stratification
  double nu = 0.02;     ///< viscosity and diffusivity

  void validate() const;
};

enum class ForcingMode {kNone, kLinearRhs, kWind};

/// Right-hand side of the momentum and temperature equations.
///
/// kWind is a zonal stress tau0 cos(y) g(z) acting on u, where g puts equal
/// weight on the two interior levels next to z = 0. On the periodic domain it
/// drives two opposing zonal jets; it stands in for a closed-basin double gyre.
struct Forcing {
  ForcingMode mode = ForcingMode::kNone;
  std::optional<StateField> rhs;        ///< F1, F2, F3 for kLinearRhs
  double tau0 = 0.0;
  std::vector<double> depth_profile;    ///< per-level weights for kWind, sum 1

  static Forcing none() {return {};}
  static Forcing linear_rhs(StateField f);
  static Forcing wind(const Grid & grid, double tau0);
  static std::vector<double> default_wind_profile(const Grid & grid);

  /// Materialize the forcing as a state-shaped field on `grid`.
  StateField evaluate(const Grid & grid) const;
};

struct ModelConfig {
  PhysParams phys;
  double dt = 0.05;
  bool linear = false;   ///< drop advection (linear primitive equations)
  Forcing forcing;

  void validate() const;
};

// -----------------------------------------------------------------------------
/// w(z) = -int_0^z (du/dx + dv/dy) dz'.
Field3 diagnose_w(const Field3 & u, const Field3 & v);
/// p(z) = p_s + beta int_0^z theta dz'.
Field3 diagnose_pressure(const Field3 & theta, const Field2 & surface_pressure, double beta);
/// max over (x,y) of |int_0^a (du/dx + dv/dy) dz|.
double max_depth_integrated_divergence(const Field3 & u, const Field3 & v);

// -----------------------------------------------------------------------------
/// Rigid-lid projection of horizontal momentum tendencies.
///
/// Zeroes the z-boundary levels, then removes the gradient of a surface
/// pressure solving the doubly periodic Poisson problem
///   (Dx Dx + Dy Dy) p_s = (Dx int Gu + Dy int Gv) / (a - dz)
/// by Fourier diagonalization, with zero mean. The resulting operator is the
/// orthogonal projector onto fields with vanishing depth-integrated
/// divergence, so it is its own adjoint.
class RigidLidProjector {
 public:
  struct Result {
    Field3 gu, gv;
    Field2 surface_pressure;
    double relative_residual;
  };

  explicit RigidLidProjector(const Grid & grid);
  ~RigidLidProjector();
  RigidLidProjector(const RigidLidProjector &) = delete;
  RigidLidProjector & operator=(const RigidLidProjector &) = delete;

  Result project(const Field3 & gu, const Field3 & gv) const;
  /// Projects in place, skipping the residual diagnostics.
  void apply(Field3 & gu, Field3 & gv) const;

  /// Maximum accepted relative residual of the Poisson solve.
  static constexpr double kResidualTolerance = 1e-12;

 private:
  Field2 solve(const Field2 & rhs) const;

  Grid grid_;
  struct Plans;
  std::unique_ptr<Plans> plans_;
  std::vector<double> inverse_symbol_;   // 1/lambda or 0 on the null space
};

struct RigidLidResult {
  Field3 gu, gv;
  Field2 surface_pressure;
};

RigidLidResult project_rigid_lid(const Field3 & gu, const Field3 & gv);

// -----------------------------------------------------------------------------
/// Per-stage data of one Heun step, used by the energy check.
struct StepStages {
  StateField next;
  StateField stage;        ///< X* = X + dt G(X)
  StateField tendency0;    ///< G(X)
  StateField tendency1;    ///< G(X*)
};

using Trajectory = std::vector<StateField>;
using Recorder = std::function<void(int step, const StateField & state)>;

/// Hydrostatic primitive-equations model on the periodic channel.
class Model {
 public:
  Model(const Grid & grid, ModelConfig cfg);

  const Grid & grid() const {return grid_;}
  const ModelConfig & config() const {return cfg_;}
  const RigidLidProjector & projector() const {return *projector_;}
  const StateField & forcing_field() const {return forcing_;}

  /// Tendency G(X), including the rigid-lid projection; `extra` is an
  /// additional state-shaped forcing added before projection.
  StateField tendency(const StateField & x, const StateField * extra = nullptr) const;

  /// Largest stable dt for state x (safety factor 0.5 included).
  double cfl_check(const StateField & x) const;

  StateField step(const StateField & x) const;
  /// Heun step with separate extra forcing at the start and end of the step.
  StepStages step_stages(const StateField & x, const StateField * extra_start = nullptr,
                         const StateField * extra_end = nullptr) const;

  /// Applies step nsteps times; recorder sees step 0 and every later state.
  StateField integrate(const StateField & x0, int nsteps, const Recorder & recorder = {}) const;
  Trajectory trajectory(const StateField & x0, int nsteps) const;

  /// Projects a state onto the rigid-lid subspace and zeroes z-boundaries.
  StateField constrain(const StateField & x) const;

  // Column operators shared with the linearized model.
  const ColumnOperator & ddz() const {return ddz_;}
  const ColumnOperator & ddz_adj() const {return ddz_adj_;}
  const ColumnOperator & cumint() const {return cumint_;}
  const ColumnOperator & cumint_adj() const {return cumint_adj_;}

 private:
  void check_cfl(const StateField & x) const;

  Grid grid_;
  ModelConfig cfg_;
  std::shared_ptr<const RigidLidProjector> projector_;
  StateField forcing_;
  ColumnOperator ddz_, ddz_adj_, cumint_, cumint_adj_;
};

// -----------------------------------------------------------------------------
/// Writes "diagnostics.csv": step,time,kinetic_energy,theta_sq,max_div.
class DiagnosticsWriter {
 public:
  DiagnosticsWriter(const std::filesystem::path & path, double dt, int step_offset = 0);
  void record(int step, const StateField & x);

 private:
  std::ofstream out_;
  double dt_;
  int offset_;
};

double kinetic_energy(const StateField & x);

}  // namespace pedavar
