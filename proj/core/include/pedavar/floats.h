/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <filesystem>
#include <vector>

#include "pedavar/dynamics.h"
#include "pedavar/grid.h"

namespace pedavar {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  bool operator==(const Vec2 &) const = default;
};

/// Wraps a horizontal coordinate into [0, 2pi).
double wrap_coordinate(double c);
Vec2 wrap(Vec2 p);
/// Shortest displacement a - b on the circle, in (-pi, pi].
double periodic_residual(double a, double b);

// -----------------------------------------------------------------------------
/// Lagrangian floats drifting in the plane z = z0.
struct FloatSet {
  std::vector<Vec2> positions;
  std::vector<int> ids;       ///< stable labels, strictly increasing
  double z0 = 0.5;

  std::size_t size() const {return positions.size();}
  void validate(const Grid & grid) const;
  /// Index of the float with the given id, or -1.
  int index_of(int id) const;
};

/// One observed float position.
struct ObsRecord {
  int float_id = 0;
  int time_index = 0;
  double x = 0.0;
  double y = 0.0;
  double noise_sd = 0.0;
};

struct ObsSet {
  std::vector<ObsRecord> records;

  /// Checks times lie in [0, nsteps], positions are wrapped and ids exist.
  void validate(int nsteps, const FloatSet & floats) const;
  /// Sorted, unique time indices that carry observations.
  std::vector<int> times() const;
};

/// CSV with header "float_id,time_index,x,y,noise_sd".
void write_obs_csv(const std::filesystem::path & path, const ObsSet & obs);
ObsSet read_obs_csv(const std::filesystem::path & path);

/// "float_id,x,y,z0": launch positions, one row per float.
void write_floats_csv(const std::filesystem::path & path, const FloatSet & floats);
FloatSet read_floats_csv(const std::filesystem::path & path);

// -----------------------------------------------------------------------------
/// Bilinear-in-(x,y), linear-in-z interpolation weights at one point.
///
/// The same stencil serves the forward value, its spatial gradient (for the
/// tangent-linear float update) and the adjoint scatter.
class InterpStencil {
 public:
  InterpStencil(const Grid & grid, Vec2 pos, double z0);

  double value(const Field3 & f) const;
  /// (df/dx, df/dy) of the interpolant at the point (piecewise constant).
  Vec2 gradient(const Field3 & f) const;
  /// Adds the adjoint of value() applied to `weight` into f, under the
  /// quadrature inner product of the grid.
  void scatter(Field3 & f, double weight) const;
  /// Adds the adjoint of gradient()·dir applied to `weight` into f.
  void scatter_gradient(Field3 & f, Vec2 dir, double weight) const;

 private:
  const Grid * grid_;
  int i0_, i1_, j0_, j1_, k0_, k1_;
  double tx_, ty_, tz_;
};

/// U(xi, z0) = (u, v) interpolated at a float position.
Vec2 interp_uv(const Field3 & u, const Field3 & v, Vec2 pos, double z0);

/// Heun update of every float through one model step:
///   k1 = U_start(xi), k2 = U_end(xi + dt k1), xi+ = wrap(xi + dt (k1 + k2) / 2).
FloatSet advect_floats(const FloatSet & fs, const StateField & start, const StateField & end, double dt);

/// Float positions at every step of a trajectory (entry n is after n steps).
std::vector<std::vector<Vec2>> float_trajectory(const Trajectory & traj, const FloatSet & fs0, double dt);

/// Positions at each requested time index: result[t][float].
std::vector<std::vector<Vec2>> observe(const Trajectory & traj, const FloatSet & fs0,
                                       const std::vector<int> & obs_times, double dt);

}  // namespace pedavar
