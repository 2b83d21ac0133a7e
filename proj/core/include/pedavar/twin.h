/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "pedavar/assim.h"
#include "pedavar/dynamics.h"
#include "pedavar/floats.h"

namespace pedavar {

/// Identical-twin experiment setup.
struct TwinConfig {
  int nx = 32;
  int ny = 32;
  int nz = 9;
  double depth = 1.0;
  PhysParams phys{1.0, 0.1, 0.1, 0.02};
  double dt = 0.05;
  double tau0 = 0.05;
  int spinup_steps = 2000;
  int window_steps = 200;
  int windows = 1;              ///< successive windows, each started from the previous analysis forecast

  int floats = 50;              ///< M
  int obs_times = 10;           ///< N per window
  double noise_sd = 1e-3;
  double z0 = 0.25;
  double background_scale = 0.0;   ///< s_b
  std::uint64_t seed = 1;

  double omega = 1.0;
  BackgroundCovariance B;
  bool freeze_theta = true;
  AssimOptions assim;

  Grid grid() const {return Grid(nx, ny, nz, depth);}
  ModelConfig model_config() const;
  void validate() const;
};

/// Time indices round(i nsteps / N), i = 1..N.
std::vector<int> obs_time_indices(int nsteps, int n);

/// Spins up from rest under the wind, then records windows * window_steps
/// further steps (the returned trajectory starts at the end of the spinup).
Trajectory truth_run(const TwinConfig & cfg);

struct SyntheticObs {
  FloatSet floats;
  ObsSet obs;
};

/// Seeds M floats uniformly, advects them through `truth` (steps 0..nsteps)
/// and records noisy wrapped positions at N evenly spaced times.
SyntheticObs synth_obs(const Trajectory & truth, const TwinConfig & cfg, std::uint64_t seed);
/// Same, for floats already at the given positions.
ObsSet synth_obs_from(const Trajectory & truth, const FloatSet & floats, const TwinConfig & cfg,
                      std::uint64_t seed);

/// theta from the truth, velocities scaled by s_b.
StateField make_background(const StateField & truth0, double s_b);

/// Relative RMS errors of u and v per time; missing where the truth vanishes.
struct ErrorSeries {
  std::vector<std::optional<double>> u;
  std::vector<std::optional<double>> v;
};

std::optional<double> relative_rms(const Field3 & run, const Field3 & truth);
ErrorSeries rms_error(const Trajectory & run, const Trajectory & truth);

// -----------------------------------------------------------------------------
struct TwinResult {
  Trajectory truth;
  Trajectory background_run;
  Trajectory analysis_run;
  FloatSet floats;                     ///< initial float set of the first window
  ObsSet obs;                          ///< all windows, time indices relative to the truth start
  std::vector<AssimResult> windows;
  ErrorSeries background_error;
  ErrorSeries analysis_error;
};

TwinResult run_twin(const TwinConfig & cfg);

/// Writes obs.csv, errors.csv, ke_{truth,background,analysis}.csv,
/// minlog.csv (all windows) and the analysis snapshots into dir.
void write_twin_outputs(const TwinResult & result, const TwinConfig & cfg, const std::filesystem::path & dir);

/// "time,E_u_bg,E_v_bg,E_u_an,E_v_an"; missing values are empty fields.
void write_error_csv(const std::filesystem::path & path, double dt, const ErrorSeries & bg,
                     const ErrorSeries & an);
/// "step,time,kinetic_energy".
void write_energy_csv(const std::filesystem::path & path, double dt, const Trajectory & run);

}  // namespace pedavar
