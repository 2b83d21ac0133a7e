/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <string>

#include "pedavar/error.h"
#include "pedavar/problem.h"
#include "pedavar/twin.h"

namespace pedavar::cli {

class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Every tunable of a run, flat. Key names are unique across sections, so a
/// key may also appear before the first [section] header.
struct RunConfig {
  // [grid]
  int nx = 32;
  int ny = 32;
  int nz = 9;
  double depth = 1.0;
  // [model]
  double alpha = 1.0;
  double beta = 0.1;
  double gamma = 0.1;
  double nu = 0.02;
  double dt = 0.05;
  double tau0 = 0.05;
  // [twin]
  int spinup_steps = 2000;
  int window_steps = 200;
  int windows = 1;
  int floats = 50;
  int obs_times = 10;
  double noise_sd = 1e-3;
  double z0 = 0.25;
  double background_scale = 0.0;
  std::uint64_t seed = 1;
  // [assim]
  double omega = 1.0;
  double background_sd = 1.0;
  bool freeze_theta = true;
  BackgroundNorm jb_norm = BackgroundNorm::kCovariance;
  int outer_loops = 3;
  int inner_iters = 10;
  double tol = 1e-3;
  // [norm]
  int m = 2;
  double K = 1.0;
  // [verify]
  int samples = 10;
  double T = 0.5;
  double energy_K = 0.0;      ///< 0 selects the smallest admissible K
  double amplitude = 1.0;
  int kmax = 2;
  int picard_max_n = 30;
  double picard_tol = 1e-10;
  // [gradcheck]
  int directions = 10;
  double eps = 1e-5;
  // [io]
  std::string initial_state;
  std::string truth_state;
  std::string background_state;
  std::string analysis_state;
  std::string obs_file;
  std::string floats_file;

  bool operator==(const RunConfig &) const = default;

  Grid grid() const {return Grid(nx, ny, nz, depth);}
  TwinConfig twin() const;
  NormParams norm() const {return NormParams{m, K};}
  /// Cross-key invariants; per-key checks happen while parsing.
  void validate() const;
};

/// Parses "key = value" lines with [section] headers and # comments.
/// Errors name the source, line and key.
RunConfig parse_config(const std::string & text, const std::string & source = "config");
RunConfig load_config(const std::string & path);

/// Every key with its resolved value; parse_config(format_config(c)) == c.
std::string format_config(const RunConfig & cfg);

/// 64-bit FNV-1a.
std::uint64_t fnv1a(const std::string & text);

}  // namespace pedavar::cli
