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

// -----------------------------------------------------------------------------
struct WBoundReport {
  double lhs = 0.0;    ///< ||w||^2
  double rhs = 0.0;    ///< a^2 (||u_x||^2 + ||v_y||^2)
  bool pass = true;    ///< lhs <= 1.05 rhs
};

/// ||w||^2 <= a^2 (||du/dx||^2 + ||dv/dy||^2) with w diagnosed from (u, v).
WBoundReport check_w_bound(const StateField & x);

// -----------------------------------------------------------------------------
/// Constants of the linear energy estimate.
struct EnergyConstants {
  double C1 = 0.0, C2 = 0.0, C3 = 0.0, C4 = 0.0;

  static EnergyConstants compute(double depth, const PhysParams & phys, double K);
};

struct EnergyReport {
  EnergyConstants constants;
  std::vector<double> time;
  std::vector<double> lhs;      ///< ||X||^2 + ||grad X||^2 + (1/nu) int ||dX/dt||^2
  std::vector<double> rhs;      ///< e^{C1 t} (C2 ||X0||^2 + C3 ||grad X0||^2 + C4 int_0^T ||F||^2)
  std::vector<double> margin;   ///< rhs - lhs
  bool pass = true;             ///< margin >= 0 at every time and rhs finite

  double min_margin() const;
};

/// Integrates the linear model from x0 with constant forcing f up to time T
/// and evaluates both sides of the energy inequality at every step.
EnergyReport check_energy_inequality(const StateField & x0, const StateField & f, const ModelConfig & cfg,
                                     double T, const NormParams & norm);

// -----------------------------------------------------------------------------
/// (U1 . grad_2) phi2 + w1 dphi2/dz for phi2 = u2, v2, theta2.
StateField nonlinear_term(const StateField & x1, const StateField & x2);

struct NonlinearBoundReport {
  double ratio[3] = {0.0, 0.0, 0.0};   ///< per component u, v, theta
  double max_ratio = 0.0;
  bool degenerate = false;             ///< denominator vanished; ratios reported as 0
};

/// rho_i = ||F_i||^2_{2,m} / ((||X1|| + a^2 ||grad X1||) ||grad X1|| ||grad X2||^2).
NonlinearBoundReport check_nonlinear_bound(const StateField & x1, const StateField & x2, int m);

// -----------------------------------------------------------------------------
struct PicardRun {
  Trajectory limit;                 ///< last iterate
  std::vector<double> residuals;    ///< sup_t N(X^{n+1} - X^n), n = 0, 1, ...
  bool converged = false;
  bool monotone = true;             ///< residuals strictly decreasing
  int iterations = 0;
};

/// N(X(t)) = ||X(t)||^2_U + int_0^t ||dX/dt||^2_{2,m}; returns sup over the trajectory.
double picard_norm(const Trajectory & x, double dt, const NormParams & norm);

/// Picard iteration X^{n+1} solving the linear model forced by -F(X^n, X^n).
/// Stops when the residual is <= tol * N(X0) (or zero) or after max_n
/// iterations; three consecutive increases abort with an error.
PicardRun picard_integrate(const StateField & x0, const ModelConfig & cfg, double T, int max_n, double tol,
                           const NormParams & norm);

// -----------------------------------------------------------------------------
void write_wbound_csv(const std::filesystem::path & path, const std::vector<WBoundReport> & reports);
void write_energy_report_csv(const std::filesystem::path & path, const EnergyReport & report);
void write_nlbound_csv(const std::filesystem::path & path, const std::vector<NonlinearBoundReport> & reports);
void write_picard_csv(const std::filesystem::path & path, const PicardRun & run);

}  // namespace pedavar
