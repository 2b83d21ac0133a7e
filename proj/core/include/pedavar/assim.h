/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "pedavar/error.h"
#include "pedavar/problem.h"
#include "pedavar/tlm_adjoint.h"

namespace pedavar {

/// Raised by the inner solver when p^T H p <= 0.
class NegativeCurvatureError : public Error {
 public:
  using Error::Error;
};

/// J, Jo, Jb at x0 (one nonlinear forward run, no gradient).
CostBreakdown cost(const StateField & x0, const AssimProblem & problem);

// -----------------------------------------------------------------------------
/// Gauss-Newton linearization of the cost around one outer-loop iterate.
///
/// Holds the nonlinear trajectory, the observation residuals r = wrap(xi - d)
/// and the gradient. The observation operator's tangent G maps a control
/// increment to float position tangents at every observation record.
class Linearization {
 public:
  Linearization(const AssimProblem & problem, const StateField & x0);
  Linearization(const Linearization &) = delete;
  Linearization & operator=(const Linearization &) = delete;

  const AssimProblem & problem() const {return problem_;}
  const StateField & x0() const {return x0_;}
  const CostBreakdown & cost() const {return cost_;}
  const StateField & gradient() const {return gradient_;}
  const std::vector<Vec2> & residuals() const {return residuals_;}
  const Checkpoints & checkpoints() const {return ckpt_;}

  /// G dx0, one entry per observation record in ObsIndex order.
  std::vector<Vec2> tangent_obs(const StateField & dx0) const;
  /// G^T w.
  StateField adjoint_obs(const std::vector<Vec2> & w) const;
  /// (G^T G + omega Jb'') dx0; optionally returns G dx0.
  StateField hessian_vec(const StateField & dx0, std::vector<Vec2> * gdx = nullptr) const;

  /// Quadratic model q(dx0) = 1/2 |r + G dx0|^2 + omega Jb(x0 + dx0), given G dx0.
  CostBreakdown model_value(const StateField & dx0, const std::vector<Vec2> & gdx) const;

 private:
  const AssimProblem & problem_;
  StateField x0_;
  Model model_;
  ObsIndex index_;
  Checkpoints ckpt_;
  LinearizedModel lin_;
  std::vector<Vec2> residuals_;
  CostBreakdown cost_;
  StateField gradient_;
};

// -----------------------------------------------------------------------------
struct InnerResult {
  StateField increment;
  int iterations = 0;
  double relative_residual = 0.0;
};

using HessianProduct = std::function<StateField(const StateField &)>;
/// Called after every CG update with the iteration count (from 1), the new
/// increment and the step length along the last search direction.
using InnerHook = std::function<void(int iter, const StateField & increment, double alpha,
                                     double relative_residual)>;

/// Conjugate gradients on H d = -g under the quadrature inner product.
/// Stops when |H d + g| <= tol |g| or after max_iter iterations.
InnerResult inner_solve(const StateField & gradient, const HessianProduct & hessian, double tol = 1e-3,
                        int max_iter = 10, const InnerHook & hook = {});

// -----------------------------------------------------------------------------
struct MinimizerRecord {
  int outer = 0;
  int inner = 0;       ///< 0: nonlinear cost at the outer iterate; k: quadratic model after k CG steps
  double J = 0.0;
  double Jo = 0.0;
  double Jb = 0.0;
  double gnorm = 0.0;
  double stepnorm = 0.0;
};

struct MinimizerLog {
  std::vector<MinimizerRecord> records;

  /// "minlog.csv": outer,inner,J,Jo,Jb,gnorm,stepnorm.
  void write_csv(const std::filesystem::path & path) const;
  /// True when J is nonincreasing within each outer loop's inner records.
  bool inner_monotone() const;
};

struct AssimOptions {
  int outer_loops = 5;
  int inner_iters = 10;
  double tol = 1e-3;
};

struct AssimResult {
  StateField analysis;         ///< control vector of the best iterate
  StateField initial_state;    ///< state actually integrated from it
  CostBreakdown initial_cost;  ///< at the background
  CostBreakdown final_cost;    ///< at the returned iterate
  MinimizerLog log;
  std::string stop_reason;
};

/// Incremental 4D-Var from X0 = Xb.
AssimResult assimilate(const AssimProblem & problem, const AssimOptions & options = {});

}  // namespace pedavar
