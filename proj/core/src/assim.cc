/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "pedavar/assim.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

namespace pedavar {

CostBreakdown cost(const StateField & x0, const AssimProblem & problem) {
  problem.validate();
  const Model model(problem.grid, problem.cfg);
  return run_forward(model, problem, x0).cost;
}

// -----------------------------------------------------------------------------
namespace {

StateField control_tangent(const Model & model, const AssimProblem & problem, const StateField & dx0) {
  StateField d = dx0;
  apply_control_mask(problem, d);
  return model.constrain(d);
}

}  // namespace

Linearization::Linearization(const AssimProblem & problem, const StateField & x0)
  : problem_(problem), x0_(x0), model_(problem.grid, problem.cfg), index_(problem),
    ckpt_(make_checkpoints(model_, effective_initial_state(model_, problem, x0), problem.floats,
                           problem.nsteps)),
    lin_(model_, ckpt_), gradient_(problem.grid) {
  residuals_.reserve(index_.count());
  for (int n = 0; n <= problem.nsteps; ++n) {
    for (const ObsIndex::Entry & e : index_.at(n)) {
      const Vec2 p = ckpt_.floats[n][e.float_index];
      residuals_.push_back({periodic_residual(p.x, e.position.x), periodic_residual(p.y, e.position.y)});
    }
  }
  cost_.Jo = observation_cost(index_, ckpt_.floats);
  cost_.Jb = background_cost(problem, x0);
  cost_.J = cost_.Jo + problem.omega * cost_.Jb;
  gradient_ = adjoint_obs(residuals_);
  gradient_.axpy(problem.omega, background_gradient(problem, x0));
  apply_control_mask(problem, gradient_);
  cost_.gnorm = norm(gradient_);
}

std::vector<Vec2> Linearization::tangent_obs(const StateField & dx0) const {
  std::vector<Vec2> out;
  out.reserve(index_.count());
  if (index_.count() == 0) return out;
  const TangentState d0(control_tangent(model_, problem_, dx0), std::vector<Vec2>(ckpt_.nfloats()));
  lin_.tlm(d0, [&](int n, const TangentState & d) {
    for (const ObsIndex::Entry & e : index_.at(n)) out.push_back(d.xi[e.float_index]);
  });
  return out;
}

StateField Linearization::adjoint_obs(const std::vector<Vec2> & w) const {
  if (w.size() != index_.count()) throw Error("adjoint_obs: weight count does not match observations");
  if (index_.count() == 0) return StateField(problem_.grid);
  std::vector<std::size_t> offset(problem_.nsteps + 2, 0);
  for (int n = 0; n <= problem_.nsteps; ++n) offset[n + 1] = offset[n] + index_.at(n).size();
  const AdjointState lN(problem_.grid, ckpt_.nfloats());
  const AdjointState l0 = lin_.adj(lN, [&](int n, AdjointState & l) {
    const auto & entries = index_.at(n);
    for (std::size_t e = 0; e < entries.size(); ++e) {
      Vec2 & dst = l.xi[entries[e].float_index];
      dst.x += w[offset[n] + e].x;
      dst.y += w[offset[n] + e].y;
    }
  });
  return control_tangent(model_, problem_, l0.x);
}

StateField Linearization::hessian_vec(const StateField & dx0, std::vector<Vec2> * gdx) const {
  std::vector<Vec2> g = tangent_obs(dx0);
  StateField h = adjoint_obs(g);
  h.axpy(problem_.omega, background_hessian(problem_, dx0));
  apply_control_mask(problem_, h);
  if (gdx) *gdx = std::move(g);
  return h;
}

CostBreakdown Linearization::model_value(const StateField & dx0, const std::vector<Vec2> & gdx) const {
  if (gdx.size() != residuals_.size()) throw Error("model_value: tangent count does not match observations");
  CostBreakdown c;
  for (std::size_t n = 0; n < gdx.size(); ++n) {
    const double rx = residuals_[n].x + gdx[n].x;
    const double ry = residuals_[n].y + gdx[n].y;
    c.Jo += 0.5 * (rx * rx + ry * ry);
  }
  StateField x = x0_;
  x += dx0;
  c.Jb = background_cost(problem_, x);
  c.J = c.Jo + problem_.omega * c.Jb;
  return c;
}

// -----------------------------------------------------------------------------
InnerResult inner_solve(const StateField & gradient, const HessianProduct & hessian, double tol, int max_iter,
                        const InnerHook & hook) {
  InnerResult res{StateField(gradient.grid()), 0, 0.0};
  const double gnorm = norm(gradient);
  if (gnorm == 0.0) return res;
  StateField r = gradient;
  r *= -1.0;
  StateField p = r;
  double rr = inner(r, r);
  res.relative_residual = 1.0;
  for (int k = 1; k <= max_iter; ++k) {
    const StateField hp = hessian(p);
    const double php = inner(p, hp);
    if (!(php > 0.0)) {
      std::ostringstream os;
      os << "inner loop: non-positive curvature p^T H p = " << php << " at iteration " << k;
      throw NegativeCurvatureError(os.str());
    }
    const double alpha = rr / php;
    res.increment.axpy(alpha, p);
    r.axpy(-alpha, hp);
    const double rr_new = inner(r, r);
    res.iterations = k;
    res.relative_residual = std::sqrt(rr_new) / gnorm;
    if (hook) hook(k, res.increment, alpha, res.relative_residual);
    if (res.relative_residual <= tol) break;
    const double beta = rr_new / rr;
    p *= beta;
    p += r;
    rr = rr_new;
  }
  return res;
}

// -----------------------------------------------------------------------------
void MinimizerLog::write_csv(const std::filesystem::path & path) const {
  std::ofstream out(path);
  if (!out) throw Error("minlog: cannot open " + path.string() + " for writing");
  out << "outer,inner,J,Jo,Jb,gnorm,stepnorm\n";
  char line[256];
  for (const MinimizerRecord & r : records) {
    std::snprintf(line, sizeof(line), "%d,%d,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.outer, r.inner, r.J, r.Jo,
                  r.Jb, r.gnorm, r.stepnorm);
    out << line;
  }
  if (!out) throw Error("minlog: write failed for " + path.string());
}

bool MinimizerLog::inner_monotone() const {
  std::map<int, double> last;
  for (const MinimizerRecord & r : records) {
    auto it = last.find(r.outer);
    if (it != last.end() && r.J > it->second) return false;
    last[r.outer] = r.J;
  }
  return true;
}

// -----------------------------------------------------------------------------
AssimResult assimilate(const AssimProblem & problem, const AssimOptions & options) {
  problem.validate();
  if (options.outer_loops < 1 || options.inner_iters < 1) {
    throw Error("assimilate: outer_loops and inner_iters must be >= 1");
  }
  if (!(options.tol > 0.0)) throw Error("assimilate: tol must be positive");
  if (!(problem.omega > 0.0) && problem.obs.records.empty()) {
    throw Error("assimilate: need omega > 0 or at least one observation");
  }

  AssimResult result{problem.background, problem.background, {}, {}, {}, "max_outer"};
  StateField x = problem.background;
  std::optional<double> best_J;
  std::optional<double> prev_J;
  int increases = 0;

  auto consider = [&](const StateField & xi, const CostBreakdown & c) {
    if (!best_J || c.J < *best_J) {
      best_J = c.J;
      result.analysis = xi;
      result.final_cost = c;
    }
    if (prev_J && c.J > *prev_J) {
      ++increases;
    } else {
      increases = 0;
    }
    prev_J = c.J;
  };

  for (int outer = 0; outer < options.outer_loops; ++outer) {
    const Linearization lin(problem, x);
    const CostBreakdown c0 = lin.cost();
    if (outer == 0) result.initial_cost = c0;
    result.log.records.push_back({outer, 0, c0.J, c0.Jo, c0.Jb, c0.gnorm, 0.0});
    consider(x, c0);
    if (increases >= 2) {
      result.stop_reason = "diverged";
      break;
    }

    std::vector<Vec2> gdelta(lin.residuals().size());
    std::vector<Vec2> gp;
    auto hess = [&](const StateField & p) {return lin.hessian_vec(p, &gp);};
    auto hook = [&](int k, const StateField & delta, double alpha, double rel) {
      for (std::size_t n = 0; n < gdelta.size(); ++n) {
        gdelta[n].x += alpha * gp[n].x;
        gdelta[n].y += alpha * gp[n].y;
      }
      const CostBreakdown q = lin.model_value(delta, gdelta);
      result.log.records.push_back({outer, k, q.J, q.Jo, q.Jb, rel * c0.gnorm, norm(delta)});
    };

    InnerResult inner{StateField(problem.grid)};
    try {
      inner = inner_solve(lin.gradient(), hess, options.tol, options.inner_iters, hook);
    } catch (const NegativeCurvatureError & e) {
      result.stop_reason = std::string("negative_curvature: ") + e.what();
      break;
    }
    if (inner.iterations == 0) {
      result.stop_reason = "zero_gradient";
      break;
    }
    x += inner.increment;

    if (outer == options.outer_loops - 1) {
      const CostBreakdown cf = cost(x, problem);
      result.log.records.push_back({options.outer_loops, 0, cf.J, cf.Jo, cf.Jb, 0.0, 0.0});
      consider(x, cf);
    }
  }

  const Model model(problem.grid, problem.cfg);
  result.initial_state = effective_initial_state(model, problem, result.analysis);
  return result;
}

}  // namespace pedavar
