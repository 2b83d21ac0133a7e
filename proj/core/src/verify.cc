/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "pedavar/verify.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <string>

#include "pedavar/error.h"

namespace pedavar {

namespace {

int steps_for(double T, double dt) {
  if (!(T >= 0.0)) throw Error("verify: T must be >= 0");
  const double n = T / dt;
  const long r = std::lround(n);
  if (std::abs(n - r) > 1e-9 * std::max(1.0, n)) {
    throw Error("verify: T must be an integer multiple of dt");
  }
  return static_cast<int>(r);
}

std::ofstream open_csv(const std::filesystem::path & path) {
  std::ofstream out(path);
  if (!out) throw Error("verify: cannot open " + path.string() + " for writing");
  return out;
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

// -----------------------------------------------------------------------------
WBoundReport check_w_bound(const StateField & x) {
  const Grid & g = x.grid();
  const Field3 w = diagnose_w(x.u, x.v);
  const Field3 ux = horizontal_derivative(x.u, Axis::kX);
  const Field3 vy = horizontal_derivative(x.v, Axis::kY);
  WBoundReport r;
  r.lhs = inner(w, w);
  r.rhs = g.depth() * g.depth() * (inner(ux, ux) + inner(vy, vy));
  r.pass = r.lhs <= 1.05 * r.rhs;
  return r;
}

// -----------------------------------------------------------------------------
EnergyConstants EnergyConstants::compute(double a, const PhysParams & ph, double K) {
  const double a2 = a * a;
  const double nu = ph.nu;
  const double q = 1.0 + 2.0 * ph.alpha * ph.alpha / nu;
  const double third = std::max(1.0, a2 * std::abs(K * ph.gamma - ph.beta)) +
                       (2.0 * ph.gamma * a2 / nu) * (K * ph.gamma + ph.beta);
  EnergyConstants c;
  c.C1 = 2.0 * std::max({q, (1.0 + std::abs(ph.gamma - ph.beta / K)) / q, third});
  c.C2 = 2.0 + 4.0 / (K * nu);
  c.C3 = 4.0 + 4.0 * a2 / nu;
  c.C4 = 2.0 + 8.0 / nu;
  return c;
}

double EnergyReport::min_margin() const {
  double m = std::numeric_limits<double>::infinity();
  for (double v : margin) m = std::min(m, v);
  return m;
}

EnergyReport check_energy_inequality(const StateField & x0, const StateField & f, const ModelConfig & cfg,
                                     double T, const NormParams & norm) {
  norm.validate();
  const Grid & g = x0.grid();
  const PhysParams & ph = cfg.phys;
  const double kmin = NormParams::minimal_K(g.depth(), ph.nu, ph.gamma, ph.beta);
  if (norm.K < kmin) {
    throw Error("energy: K = " + fmt(norm.K) + " is below the required minimum " + fmt(kmin));
  }
  ModelConfig mcfg = cfg;
  mcfg.linear = true;
  mcfg.forcing = Forcing::linear_rhs(f);
  const Model model(g, mcfg);
  const int nsteps = steps_for(T, mcfg.dt);

  EnergyReport r;
  r.constants = EnergyConstants::compute(g.depth(), ph, norm.K);
  const EnergyConstants & c = r.constants;
  const double forcing_integral = T * state_norm2m_squared(f, norm);
  const double base = c.C2 * state_norm2m_squared(x0, norm) + c.C3 * state_grad_norm2m_squared(x0, norm) +
                      c.C4 * forcing_integral;

  StateField x = x0;
  double dissipation = 0.0;   // int_0^t ||dX/dt||^2_{2,m}
  for (int n = 0;; ++n) {
    const double t = n * mcfg.dt;
    const double lhs = state_norm2m_squared(x, norm) + state_grad_norm2m_squared(x, norm) + dissipation / ph.nu;
    const double rhs = std::exp(c.C1 * t) * base;
    r.time.push_back(t);
    r.lhs.push_back(lhs);
    r.rhs.push_back(rhs);
    r.margin.push_back(rhs - lhs);
    if (!(std::isfinite(rhs) && std::isfinite(lhs) && rhs >= lhs)) r.pass = false;
    if (n == nsteps) break;
    StepStages s = model.step_stages(x);
    StateField dxdt = s.tendency0;
    dxdt += s.tendency1;
    dxdt *= 0.5;
    dissipation += mcfg.dt * state_norm2m_squared(dxdt, norm);
    x = std::move(s.next);
  }
  return r;
}

// -----------------------------------------------------------------------------
StateField nonlinear_term(const StateField & x1, const StateField & x2) {
  if (x1.grid() != x2.grid()) {
    throw Error("nonlinear_term: grid mismatch " + x1.grid().shape() + " vs " + x2.grid().shape());
  }
  const Field3 w1 = diagnose_w(x1.u, x1.v);
  StateField out(x1.grid());
  auto advect = [&](const Field3 & phi, Field3 & res) {
    const Field3 px = horizontal_derivative(phi, Axis::kX);
    const Field3 py = horizontal_derivative(phi, Axis::kY);
    const Field3 pz = vertical_derivative(phi);
    for (std::size_t n = 0; n < phi.size(); ++n) {
      res[n] = x1.u[n] * px[n] + x1.v[n] * py[n] + w1[n] * pz[n];
    }
  };
  advect(x2.u, out.u);
  advect(x2.v, out.v);
  advect(x2.theta, out.theta);
  return out;
}

NonlinearBoundReport check_nonlinear_bound(const StateField & x1, const StateField & x2, int m) {
  const NormParams p{m, 1.0};
  p.validate();
  const double a2 = x1.grid().depth() * x1.grid().depth();
  const double n1 = std::sqrt(state_norm2m_squared(x1, p));
  const double g1 = std::sqrt(state_grad_norm2m_squared(x1, p));
  const double g2sq = state_grad_norm2m_squared(x2, p);
  const double den = (n1 + a2 * g1) * g1 * g2sq;
  NonlinearBoundReport r;
  if (!(den > 0.0)) {
    r.degenerate = true;
    return r;
  }
  const StateField f = nonlinear_term(x1, x2);
  r.ratio[0] = norm2m_squared(f.u, m) / den;
  r.ratio[1] = norm2m_squared(f.v, m) / den;
  r.ratio[2] = norm2m_squared(f.theta, m) / den;
  r.max_ratio = std::max({r.ratio[0], r.ratio[1], r.ratio[2]});
  return r;
}

// -----------------------------------------------------------------------------
double picard_norm(const Trajectory & x, double dt, const NormParams & norm) {
  double sup = 0.0;
  double integral = 0.0;
  for (std::size_t n = 0; n < x.size(); ++n) {
    if (n > 0) {
      StateField d = x[n] - x[n - 1];
      d *= 1.0 / dt;
      integral += dt * state_norm2m_squared(d, norm);
    }
    const double u = norm_U(x[n], norm);
    sup = std::max(sup, u * u + integral);
  }
  return sup;
}

PicardRun picard_integrate(const StateField & x0, const ModelConfig & cfg, double T, int max_n, double tol,
                           const NormParams & norm) {
  norm.validate();
  if (max_n < 1) throw Error("picard: max_n must be >= 1");
  if (!(tol > 0.0)) throw Error("picard: tol must be > 0");
  if (cfg.linear) throw Error("picard: cfg must describe the nonlinear model");
  ModelConfig lcfg = cfg;
  lcfg.linear = true;
  const Model model(x0.grid(), lcfg);
  const int nsteps = steps_for(T, lcfg.dt);

  // X^0 is the initial state held constant in time.
  Trajectory prev(nsteps + 1, x0);
  const double scale = picard_norm(prev, lcfg.dt, norm);

  PicardRun run;
  int increases = 0;
  for (int it = 1; it <= max_n; ++it) {
    std::vector<StateField> forcing;
    forcing.reserve(prev.size());
    for (const StateField & s : prev) {
      StateField f = nonlinear_term(s, s);
      f *= -1.0;
      forcing.push_back(std::move(f));
    }
    Trajectory next;
    next.reserve(prev.size());
    next.push_back(x0);
    try {
      for (int n = 0; n < nsteps; ++n) {
        next.push_back(model.step_stages(next.back(), &forcing[n], &forcing[n + 1]).next);
        if (!next.back().all_finite()) throw NanError("non-finite iterate at step " + std::to_string(n + 1));
      }
    } catch (const Error & e) {
      // A blown-up iterate is the iteration diverging, not a property of X0.
      if (it == 1) throw;
      throw Error("picard: iterate " + std::to_string(it) + " diverged (" + e.what() + "); t* too large (T = " +
                  fmt(T) + ")");
    }
    Trajectory diff;
    diff.reserve(next.size());
    for (std::size_t n = 0; n < next.size(); ++n) diff.push_back(next[n] - prev[n]);
    const double res = picard_norm(diff, lcfg.dt, norm);
    if (!run.residuals.empty()) {
      if (res >= run.residuals.back()) {
        run.monotone = false;
        ++increases;
      } else {
        increases = 0;
      }
    }
    run.residuals.push_back(res);
    run.iterations = it;
    prev = std::move(next);
    if (increases >= 3) {
      throw Error("picard: residual increased three times in a row; t* too large (T = " + fmt(T) + ")");
    }
    if (res == 0.0 || res <= tol * scale) {
      run.converged = true;
      break;
    }
  }
  run.limit = std::move(prev);
  return run;
}

// -----------------------------------------------------------------------------
void write_wbound_csv(const std::filesystem::path & path, const std::vector<WBoundReport> & reports) {
  std::ofstream out = open_csv(path);
  out << "index,lhs,rhs,margin,pass\n";
  for (std::size_t n = 0; n < reports.size(); ++n) {
    const WBoundReport & r = reports[n];
    out << n << ',' << fmt(r.lhs) << ',' << fmt(r.rhs) << ',' << fmt(1.05 * r.rhs - r.lhs) << ','
        << (r.pass ? 1 : 0) << '\n';
  }
}

void write_energy_report_csv(const std::filesystem::path & path, const EnergyReport & report) {
  std::ofstream out = open_csv(path);
  out << "time,lhs,rhs,margin\n";
  for (std::size_t n = 0; n < report.time.size(); ++n) {
    out << fmt(report.time[n]) << ',' << fmt(report.lhs[n]) << ',' << fmt(report.rhs[n]) << ','
        << fmt(report.margin[n]) << '\n';
  }
}

void write_nlbound_csv(const std::filesystem::path & path, const std::vector<NonlinearBoundReport> & reports) {
  std::ofstream out = open_csv(path);
  out << "index,ratio_u,ratio_v,ratio_theta,max_ratio,degenerate\n";
  for (std::size_t n = 0; n < reports.size(); ++n) {
    const NonlinearBoundReport & r = reports[n];
    out << n << ',' << fmt(r.ratio[0]) << ',' << fmt(r.ratio[1]) << ',' << fmt(r.ratio[2]) << ','
        << fmt(r.max_ratio) << ',' << (r.degenerate ? 1 : 0) << '\n';
  }
}

void write_picard_csv(const std::filesystem::path & path, const PicardRun & run) {
  std::ofstream out = open_csv(path);
  out << "iteration,residual\n";
  for (std::size_t n = 0; n < run.residuals.size(); ++n) out << n + 1 << ',' << fmt(run.residuals[n]) << '\n';
}

}  // namespace pedavar
