/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "pedavar/tlm_adjoint.h"

#include <cmath>
#include <string>

#include "pedavar/error.h"

namespace pedavar {

// -----------------------------------------------------------------------------
Checkpoints make_checkpoints(const Model & model, const StateField & x0, const FloatSet & fs0, int nsteps) {
  if (nsteps < 0) throw Error("checkpoints: negative step count");
  Checkpoints ck;
  ck.states = model.trajectory(x0, nsteps);
  ck.z0 = fs0.z0;
  ck.floats = float_trajectory(ck.states, fs0, model.config().dt);
  return ck;
}

double inner(const StateAndFloats & a, const StateAndFloats & b) {
  if (a.xi.size() != b.xi.size()) throw Error("inner: float counts differ");
  double s = inner(a.x, b.x);
  for (std::size_t n = 0; n < a.xi.size(); ++n) s += a.xi[n].x * b.xi[n].x + a.xi[n].y * b.xi[n].y;
  return s;
}

// -----------------------------------------------------------------------------
namespace {

Field3 ddx(const Field3 & f) {return horizontal_derivative(f, Axis::kX);}
Field3 ddy(const Field3 & f) {return horizontal_derivative(f, Axis::kY);}
Field3 ddx_adj(const Field3 & f) {return horizontal_derivative_adjoint(f, Axis::kX);}
Field3 ddy_adj(const Field3 & f) {return horizontal_derivative_adjoint(f, Axis::kY);}

// Spatial derivatives of the linearization state needed by the advection terms.
struct Background {
  Field3 ux, uy, uz, vx, vy, vz, tx, ty, tz, w;

  Background(const Model & model, const StateField & x)
    : ux(ddx(x.u)), uy(ddy(x.u)), uz(model.ddz().apply(x.u)),
      vx(ddx(x.v)), vy(ddy(x.v)), vz(model.ddz().apply(x.v)),
      tx(ddx(x.theta)), ty(ddy(x.theta)), tz(model.ddz().apply(x.theta)),
      w(model.cumint().apply(ux + vy)) {
    w *= -1.0;
  }
};

}  // namespace

StateField LinearizedStep::tendency_tl(const StateField & x, const StateField & dx) const {
  const PhysParams & ph = model_.config().phys;
  const Grid & grid = model_.grid();
  const Field3 dux = ddx(dx.u);
  const Field3 dvy = ddy(dx.v);
  const Field3 dtx = ddx(dx.theta);
  const Field3 dty = ddy(dx.theta);
  Field3 dw = model_.cumint().apply(dux + dvy);
  dw *= -1.0;

  StateField g(grid);
  g.u = laplacian(dx.u);
  g.u *= ph.nu;
  g.u.axpy(ph.alpha, dx.v);
  g.u.axpy(-ph.beta, model_.cumint().apply(dtx));
  g.v = laplacian(dx.v);
  g.v *= ph.nu;
  g.v.axpy(-ph.alpha, dx.u);
  g.v.axpy(-ph.beta, model_.cumint().apply(dty));
  g.theta = laplacian(dx.theta);
  g.theta *= ph.nu;
  g.theta.axpy(-ph.gamma, dw);

  if (!model_.config().linear) {
    const Background b(model_, x);
    const Field3 duy = ddy(dx.u);
    const Field3 dvx = ddx(dx.v);
    const Field3 duz = model_.ddz().apply(dx.u);
    const Field3 dvz = model_.ddz().apply(dx.v);
    const Field3 dtz = model_.ddz().apply(dx.theta);
    const Field3 & u = x.u;
    const Field3 & v = x.v;
    const Field3 & du = dx.u;
    const Field3 & dv = dx.v;
    for (std::size_t n = 0; n < u.size(); ++n) {
      g.u[n] -= du[n] * b.ux[n] + u[n] * dux[n] + dv[n] * b.uy[n] + v[n] * duy[n] +
                dw[n] * b.uz[n] + b.w[n] * duz[n];
      g.v[n] -= du[n] * b.vx[n] + u[n] * dvx[n] + dv[n] * b.vy[n] + v[n] * dvy[n] +
                dw[n] * b.vz[n] + b.w[n] * dvz[n];
      g.theta[n] -= du[n] * b.tx[n] + u[n] * dtx[n] + dv[n] * b.ty[n] + v[n] * dty[n] +
                    dw[n] * b.tz[n] + b.w[n] * dtz[n];
    }
  }

  g.theta.zero_boundaries();
  model_.projector().apply(g.u, g.v);
  return g;
}

StateField LinearizedStep::tendency_ad(const StateField & x, const StateField & ax) const {
  const PhysParams & ph = model_.config().phys;
  const Grid & grid = model_.grid();
  Field3 au = ax.u;
  Field3 av = ax.v;
  Field3 at = ax.theta;
  model_.projector().apply(au, av);
  at.zero_boundaries();

  StateField l(grid);
  l.u = laplacian_adjoint(au);
  l.u *= ph.nu;
  l.u.axpy(-ph.alpha, av);
  l.v = laplacian_adjoint(av);
  l.v *= ph.nu;
  l.v.axpy(ph.alpha, au);
  l.theta = laplacian_adjoint(at);
  l.theta *= ph.nu;

  // Arguments of the horizontal and vertical derivative adjoints.
  Field3 xu(grid), yu(grid), xv(grid), yv(grid), xt(grid), yt(grid);
  xt.axpy(-ph.beta, model_.cumint_adj().apply(au));
  yt.axpy(-ph.beta, model_.cumint_adj().apply(av));
  Field3 lw(grid);
  lw.axpy(-ph.gamma, at);

  if (!model_.config().linear) {
    const Background b(model_, x);
    const Field3 & u = x.u;
    const Field3 & v = x.v;
    Field3 zu(grid), zv(grid), zt(grid);
    for (std::size_t n = 0; n < u.size(); ++n) {
      l.u[n] -= b.ux[n] * au[n] + b.vx[n] * av[n] + b.tx[n] * at[n];
      l.v[n] -= b.uy[n] * au[n] + b.vy[n] * av[n] + b.ty[n] * at[n];
      lw[n] -= b.uz[n] * au[n] + b.vz[n] * av[n] + b.tz[n] * at[n];
      xu[n] -= u[n] * au[n];
      yu[n] -= v[n] * au[n];
      zu[n] -= b.w[n] * au[n];
      xv[n] -= u[n] * av[n];
      yv[n] -= v[n] * av[n];
      zv[n] -= b.w[n] * av[n];
      xt[n] -= u[n] * at[n];
      yt[n] -= v[n] * at[n];
      zt[n] -= b.w[n] * at[n];
    }
    l.u += model_.ddz_adj().apply(zu);
    l.v += model_.ddz_adj().apply(zv);
    l.theta += model_.ddz_adj().apply(zt);
  }

  // w = -Cz (Dx u + Dy v)
  Field3 c = model_.cumint_adj().apply(lw);
  xu.axpy(-1.0, c);
  yv.axpy(-1.0, c);

  l.u += ddx_adj(xu);
  l.u += ddy_adj(yu);
  l.v += ddx_adj(xv);
  l.v += ddy_adj(yv);
  l.theta += ddx_adj(xt);
  l.theta += ddy_adj(yt);
  return l;
}

StateField LinearizedStep::step_tl(const StateField & x, const StateField & stage, const StateField & dx) const {
  const double dt = model_.config().dt;
  StateField d = dx;
  d.zero_boundaries();
  const StateField g0 = tendency_tl(x, d);
  StateField ds = d;
  ds.axpy(dt, g0);
  const StateField g1 = tendency_tl(stage, ds);
  d.axpy(0.5 * dt, g0);
  d.axpy(0.5 * dt, g1);
  return d;
}

StateField LinearizedStep::step_ad(const StateField & x, const StateField & stage, const StateField & lx) const {
  const double dt = model_.config().dt;
  StateField a1 = lx;
  a1 *= 0.5 * dt;
  const StateField ls = tendency_ad(stage, a1);
  StateField a0 = a1;
  a0.axpy(dt, ls);
  StateField out = lx;
  out += ls;
  out += tendency_ad(x, a0);
  out.zero_boundaries();
  return out;
}

// -----------------------------------------------------------------------------
LinearizedModel::LinearizedModel(const Model & model, const Checkpoints & ckpt)
  : model_(model), ckpt_(ckpt), step_(model) {
  if (ckpt.states.empty()) throw Error("linearization: empty checkpoint set");
  if (ckpt.floats.size() != ckpt.states.size()) {
    throw Error("linearization: float checkpoints do not match state checkpoints");
  }
  if (ckpt.states.front().grid() != model.grid()) {
    throw Error("linearization: checkpoint grid " + ckpt.states.front().grid().shape() +
                " != model grid " + model.grid().shape());
  }
  const double dt = model.config().dt;
  stages_.reserve(ckpt.states.size() - 1);
  for (int n = 0; n < ckpt.nsteps(); ++n) {
    StateField s = ckpt.states[n];
    s.axpy(dt, model.tendency(ckpt.states[n]));
    stages_.push_back(std::move(s));
  }
}

void LinearizedModel::check(int n, std::size_t nfloats) const {
  if (n < 0 || n >= ckpt_.nsteps()) {
    throw Error("linearization: step " + std::to_string(n) + " outside checkpointed window of " +
                std::to_string(ckpt_.nsteps()) + " steps");
  }
  if (nfloats != ckpt_.nfloats()) {
    throw Error("linearization: " + std::to_string(nfloats) + " float perturbations for " +
                std::to_string(ckpt_.nfloats()) + " checkpointed floats");
  }
}

namespace {

// Row-wise Jacobian of the interpolated velocity with respect to position.
struct VelocityJacobian {
  Vec2 du, dv;
  Vec2 apply(Vec2 d) const {return {du.x * d.x + du.y * d.y, dv.x * d.x + dv.y * d.y};}
  Vec2 apply_transpose(Vec2 l) const {return {du.x * l.x + dv.x * l.y, du.y * l.x + dv.y * l.y};}
};

VelocityJacobian jacobian(const InterpStencil & st, const StateField & x) {
  return {st.gradient(x.u), st.gradient(x.v)};
}

}  // namespace

TangentState LinearizedModel::tlm_step(int n, const TangentState & d) const {
  check(n, d.xi.size());
  const StateField & x = ckpt_.states[n];
  const StateField & xp = ckpt_.states[n + 1];
  const double dt = model_.config().dt;
  const double z0 = ckpt_.z0;

  StateField dx = d.x;
  dx.zero_boundaries();
  TangentState out(step_.step_tl(x, stages_[n], dx), d.xi);

  for (std::size_t j = 0; j < d.xi.size(); ++j) {
    const Vec2 p = ckpt_.floats[n][j];
    const InterpStencil st1(model_.grid(), p, z0);
    const Vec2 k1{st1.value(x.u), st1.value(x.v)};
    const Vec2 mid{p.x + dt * k1.x, p.y + dt * k1.y};
    const InterpStencil st2(model_.grid(), mid, z0);

    const Vec2 dxi = d.xi[j];
    const Vec2 a1 = jacobian(st1, x).apply(dxi);
    const Vec2 dk1{a1.x + st1.value(dx.u), a1.y + st1.value(dx.v)};
    const Vec2 dmid{dxi.x + dt * dk1.x, dxi.y + dt * dk1.y};
    const Vec2 a2 = jacobian(st2, xp).apply(dmid);
    const Vec2 dk2{a2.x + st2.value(out.x.u), a2.y + st2.value(out.x.v)};
    out.xi[j] = {dxi.x + 0.5 * dt * (dk1.x + dk2.x), dxi.y + 0.5 * dt * (dk1.y + dk2.y)};
  }
  return out;
}

AdjointState LinearizedModel::adj_step(int n, const AdjointState & l) const {
  check(n, l.xi.size());
  const StateField & x = ckpt_.states[n];
  const StateField & xp = ckpt_.states[n + 1];
  const double dt = model_.config().dt;
  const double z0 = ckpt_.z0;

  StateField lxp = l.x;
  Field3 direct_u(model_.grid());
  Field3 direct_v(model_.grid());
  std::vector<Vec2> lxi(l.xi.size());

  // Floats in index order, which is id order: the scatter is deterministic.
  for (std::size_t j = 0; j < l.xi.size(); ++j) {
    const Vec2 p = ckpt_.floats[n][j];
    const InterpStencil st1(model_.grid(), p, z0);
    const Vec2 k1{st1.value(x.u), st1.value(x.v)};
    const Vec2 mid{p.x + dt * k1.x, p.y + dt * k1.y};
    const InterpStencil st2(model_.grid(), mid, z0);

    const Vec2 lout = l.xi[j];
    Vec2 lk1{0.5 * dt * lout.x, 0.5 * dt * lout.y};
    const Vec2 lk2 = lk1;
    Vec2 lp = lout;

    st2.scatter(lxp.u, lk2.x);
    st2.scatter(lxp.v, lk2.y);
    const Vec2 lmid = jacobian(st2, xp).apply_transpose(lk2);
    lp.x += lmid.x;
    lp.y += lmid.y;
    lk1.x += dt * lmid.x;
    lk1.y += dt * lmid.y;

    st1.scatter(direct_u, lk1.x);
    st1.scatter(direct_v, lk1.y);
    const Vec2 l1 = jacobian(st1, x).apply_transpose(lk1);
    lp.x += l1.x;
    lp.y += l1.y;
    lxi[j] = lp;
  }

  AdjointState out(step_.step_ad(x, stages_[n], lxp), std::move(lxi));
  out.x.u += direct_u;
  out.x.v += direct_v;
  out.x.zero_boundaries();
  return out;
}

TangentState LinearizedModel::tlm(const TangentState & d0, const TangentObserver & observer) const {
  TangentState d = d0;
  d.x.zero_boundaries();
  if (d.xi.size() != ckpt_.nfloats()) check(0, d.xi.size());
  if (observer) observer(0, d);
  for (int n = 0; n < ckpt_.nsteps(); ++n) {
    d = tlm_step(n, d);
    if (observer) observer(n + 1, d);
  }
  return d;
}

AdjointState LinearizedModel::adj(const AdjointState & lN, const AdjointInjector & inject) const {
  AdjointState l = lN;
  if (l.xi.size() != ckpt_.nfloats()) check(0, l.xi.size());
  const int nsteps = ckpt_.nsteps();
  if (inject) inject(nsteps, l);
  for (int n = nsteps - 1; n >= 0; --n) {
    l = adj_step(n, l);
    if (inject) inject(n, l);
  }
  l.x.zero_boundaries();
  return l;
}

// -----------------------------------------------------------------------------
double observation_cost(const ObsIndex & index, const std::vector<std::vector<Vec2>> & float_path) {
  double jo = 0.0;
  for (std::size_t n = 0; n < float_path.size(); ++n) {
    for (const ObsIndex::Entry & e : index.at(static_cast<int>(n))) {
      const Vec2 p = float_path[n][e.float_index];
      const double rx = periodic_residual(p.x, e.position.x);
      const double ry = periodic_residual(p.y, e.position.y);
      jo += 0.5 * (rx * rx + ry * ry);
    }
  }
  return jo;
}

ForwardRun run_forward(const Model & model, const AssimProblem & problem, const StateField & x0) {
  const StateField start = effective_initial_state(model, problem, x0);
  ForwardRun run{make_checkpoints(model, start, problem.floats, problem.nsteps), {}};
  const ObsIndex index(problem);
  run.cost.Jo = observation_cost(index, run.ckpt.floats);
  run.cost.Jb = background_cost(problem, x0);
  run.cost.J = run.cost.Jo + problem.omega * run.cost.Jb;
  return run;
}

CostAndGradient grad_cost(const StateField & x0, const AssimProblem & problem) {
  problem.validate();
  const Model model(problem.grid, problem.cfg);
  ForwardRun fwd = run_forward(model, problem, x0);
  const ObsIndex index(problem);
  const LinearizedModel lin(model, fwd.ckpt);

  AdjointState lN(problem.grid, fwd.ckpt.nfloats());
  const AdjointState l0 = lin.adj(lN, [&](int n, AdjointState & l) {
    for (const ObsIndex::Entry & e : index.at(n)) {
      const Vec2 p = fwd.ckpt.floats[n][e.float_index];
      l.xi[e.float_index].x += periodic_residual(p.x, e.position.x);
      l.xi[e.float_index].y += periodic_residual(p.y, e.position.y);
    }
  });

  StateField g = model.constrain(l0.x);
  g.axpy(problem.omega, background_gradient(problem, x0));
  apply_control_mask(problem, g);
  fwd.cost.gnorm = norm(g);
  return {fwd.cost, std::move(g)};
}

}  // namespace pedavar
