/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "pedavar/floats.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <string>

#include "pedavar/error.h"

namespace pedavar {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

// -----------------------------------------------------------------------------
double wrap_coordinate(double c) {
  double r = c - kTwoPi * std::floor(c / kTwoPi);
  if (r >= kTwoPi || r < 0.0) r = 0.0;
  return r;
}

Vec2 wrap(Vec2 p) {return {wrap_coordinate(p.x), wrap_coordinate(p.y)};}

double periodic_residual(double a, double b) {
  double r = std::remainder(a - b, kTwoPi);   // in [-pi, pi]
  if (r <= -std::numbers::pi) r += kTwoPi;
  return r;
}

// -----------------------------------------------------------------------------
void FloatSet::validate(const Grid & grid) const {
  if (ids.size() != positions.size()) throw Error("floats: ids and positions differ in length");
  if (!(z0 > 0.0 && z0 < grid.depth())) throw Error("floats: z0 must lie strictly inside (0, a)");
  for (std::size_t n = 0; n < positions.size(); ++n) {
    const Vec2 & p = positions[n];
    if (!(p.x >= 0.0 && p.x < kTwoPi && p.y >= 0.0 && p.y < kTwoPi)) {
      throw Error("floats: position of float " + std::to_string(ids[n]) + " not wrapped");
    }
    if (n > 0 && ids[n] <= ids[n - 1]) throw Error("floats: ids must be strictly increasing");
  }
}

int FloatSet::index_of(int id) const {
  auto it = std::lower_bound(ids.begin(), ids.end(), id);
  if (it == ids.end() || *it != id) return -1;
  return static_cast<int>(it - ids.begin());
}

void ObsSet::validate(int nsteps, const FloatSet & floats) const {
  for (const ObsRecord & r : records) {
    if (r.time_index < 0 || r.time_index > nsteps) {
      throw Error("obs: time index " + std::to_string(r.time_index) + " outside window [0, " +
                  std::to_string(nsteps) + "]");
    }
    if (!(r.x >= 0.0 && r.x < kTwoPi && r.y >= 0.0 && r.y < kTwoPi)) {
      throw Error("obs: position not wrapped for float " + std::to_string(r.float_id));
    }
    if (!(r.noise_sd >= 0.0)) throw Error("obs: negative noise_sd");
    if (floats.index_of(r.float_id) < 0) {
      throw Error("obs: unknown float id " + std::to_string(r.float_id));
    }
  }
}

std::vector<int> ObsSet::times() const {
  std::set<int> t;
  for (const ObsRecord & r : records) t.insert(r.time_index);
  return {t.begin(), t.end()};
}

void write_obs_csv(const std::filesystem::path & path, const ObsSet & obs) {
  std::ofstream out(path);
  if (!out) throw Error("obs: cannot open " + path.string() + " for writing");
  out << "float_id,time_index,x,y,noise_sd\n";
  char line[160];
  for (const ObsRecord & r : obs.records) {
    std::snprintf(line, sizeof(line), "%d,%d,%.17g,%.17g,%.17g\n", r.float_id, r.time_index, r.x, r.y,
                  r.noise_sd);
    out << line;
  }
  if (!out) throw Error("obs: write failed for " + path.string());
}

ObsSet read_obs_csv(const std::filesystem::path & path) {
  std::ifstream in(path);
  if (!in) throw Error("obs: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error("obs: " + path.string() + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "float_id,time_index,x,y,noise_sd") {
    throw Error("obs: " + path.string() + ": unexpected header '" + line + "'");
  }
  ObsSet obs;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    ObsRecord r;
    char tail = 0;
    const int n = std::sscanf(line.c_str(), "%d,%d,%lf,%lf,%lf%c", &r.float_id, &r.time_index, &r.x, &r.y,
                              &r.noise_sd, &tail);
    if (n != 5) throw Error("obs: " + path.string() + ":" + std::to_string(lineno) + ": malformed record");
    obs.records.push_back(r);
  }
  return obs;
}

void write_floats_csv(const std::filesystem::path & path, const FloatSet & floats) {
  std::ofstream out(path);
  if (!out) throw Error("floats: cannot open " + path.string() + " for writing");
  out << "float_id,x,y,z0\n";
  char buf[128];
  for (std::size_t j = 0; j < floats.size(); ++j) {
    std::snprintf(buf, sizeof(buf), "%d,%.17g,%.17g,%.17g\n", floats.ids[j], floats.positions[j].x,
                  floats.positions[j].y, floats.z0);
    out << buf;
  }
  if (!out) throw Error("floats: write failed for " + path.string());
}

FloatSet read_floats_csv(const std::filesystem::path & path) {
  std::ifstream in(path);
  if (!in) throw Error("floats: cannot open " + path.string());
  std::string line;
  if (!std::getline(in, line)) throw Error("floats: " + path.string() + " is empty");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "float_id,x,y,z0") {
    throw Error("floats: " + path.string() + ": unexpected header '" + line + "'");
  }
  FloatSet fs;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    int id = 0;
    double x = 0.0, y = 0.0, z0 = 0.0;
    char tail = 0;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf%c", &id, &x, &y, &z0, &tail) != 4) {
      throw Error("floats: " + path.string() + ":" + std::to_string(lineno) + ": malformed record");
    }
    if (!fs.ids.empty() && z0 != fs.z0) {
      throw Error("floats: " + path.string() + ":" + std::to_string(lineno) + ": all floats must share z0");
    }
    fs.ids.push_back(id);
    fs.positions.push_back({x, y});
    fs.z0 = z0;
  }
  return fs;
}

// -----------------------------------------------------------------------------
InterpStencil::InterpStencil(const Grid & grid, Vec2 pos, double z0) : grid_(&grid) {
  const Vec2 p = wrap(pos);
  const double fx = p.x / grid.dx();
  const double fy = p.y / grid.dy();
  i0_ = std::min(static_cast<int>(std::floor(fx)), grid.nx() - 1);
  j0_ = std::min(static_cast<int>(std::floor(fy)), grid.ny() - 1);
  tx_ = fx - i0_;
  ty_ = fy - j0_;
  i1_ = (i0_ + 1) % grid.nx();
  j1_ = (j0_ + 1) % grid.ny();
  const double fz = std::clamp(z0, 0.0, grid.depth()) / grid.dz();
  k0_ = std::min(static_cast<int>(std::floor(fz)), grid.nz() - 2);
  k1_ = k0_ + 1;
  tz_ = fz - k0_;
}

double InterpStencil::value(const Field3 & f) const {
  auto plane = [&](int k) {
    return (1 - ty_) * ((1 - tx_) * f(i0_, j0_, k) + tx_ * f(i1_, j0_, k)) +
           ty_ * ((1 - tx_) * f(i0_, j1_, k) + tx_ * f(i1_, j1_, k));
  };
  return (1 - tz_) * plane(k0_) + tz_ * plane(k1_);
}

Vec2 InterpStencil::gradient(const Field3 & f) const {
  Vec2 g;
  for (int s = 0; s < 2; ++s) {
    const int k = s == 0 ? k0_ : k1_;
    const double wz = s == 0 ? 1 - tz_ : tz_;
    g.x += wz * ((1 - ty_) * (f(i1_, j0_, k) - f(i0_, j0_, k)) + ty_ * (f(i1_, j1_, k) - f(i0_, j1_, k)));
    g.y += wz * ((1 - tx_) * (f(i0_, j1_, k) - f(i0_, j0_, k)) + tx_ * (f(i1_, j1_, k) - f(i1_, j0_, k)));
  }
  g.x /= grid_->dx();
  g.y /= grid_->dy();
  return g;
}

void InterpStencil::scatter(Field3 & f, double weight) const {
  const double area = grid_->cell_area();
  for (int s = 0; s < 2; ++s) {
    const int k = s == 0 ? k0_ : k1_;
    const double c = weight * (s == 0 ? 1 - tz_ : tz_) / (grid_->vertical_weight(k) * area);
    f(i0_, j0_, k) += c * (1 - tx_) * (1 - ty_);
    f(i1_, j0_, k) += c * tx_ * (1 - ty_);
    f(i0_, j1_, k) += c * (1 - tx_) * ty_;
    f(i1_, j1_, k) += c * tx_ * ty_;
  }
}

void InterpStencil::scatter_gradient(Field3 & f, Vec2 dir, double weight) const {
  const double area = grid_->cell_area();
  const double ax = weight * dir.x / grid_->dx();
  const double ay = weight * dir.y / grid_->dy();
  for (int s = 0; s < 2; ++s) {
    const int k = s == 0 ? k0_ : k1_;
    const double c = (s == 0 ? 1 - tz_ : tz_) / (grid_->vertical_weight(k) * area);
    f(i0_, j0_, k) += c * (-ax * (1 - ty_) - ay * (1 - tx_));
    f(i1_, j0_, k) += c * (ax * (1 - ty_) - ay * tx_);
    f(i0_, j1_, k) += c * (-ax * ty_ + ay * (1 - tx_));
    f(i1_, j1_, k) += c * (ax * ty_ + ay * tx_);
  }
}

Vec2 interp_uv(const Field3 & u, const Field3 & v, Vec2 pos, double z0) {
  const InterpStencil st(u.grid(), pos, z0);
  return {st.value(u), st.value(v)};
}

// -----------------------------------------------------------------------------
FloatSet advect_floats(const FloatSet & fs, const StateField & start, const StateField & end, double dt) {
  FloatSet out = fs;
  for (std::size_t n = 0; n < fs.size(); ++n) {
    const Vec2 p = fs.positions[n];
    const Vec2 k1 = interp_uv(start.u, start.v, p, fs.z0);
    const Vec2 mid{p.x + dt * k1.x, p.y + dt * k1.y};
    const Vec2 k2 = interp_uv(end.u, end.v, mid, fs.z0);
    out.positions[n] = wrap({p.x + 0.5 * dt * (k1.x + k2.x), p.y + 0.5 * dt * (k1.y + k2.y)});
  }
  return out;
}

std::vector<std::vector<Vec2>> float_trajectory(const Trajectory & traj, const FloatSet & fs0, double dt) {
  std::vector<std::vector<Vec2>> out;
  if (traj.empty()) return out;
  out.reserve(traj.size());
  FloatSet fs = fs0;
  out.push_back(fs.positions);
  for (std::size_t n = 1; n < traj.size(); ++n) {
    fs = advect_floats(fs, traj[n - 1], traj[n], dt);
    out.push_back(fs.positions);
  }
  return out;
}

std::vector<std::vector<Vec2>> observe(const Trajectory & traj, const FloatSet & fs0,
                                       const std::vector<int> & obs_times, double dt) {
  int last = 0;
  for (int t : obs_times) {
    if (t < 0 || t >= static_cast<int>(traj.size())) {
      throw Error("observe: obs time " + std::to_string(t) + " outside trajectory of " +
                  std::to_string(traj.empty() ? 0 : traj.size() - 1) + " steps");
    }
    last = std::max(last, t);
  }
  std::vector<std::vector<Vec2>> out;
  out.reserve(obs_times.size());
  std::vector<std::vector<Vec2>> path;
  path.reserve(last + 1);
  FloatSet fs = fs0;
  path.push_back(fs.positions);
  for (int n = 1; n <= last; ++n) {
    fs = advect_floats(fs, traj[n - 1], traj[n], dt);
    path.push_back(fs.positions);
  }
  for (int t : obs_times) out.push_back(path[t]);
  return out;
}

}  // namespace pedavar
