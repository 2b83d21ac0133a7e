/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "pedavar/twin.h"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <random>
#include <string>

#include "pedavar/error.h"
#include "pedavar/snapshot.h"

namespace pedavar {

ModelConfig TwinConfig::model_config() const {
  ModelConfig cfg;
  cfg.phys = phys;
  cfg.dt = dt;
  cfg.linear = false;
  cfg.forcing = Forcing::wind(grid(), tau0);
  return cfg;
}

void TwinConfig::validate() const {
  const Grid g = grid();
  model_config().validate();
  if (spinup_steps < 0) throw Error("twin: spinup_steps must be >= 0");
  if (window_steps < 1) throw Error("twin: window_steps must be >= 1");
  if (windows < 1) throw Error("twin: windows must be >= 1");
  if (floats < 1) throw Error("twin: floats (M) must be >= 1");
  if (obs_times < 1 || obs_times > window_steps) {
    throw Error("twin: obs_times (N) must lie in [1, window_steps]");
  }
  if (!(noise_sd >= 0.0)) throw Error("twin: noise_sd must be >= 0");
  if (!(z0 > 0.0 && z0 < depth)) throw Error("twin: z0 must lie strictly inside (0, depth)");
  if (!(background_scale >= 0.0 && background_scale <= 1.0)) {
    throw Error("twin: background_scale must lie in [0, 1]");
  }
  if (!(omega >= 0.0)) throw Error("twin: omega must be >= 0");
  B.validate(g);
  if (assim.outer_loops < 1 || assim.inner_iters < 1 || !(assim.tol > 0.0)) {
    throw Error("twin: outer_loops, inner_iters must be >= 1 and tol > 0");
  }
}

std::vector<int> obs_time_indices(int nsteps, int n) {
  std::vector<int> t;
  t.reserve(n);
  for (int i = 1; i <= n; ++i) t.push_back(static_cast<int>(std::lround(static_cast<double>(i) * nsteps / n)));
  return t;
}

// -----------------------------------------------------------------------------
Trajectory truth_run(const TwinConfig & cfg) {
  cfg.validate();
  const Model model(cfg.grid(), cfg.model_config());
  const StateField spun = model.integrate(StateField(cfg.grid()), cfg.spinup_steps);
  return model.trajectory(spun, cfg.windows * cfg.window_steps);
}

ObsSet synth_obs_from(const Trajectory & truth, const FloatSet & floats, const TwinConfig & cfg,
                      std::uint64_t seed) {
  const int nsteps = static_cast<int>(truth.size()) - 1;
  const std::vector<int> times = obs_time_indices(nsteps, cfg.obs_times);
  const auto positions = observe(truth, floats, times, cfg.dt);
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  ObsSet obs;
  obs.records.reserve(times.size() * floats.size());
  for (std::size_t t = 0; t < times.size(); ++t) {
    for (std::size_t j = 0; j < floats.size(); ++j) {
      const double ex = cfg.noise_sd * noise(rng);
      const double ey = cfg.noise_sd * noise(rng);
      const Vec2 p = wrap({positions[t][j].x + ex, positions[t][j].y + ey});
      obs.records.push_back({floats.ids[j], times[t], p.x, p.y, cfg.noise_sd});
    }
  }
  return obs;
}

SyntheticObs synth_obs(const Trajectory & truth, const TwinConfig & cfg, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> pos(0.0, 2.0 * std::numbers::pi);
  SyntheticObs out;
  out.floats.z0 = cfg.z0;
  for (int j = 0; j < cfg.floats; ++j) {
    const double x = pos(rng);
    const double y = pos(rng);
    out.floats.positions.push_back(wrap({x, y}));
    out.floats.ids.push_back(j);
  }
  out.obs = synth_obs_from(truth, out.floats, cfg, rng());
  return out;
}

StateField make_background(const StateField & truth0, double s_b) {
  if (!(s_b >= 0.0 && s_b <= 1.0)) throw Error("background: scale must lie in [0, 1]");
  StateField xb = truth0;
  xb.u *= s_b;
  xb.v *= s_b;
  return xb;
}

std::optional<double> relative_rms(const Field3 & run, const Field3 & truth) {
  const double den = inner(truth, truth);
  if (!(den > 0.0)) return std::nullopt;
  const Field3 d = run - truth;
  return std::sqrt(inner(d, d) / den);
}

ErrorSeries rms_error(const Trajectory & run, const Trajectory & truth) {
  if (run.size() != truth.size()) {
    throw Error("rms_error: run has " + std::to_string(run.size()) + " states, truth has " +
                std::to_string(truth.size()));
  }
  ErrorSeries e;
  for (std::size_t n = 0; n < run.size(); ++n) {
    if (run[n].grid() != truth[n].grid()) {
      throw Error("rms_error: grid mismatch " + run[n].grid().shape() + " vs " + truth[n].grid().shape());
    }
    e.u.push_back(relative_rms(run[n].u, truth[n].u));
    e.v.push_back(relative_rms(run[n].v, truth[n].v));
  }
  return e;
}

// -----------------------------------------------------------------------------
TwinResult run_twin(const TwinConfig & cfg) {
  cfg.validate();
  const Grid grid = cfg.grid();
  const ModelConfig mcfg = cfg.model_config();
  const Model model(grid, mcfg);
  const int W = cfg.window_steps;

  TwinResult res;
  res.truth = truth_run(cfg);
  res.background_run = model.trajectory(model.constrain(make_background(res.truth.front(), cfg.background_scale)),
                                        cfg.windows * W);

  StateField xb = make_background(res.truth.front(), cfg.background_scale);
  std::vector<Vec2> float_start;
  for (int w = 0; w < cfg.windows; ++w) {
    const Trajectory segment(res.truth.begin() + w * W, res.truth.begin() + (w + 1) * W + 1);
    FloatSet floats;
    ObsSet obs;
    if (w == 0) {
      SyntheticObs so = synth_obs(segment, cfg, cfg.seed);
      floats = std::move(so.floats);
      obs = std::move(so.obs);
      res.floats = floats;
    } else {
      floats = res.floats;
      floats.positions = float_start;
      obs = synth_obs_from(segment, floats, cfg, cfg.seed + static_cast<std::uint64_t>(w));
    }
    float_start = float_trajectory(segment, floats, cfg.dt).back();

    AssimProblem problem(grid, mcfg, W, xb);
    problem.B = cfg.B;
    problem.omega = cfg.omega;
    problem.freeze_theta = cfg.freeze_theta;
    problem.floats = floats;
    problem.obs = obs;
    res.windows.push_back(assimilate(problem, cfg.assim));

    const Trajectory an = model.trajectory(res.windows.back().initial_state, W);
    res.analysis_run.insert(res.analysis_run.end(), an.begin() + (w == 0 ? 0 : 1), an.end());
    xb = an.back();

    for (ObsRecord r : obs.records) {
      r.time_index += w * W;
      res.obs.records.push_back(r);
    }
  }
  res.background_error = rms_error(res.background_run, res.truth);
  res.analysis_error = rms_error(res.analysis_run, res.truth);
  return res;
}

// -----------------------------------------------------------------------------
namespace {

std::string format_optional(const std::optional<double> & v) {
  if (!v) return "";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", *v);
  return buf;
}

}  // namespace

void write_error_csv(const std::filesystem::path & path, double dt, const ErrorSeries & bg, const ErrorSeries & an) {
  if (bg.u.size() != an.u.size()) throw Error("errors: series lengths differ");
  std::ofstream out(path);
  if (!out) throw Error("errors: cannot open " + path.string() + " for writing");
  out << "time,E_u_bg,E_v_bg,E_u_an,E_v_an\n";
  char t[40];
  for (std::size_t n = 0; n < bg.u.size(); ++n) {
    std::snprintf(t, sizeof(t), "%.10g", n * dt);
    out << t << ',' << format_optional(bg.u[n]) << ',' << format_optional(bg.v[n]) << ','
        << format_optional(an.u[n]) << ',' << format_optional(an.v[n]) << '\n';
  }
  if (!out) throw Error("errors: write failed for " + path.string());
}

void write_energy_csv(const std::filesystem::path & path, double dt, const Trajectory & run) {
  DiagnosticsWriter w(path, dt);
  for (std::size_t n = 0; n < run.size(); ++n) w.record(static_cast<int>(n), run[n]);
}

void write_twin_outputs(const TwinResult & result, const TwinConfig & cfg, const std::filesystem::path & dir) {
  std::filesystem::create_directories(dir);
  write_obs_csv(dir / "obs.csv", result.obs);
  write_error_csv(dir / "errors.csv", cfg.dt, result.background_error, result.analysis_error);
  write_energy_csv(dir / "ke_truth.csv", cfg.dt, result.truth);
  write_energy_csv(dir / "ke_background.csv", cfg.dt, result.background_run);
  write_energy_csv(dir / "ke_analysis.csv", cfg.dt, result.analysis_run);
  MinimizerLog all;
  for (std::size_t w = 0; w < result.windows.size(); ++w) {
    for (MinimizerRecord r : result.windows[w].log.records) {
      r.outer += static_cast<int>(w) * (cfg.assim.outer_loops + 1);
      all.records.push_back(r);
    }
  }
  all.write_csv(dir / "minlog.csv");
  write_state(dir / "truth0", result.truth.front());
  write_state(dir / "background0", result.background_run.front());
  write_state(dir / "analysis0", result.analysis_run.front());
}

}  // namespace pedavar
