/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "commands.h"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <random>
#include <thread>

#include "pedavar/assim.h"
#include "pedavar/random_fields.h"
#include "pedavar/snapshot.h"
#include "pedavar/tlm_adjoint.h"
#include "pedavar/verify.h"

namespace pedavar::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path & path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot open " + path.string() + " for writing");
  return out;
}

void say(const RunContext & ctx, const std::string & line) {
  if (ctx.log) *ctx.log << line << '\n';
}

/// Runs body(i) for i in [0, n) on up to `threads` workers; the first
/// exception is rethrown. Results must be written by index.
void parallel_for(int n, int threads, const std::function<void(int)> & body) {
  const int workers = std::max(1, std::min(threads, n));
  if (workers == 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (int i = next++; i < n; i = next++) {
        try {
          body(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
        }
      }
    });
  }
  for (std::thread & t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::uint64_t sample_seed(const RunConfig & cfg, int s) {
  return cfg.seed * 1000 + static_cast<std::uint64_t>(s);
}

StateField require_state(const std::string & path, const char * key, const Grid & grid) {
  if (path.empty()) throw Error(std::string("io.") + key + " is required");
  StateField x = read_state(path);
  if (x.grid() != grid) {
    throw Error(std::string("shape mismatch: ") + key + " " + x.grid().shape() + " vs config grid " + grid.shape());
  }
  return x;
}

/// Truth trajectory over windows * window_steps, from io.truth_state when given.
Trajectory truth_trajectory(const RunConfig & cfg) {
  const TwinConfig twin = cfg.twin();
  if (cfg.truth_state.empty()) return truth_run(twin);
  const Model model(twin.grid(), twin.model_config());
  return model.trajectory(require_state(cfg.truth_state, "truth_state", twin.grid()),
                          twin.windows * twin.window_steps);
}

void write_cost_csv(const fs::path & path, const AssimResult & r) {
  std::ofstream out = open_out(path);
  out << "stage,J,Jo,Jb,gnorm\n";
  for (const auto & [name, c] : {std::pair{"initial", r.initial_cost}, std::pair{"final", r.final_cost}}) {
    out << name << ',' << fmt(c.J) << ',' << fmt(c.Jo) << ',' << fmt(c.Jb) << ',' << fmt(c.gnorm) << '\n';
  }
  out << "# stop_reason: " << r.stop_reason << '\n';
}

// -----------------------------------------------------------------------------
void cmd_spinup(const RunContext & ctx) {
  const TwinConfig twin = ctx.cfg.twin();
  const Model model(twin.grid(), twin.model_config());
  DiagnosticsWriter diag(ctx.dir / "diagnostics.csv", twin.dt);
  const StateField x = model.integrate(StateField(twin.grid()), twin.spinup_steps,
                                       [&](int n, const StateField & s) {diag.record(n, s);});
  write_state(ctx.dir / "spinup", x);
  say(ctx, "spinup: " + std::to_string(twin.spinup_steps) + " steps, kinetic energy " + fmt(kinetic_energy(x)));
}

void cmd_truth(const RunContext & ctx) {
  const RunConfig & cfg = ctx.cfg;
  const TwinConfig twin = cfg.twin();
  Trajectory truth;
  if (!cfg.initial_state.empty()) {
    const Model model(twin.grid(), twin.model_config());
    truth = model.trajectory(require_state(cfg.initial_state, "initial_state", twin.grid()),
                             twin.windows * twin.window_steps);
  } else {
    truth = truth_run(twin);
  }
  write_state(ctx.dir / "truth0", truth.front());
  write_state(ctx.dir / "truth_end", truth.back());
  write_energy_csv(ctx.dir / "ke_truth.csv", twin.dt, truth);
  say(ctx, "truth: " + std::to_string(truth.size() - 1) + " steps");
}

void cmd_obs(const RunContext & ctx) {
  const TwinConfig twin = ctx.cfg.twin();
  const Trajectory truth = truth_trajectory(ctx.cfg);
  const SyntheticObs so = synth_obs(truth, twin, twin.seed);
  write_obs_csv(ctx.dir / "obs.csv", so.obs);
  write_floats_csv(ctx.dir / "floats.csv", so.floats);
  say(ctx, "obs: " + std::to_string(so.obs.records.size()) + " records from " + std::to_string(so.floats.size()) +
           " floats");
}

AssimProblem build_problem(const RunConfig & cfg, StateField xb, FloatSet floats, ObsSet obs) {
  const TwinConfig twin = cfg.twin();
  AssimProblem p(twin.grid(), twin.model_config(), twin.windows * twin.window_steps, std::move(xb));
  p.B = twin.B;
  p.omega = twin.omega;
  p.freeze_theta = twin.freeze_theta;
  p.jb_norm = cfg.jb_norm;
  p.sobolev = cfg.norm();
  p.floats = std::move(floats);
  p.obs = std::move(obs);
  p.validate();
  return p;
}

StateField background_state(const RunConfig & cfg) {
  const Grid grid = cfg.grid();
  if (!cfg.background_state.empty()) return require_state(cfg.background_state, "background_state", grid);
  if (cfg.truth_state.empty()) throw Error("io.background_state or io.truth_state is required");
  return make_background(require_state(cfg.truth_state, "truth_state", grid), cfg.background_scale);
}

void cmd_assimilate(const RunContext & ctx) {
  const RunConfig & cfg = ctx.cfg;
  if (cfg.obs_file.empty() || cfg.floats_file.empty()) throw Error("io.obs_file and io.floats_file are required");
  AssimProblem p = build_problem(cfg, background_state(cfg), read_floats_csv(cfg.floats_file),
                                 read_obs_csv(cfg.obs_file));
  const AssimResult r = assimilate(p, cfg.twin().assim);
  write_state(ctx.dir / "analysis0", r.initial_state);
  r.log.write_csv(ctx.dir / "minlog.csv");
  write_cost_csv(ctx.dir / "cost.csv", r);
  say(ctx, "assimilate: J " + fmt(r.initial_cost.J) + " -> " + fmt(r.final_cost.J) + " (" + r.stop_reason + ")");
}

void cmd_evaluate(const RunContext & ctx) {
  const RunConfig & cfg = ctx.cfg;
  const char * names[3] = {"truth_state", "background_state", "analysis_state"};
  const std::string * paths[3] = {&cfg.truth_state, &cfg.background_state, &cfg.analysis_state};
  std::vector<StateField> states;
  for (int i = 0; i < 3; ++i) {
    if (paths[i]->empty()) throw Error(std::string("io.") + names[i] + " is required");
    states.push_back(read_state(*paths[i]));
  }
  for (int i = 1; i < 3; ++i) {
    if (states[i].grid() != states[0].grid()) {
      throw Error(std::string("shape mismatch: ") + names[0] + " " + states[0].grid().shape() + " vs " + names[i] +
                  " " + states[i].grid().shape());
    }
  }
  if (states[0].grid() != cfg.grid()) {
    throw Error("shape mismatch: snapshots " + states[0].grid().shape() + " vs config grid " + cfg.grid().shape());
  }
  const TwinConfig twin = cfg.twin();
  const Model model(twin.grid(), twin.model_config());
  const int n = twin.windows * twin.window_steps;
  const Trajectory truth = model.trajectory(states[0], n);
  const Trajectory bg = model.trajectory(model.constrain(states[1]), n);
  const Trajectory an = model.trajectory(states[2], n);
  const ErrorSeries ebg = rms_error(bg, truth);
  const ErrorSeries ean = rms_error(an, truth);
  write_error_csv(ctx.dir / "errors.csv", twin.dt, ebg, ean);
  auto last = [](const std::optional<double> & v) {return v ? fmt(*v) : std::string("n/a");};
  say(ctx, "evaluate: final E_u " + last(ebg.u.back()) + " -> " + last(ean.u.back()) + ", E_v " +
           last(ebg.v.back()) + " -> " + last(ean.v.back()));
}

void cmd_gradcheck(const RunContext & ctx) {
  const RunConfig & cfg = ctx.cfg;
  const Grid grid = cfg.grid();
  FloatSet floats;
  ObsSet obs;
  StateField xb(grid);
  if (!cfg.obs_file.empty() || !cfg.floats_file.empty()) {
    if (cfg.obs_file.empty() || cfg.floats_file.empty()) throw Error("io.obs_file and io.floats_file go together");
    floats = read_floats_csv(cfg.floats_file);
    obs = read_obs_csv(cfg.obs_file);
    xb = background_state(cfg);
  } else {
    const Trajectory truth = truth_trajectory(cfg);
    SyntheticObs so = synth_obs(truth, cfg.twin(), cfg.seed);
    floats = std::move(so.floats);
    obs = std::move(so.obs);
    xb = make_background(truth.front(), cfg.background_scale);
  }
  const AssimProblem p = build_problem(cfg, xb, floats, obs);
  StateField x0 = p.background;
  x0 += smooth_state(grid, cfg.seed, 0.05);
  const CostAndGradient cg = grad_cost(x0, p);
  std::mt19937_64 rng(cfg.seed + 1);
  std::vector<StateField> dirs;
  for (int d = 0; d < cfg.directions; ++d) dirs.push_back(white_noise_state(grid, rng, 0.1));
  std::vector<double> analytic(cfg.directions), fd(cfg.directions), rel(cfg.directions);
  parallel_for(cfg.directions, ctx.threads, [&](int d) {
    StateField xp = x0, xm = x0;
    xp.axpy(cfg.eps, dirs[d]);
    xm.axpy(-cfg.eps, dirs[d]);
    fd[d] = (cost(xp, p).J - cost(xm, p).J) / (2 * cfg.eps);
    analytic[d] = inner(cg.gradient, dirs[d]);
    rel[d] = std::abs(analytic[d] - fd[d]) / std::max({std::abs(analytic[d]), std::abs(fd[d]), 1e-300});
  });
  std::ofstream out = open_out(ctx.dir / "gradcheck.csv");
  out << "direction,analytic,finite_difference,relative_error\n";
  for (int d = 0; d < cfg.directions; ++d) {
    out << d << ',' << fmt(analytic[d]) << ',' << fmt(fd[d]) << ',' << fmt(rel[d]) << '\n';
  }
  say(ctx, "gradcheck: max relative error " + fmt(*std::max_element(rel.begin(), rel.end())));
}

// -----------------------------------------------------------------------------
void verify_wbound(const RunContext & ctx) {
  const RunConfig & cfg = ctx.cfg;
  const Grid grid = cfg.grid();
  std::vector<WBoundReport> reports(cfg.samples);
  parallel_for(cfg.samples, ctx.threads, [&](int s) {
    std::mt19937_64 rng(sample_seed(cfg, s));
    const StateField x = (s % 2 == 0) ? white_noise_state(grid, rng, cfg.amplitude)
                                      : smooth_state(grid, sample_seed(cfg, s), cfg.amplitude, cfg.kmax, 4);
    reports[s] = check_w_bound(x);
  });
  write_wbound_csv(ctx.dir / "wbound.csv", reports);
  const auto failed = std::count_if(reports.begin(), reports.end(), [](const WBoundReport & r) {return !r.pass;});
  say(ctx, "verify wbound: " + std::to_string(reports.size() - failed) + "/" + std::to_string(reports.size()) +
           " pass");
  if (failed) throw CheckFailed(std::to_string(failed) + " of " + std::to_string(reports.size()) + " states failed");
}

void verify_energy(const RunContext & ctx) {
  const RunConfig & cfg = ctx.cfg;
  const Grid grid = cfg.grid();
  ModelConfig mcfg = cfg.twin().model_config();
  mcfg.linear = true;
  mcfg.forcing = Forcing::none();
  const double K = cfg.energy_K > 0.0 ? cfg.energy_K : NormParams::minimal_K(cfg.depth, cfg.nu, cfg.gamma, cfg.beta);
  const NormParams norm{cfg.m, K};
  const Model model(grid, mcfg);
  std::vector<EnergyReport> reports(cfg.samples);
  parallel_for(cfg.samples, ctx.threads, [&](int s) {
    const std::uint64_t seed = sample_seed(cfg, s);
    const StateField x0 = model.constrain(smooth_state(grid, seed, cfg.amplitude, cfg.kmax));
    const StateField f = smooth_state(grid, seed + 500, 0.5 * cfg.amplitude, cfg.kmax);
    reports[s] = check_energy_inequality(x0, f, mcfg, cfg.T, norm);
  });
  std::ofstream summary = open_out(ctx.dir / "energy_summary.csv");
  summary << "sample,K,C1,C2,C3,C4,min_margin,pass\n";
  int failed = 0;
  for (int s = 0; s < cfg.samples; ++s) {
    const EnergyReport & r = reports[s];
    char name[32];
    std::snprintf(name, sizeof(name), "energy_%03d.csv", s);
    write_energy_report_csv(ctx.dir / name, r);
    const bool ok = r.pass && r.min_margin() > 0.0;
    failed += ok ? 0 : 1;
    summary << s << ',' << fmt(K) << ',' << fmt(r.constants.C1) << ',' << fmt(r.constants.C2) << ','
            << fmt(r.constants.C3) << ',' << fmt(r.constants.C4) << ',' << fmt(r.min_margin()) << ','
            << (ok ? 1 : 0) << '\n';
  }
  say(ctx, "verify energy: " + std::to_string(cfg.samples - failed) + "/" + std::to_string(cfg.samples) + " pass");
  if (failed) throw CheckFailed(std::to_string(failed) + " of " + std::to_string(cfg.samples) + " runs failed");
}

void verify_nlbound(const RunContext & ctx) {
  const RunConfig & cfg = ctx.cfg;
  const Grid grid = cfg.grid();
  std::vector<NonlinearBoundReport> reports(cfg.samples);
  parallel_for(cfg.samples, ctx.threads, [&](int s) {
    const std::uint64_t seed = sample_seed(cfg, s);
    reports[s] = check_nonlinear_bound(smooth_state(grid, seed, cfg.amplitude, cfg.kmax),
                                       smooth_state(grid, seed + 500, cfg.amplitude, cfg.kmax), cfg.m);
  });
  write_nlbound_csv(ctx.dir / "nlbound.csv", reports);
  double mx = 0.0;
  for (const NonlinearBoundReport & r : reports) mx = std::max(mx, r.max_ratio);
  say(ctx, "verify nlbound: max ratio " + fmt(mx));
}

void verify_picard(const RunContext & ctx) {
  const RunConfig & cfg = ctx.cfg;
  const Grid grid = cfg.grid();
  const ModelConfig mcfg = cfg.twin().model_config();
  const Model model(grid, mcfg);
  const StateField x0 = model.constrain(smooth_state(grid, cfg.seed, cfg.amplitude, cfg.kmax));
  const PicardRun run = picard_integrate(x0, mcfg, cfg.T, cfg.picard_max_n, cfg.picard_tol, cfg.norm());
  write_picard_csv(ctx.dir / "picard.csv", run);
  const Trajectory heun = model.trajectory(x0, static_cast<int>(run.limit.size()) - 1);
  double num = 0.0, den = 0.0;
  for (std::size_t n = 0; n < heun.size(); ++n) {
    const StateField d = run.limit[n] - heun[n];
    num += inner(d, d);
    den += inner(heun[n], heun[n]);
  }
  const double rel = den > 0.0 ? std::sqrt(num / den) : std::sqrt(num);
  std::ofstream summary = open_out(ctx.dir / "picard_summary.csv");
  summary << "iterations,converged,monotone,relative_l2_vs_heun\n"
          << run.iterations << ',' << (run.converged ? 1 : 0) << ',' << (run.monotone ? 1 : 0) << ',' << fmt(rel)
          << '\n';
  say(ctx, "verify picard: " + std::to_string(run.iterations) + " iterations, relative difference to Heun " +
           fmt(rel));
  if (!run.converged) throw CheckFailed("no convergence in " + std::to_string(run.iterations) + " iterations");
}

void cmd_verify(const RunContext & ctx) {
  if (ctx.check == "wbound") return verify_wbound(ctx);
  if (ctx.check == "energy") return verify_energy(ctx);
  if (ctx.check == "nlbound") return verify_nlbound(ctx);
  if (ctx.check == "picard") return verify_picard(ctx);
  throw Error("unknown check '" + ctx.check + "' (expected wbound, energy, nlbound or picard)");
}

void cmd_twin(const RunContext & ctx) {
  const TwinConfig twin = ctx.cfg.twin();
  const TwinResult r = run_twin(twin);
  write_twin_outputs(r, twin, ctx.dir);
  write_floats_csv(ctx.dir / "floats.csv", r.floats);
  std::ofstream summary = open_out(ctx.dir / "summary.csv");
  summary << "window,initial_Jo,final_Jo,jo_ratio,inner_monotone,stop_reason\n";
  for (std::size_t w = 0; w < r.windows.size(); ++w) {
    const AssimResult & a = r.windows[w];
    const double ratio = a.initial_cost.Jo > 0.0 ? a.final_cost.Jo / a.initial_cost.Jo : 0.0;
    summary << w << ',' << fmt(a.initial_cost.Jo) << ',' << fmt(a.final_cost.Jo) << ',' << fmt(ratio) << ','
            << (a.log.inner_monotone() ? 1 : 0) << ',' << a.stop_reason << '\n';
  }
  auto last = [](const std::vector<std::optional<double>> & v) {return v.back() ? fmt(*v.back()) : "n/a";};
  say(ctx, "twin: final E_u " + last(r.background_error.u) + " -> " + last(r.analysis_error.u) + ", E_v " +
           last(r.background_error.v) + " -> " + last(r.analysis_error.v));
}

}  // namespace

// -----------------------------------------------------------------------------
const std::vector<std::string> & subcommands() {
  static const std::vector<std::string> names = {"spinup", "truth",     "obs",    "assimilate",
                                                 "evaluate", "gradcheck", "verify", "twin"};
  return names;
}

const std::vector<std::string> & verify_checks() {
  static const std::vector<std::string> names = {"wbound", "energy", "nlbound", "picard"};
  return names;
}

fs::path make_run_dir(const fs::path & out, const RunConfig & cfg) {
  const std::string text = format_config(cfg);
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(fnv1a(text)));
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm utc{};
  gmtime_r(&now, &utc);
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y%m%dT%H%M%SZ", &utc);
  const std::string base = std::string("run-") + hash + "-" + stamp;
  fs::create_directories(out);
  fs::path dir = out / base;
  for (int n = 2; fs::exists(dir); ++n) dir = out / (base + "-" + std::to_string(n));
  fs::create_directory(dir);
  std::ofstream cfg_out = open_out(dir / "config.ini");
  cfg_out << text;
  return dir;
}

void run_subcommand(const std::string & name, const RunContext & ctx) {
  if (name == "spinup") return cmd_spinup(ctx);
  if (name == "truth") return cmd_truth(ctx);
  if (name == "obs") return cmd_obs(ctx);
  if (name == "assimilate") return cmd_assimilate(ctx);
  if (name == "evaluate") return cmd_evaluate(ctx);
  if (name == "gradcheck") return cmd_gradcheck(ctx);
  if (name == "verify") return cmd_verify(ctx);
  if (name == "twin") return cmd_twin(ctx);
  throw Error("unknown subcommand '" + name + "'");
}

}  // namespace pedavar::cli
