/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <CLI11.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "commands.h"
#include "config.h"

namespace {

const char * describe(const std::string & sub) {
  if (sub == "spinup") return "spin up from rest under the wind forcing";
  if (sub == "truth") return "run the truth window from spinup or io.initial_state";
  if (sub == "obs") return "seed floats and write noisy position observations";
  if (sub == "assimilate") return "incremental 4D-Var from io.obs_file and io.floats_file";
  if (sub == "evaluate") return "velocity errors of io.analysis_state against io.truth_state";
  if (sub == "gradcheck") return "compare the adjoint gradient with finite differences";
  if (sub == "verify") return "numerical checks: wbound, energy, nlbound, picard";
  if (sub == "twin") return "full identical-twin experiment";
  return "";
}

std::string one_line(std::string s) {
  for (char & c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

int main(int argc, char ** argv) {
  using namespace pedavar::cli;

  CLI::App app{"pedavar: primitive-equations 4D-Var with Lagrangian floats", "pedavar"};
  std::string config_path;
  std::string out_dir = ".";
  int threads = 1;
  std::optional<std::uint64_t> seed;
  app.add_option("--config", config_path, "configuration file (key = value, [sections])");
  app.add_option("--out", out_dir, "parent directory of the run directory");
  app.add_option("--threads", threads, "worker threads for independent sweeps")->check(CLI::PositiveNumber);
  app.add_option("--seed", seed, "overrides twin.seed");
  app.require_subcommand(1);
  app.fallthrough();

  std::string check;
  for (const std::string & name : subcommands()) {
    CLI::App * sub = app.add_subcommand(name, describe(name));
    if (name == "verify") {
      sub->add_option("check", check, "wbound, energy, nlbound or picard")
        ->required()
        ->check(CLI::IsMember(verify_checks()));
    }
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp & e) {
    return app.exit(e);
  } catch (const CLI::ParseError & e) {
    std::string msg = one_line(e.what());
    if (app.get_subcommands().empty() && !app.remaining().empty()) {
      msg = "unknown subcommand '" + app.remaining().front() + "'";
    }
    std::cerr << "error: usage: " << msg << '\n' << app.help();
    return 2;
  }

  const std::string name = app.get_subcommands().front()->get_name();
  std::ostringstream log;
  try {
    RunConfig cfg = config_path.empty() ? parse_config("") : load_config(config_path);
    if (seed) cfg.seed = *seed;
    RunContext ctx;
    ctx.cfg = cfg;
    ctx.dir = make_run_dir(out_dir, cfg);
    ctx.threads = threads;
    ctx.check = check;
    ctx.log = &log;
    std::ofstream run_log(ctx.dir / "run.log");
    run_log << "# resolved configuration\n" << format_config(cfg) << "\n# " << name
            << (check.empty() ? "" : " " + check) << '\n';
    try {
      run_subcommand(name, ctx);
    } catch (...) {
      run_log << log.str();
      throw;
    }
    run_log << log.str();
    std::cout << log.str() << "run directory: " << ctx.dir.string() << '\n';
    return 0;
  } catch (const CheckFailed & e) {
    std::cout << log.str();
    std::cerr << "error: " << name << ": check failed: " << one_line(e.what()) << '\n';
    return 3;
  } catch (const std::exception & e) {
    std::cerr << "error: " << name << ": " << one_line(e.what()) << '\n';
    return 1;
  }
}
