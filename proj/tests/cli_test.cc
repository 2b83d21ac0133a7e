/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>
#include <string>

#include "commands.h"
#include "config.h"
#include "pedavar/snapshot.h"
#include "testing/random_fields.h"

namespace pedavar::cli {
namespace {

namespace fs = std::filesystem;

std::string error_of(const std::string & text) {
  try {
    parse_config(text, "t.cfg");
  } catch (const ConfigError & e) {
    return e.what();
  }
  return "";
}

std::string slurp(const fs::path & p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string & name) {
  const fs::path d = fs::temp_directory_path() / name;
  fs::remove_all(d);
  fs::create_directories(d);
  return d;
}

// -----------------------------------------------------------------------------
TEST(ParseConfigTest, EmptyTextGivesDefaults) {
  const RunConfig cfg = parse_config("");
  EXPECT_EQ(cfg, RunConfig{});
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(parse_config("# only a comment\n\n   \n"), RunConfig{});
}

TEST(ParseConfigTest, SectionsCommentsAndBareKeys) {
  const RunConfig cfg = parse_config(
      "nu = 0.05   # bare key\n"
      "[grid]\n nx = 16\nny=12 \n"
      "[assim]\nfreeze_theta = false\njb_norm = sobolev\n"
      "[twin]\nseed = 18446744073709551615\n"
      "[io]\nobs_file = some dir/obs.csv\n");
  EXPECT_EQ(cfg.nu, 0.05);
  EXPECT_EQ(cfg.nx, 16);
  EXPECT_EQ(cfg.ny, 12);
  EXPECT_FALSE(cfg.freeze_theta);
  EXPECT_EQ(cfg.jb_norm, BackgroundNorm::kSobolev);
  EXPECT_EQ(cfg.seed, 18446744073709551615ull);
  EXPECT_EQ(cfg.obs_file, "some dir/obs.csv");
}

TEST(ParseConfigTest, NegativeViscosityNamesKeyAndInvariant) {
  const std::string e = error_of("nu = -1\n");
  EXPECT_NE(e.find("t.cfg:1"), std::string::npos) << e;
  EXPECT_NE(e.find("'nu'"), std::string::npos) << e;
  EXPECT_NE(e.find("must be > 0"), std::string::npos) << e;
}

TEST(ParseConfigTest, ErrorsNameKeyAndLine) {
  EXPECT_NE(error_of("[grid]\nnx = 16\nbogus = 3\n").find("t.cfg:3: unknown key 'bogus'"), std::string::npos);
  EXPECT_NE(error_of("[grid]\nnu = 0.1\n").find("unknown key 'nu' in section [grid]"), std::string::npos);
  EXPECT_NE(error_of("[grid]\nnx = sixteen\n").find("t.cfg:2: key 'nx': expected an integer"), std::string::npos);
  EXPECT_NE(error_of("dt = 0.1x\n").find("key 'dt': expected a finite real number"), std::string::npos);
  EXPECT_NE(error_of("freeze_theta = maybe\n").find("expected true or false"), std::string::npos);
  EXPECT_NE(error_of("[nowhere]\n").find("t.cfg:1: unknown section"), std::string::npos);
  EXPECT_NE(error_of("nx = 8\n[grid]\nnx = 9\n").find("t.cfg:3: key 'nx' given twice"), std::string::npos);
  EXPECT_NE(error_of("[grid\n").find("malformed section header"), std::string::npos);
  EXPECT_NE(error_of("nx 8\n").find("expected 'key = value'"), std::string::npos);
  EXPECT_NE(error_of("background_scale = 1.5\n").find("must lie in [0, 1]"), std::string::npos);
  EXPECT_NE(error_of("m = 1\n").find("key 'm': must be >= 2"), std::string::npos);
}

TEST(ParseConfigTest, CrossKeyInvariants) {
  EXPECT_NE(error_of("z0 = 2.0\n").find("z0"), std::string::npos);
  EXPECT_NE(error_of("obs_times = 300\n").find("obs_times"), std::string::npos);
}

TEST(ParseConfigTest, RoundTrip) {
  RunConfig cfg;
  cfg.nx = 20;
  cfg.depth = 0.7;
  cfg.nu = 0.1;
  cfg.dt = 1.0 / 3.0;
  cfg.noise_sd = 2.5e-7;
  cfg.seed = 12345678901234ull;
  cfg.freeze_theta = false;
  cfg.jb_norm = BackgroundNorm::kSobolev;
  cfg.K = 800.0;
  cfg.picard_tol = 1e-13;
  cfg.truth_state = "/tmp/x/truth0";
  const std::string text = format_config(cfg);
  EXPECT_EQ(parse_config(text), cfg);
  EXPECT_EQ(format_config(parse_config(text)), text);
  EXPECT_EQ(parse_config(format_config(RunConfig{})), RunConfig{});
}

TEST(Fnv1aTest, ReferenceVectors) {
  EXPECT_EQ(fnv1a(""), 0xcbf29ce484222325ull);
  EXPECT_EQ(fnv1a("a"), 0xaf63dc4c8601ec8cull);
  EXPECT_EQ(fnv1a("foobar"), 0x85944171f73967e8ull);
}

// -----------------------------------------------------------------------------
TEST(RunDirTest, NameAndResolvedConfig) {
  const fs::path out = fresh_dir("pedavar_rundir");
  RunConfig cfg;
  cfg.nx = 16;
  const fs::path a = make_run_dir(out, cfg);
  const fs::path b = make_run_dir(out, cfg);
  char hash[17];
  std::snprintf(hash, sizeof(hash), "%016llx", static_cast<unsigned long long>(fnv1a(format_config(cfg))));
  EXPECT_TRUE(std::regex_match(a.filename().string(), std::regex(std::string("run-") + hash + "-\\d{8}T\\d{6}Z")))
      << a;
  EXPECT_NE(a, b);
  EXPECT_EQ(load_config((a / "config.ini").string()), cfg);
  fs::remove_all(out);
}

TEST(RunSubcommandTest, EvaluateRejectsMismatchedGrids) {
  const fs::path dir = fresh_dir("pedavar_eval_mismatch");
  write_state(dir / "a", testing::smooth_state(Grid(12, 12, 5), 1));
  write_state(dir / "b", testing::smooth_state(Grid(16, 12, 5), 2));
  RunContext ctx;
  ctx.cfg = parse_config("nx = 12\nny = 12\nnz = 5\nwindow_steps = 4\nobs_times = 2\n");
  ctx.cfg.truth_state = (dir / "a").string();
  ctx.cfg.background_state = (dir / "a").string();
  ctx.cfg.analysis_state = (dir / "b").string();
  ctx.dir = dir;
  try {
    run_subcommand("evaluate", ctx);
    FAIL() << "expected a shape mismatch";
  } catch (const Error & e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("shape mismatch"), std::string::npos) << msg;
    EXPECT_NE(msg.find("16x12x5"), std::string::npos) << msg;
  }
  fs::remove_all(dir);
}

TEST(RunSubcommandTest, UnknownNamesRejected) {
  RunContext ctx;
  ctx.dir = fs::temp_directory_path();
  EXPECT_THROW(run_subcommand("frobnicate", ctx), Error);
  ctx.check = "nothing";
  EXPECT_THROW(run_subcommand("verify", ctx), Error);
}

// -----------------------------------------------------------------------------
struct ProcessResult {
  int status;
  std::string out, err;
};

ProcessResult run_tool(const std::string & args, const fs::path & dir) {
  const fs::path out = dir / "stdout.txt", err = dir / "stderr.txt";
  const std::string cmd = std::string(PEDAVAR_TOOL) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int raw = std::system(cmd.c_str());
  return {WIFEXITED(raw) ? WEXITSTATUS(raw) : -1, slurp(out), slurp(err)};
}

std::string run_dir_of(const std::string & stdout_text) {
  std::smatch m;
  const std::regex re("run directory: (.*)\n");
  return std::regex_search(stdout_text, m, re) ? m[1].str() : "";
}

TEST(ToolTest, UnknownSubcommandPrintsUsage) {
  const fs::path dir = fresh_dir("pedavar_tool_usage");
  const ProcessResult r = run_tool("frobnicate", dir);
  EXPECT_NE(r.status, 0);
  EXPECT_EQ(r.err.rfind("error: usage: unknown subcommand 'frobnicate'\n", 0), 0u) << r.err;
  EXPECT_NE(r.err.find("Usage:"), std::string::npos);
  fs::remove_all(dir);
}

TEST(ToolTest, ConfigErrorIsOneLine) {
  const fs::path dir = fresh_dir("pedavar_tool_badcfg");
  std::ofstream(dir / "bad.cfg") << "[model]\nnu = -1\n";
  const ProcessResult r = run_tool("--config " + (dir / "bad.cfg").string() + " --out " + dir.string() + " twin", dir);
  EXPECT_EQ(r.status, 1);
  EXPECT_EQ(std::count(r.err.begin(), r.err.end(), '\n'), 1) << r.err;
  EXPECT_NE(r.err.find("key 'nu': must be > 0"), std::string::npos) << r.err;
  fs::remove_all(dir);
}

TEST(ToolTest, RerunFromResolvedConfigIsByteIdentical) {
  const fs::path dir = fresh_dir("pedavar_tool_rerun");
  std::ofstream(dir / "v.cfg") << "[grid]\nnx = 12\nny = 12\nnz = 5\n[model]\nnu = 0.1\ndt = 0.01\n"
                               << "[verify]\nsamples = 3\nT = 0.05\n";
  const ProcessResult a = run_tool("--config " + (dir / "v.cfg").string() + " --out " + (dir / "a").string() +
                                   " --seed 9 verify energy", dir);
  ASSERT_EQ(a.status, 0) << a.err;
  const fs::path run_a = run_dir_of(a.out);
  const ProcessResult b = run_tool("--config " + (run_a / "config.ini").string() + " --out " + (dir / "b").string() +
                                   " verify energy", dir);
  ASSERT_EQ(b.status, 0) << b.err;
  const fs::path run_b = run_dir_of(b.out);
  EXPECT_EQ(load_config((run_b / "config.ini").string()).seed, 9u);
  int compared = 0;
  for (const auto & entry : fs::directory_iterator(run_a)) {
    const std::string name = entry.path().filename().string();
    if (name == "run.log") continue;
    EXPECT_EQ(slurp(entry.path()), slurp(run_b / name)) << name;
    ++compared;
  }
  EXPECT_EQ(compared, 5);   // config.ini, summary and three per-sample reports
  fs::remove_all(dir);
}

}  // namespace
}  // namespace pedavar::cli
