/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "config.h"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <optional>
#include <set>
#include <sstream>
#include <variant>
#include <vector>

namespace pedavar::cli {

namespace {

using Member = std::variant<int RunConfig::*, double RunConfig::*, bool RunConfig::*, std::uint64_t RunConfig::*,
                            std::string RunConfig::*, BackgroundNorm RunConfig::*>;
/// Returns the violated invariant, or nothing.
using Check = std::function<std::optional<std::string>(double)>;

struct Key {
  const char * section;
  const char * name;
  Member member;
  Check check;
};

Check any() {return [](double) -> std::optional<std::string> {return std::nullopt;};}
Check positive() {
  return [](double v) -> std::optional<std::string> {
    if (v > 0.0) return std::nullopt;
    return "must be > 0";
  };
}
Check non_negative() {
  return [](double v) -> std::optional<std::string> {
    if (v >= 0.0) return std::nullopt;
    return "must be >= 0";
  };
}
Check at_least(int lo) {
  return [lo](double v) -> std::optional<std::string> {
    if (v >= lo) return std::nullopt;
    return "must be >= " + std::to_string(lo);
  };
}
Check unit_interval() {
  return [](double v) -> std::optional<std::string> {
    if (v >= 0.0 && v <= 1.0) return std::nullopt;
    return "must lie in [0, 1]";
  };
}

const std::vector<Key> & keys() {
  static const std::vector<Key> table = {
    {"grid", "nx", &RunConfig::nx, at_least(4)},
    {"grid", "ny", &RunConfig::ny, at_least(4)},
    {"grid", "nz", &RunConfig::nz, at_least(3)},
    {"grid", "depth", &RunConfig::depth, positive()},
    {"model", "alpha", &RunConfig::alpha, non_negative()},
    {"model", "beta", &RunConfig::beta, non_negative()},
    {"model", "gamma", &RunConfig::gamma, non_negative()},
    {"model", "nu", &RunConfig::nu, positive()},
    {"model", "dt", &RunConfig::dt, positive()},
    {"model", "tau0", &RunConfig::tau0, non_negative()},
    {"twin", "spinup_steps", &RunConfig::spinup_steps, at_least(0)},
    {"twin", "window_steps", &RunConfig::window_steps, at_least(1)},
    {"twin", "windows", &RunConfig::windows, at_least(1)},
    {"twin", "floats", &RunConfig::floats, at_least(1)},
    {"twin", "obs_times", &RunConfig::obs_times, at_least(1)},
    {"twin", "noise_sd", &RunConfig::noise_sd, non_negative()},
    {"twin", "z0", &RunConfig::z0, positive()},
    {"twin", "background_scale", &RunConfig::background_scale, unit_interval()},
    {"twin", "seed", &RunConfig::seed, any()},
    {"assim", "omega", &RunConfig::omega, non_negative()},
    {"assim", "background_sd", &RunConfig::background_sd, positive()},
    {"assim", "freeze_theta", &RunConfig::freeze_theta, any()},
    {"assim", "jb_norm", &RunConfig::jb_norm, any()},
    {"assim", "outer_loops", &RunConfig::outer_loops, at_least(1)},
    {"assim", "inner_iters", &RunConfig::inner_iters, at_least(1)},
    {"assim", "tol", &RunConfig::tol, positive()},
    {"norm", "m", &RunConfig::m, at_least(2)},
    {"norm", "K", &RunConfig::K, positive()},
    {"verify", "samples", &RunConfig::samples, at_least(1)},
    {"verify", "T", &RunConfig::T, non_negative()},
    {"verify", "energy_K", &RunConfig::energy_K, non_negative()},
    {"verify", "amplitude", &RunConfig::amplitude, positive()},
    {"verify", "kmax", &RunConfig::kmax, at_least(1)},
    {"verify", "picard_max_n", &RunConfig::picard_max_n, at_least(1)},
    {"verify", "picard_tol", &RunConfig::picard_tol, positive()},
    {"gradcheck", "directions", &RunConfig::directions, at_least(1)},
    {"gradcheck", "eps", &RunConfig::eps, positive()},
    {"io", "initial_state", &RunConfig::initial_state, any()},
    {"io", "truth_state", &RunConfig::truth_state, any()},
    {"io", "background_state", &RunConfig::background_state, any()},
    {"io", "analysis_state", &RunConfig::analysis_state, any()},
    {"io", "obs_file", &RunConfig::obs_file, any()},
    {"io", "floats_file", &RunConfig::floats_file, any()},
  };
  return table;
}

std::string trim(const std::string & s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

template <typename T>
std::optional<T> parse_number(const std::string & s) {
  T v{};
  const char * end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return v;
}

/// Assigns `value` to the member; returns an error text on failure.
std::optional<std::string> assign(RunConfig & cfg, const Key & key, const std::string & value) {
  auto checked = [&](double v) -> std::optional<std::string> {
    if (auto msg = key.check(v)) return *msg + " (got " + value + ")";
    return std::nullopt;
  };
  return std::visit([&](auto member) -> std::optional<std::string> {
    using T = std::remove_cvref_t<decltype(cfg.*member)>;
    if constexpr (std::is_same_v<T, int>) {
      const auto v = parse_number<int>(value);
      if (!v) return "expected an integer, got '" + value + "'";
      if (auto msg = checked(*v)) return msg;
      cfg.*member = *v;
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
      const auto v = parse_number<std::uint64_t>(value);
      if (!v) return "expected an unsigned 64-bit integer, got '" + value + "'";
      cfg.*member = *v;
    } else if constexpr (std::is_same_v<T, double>) {
      const auto v = parse_number<double>(value);
      if (!v || !std::isfinite(*v)) return "expected a finite real number, got '" + value + "'";
      if (auto msg = checked(*v)) return msg;
      cfg.*member = *v;
    } else if constexpr (std::is_same_v<T, bool>) {
      if (value == "true" || value == "yes" || value == "1") {
        cfg.*member = true;
      } else if (value == "false" || value == "no" || value == "0") {
        cfg.*member = false;
      } else {
        return "expected true or false, got '" + value + "'";
      }
    } else if constexpr (std::is_same_v<T, BackgroundNorm>) {
      if (value == "covariance") {
        cfg.*member = BackgroundNorm::kCovariance;
      } else if (value == "sobolev") {
        cfg.*member = BackgroundNorm::kSobolev;
      } else {
        return "expected covariance or sobolev, got '" + value + "'";
      }
    } else {
      cfg.*member = value;
    }
    return std::nullopt;
  }, key.member);
}

std::string render(const RunConfig & cfg, const Key & key) {
  return std::visit([&](auto member) -> std::string {
    using T = std::remove_cvref_t<decltype(cfg.*member)>;
    const T & v = cfg.*member;
    if constexpr (std::is_same_v<T, double>) {
      char buf[64];
      const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
      return std::string(buf, ptr);
    } else if constexpr (std::is_same_v<T, bool>) {
      return v ? "true" : "false";
    } else if constexpr (std::is_same_v<T, BackgroundNorm>) {
      return v == BackgroundNorm::kSobolev ? "sobolev" : "covariance";
    } else if constexpr (std::is_same_v<T, std::string>) {
      return v;
    } else {
      return std::to_string(v);
    }
  }, key.member);
}

}  // namespace

// -----------------------------------------------------------------------------
TwinConfig RunConfig::twin() const {
  TwinConfig t;
  t.nx = nx;
  t.ny = ny;
  t.nz = nz;
  t.depth = depth;
  t.phys = PhysParams{alpha, beta, gamma, nu};
  t.dt = dt;
  t.tau0 = tau0;
  t.spinup_steps = spinup_steps;
  t.window_steps = window_steps;
  t.windows = windows;
  t.floats = floats;
  t.obs_times = obs_times;
  t.noise_sd = noise_sd;
  t.z0 = z0;
  t.background_scale = background_scale;
  t.seed = seed;
  t.omega = omega;
  t.B.u.sd = background_sd;
  t.B.v.sd = background_sd;
  t.B.theta.sd = background_sd;
  t.freeze_theta = freeze_theta;
  t.assim = AssimOptions{outer_loops, inner_iters, tol};
  return t;
}

void RunConfig::validate() const {
  try {
    twin().validate();
    norm().validate();
  } catch (const Error & e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
}

RunConfig parse_config(const std::string & text, const std::string & source) {
  RunConfig cfg;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  std::set<std::string> seen;
  int lineno = 0;
  auto fail = [&](const std::string & msg) {
    throw ConfigError(source + ":" + std::to_string(lineno) + ": " + msg);
  };
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') fail("malformed section header '" + line + "'");
      section = trim(line.substr(1, line.size() - 2));
      bool known = false;
      for (const Key & k : keys()) known = known || section == k.section;
      if (!known) fail("unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) fail("expected 'key = value', got '" + line + "'");
    const std::string name = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    const Key * key = nullptr;
    for (const Key & k : keys()) {
      if (name == k.name && (section.empty() || section == k.section)) key = &k;
    }
    if (!key) {
      fail("unknown key '" + name + "'" + (section.empty() ? "" : " in section [" + section + "]"));
    }
    const std::string qualified = std::string(key->section) + "." + key->name;
    if (!seen.insert(qualified).second) fail("key '" + name + "' given twice");
    if (auto msg = assign(cfg, *key, value)) fail("key '" + name + "': " + *msg);
  }
  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::string & path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot open " + path);
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path);
}

std::string format_config(const RunConfig & cfg) {
  std::ostringstream out;
  std::string section;
  for (const Key & k : keys()) {
    if (section != k.section) {
      if (!section.empty()) out << '\n';
      section = k.section;
      out << '[' << section << "]\n";
    }
    out << k.name << " = " << render(cfg, k) << '\n';
  }
  return out.str();
}

std::uint64_t fnv1a(const std::string & text) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

}  // namespace pedavar::cli
