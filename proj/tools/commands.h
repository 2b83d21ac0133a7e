/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "config.h"

namespace pedavar::cli {

/// Thrown when a command ran but its check did not hold (exit status 3).
class CheckFailed : public Error {
 public:
  using Error::Error;
};

struct RunContext {
  RunConfig cfg;
  std::filesystem::path dir;       ///< run directory, already created
  int threads = 1;
  std::string check;               ///< verify sub-check
  std::ostream * log = nullptr;    ///< progress lines
};

const std::vector<std::string> & subcommands();
const std::vector<std::string> & verify_checks();

/// "run-<fnv1a of the resolved config, 16 hex digits>-<UTC timestamp>", made
/// unique under `out`; writes config.ini into it.
std::filesystem::path make_run_dir(const std::filesystem::path & out, const RunConfig & cfg);

/// Executes one pipeline; throws Error (or CheckFailed) on failure.
void run_subcommand(const std::string & name, const RunContext & ctx);

}  // namespace pedavar::cli
