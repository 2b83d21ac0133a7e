/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "pedavar/grid.h"

namespace pedavar {

/// Field snapshot file layout (all little-endian):
///   "PEDA" | u32 version | u32 nx | u32 ny | u32 nz | f64 a | nx*ny*nz f64
/// with x varying fastest, then y, then z. One file per component.
inline constexpr std::uint32_t kSnapshotVersion = 1;

void write_snapshot(const std::filesystem::path & path, const Field3 & f);
Field3 read_snapshot(const std::filesystem::path & path);

/// Writes <prefix>_u.peda, <prefix>_v.peda, <prefix>_theta.peda.
void write_state(const std::filesystem::path & prefix, const StateField & x);
StateField read_state(const std::filesystem::path & prefix);
std::filesystem::path component_path(const std::filesystem::path & prefix, const std::string & name);

}  // namespace pedavar
