/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>
#include <random>

#include "pedavar/grid.h"

namespace pedavar {

/// Independent N(0, sd^2) values at every grid point, boundaries included.
Field3 white_noise(const Grid & grid, std::mt19937_64 & rng, double sd = 1.0);
StateField white_noise_state(const Grid & grid, std::mt19937_64 & rng, double sd = 1.0);

/// Smooth field: horizontal wavenumbers |k| <= kmax times sin(n pi z / a),
/// n <= nmax. Coefficients depend on the seed only, so the same seed gives the
/// same continuous function on every grid.
Field3 smooth_field(const Grid & grid, std::uint64_t seed, double amplitude = 1.0, int kmax = 2,
                    int nmax = 2);
StateField smooth_state(const Grid & grid, std::uint64_t seed, double amplitude = 1.0, int kmax = 2,
                        int nmax = 2);

}  // namespace pedavar
