/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include "pedavar/random_fields.h"

#include <cmath>
#include <numbers>
#include <vector>

namespace pedavar {

Field3 white_noise(const Grid & grid, std::mt19937_64 & rng, double sd) {
  std::normal_distribution<double> dist(0.0, sd);
  Field3 f(grid);
  for (double & v : f.values()) v = dist(rng);
  return f;
}

StateField white_noise_state(const Grid & grid, std::mt19937_64 & rng, double sd) {
  Field3 u = white_noise(grid, rng, sd);
  Field3 v = white_noise(grid, rng, sd);
  Field3 t = white_noise(grid, rng, sd);
  return StateField(std::move(u), std::move(v), std::move(t));
}

Field3 smooth_field(const Grid & grid, std::uint64_t seed, double amplitude, int kmax, int nmax) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> dist(0.0, 1.0);
  struct Mode {int kx, ky, n; double c, s;};
  std::vector<Mode> modes;
  for (int n = 1; n <= nmax; ++n) {
    for (int kx = 0; kx <= kmax; ++kx) {
      for (int ky = -kmax; ky <= kmax; ++ky) {
        if (kx == 0 && ky < 0) continue;
        const double c = dist(rng);
        const double s = dist(rng);
        modes.push_back({kx, ky, n, c, s});
      }
    }
  }
  // Separable tables; cos/sin of the phase come from the angle-addition formulas.
  const int nx = grid.nx(), ny = grid.ny(), nz = grid.nz();
  std::vector<double> cx((kmax + 1) * nx), sx((kmax + 1) * nx), cy((2 * kmax + 1) * ny), sy((2 * kmax + 1) * ny);
  std::vector<double> vz(static_cast<std::size_t>(nmax + 1) * nz);
  for (int kx = 0; kx <= kmax; ++kx) {
    for (int i = 0; i < nx; ++i) {
      cx[kx * nx + i] = std::cos(kx * grid.x(i));
      sx[kx * nx + i] = std::sin(kx * grid.x(i));
    }
  }
  for (int ky = -kmax; ky <= kmax; ++ky) {
    for (int j = 0; j < ny; ++j) {
      cy[(ky + kmax) * ny + j] = std::cos(ky * grid.y(j));
      sy[(ky + kmax) * ny + j] = std::sin(ky * grid.y(j));
    }
  }
  for (int n = 1; n <= nmax; ++n) {
    for (int k = 0; k < nz; ++k) vz[n * nz + k] = std::sin(n * std::numbers::pi * grid.z(k) / grid.depth());
  }
  Field3 f(grid);
  const double norm = amplitude / std::sqrt(static_cast<double>(modes.size()));
  for (int k = 0; k < nz; ++k) {
    for (int j = 0; j < ny; ++j) {
      for (int i = 0; i < nx; ++i) {
        double sum = 0.0;
        for (const Mode & m : modes) {
          const double ca = cx[m.kx * nx + i], sa = sx[m.kx * nx + i];
          const double cb = cy[(m.ky + kmax) * ny + j], sb = sy[(m.ky + kmax) * ny + j];
          const double cp = ca * cb - sa * sb;
          const double sp = sa * cb + ca * sb;
          sum += (m.c * cp + m.s * sp) * vz[m.n * nz + k];
        }
        f(i, j, k) = norm * sum;
      }
    }
  }
  f.zero_boundaries();
  return f;
}

StateField smooth_state(const Grid & grid, std::uint64_t seed, double amplitude, int kmax, int nmax) {
  Field3 u = smooth_field(grid, seed * 3 + 1, amplitude, kmax, nmax);
  Field3 v = smooth_field(grid, seed * 3 + 2, amplitude, kmax, nmax);
  Field3 t = smooth_field(grid, seed * 3 + 3, amplitude, kmax, nmax);
  return StateField(std::move(u), std::move(v), std::move(t));
}

}  // namespace pedavar
