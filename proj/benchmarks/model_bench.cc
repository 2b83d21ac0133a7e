/*
 * (C) Copyright 2026 The pedavar Authors.
 *
 * This software is licensed under the terms of the Apache Licence Version 2.0
 * which can be obtained at http://www.apache.org/licenses/LICENSE-2.0.
 */

#include <benchmark/benchmark.h>

#include <random>

#include "pedavar/dynamics.h"
#include "pedavar/random_fields.h"
#include "pedavar/tlm_adjoint.h"

namespace pedavar {
namespace {

// Square grids n x n x 9, the twin-experiment shape at n = 32.
Model make_model(int n) {
  const Grid g(n, n, 9);
  ModelConfig cfg;
  cfg.dt = 0.01;
  cfg.forcing = Forcing::wind(g, 0.05);
  return Model(g, cfg);
}

void BM_Tendency(benchmark::State & state) {
  const Model model = make_model(static_cast<int>(state.range(0)));
  const StateField x = model.constrain(smooth_state(model.grid(), 1, 0.5, 3, 2));
  for (auto _ : state) benchmark::DoNotOptimize(model.tendency(x));
}
BENCHMARK(BM_Tendency)->Arg(16)->Arg(32)->Arg(64);

void BM_Step(benchmark::State & state) {
  const Model model = make_model(static_cast<int>(state.range(0)));
  const StateField x = model.constrain(smooth_state(model.grid(), 1, 0.5, 3, 2));
  for (auto _ : state) benchmark::DoNotOptimize(model.step(x));
}
BENCHMARK(BM_Step)->Arg(16)->Arg(32)->Arg(64);

void BM_Projection(benchmark::State & state) {
  const Model model = make_model(static_cast<int>(state.range(0)));
  const StateField x = smooth_state(model.grid(), 2, 0.5, 3, 2);
  for (auto _ : state) benchmark::DoNotOptimize(model.constrain(x));
}
BENCHMARK(BM_Projection)->Arg(32)->Arg(64);

// One tangent-linear and one adjoint step with 50 floats.
struct LinearFixture {
  explicit LinearFixture(int n)
    : model(make_model(n)),
      ckpt(make_checkpoints(model, model.constrain(smooth_state(model.grid(), 3, 0.5, 3, 2)), floats(), 1)),
      lin(model, ckpt) {}

  static FloatSet floats() {
    FloatSet fs;
    fs.z0 = 0.5;
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> pos(0.0, 6.28);
    for (int j = 0; j < 50; ++j) {
      fs.ids.push_back(j);
      fs.positions.push_back({pos(rng), pos(rng)});
    }
    return fs;
  }

  StateAndFloats random(std::uint64_t seed) const {
    std::mt19937_64 rng(seed);
    return {white_noise_state(model.grid(), rng), std::vector<Vec2>(50, Vec2{0.1, -0.1})};
  }

  Model model;
  Checkpoints ckpt;
  LinearizedModel lin;
};

void BM_TlmStep(benchmark::State & state) {
  const LinearFixture f(static_cast<int>(state.range(0)));
  const TangentState d = f.random(5);
  for (auto _ : state) benchmark::DoNotOptimize(f.lin.tlm_step(0, d));
}
BENCHMARK(BM_TlmStep)->Arg(16)->Arg(32);

void BM_AdjStep(benchmark::State & state) {
  const LinearFixture f(static_cast<int>(state.range(0)));
  const AdjointState l = f.random(6);
  for (auto _ : state) benchmark::DoNotOptimize(f.lin.adj_step(0, l));
}
BENCHMARK(BM_AdjStep)->Arg(16)->Arg(32);

}  // namespace
}  // namespace pedavar

// The distribution's benchmark_main archive is LTO bytecode from another compiler.
BENCHMARK_MAIN();
