// Copyright 2026 The qlbi Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include <numbers>

#include "qlbi/estimate.h"
#include "qlbi/fisher.h"
#include "qlbi/rng.h"

namespace {

qlbi::ApertureConfig aperture() { return qlbi::ApertureConfig::from_ratio(2.0 * std::numbers::pi, 2.0); }

void BM_BuildBasis(benchmark::State& state) {
  const auto a = aperture();
  const auto K = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(qlbi::build_basis(a, K, qlbi::BasisKind::kPsfAdapted));
}
BENCHMARK(BM_BuildBasis)->Arg(1)->Arg(2)->Arg(4)->Arg(8)->Unit(benchmark::kMicrosecond);

void BM_Cfi(benchmark::State& state) {
  const auto a = aperture();
  const auto b = qlbi::build_basis(a, static_cast<std::size_t>(state.range(0)), qlbi::BasisKind::kPsfAdapted);
  for (auto _ : state) benchmark::DoNotOptimize(qlbi::cfi(a, b, 0.1 * a.sigma()));
}
BENCHMARK(BM_Cfi)->Arg(2)->Arg(8)->Unit(benchmark::kMicrosecond);

void BM_DefaultChart(benchmark::State& state) {
  qlbi::ChartSpec spec;
  spec.threads = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(qlbi::ratio_chart(spec));
}
BENCHMARK(BM_DefaultChart)->Arg(1)->Unit(benchmark::kMillisecond)->Iterations(3);

void BM_MleSolve(benchmark::State& state) {
  qlbi::EstimationConfig c;
  c.aperture = aperture();
  c.basis = qlbi::build_basis(c.aperture, 2, qlbi::BasisKind::kPsfAdapted);
  const qlbi::MleSolver solver(c);
  qlbi::Rng rng(3);
  const auto counts = qlbi::sample_photons(c, 0.1 * c.aperture.sigma(), 10000, rng);
  for (auto _ : state) benchmark::DoNotOptimize(solver.solve(counts));
}
BENCHMARK(BM_MleSolve)->Unit(benchmark::kMicrosecond);

}  // namespace

BENCHMARK_MAIN();
