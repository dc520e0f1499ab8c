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

#include <vector>

#include "qlbi/statevec.h"

namespace {

using qlbi::Gate;
using qlbi::SparseState;

// GHZ-style state over n qubits: H then a CNOT ladder.
SparseState ladder(std::size_t n) {
  std::vector<Gate> gates{Gate::h(0)};
  for (std::size_t q = 1; q < n; ++q) gates.push_back(Gate::cnot(q - 1, q));
  return qlbi::apply_gates(SparseState(n), gates);
}

void BM_HadamardFanout(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    SparseState s(n);
    for (std::size_t q = 0; q < n; ++q) s = qlbi::apply_gate(s, Gate::h(q));
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_HadamardFanout)->DenseRange(4, 14, 2);

void BM_CnotLadder(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(ladder(n));
}
BENCHMARK(BM_CnotLadder)->Arg(16)->Arg(64)->Arg(256);

void BM_CzOnWideRegister(benchmark::State& state) {
  const auto s = ladder(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(qlbi::apply_gate(s, Gate::cz(0, 1)));
}
BENCHMARK(BM_CzOnWideRegister)->Arg(64)->Arg(512);

}  // namespace

BENCHMARK_MAIN();
