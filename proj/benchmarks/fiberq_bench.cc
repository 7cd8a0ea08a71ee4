// Copyright 2026 The fiberq Authors
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

#include <numbers>

#include <benchmark/benchmark.h>

#include "fiberq/clifford.h"
#include "fiberq/compiler.h"
#include "fiberq/experiments.h"
#include "fiberq/presets.h"
#include "fiberq/waveform.h"

namespace fq = fiberq;

namespace {

fq::Circuit random_cliffords(int n, int site) {
  fq::Circuit c;
  for (int g : fq::rb_sequence(1, site, 0, n)) c.add(site, fq::GateOp::clifford(g));
  return c;
}

void BM_EvolveSegment(benchmark::State& state) {
  const fq::DriveTone tone{47.2e3, 0.3, 120.0, 1.01};
  fq::QubitState s = fq::QubitState::ground();
  for (auto _ : state) {
    s = fq::evolve_segment(s, tone, 5.3e-6);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_EvolveSegment);

void BM_CompileCircuit(benchmark::State& state) {
  const fq::Circuit c = random_cliffords(static_cast<int>(state.range(0)), 7);
  const std::vector<double> rabi(fq::kPaperSites, fq::kPaperRabiFreq);
  for (auto _ : state) {
    benchmark::DoNotOptimize(fq::compile_circuit(c, fq::RamanConfig{}, rabi));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_CompileCircuit)->Arg(16)->Arg(256);

void BM_RenderWaveform(benchmark::State& state) {
  const std::vector<double> rabi(fq::kPaperSites, fq::kPaperRabiFreq);
  const fq::ChannelSchedule s =
      fq::compile_circuit(random_cliffords(8, 2), fq::RamanConfig{}, rabi).at(2);
  for (auto _ : state) benchmark::DoNotOptimize(fq::render_waveform(s, 1e9));
}
BENCHMARK(BM_RenderWaveform);

// One sampled RB point: 100 shots of a 64-Clifford sequence on the fig3 model.
void BM_RbShots(benchmark::State& state) {
  const fq::ExperimentModel m = fq::paper_model("fig3");
  fq::RBSpec spec;
  spec.targets = {7};
  spec.lengths = {64};
  spec.sequences = 1;
  spec.parallel = false;
  std::uint64_t seed = 1;
  for (auto _ : state) benchmark::DoNotOptimize(fq::run_rb(spec, m, {.seed = seed++}));
  state.SetItemsProcessed(state.iterations() * spec.shots);
}
BENCHMARK(BM_RbShots)->Unit(benchmark::kMillisecond);

void BM_VerifyCliffordTable(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(fq::verify_clifford_table());
}
BENCHMARK(BM_VerifyCliffordTable);

}  // namespace

BENCHMARK_MAIN();
