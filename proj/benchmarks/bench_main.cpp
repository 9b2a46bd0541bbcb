/*
 * Copyright (c) 2026 The mrc Authors. All Rights Reserved
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *      http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <benchmark/benchmark.h>

#include <cmath>

#include "mrc/act_lra.hpp"
#include "mrc/allocator.hpp"
#include "mrc/compensation.hpp"
#include "mrc/linalg.hpp"
#include "mrc/model.hpp"
#include "mrc/random.hpp"

namespace {

void BM_Svd(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  mrc::Rng rng(1);
  const auto m = mrc::gaussian_matrix(rng, n, n);
  for (auto _ : state) benchmark::DoNotOptimize(mrc::svd(m));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_Svd)->RangeMultiplier(2)->Range(16, 128)->Complexity();

void BM_Allocate(benchmark::State& state) {
  const auto layers = static_cast<std::size_t>(state.range(0));
  std::vector<mrc::LayerShape> shapes(layers, {64, 64});
  std::vector<mrc::SingularSpectrum> spectra(layers);
  for (std::size_t l = 0; l < layers; ++l) {
    for (std::size_t i = 0; i < 64; ++i) {
      const double s = std::pow(0.9 + 0.01 * static_cast<double>(l % 5), i);
      spectra[l].sigma.push_back(s);
      spectra[l].total_energy += s * s;
    }
  }
  for (auto _ : state) benchmark::DoNotOptimize(mrc::allocate(shapes, spectra, 2.0, {}));
}
BENCHMARK(BM_Allocate)->Arg(4)->Arg(16)->Arg(64);

void BM_Compensate(benchmark::State& state) {
  mrc::SyntheticSpec spec;
  spec.layers = 1;
  spec.n = static_cast<std::size_t>(state.range(0));
  spec.d = spec.n;
  spec.samples = 64;
  const auto model = mrc::gen_synthetic(spec);
  const auto& layer = model.layers[0];
  const auto& samples = model.proxy.stacks[0].samples;
  const auto x_rep = mrc::representative_input(model.proxy, layer.name);
  const auto factors = mrc::factorize(layer, x_rep, spec.n / 2);
  mrc::GdConfig cfg;
  cfg.iterations = 200;
  for (auto _ : state) {
    benchmark::DoNotOptimize(mrc::compensate(layer, factors, samples, 2, cfg));
  }
}
BENCHMARK(BM_Compensate)->Arg(32)->Arg(64)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
