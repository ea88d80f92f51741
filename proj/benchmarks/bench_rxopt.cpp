// Copyright 2026 The rxopt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <benchmark/benchmark.h>

#include "rxopt/estimators.hpp"
#include "rxopt/models.hpp"
#include "rxopt/numcore/quadrature.hpp"
#include "rxopt/theory.hpp"

namespace {

using namespace rxopt;

Dataset bench_data(Eigen::Index n, Eigen::Index d) {
  SeedStream rng(1, 0);
  return sample_dataset(SignalSpec::linear_map(Vector::Ones(d), 0.1), DesignSpec::standard(d), n, rng);
}

void BM_SampleDataset(benchmark::State& state) {
  const auto n = static_cast<Eigen::Index>(state.range(0));
  SeedStream rng(2, 0);
  const SignalSpec s = SignalSpec::piecewise_k(0.2, 0.1);
  for (auto _ : state) benchmark::DoNotOptimize(sample_dataset(s, DesignSpec::standard(1), n, rng));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_SampleDataset)->Arg(1000)->Arg(100000);

void BM_FitOls(benchmark::State& state) {
  const Dataset d = bench_data(1000, state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(fit_ols(d));
}
BENCHMARK(BM_FitOls)->Arg(1)->Arg(10)->Arg(50);

void BM_FitLowRank(benchmark::State& state) {
  const Dataset d = bench_data(1000, 20);
  for (auto _ : state) benchmark::DoNotOptimize(fit_low_rank(d, state.range(0)));
}
BENCHMARK(BM_FitLowRank)->Arg(2)->Arg(10);

void BM_FitKrrNtk(benchmark::State& state) {
  const Dataset d = bench_data(state.range(0), 1);
  SeedStream rng(3, 0);
  const NtkKernel k = random_ntk_kernel(1, 50, rng);
  for (auto _ : state) benchmark::DoNotOptimize(fit_krr(d, k, 1.0));
}
BENCHMARK(BM_FitKrrNtk)->Arg(100)->Arg(400);

void BM_FitMlpEpochs(benchmark::State& state) {
  const Dataset d = bench_data(200, 1);
  Mlp spec;
  spec.epochs = static_cast<int>(state.range(0));
  for (auto _ : state) {
    SeedStream rng(4, 0);
    benchmark::DoNotOptimize(fit_mlp(d, spec, rng));
  }
}
BENCHMARK(BM_FitMlpEpochs)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_GaussHermiteRule(benchmark::State& state) {
  const auto order = static_cast<unsigned>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(gauss_hermite(order));
}
BENCHMARK(BM_GaussHermiteRule)->Arg(20)->Arg(40)->Arg(100);

void BM_Thm1Quadrature(benchmark::State& state) {
  const SignalSpec s = SignalSpec::exp_bump(1.0, 0.5, 0.1);
  SeedStream rng(5, 0);
  const PopulationMoments pm = population_moments(s, DesignSpec::standard(1), EvalMethod::Quadrature, 1000, rng);
  const EvalSample q = quadrature_sample(s, DesignSpec::standard(1));
  for (auto _ : state) benchmark::DoNotOptimize(thm1_optimism(pm, 1000, q));
}
BENCHMARK(BM_Thm1Quadrature);

void BM_McOptimismCell(benchmark::State& state) {
  const SignalSpec s = SignalSpec::piecewise_k(0.0, 0.01);
  for (auto _ : state) {
    benchmark::DoNotOptimize(mc_optimism(s, DesignSpec::standard(1), Ols{}, 1000, 1000, state.range(0), 7));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_McOptimismCell)->Arg(100)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
