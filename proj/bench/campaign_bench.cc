// Copyright 2026 The SIMT Forge Authors.
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


// Throughput comparisons: amortized vs re-INIT campaigns, and the OpenMP
// batch launcher vs its serial reference.

#include <cstdint>
#include <string>
#include <vector>

#include <benchmark/benchmark.h>

#include "simt_forge/bench_corpus.h"
#include "simt_forge/fuzz_campaign.h"
#include "simt_forge/simt_executor.h"

namespace simt_forge {
namespace {

HarnessManifest LoadOrDie(const std::string& name) {
  StatusOr<BenchmarkEntry> e = FindBenchmark(name);
  if (!e.ok()) std::abort();
  StatusOr<HarnessManifest> m = LoadHarness(e->harness_path);
  if (!m.ok()) std::abort();
  return *std::move(m);
}

void BM_Campaign(benchmark::State& state, bool amortize) {
  HarnessManifest m = LoadOrDie("axpy");
  CampaignConfig config;
  config.amortize = amortize;
  config.max_iterations = static_cast<uint64_t>(state.range(0));
  for (auto _ : state) {
    StatusOr<CampaignSummary> s = FuzzLoop(m, config);
    if (!s.ok()) state.SkipWithError(s.status().ToString().c_str());
    benchmark::DoNotOptimize(s);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK_CAPTURE(BM_Campaign, amortized, true)->Arg(500);
BENCHMARK_CAPTURE(BM_Campaign, reinit, false)->Arg(500);

struct BatchFixture {
  Program program;
  std::vector<DeviceMemoryImage> images;
  std::vector<BatchJob> jobs;
};

BatchFixture MakeBatch(int jobs) {
  StatusOr<BenchmarkEntry> e = FindBenchmark("nrm2");
  StatusOr<Program> p = LoadProgramFile(e->kernel_path);
  if (!p.ok()) std::abort();
  BatchFixture f{*std::move(p), std::vector<DeviceMemoryImage>(jobs), {}};
  for (int i = 0; i < jobs; ++i) {
    DeviceMemoryImage& img = f.images[i];
    Allocation x = *img.Alloc(MemSpace::kGlobal, 4096);
    Allocation out = *img.Alloc(MemSpace::kGlobal, 4 * kBenchThreads);
    std::vector<uint8_t> bytes(4096, static_cast<uint8_t>(i));
    (void)img.CopyIn(x.address, bytes);
    f.jobs.push_back({&img, LaunchConfig{"nrm2", 2, 4,
                                         {KernelArg::Ptr(x.address, x.id),
                                          KernelArg::I32(1024),
                                          KernelArg::Ptr(out.address, out.id)}}});
  }
  return f;
}

void BM_Batch(benchmark::State& state, bool parallel) {
  BatchFixture f = MakeBatch(static_cast<int>(state.range(0)));
  for (auto _ : state) {
    auto r = parallel ? LaunchBatch(f.program, f.jobs)
                      : LaunchBatchSerial(f.program, f.jobs);
    benchmark::DoNotOptimize(r);
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK_CAPTURE(BM_Batch, openmp, true)->Arg(64);
BENCHMARK_CAPTURE(BM_Batch, serial, false)->Arg(64);

}  // namespace
}  // namespace simt_forge

BENCHMARK_MAIN();
