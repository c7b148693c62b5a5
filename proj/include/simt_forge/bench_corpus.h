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

// Bundled BLAS level-1 kernels with clean and seeded-bug harnesses.
//
// Every kernel runs on a 2x4 grid. Thread g = ctaid * ntid + tid visits
// elements g, g + 8, g + 16, ... in increasing order, and reductions store
// the per-thread partial in out[g]. The scalar references below follow the
// same order, so results agree bit for bit.

#ifndef SIMT_FORGE_BENCH_CORPUS_H_
#define SIMT_FORGE_BENCH_CORPUS_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "simt_forge/error.h"
#include "simt_forge/fuzz_campaign.h"
#include "simt_forge/harness.h"
#include "simt_forge/mutation_engine.h"
#include "simt_forge/sanitizer.h"

namespace simt_forge {

inline constexpr uint32_t kBenchThreads = 8;

struct BenchmarkVariant {
  std::optional<BugClass> bug_class;  // nullopt for the clean harness
  std::string harness_path;
  std::string trigger_note;
};

struct BenchmarkEntry {
  std::string name;
  std::string dir;
  std::string kernel_path;
  std::string harness_path;
  std::vector<BenchmarkVariant> variants;  // clean first

  std::vector<const BenchmarkVariant*> seeded() const;
};

// SIMT_FORGE_BENCH_DIR if set, else the source tree's benchmarks/.
std::string BenchmarkRoot();

std::vector<BenchmarkEntry> ListBenchmarks(
    const std::string& root = BenchmarkRoot());
StatusOr<BenchmarkEntry> FindBenchmark(
    std::string_view name, const std::string& root = BenchmarkRoot());

using NamedOutputs = std::vector<std::pair<std::string, std::vector<uint8_t>>>;

// Scalar reference for the clean harness of `name`. `args` follow that
// harness's argument order; the result lists the COPY_OUT buffers in order.
StatusOr<NamedOutputs> ReferenceResult(std::string_view name,
                                       std::span<const TypedValue> args);

// Describes the first byte-level difference, or nullopt when equal.
std::optional<std::string> CompareOutputs(const NamedOutputs& expected,
                                          const NamedOutputs& actual);

// Checker comparing COMPUTE outputs with the manifest's `reference`.
StatusOr<DiffChecker> MakeDiffChecker(const HarnessManifest& manifest);

// Copies benchmarks/<name> into `dest`/<name>.
Status ExportBenchmark(std::string_view name, const std::string& dest,
                       const std::string& root = BenchmarkRoot());

}  // namespace simt_forge

#endif  // SIMT_FORGE_BENCH_CORPUS_H_
