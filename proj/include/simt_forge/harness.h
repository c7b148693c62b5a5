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

// Phase-split harness manifests and the host-op interpreter that runs one
// phase against a device image.
//
// Manifest grammar, one directive per line, `#` starts a comment:
//
//   program <path>                      relative to the manifest
//   arg <name> i32 [default=V] [clamp=LO..HI] [fixed]
//   arg <name> f32 [default=V] [fixed]
//   arg <name> ptr.<space> <i32|f32> <extents, e.g. 32 or 2x4>
//       [init=iota|zero|fill:V|list:V,V,...] [mut=value,dims,space,offset|none]
//   reference <benchmark>               differential oracle name
//   trigger <name>=V | <name>.space=S | <name>.offset=B | <name>.extents=E
//   expect <BUG_CLASS>
//   [INIT] | [COMPUTE] | [TERM]
//
// Host ops inside a phase:
//
//   ALLOC <name> <GLOBAL|SHARED|LOCAL> <bytes>
//   ALLOC <name> arg <k>                shaped and placed by test-case arg k
//   COPY_IN <name> inline <hex> | zero <bytes> | arg <k>
//   LAUNCH <kernel> grid=<g> block=<b> <binding>...
//       binding: arg:<k> | @<name> | i32:<v> | f32:<v>
//   COPY_OUT <name> <bytes|all>
//   FREE <name>
//   SYNC

#ifndef SIMT_FORGE_HARNESS_H_
#define SIMT_FORGE_HARNESS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "simt_forge/coverage.h"
#include "simt_forge/device_memory.h"
#include "simt_forge/error.h"
#include "simt_forge/kernel_ir.h"
#include "simt_forge/mutation_engine.h"
#include "simt_forge/sanitizer.h"
#include "simt_forge/simt_executor.h"

namespace simt_forge {

struct Binding {
  enum class Kind : uint8_t { kArg, kNamed, kI32, kF32 };
  Kind kind = Kind::kArg;
  uint32_t arg = 0;
  std::string name;
  uint32_t bits = 0;  // literal value or f32 bit pattern
};

struct HostOpSpec {
  enum class Kind : uint8_t { kAlloc, kCopyIn, kLaunch, kCopyOut, kFree, kSync };
  enum class Source : uint8_t { kInline, kZero, kArg };

  Kind kind = Kind::kSync;
  int line = 0;
  std::string name;
  // ALLOC
  MemSpace space = MemSpace::kGlobal;
  uint64_t size = 0;
  std::optional<uint32_t> arg;  // ALLOC/COPY_IN from a test-case arg
  // COPY_IN
  Source source = Source::kInline;
  std::vector<uint8_t> payload;
  // LAUNCH
  std::string kernel;
  uint32_t grid = 1;
  uint32_t block = 1;
  std::vector<Binding> bindings;
  // COPY_OUT; nullopt copies the whole allocation
  std::optional<uint64_t> length;
};

struct Phase {
  std::string name;
  std::vector<HostOpSpec> ops;
};

struct Trigger {
  std::string arg;
  std::string field;  // empty, "space", "offset" or "extents"
  std::string value;
};

struct HarnessManifest {
  std::string path;
  std::string program_path;
  std::string manifest_digest;
  std::string program_text;  // reloaded by the re-INIT campaign mode
  Program program;
  std::vector<ArgSpec> args;
  Phase init{"INIT", {}};
  Phase compute{"COMPUTE", {}};
  Phase term{"TERM", {}};
  std::vector<Trigger> triggers;
  std::optional<BugClass> expect;
  std::string reference;

  const std::string& program_digest() const { return program.source_digest; }
  size_t compute_launches() const;
};

// `base_dir` resolves the program path. `program_override`, when given, is
// used instead of reading the program file.
StatusOr<HarnessManifest> ParseManifest(
    std::string_view text, const std::string& base_dir,
    const Program* program_override = nullptr);
StatusOr<HarnessManifest> LoadHarness(const std::string& path);

// The seed test case with the manifest's trigger overrides applied.
StatusOr<TestCase> TriggerTestCase(const HarnessManifest& manifest);

// Device names bound by ALLOC ops, carried from phase to phase.
struct NamedAlloc {
  uint64_t address = 0;
  AllocId id = kNoAlloc;
  MemSpace space = MemSpace::kGlobal;
  std::optional<uint32_t> arg;
  uint64_t size = 0;
};
using NameTable = std::map<std::string, NamedAlloc>;

struct PhaseContext {
  const HarnessManifest* manifest = nullptr;
  const Program* program = nullptr;  // defaults to manifest->program
  CoverageMap* coverage = nullptr;   // optional delta to record into
  bool sanitize = true;
  bool copy_out = true;
  uint64_t iteration = 0;
  uint64_t instruction_budget = kDefaultInstructionBudget;
  std::ostream* trace = nullptr;
};

struct PhaseOutcome {
  std::optional<BugReport> bug;
  bool budget_exhausted = false;
  uint64_t launches = 0;
  uint64_t retired = 0;
  std::vector<std::pair<std::string, std::vector<uint8_t>>> outputs;
};

// Applies the phase's host ops in order, stopping at the first finding.
// Device-memory failures such as OutOfDeviceMemory are returned as errors.
StatusOr<PhaseOutcome> RunPhase(const PhaseContext& ctx, const Phase& phase,
                                DeviceMemoryImage& image, NameTable& names,
                                const TestCase& tc);

}  // namespace simt_forge

#endif  // SIMT_FORGE_HARNESS_H_
