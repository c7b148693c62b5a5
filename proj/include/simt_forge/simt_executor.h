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

// Deterministic interpreter for kernel launches. Threads of a launch run one
// after another, block-major then thread-major, each to completion. Every
// load/store and every block transition is reported to an ExecHooks
// instance before it takes effect.

#ifndef SIMT_FORGE_SIMT_EXECUTOR_H_
#define SIMT_FORGE_SIMT_EXECUTOR_H_

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "simt_forge/device_memory.h"
#include "simt_forge/error.h"
#include "simt_forge/kernel_ir.h"
#include "simt_forge/sanitizer.h"

namespace simt_forge {

// One kernel argument as handed to a launch. `bits` holds the i32 value, the
// f32 bit pattern or the device address.
struct KernelArg {
  ScalarType type = ScalarType::kI32;
  uint64_t bits = 0;
  AllocId tag = kNoAlloc;  // PTR only

  static KernelArg I32(int32_t v);
  static KernelArg F32Bits(uint32_t bits);
  static KernelArg F32(float v);
  static KernelArg Ptr(uint64_t address, AllocId tag = kNoAlloc);
};

inline constexpr uint64_t kDefaultInstructionBudget = 1'000'000;

struct LaunchConfig {
  std::string kernel;
  uint32_t grid_dim = 1;
  uint32_t block_dim = 1;
  std::vector<KernelArg> args;
  uint64_t instruction_budget = kDefaultInstructionBudget;  // per thread
};

struct MemAccessEvent {
  const KernelDef* kernel = nullptr;
  uint32_t instruction = 0;
  MemSpace space = MemSpace::kGlobal;
  uint64_t address = 0;
  uint32_t width = 0;
  AllocId provenance = kNoAlloc;
  bool is_store = false;
  uint32_t ctaid = 0;
  uint32_t tid = 0;
};

class ExecHooks {
 public:
  virtual ~ExecHooks() = default;
  virtual void OnLaunch(const KernelDef& /*kernel*/) {}
  virtual void OnMemAccess(const MemAccessEvent& /*event*/) {}
  virtual void OnControlFlow(const KernelDef& /*kernel*/, uint32_t /*src_bb*/,
                             uint32_t /*dst_bb*/) {}
};

struct ExecOptions {
  bool sanitize = true;
  std::ostream* trace = nullptr;  // `EV ...` lines when set
  uint64_t iteration = 0;         // stamped into bug reports
};

enum class ExecStatus : uint8_t { kCompleted, kSanitizerStop, kBudgetExhausted };

std::string_view ExecStatusName(ExecStatus status);

struct ExecOutcome {
  ExecStatus status = ExecStatus::kCompleted;
  std::optional<BugReport> bug;  // set iff kSanitizerStop
  uint64_t retired = 0;          // summed over threads
};

struct ThreadCtx {
  uint32_t ctaid = 0;
  uint32_t tid = 0;
  uint32_t ntid = 1;
  uint32_t nctaid = 1;
  std::vector<uint32_t> r;    // i32 registers
  std::vector<uint32_t> f;    // f32 registers, as bits
  std::vector<uint8_t> p;     // predicates
  std::vector<uint64_t> a;    // addresses
  std::vector<AllocId> tags;  // provenance of each address register
  uint32_t pc = 0;
  uint64_t retired = 0;

  // Zeroes the register file and moves to thread (ctaid, tid).
  void Reset(const KernelDef& kernel, uint32_t ctaid, uint32_t tid);
};

int32_t ReadSpecial(const ThreadCtx& ctx, SpecialReg sreg);

enum class StepResult : uint8_t { kContinue, kExited, kStopped };

struct StepEnv {
  const KernelDef* kernel = nullptr;
  std::span<const KernelArg> args;
  DeviceMemoryImage* image = nullptr;
  ExecHooks* hooks = nullptr;
  const ExecOptions* options = nullptr;
  std::optional<BugReport>* bug = nullptr;  // receives a stop's report
};

// Executes the instruction at ctx.pc.
StepResult Step(const StepEnv& env, ThreadCtx& ctx);

StatusOr<ExecOutcome> Launch(const Program& program, DeviceMemoryImage& image,
                             const LaunchConfig& config, ExecHooks& hooks,
                             const ExecOptions& options = {});

// Independent launches over private images, e.g. a batch of test inputs.
struct BatchJob {
  DeviceMemoryImage* image = nullptr;
  LaunchConfig config;
};

// Runs each job on its own image. The parallel version spreads jobs over
// OpenMP threads; results match the serial reference exactly.
std::vector<StatusOr<ExecOutcome>> LaunchBatch(const Program& program,
                                               std::span<BatchJob> jobs,
                                               const ExecOptions& options = {});
std::vector<StatusOr<ExecOutcome>> LaunchBatchSerial(
    const Program& program, std::span<BatchJob> jobs,
    const ExecOptions& options = {});

}  // namespace simt_forge

#endif  // SIMT_FORGE_SIMT_EXECUTOR_H_
