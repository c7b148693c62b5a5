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

// Type-aware mutation of kernel argument vectors.
//
// Every MutationOp carries all of its parameters, so applying a recorded
// trace needs no randomness: randomness is spent only when an op is drawn.

#ifndef SIMT_FORGE_MUTATION_ENGINE_H_
#define SIMT_FORGE_MUTATION_ENGINE_H_

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "simt_forge/error.h"
#include "simt_forge/kernel_ir.h"
#include "simt_forge/rng.h"

namespace simt_forge {

enum class ElemType : uint8_t { kI32, kF32 };

std::string_view ElemTypeName(ElemType type);

enum class ArrayInit : uint8_t { kIota, kZero, kFill, kList };

// Which kinds of array mutation an argument admits.
enum MutationMask : uint32_t {
  kMutValue = 1 << 0,
  kMutDims = 1 << 1,
  kMutSpace = 1 << 2,
  kMutOffset = 1 << 3,
  kMutAll = kMutValue | kMutDims | kMutSpace | kMutOffset,
};

struct ArgSpec {
  std::string name;
  ScalarType type = ScalarType::kI32;
  bool mutable_arg = true;

  // Scalars. `scalar_default` is the i32 value or the f32 bit pattern.
  uint32_t scalar_default = 0;
  std::optional<std::pair<int32_t, int32_t>> clamp;  // i32 only

  // Arrays.
  MemSpace space = MemSpace::kGlobal;
  ElemType elem = ElemType::kF32;
  std::vector<uint32_t> extents;
  ArrayInit init = ArrayInit::kIota;
  std::vector<uint32_t> init_values;  // fill value or list, as raw bits
  uint32_t mutations = kMutAll;

  uint64_t element_count() const;
};

// Text form of the spec list, hashed into corpus entries.
std::string DescribeArgSpecs(std::span<const ArgSpec> specs);

struct Placement {
  MemSpace space = MemSpace::kGlobal;
  std::optional<uint64_t> size_override;
  int64_t offset = 0;  // bias applied to the base handed to the kernel
  friend bool operator==(const Placement&, const Placement&) = default;
};

struct ArrayValue {
  ElemType elem = ElemType::kF32;
  std::vector<uint8_t> bytes;
  std::vector<uint32_t> extents;
  Placement placement;

  uint64_t element_count() const;
  uint64_t alloc_size() const {
    return placement.size_override.value_or(bytes.size());
  }
  friend bool operator==(const ArrayValue&, const ArrayValue&) = default;
};

struct TypedValue {
  ScalarType type = ScalarType::kI32;
  uint32_t scalar = 0;  // i32 value or f32 bits
  ArrayValue array;     // kPtr only

  static TypedValue I32(int32_t v);
  static TypedValue F32Bits(uint32_t bits);
  static TypedValue Array(ArrayValue value);
  int32_t i32() const { return static_cast<int32_t>(scalar); }
  friend bool operator==(const TypedValue&, const TypedValue&) = default;
};

enum class Boundary : uint8_t { kZero, kMax, kMin };

struct IntBoundary { Boundary which = Boundary::kZero; };
struct IntByteLevel { uint32_t xor_mask = 0; int32_t add = 0; };
struct FloatSign {};
struct FloatMantissa { uint32_t mask = 0; };  // bits 0..22
struct FloatExponent { uint32_t mask = 0; };  // bits 23..30
struct FloatArith { uint32_t delta_bits = 0; bool subtract = false; };
struct ArrayValueExtreme { Boundary pattern = Boundary::kMax; };
struct ArrayDimension { std::vector<uint32_t> extents; };
struct ArrayEmpty {};
struct PointerSpaceSwap { MemSpace target = MemSpace::kShared; };
struct PointerOffset { int64_t bytes = 0; };
// Generic byte-level op on array payloads.
struct ArrayElementFlip { uint32_t byte = 0; uint8_t mask = 0; };

using MutationOp =
    std::variant<IntBoundary, IntByteLevel, FloatSign, FloatMantissa,
                 FloatExponent, FloatArith, ArrayValueExtreme, ArrayDimension,
                 ArrayEmpty, PointerSpaceSwap, PointerOffset, ArrayElementFlip>;

bool IsTypeAware(const MutationOp& op);
std::string_view MutationOpName(const MutationOp& op);

struct AppliedMutation {
  uint32_t arg = 0;
  MutationOp op;
};

std::string FormatMutation(const AppliedMutation& m);
StatusOr<AppliedMutation> ParseMutation(std::string_view text);

int32_t MutateInt(int32_t v, const MutationOp& op);
uint32_t MutateFloat(uint32_t bits, const MutationOp& op);
ArrayValue MutateArray(const ArrayValue& v, const ArgSpec& spec,
                       const MutationOp& op);

struct TestCase {
  std::vector<TypedValue> args;
  uint64_t rng_seed = 0;
  std::string parent_id;  // empty for seeds
  std::vector<AppliedMutation> trace;
};

// Default arguments declared by the specs.
TestCase SeedTestCase(std::span<const ArgSpec> specs);
// A random point of the declared valid domain: clamped scalars, arrays of
// declared shape and placement with random element values.
TestCase RandomValidTestCase(std::span<const ArgSpec> specs, CounterRng& rng);

// Forces an IntBoundary op (cycling ZERO, MAX, MIN) on every
// `boundary_period`-th mutation of each integer argument.
class MutationSchedule {
 public:
  explicit MutationSchedule(uint32_t boundary_period = 16)
      : period_(boundary_period) {}

  std::optional<Boundary> NextIntMutation(uint32_t arg);

 private:
  uint32_t period_;
  std::vector<uint64_t> int_mutations_;
};

struct MutationWeights {
  uint32_t type_aware_percent = 40;
  uint32_t max_args = 3;
};

// Draws one op appropriate for `spec`. Returns nullopt when the argument
// admits no mutation.
std::optional<MutationOp> DrawOp(const ArgSpec& spec, const TypedValue& value,
                                 uint32_t arg, MutationSchedule& schedule,
                                 const MutationWeights& weights,
                                 CounterRng& rng);

// Applies `op` to `value`, then the spec's clamp.
TypedValue ApplyMutation(const TypedValue& value, const ArgSpec& spec,
                         const MutationOp& op);

TestCase MutateTestCase(const TestCase& parent, std::string_view parent_id,
                        std::span<const ArgSpec> specs,
                        MutationSchedule& schedule, uint64_t seed,
                        const MutationWeights& weights = {});

// Re-applies `trace` to parent args.
StatusOr<std::vector<TypedValue>> ReplayTrace(
    std::span<const TypedValue> parent, std::span<const ArgSpec> specs,
    std::span<const AppliedMutation> trace);

// Versioned corpus entry text; its ContentHash names the file.
std::string SerializeTestCase(const TestCase& tc,
                              std::span<const ArgSpec> specs);
StatusOr<TestCase> ParseTestCase(std::string_view text,
                                 std::string* argspec_digest = nullptr);
std::string TestCaseId(const TestCase& tc, std::span<const ArgSpec> specs);

}  // namespace simt_forge

#endif  // SIMT_FORGE_MUTATION_ENGINE_H_
