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

#include "simt_forge/mutation_engine.h"

#include <algorithm>
#include <bit>
#include <cstring>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "simt_forge/hash.h"
#include "simt_forge/strings.h"

namespace simt_forge {

namespace {

constexpr uint32_t kSignBit = 0x80000000u;
constexpr uint32_t kExponentBits = 0x7F800000u;
constexpr uint32_t kMantissaBits = 0x007FFFFFu;
constexpr uint32_t kFloatMaxBits = 0x7F7FFFFFu;

// Deltas for value-domain float arithmetic.
constexpr float kFloatDeltas[] = {1.0f, 0.5f, 2.0f, 0.001f, 100.0f, 65536.0f,
                                  1e30f};

uint32_t Product(std::span<const uint32_t> extents) {
  uint64_t n = 1;
  for (uint32_t e : extents) n *= e;
  return static_cast<uint32_t>(std::min<uint64_t>(n, UINT32_MAX));
}

std::string FormatExtents(std::span<const uint32_t> extents) {
  return fmt::format("{}", fmt::join(extents, "x"));
}

std::optional<std::vector<uint32_t>> ParseExtents(std::string_view text) {
  std::vector<uint32_t> out;
  for (std::string_view part : Split(text, 'x')) {
    auto v = ParseUint(part);
    if (!v || *v > UINT32_MAX) return std::nullopt;
    out.push_back(static_cast<uint32_t>(*v));
  }
  if (out.empty()) return std::nullopt;
  return out;
}

std::string_view BoundaryName(Boundary b) {
  switch (b) {
    case Boundary::kZero: return "zero";
    case Boundary::kMax: return "max";
    case Boundary::kMin: return "min";
  }
  return "?";
}

std::optional<Boundary> ParseBoundary(std::string_view s) {
  if (s == "zero") return Boundary::kZero;
  if (s == "max") return Boundary::kMax;
  if (s == "min") return Boundary::kMin;
  return std::nullopt;
}

uint32_t ExtremeBits(ElemType elem, Boundary b) {
  switch (b) {
    case Boundary::kZero: return 0;
    case Boundary::kMax:
      return elem == ElemType::kI32 ? 0x7FFFFFFFu : kFloatMaxBits;
    case Boundary::kMin:
      return elem == ElemType::kI32 ? 0x80000000u : (kFloatMaxBits | kSignBit);
  }
  return 0;
}

// Mask of `count` distinct random bits drawn from [lo, hi].
uint32_t RandomBits(CounterRng& rng, int lo, int hi, int count) {
  uint32_t mask = 0;
  while (std::popcount(mask) < count) {
    mask |= 1u << rng.UniformRange(lo, hi);
  }
  return mask;
}

}  // namespace

std::string_view ElemTypeName(ElemType type) {
  return type == ElemType::kI32 ? "i32" : "f32";
}

uint64_t ArgSpec::element_count() const { return Product(extents); }

uint64_t ArrayValue::element_count() const { return Product(extents); }

TypedValue TypedValue::I32(int32_t v) {
  return TypedValue{ScalarType::kI32, static_cast<uint32_t>(v), {}};
}

TypedValue TypedValue::F32Bits(uint32_t bits) {
  return TypedValue{ScalarType::kF32, bits, {}};
}

TypedValue TypedValue::Array(ArrayValue value) {
  return TypedValue{ScalarType::kPtr, 0, std::move(value)};
}

std::string DescribeArgSpecs(std::span<const ArgSpec> specs) {
  std::string out;
  for (const ArgSpec& s : specs) {
    out += StrCat(s.name, " ", ScalarTypeName(s.type));
    if (!s.mutable_arg) out += " fixed";
    switch (s.type) {
      case ScalarType::kI32:
        out += StrCat(" default=", static_cast<int32_t>(s.scalar_default));
        if (s.clamp) out += StrCat(" clamp=", s.clamp->first, "..", s.clamp->second);
        break;
      case ScalarType::kF32:
        out += fmt::format(" default=0x{:08X}", s.scalar_default);
        break;
      case ScalarType::kPtr:
        out += StrCat(".", MemSpaceName(s.space), " ", ElemTypeName(s.elem), " ",
                      FormatExtents(s.extents), " init=",
                      static_cast<int>(s.init), ":",
                      fmt::format("{:08X}", fmt::join(s.init_values, ",")),
                      " mut=", s.mutations);
        break;
    }
    out += "\n";
  }
  return out;
}

bool IsTypeAware(const MutationOp& op) {
  return !(std::holds_alternative<IntByteLevel>(op) ||
           std::holds_alternative<FloatMantissa>(op) ||
           std::holds_alternative<ArrayElementFlip>(op));
}

std::string_view MutationOpName(const MutationOp& op) {
  static constexpr std::string_view kNames[] = {
      "int_boundary",   "int_byte",     "float_sign",    "float_mantissa",
      "float_exponent", "float_arith",  "array_extreme", "array_dims",
      "array_empty",    "pointer_space", "pointer_offset", "array_flip"};
  return kNames[op.index()];
}

std::string FormatMutation(const AppliedMutation& m) {
  std::string out = StrCat(MutationOpName(m.op), " arg=", m.arg);
  std::visit(
      [&](const auto& op) {
        using T = std::decay_t<decltype(op)>;
        if constexpr (std::is_same_v<T, IntBoundary>) {
          out += StrCat(" which=", BoundaryName(op.which));
        } else if constexpr (std::is_same_v<T, IntByteLevel>) {
          out += fmt::format(" xor=0x{:08X} add={}", op.xor_mask, op.add);
        } else if constexpr (std::is_same_v<T, FloatMantissa> ||
                             std::is_same_v<T, FloatExponent>) {
          out += fmt::format(" mask=0x{:08X}", op.mask);
        } else if constexpr (std::is_same_v<T, FloatArith>) {
          out += fmt::format(" delta=0x{:08X} op={}", op.delta_bits,
                             op.subtract ? "sub" : "add");
        } else if constexpr (std::is_same_v<T, ArrayValueExtreme>) {
          out += StrCat(" pattern=", BoundaryName(op.pattern));
        } else if constexpr (std::is_same_v<T, ArrayDimension>) {
          out += StrCat(" extents=", FormatExtents(op.extents));
        } else if constexpr (std::is_same_v<T, PointerSpaceSwap>) {
          out += StrCat(" space=", MemSpaceName(op.target));
        } else if constexpr (std::is_same_v<T, PointerOffset>) {
          out += StrCat(" bytes=", op.bytes);
        } else if constexpr (std::is_same_v<T, ArrayElementFlip>) {
          out += fmt::format(" byte={} mask=0x{:02X}", op.byte, op.mask);
        }
      },
      m.op);
  return out;
}

StatusOr<AppliedMutation> ParseMutation(std::string_view text) {
  auto bad = [&] {
    return MakeError(ErrorCode::kSyntaxError,
                     StrCat("bad mutation record: ", text));
  };
  std::vector<std::string_view> words = SplitWords(text);
  if (words.size() < 2) return bad();
  std::map<std::string_view, std::string_view> kv;
  for (size_t i = 1; i < words.size(); ++i) {
    const size_t eq = words[i].find('=');
    if (eq == std::string_view::npos) return bad();
    kv[words[i].substr(0, eq)] = words[i].substr(eq + 1);
  }
  auto uint_field = [&](std::string_view key) -> std::optional<uint64_t> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return ParseUint(it->second);
  };
  auto int_field = [&](std::string_view key) -> std::optional<int64_t> {
    auto it = kv.find(key);
    if (it == kv.end()) return std::nullopt;
    return ParseInt(it->second);
  };
  auto arg = uint_field("arg");
  if (!arg) return bad();
  AppliedMutation m;
  m.arg = static_cast<uint32_t>(*arg);
  const std::string_view name = words[0];
  if (name == "int_boundary") {
    auto b = ParseBoundary(kv["which"]);
    if (!b) return bad();
    m.op = IntBoundary{*b};
  } else if (name == "int_byte") {
    auto x = uint_field("xor");
    auto add = int_field("add");
    if (!x || !add) return bad();
    m.op = IntByteLevel{static_cast<uint32_t>(*x), static_cast<int32_t>(*add)};
  } else if (name == "float_sign") {
    m.op = FloatSign{};
  } else if (name == "float_mantissa" || name == "float_exponent") {
    auto mask = uint_field("mask");
    if (!mask) return bad();
    if (name == "float_mantissa") {
      m.op = FloatMantissa{static_cast<uint32_t>(*mask)};
    } else {
      m.op = FloatExponent{static_cast<uint32_t>(*mask)};
    }
  } else if (name == "float_arith") {
    auto delta = uint_field("delta");
    if (!delta || (kv["op"] != "add" && kv["op"] != "sub")) return bad();
    m.op = FloatArith{static_cast<uint32_t>(*delta), kv["op"] == "sub"};
  } else if (name == "array_extreme") {
    auto b = ParseBoundary(kv["pattern"]);
    if (!b) return bad();
    m.op = ArrayValueExtreme{*b};
  } else if (name == "array_dims") {
    auto extents = ParseExtents(kv["extents"]);
    if (!extents) return bad();
    m.op = ArrayDimension{*extents};
  } else if (name == "array_empty") {
    m.op = ArrayEmpty{};
  } else if (name == "pointer_space") {
    auto space = ParseMemSpace(kv["space"]);
    if (!space) return bad();
    m.op = PointerSpaceSwap{*space};
  } else if (name == "pointer_offset") {
    auto bytes = int_field("bytes");
    if (!bytes) return bad();
    m.op = PointerOffset{*bytes};
  } else if (name == "array_flip") {
    auto byte = uint_field("byte");
    auto mask = uint_field("mask");
    if (!byte || !mask || *mask > 0xFF) return bad();
    m.op = ArrayElementFlip{static_cast<uint32_t>(*byte),
                            static_cast<uint8_t>(*mask)};
  } else {
    return bad();
  }
  return m;
}

int32_t MutateInt(int32_t v, const MutationOp& op) {
  if (const auto* b = std::get_if<IntBoundary>(&op)) {
    switch (b->which) {
      case Boundary::kZero: return 0;
      case Boundary::kMax: return std::numeric_limits<int32_t>::max();
      case Boundary::kMin: return std::numeric_limits<int32_t>::min();
    }
  }
  if (const auto* bl = std::get_if<IntByteLevel>(&op)) {
    const uint32_t x = (static_cast<uint32_t>(v) ^ bl->xor_mask) +
                       static_cast<uint32_t>(bl->add);
    return static_cast<int32_t>(x);
  }
  return v;
}

uint32_t MutateFloat(uint32_t bits, const MutationOp& op) {
  if (std::holds_alternative<FloatSign>(op)) return bits ^ kSignBit;
  if (const auto* m = std::get_if<FloatMantissa>(&op)) {
    return bits ^ (m->mask & kMantissaBits);
  }
  if (const auto* e = std::get_if<FloatExponent>(&op)) {
    return bits ^ (e->mask & kExponentBits);
  }
  if (const auto* a = std::get_if<FloatArith>(&op)) {
    const float x = std::bit_cast<float>(bits);
    const float d = std::bit_cast<float>(a->delta_bits);
    return std::bit_cast<uint32_t>(a->subtract ? x - d : x + d);
  }
  return bits;
}

ArrayValue MutateArray(const ArrayValue& v, const ArgSpec& /*spec*/,
                       const MutationOp& op) {
  ArrayValue out = v;
  std::visit(
      [&](const auto& o) {
        using T = std::decay_t<decltype(o)>;
        if constexpr (std::is_same_v<T, ArrayValueExtreme>) {
          const uint32_t bits = ExtremeBits(out.elem, o.pattern);
          for (size_t i = 0; i + 4 <= out.bytes.size(); i += 4) {
            std::memcpy(&out.bytes[i], &bits, 4);
          }
        } else if constexpr (std::is_same_v<T, ArrayDimension>) {
          out.extents = o.extents;
          out.bytes.resize(static_cast<size_t>(Product(o.extents)) * 4, 0);
        } else if constexpr (std::is_same_v<T, ArrayEmpty>) {
          out.extents = {0};
          out.bytes.clear();
        } else if constexpr (std::is_same_v<T, PointerSpaceSwap>) {
          out.placement.space = o.target;
        } else if constexpr (std::is_same_v<T, PointerOffset>) {
          out.placement.offset = o.bytes;
        } else if constexpr (std::is_same_v<T, ArrayElementFlip>) {
          if (o.byte < out.bytes.size()) out.bytes[o.byte] ^= o.mask;
        }
      },
      op);
  return out;
}

namespace {

// True when `op` belongs to the family of ops for `type`.
bool OpFitsType(const MutationOp& op, ScalarType type) {
  switch (type) {
    case ScalarType::kI32:
      return std::holds_alternative<IntBoundary>(op) ||
             std::holds_alternative<IntByteLevel>(op);
    case ScalarType::kF32:
      return std::holds_alternative<FloatSign>(op) ||
             std::holds_alternative<FloatMantissa>(op) ||
             std::holds_alternative<FloatExponent>(op) ||
             std::holds_alternative<FloatArith>(op);
    case ScalarType::kPtr: return op.index() >= 6;
  }
  return false;
}

ArrayValue BuildArray(const ArgSpec& spec, std::span<const uint32_t> elems) {
  ArrayValue a;
  a.elem = spec.elem;
  a.extents = spec.extents;
  a.placement.space = spec.space;
  a.bytes.resize(elems.size() * 4);
  if (!elems.empty()) std::memcpy(a.bytes.data(), elems.data(), a.bytes.size());
  return a;
}

}  // namespace

TypedValue ApplyMutation(const TypedValue& value, const ArgSpec& spec,
                         const MutationOp& op) {
  switch (value.type) {
    case ScalarType::kI32: {
      int32_t v = MutateInt(value.i32(), op);
      if (spec.clamp) v = std::clamp(v, spec.clamp->first, spec.clamp->second);
      return TypedValue::I32(v);
    }
    case ScalarType::kF32:
      return TypedValue::F32Bits(MutateFloat(value.scalar, op));
    case ScalarType::kPtr:
      return TypedValue::Array(MutateArray(value.array, spec, op));
  }
  return value;
}

TestCase SeedTestCase(std::span<const ArgSpec> specs) {
  TestCase tc;
  for (const ArgSpec& s : specs) {
    switch (s.type) {
      case ScalarType::kI32:
        tc.args.push_back(TypedValue::I32(static_cast<int32_t>(s.scalar_default)));
        break;
      case ScalarType::kF32:
        tc.args.push_back(TypedValue::F32Bits(s.scalar_default));
        break;
      case ScalarType::kPtr: {
        const uint64_t n = s.element_count();
        std::vector<uint32_t> elems(n, 0);
        for (uint64_t i = 0; i < n; ++i) {
          switch (s.init) {
            case ArrayInit::kIota:
              elems[i] = s.elem == ElemType::kI32
                             ? static_cast<uint32_t>(i + 1)
                             : std::bit_cast<uint32_t>(static_cast<float>(i + 1));
              break;
            case ArrayInit::kZero: break;
            case ArrayInit::kFill:
              elems[i] = s.init_values.empty() ? 0 : s.init_values[0];
              break;
            case ArrayInit::kList:
              elems[i] = i < s.init_values.size() ? s.init_values[i] : 0;
              break;
          }
        }
        tc.args.push_back(TypedValue::Array(BuildArray(s, elems)));
        break;
      }
    }
  }
  return tc;
}

TestCase RandomValidTestCase(std::span<const ArgSpec> specs, CounterRng& rng) {
  // Floats are multiples of 1/8 in [-64, 64) so sums stay well scaled.
  auto random_float = [&] {
    return std::bit_cast<uint32_t>(
        static_cast<float>(rng.UniformRange(-512, 511)) / 8.0f);
  };
  TestCase tc = SeedTestCase(specs);
  tc.rng_seed = rng.key();
  for (size_t i = 0; i < specs.size(); ++i) {
    const ArgSpec& s = specs[i];
    if (!s.mutable_arg) continue;
    switch (s.type) {
      case ScalarType::kI32:
        if (s.clamp) {
          tc.args[i] = TypedValue::I32(static_cast<int32_t>(
              rng.UniformRange(s.clamp->first, s.clamp->second)));
        }
        break;
      case ScalarType::kF32: tc.args[i] = TypedValue::F32Bits(random_float()); break;
      case ScalarType::kPtr: {
        if ((s.mutations & kMutValue) == 0) break;
        std::vector<uint32_t> elems(s.element_count());
        for (uint32_t& e : elems) {
          e = s.elem == ElemType::kI32
                  ? static_cast<uint32_t>(rng.UniformRange(-1000, 1000))
                  : random_float();
        }
        tc.args[i] = TypedValue::Array(BuildArray(s, elems));
        break;
      }
    }
  }
  return tc;
}

std::optional<Boundary> MutationSchedule::NextIntMutation(uint32_t arg) {
  if (int_mutations_.size() <= arg) int_mutations_.resize(arg + 1, 0);
  const uint64_t n = ++int_mutations_[arg];
  if (period_ == 0 || n % period_ != 0) return std::nullopt;
  static constexpr Boundary kCycle[] = {Boundary::kZero, Boundary::kMax,
                                        Boundary::kMin};
  return kCycle[(n / period_ - 1) % 3];
}

std::optional<MutationOp> DrawOp(const ArgSpec& spec, const TypedValue& value,
                                 uint32_t arg, MutationSchedule& schedule,
                                 const MutationWeights& weights,
                                 CounterRng& rng) {
  if (!spec.mutable_arg) return std::nullopt;
  const bool type_aware = rng.Chance(weights.type_aware_percent, 100);
  switch (spec.type) {
    case ScalarType::kI32: {
      if (auto forced = schedule.NextIntMutation(arg)) return IntBoundary{*forced};
      if (type_aware) {
        return IntBoundary{static_cast<Boundary>(rng.Uniform(3))};
      }
      if (rng.Chance(1, 2)) {
        const uint32_t byte = static_cast<uint32_t>(rng.Uniform(4));
        const uint32_t bits = 1 + static_cast<uint32_t>(rng.Uniform(255));
        return IntByteLevel{bits << (8 * byte), 0};
      }
      const int32_t k = static_cast<int32_t>(rng.UniformRange(1, 35));
      return IntByteLevel{0, rng.Chance(1, 2) ? k : -k};
    }
    case ScalarType::kF32: {
      if (!type_aware) {
        return FloatMantissa{
            RandomBits(rng, 0, 22, static_cast<int>(rng.UniformRange(1, 3)))};
      }
      switch (rng.Uniform(3)) {
        case 0: return FloatSign{};
        case 1:
          return FloatExponent{
              RandomBits(rng, 23, 30, static_cast<int>(rng.UniformRange(1, 2)))};
        default: {
          const float d = kFloatDeltas[rng.Uniform(std::size(kFloatDeltas))];
          return FloatArith{std::bit_cast<uint32_t>(d), rng.Chance(1, 2)};
        }
      }
    }
    case ScalarType::kPtr: break;
  }

  const ArrayValue& a = value.array;
  std::vector<int> aware;  // 0 extreme, 1 dims, 2 empty, 3 space, 4 offset
  if (spec.mutations & kMutValue) aware.push_back(0);
  if (spec.mutations & kMutDims) {
    aware.push_back(1);
    aware.push_back(2);
  }
  if (spec.mutations & kMutSpace) aware.push_back(3);
  if (spec.mutations & kMutOffset) aware.push_back(4);
  const bool generic_ok = (spec.mutations & kMutValue) && !a.bytes.empty();
  if (aware.empty() && !generic_ok) return std::nullopt;
  if (!generic_ok || (type_aware && !aware.empty())) {
    switch (aware[rng.Uniform(aware.size())]) {
      case 0: return ArrayValueExtreme{static_cast<Boundary>(rng.Uniform(3))};
      case 1: {
        const uint32_t count = static_cast<uint32_t>(a.element_count());
        std::vector<uint32_t> divisors;
        for (uint32_t d = 2; d < count; ++d) {
          if (count % d == 0) divisors.push_back(d);
        }
        if (!divisors.empty() && rng.Chance(1, 2)) {
          const uint32_t d = divisors[rng.Uniform(divisors.size())];
          return ArrayDimension{{d, count / d}};
        }
        const uint64_t limit = std::max<uint64_t>(4 * spec.element_count(), 4);
        return ArrayDimension{
            {static_cast<uint32_t>(1 + rng.Uniform(limit))}};
      }
      case 2: return ArrayEmpty{};
      case 3: {
        MemSpace targets[kNumSpaces - 1];
        int n = 0;
        for (MemSpace s : kAllSpaces) {
          if (s != a.placement.space) targets[n++] = s;
        }
        return PointerSpaceSwap{targets[rng.Uniform(n)]};
      }
      default: {
        const int64_t size =
            std::max<int64_t>(static_cast<int64_t>(a.alloc_size()), 4);
        int64_t bytes = 0;
        while (bytes == 0) {
          bytes = rng.UniformRange(-2 * size, 2 * size) / 4 * 4;
        }
        return PointerOffset{bytes};
      }
    }
  }
  return ArrayElementFlip{static_cast<uint32_t>(rng.Uniform(a.bytes.size())),
                          static_cast<uint8_t>(1u << rng.Uniform(8))};
}

TestCase MutateTestCase(const TestCase& parent, std::string_view parent_id,
                        std::span<const ArgSpec> specs,
                        MutationSchedule& schedule, uint64_t seed,
                        const MutationWeights& weights) {
  CounterRng rng(seed);
  TestCase child;
  child.args = parent.args;
  child.rng_seed = seed;
  child.parent_id = std::string(parent_id);

  uint32_t count = 1;
  while (count < weights.max_args && rng.Chance(1, 2)) ++count;
  std::vector<uint32_t> candidates;
  for (uint32_t i = 0; i < specs.size(); ++i) {
    if (specs[i].mutable_arg) candidates.push_back(i);
  }
  count = std::min<uint32_t>(count, static_cast<uint32_t>(candidates.size()));
  for (uint32_t k = 0; k < count; ++k) {
    const size_t j = k + rng.Uniform(candidates.size() - k);
    std::swap(candidates[k], candidates[j]);
    const uint32_t arg = candidates[k];
    auto op = DrawOp(specs[arg], child.args[arg], arg, schedule, weights, rng);
    if (!op) continue;
    child.args[arg] = ApplyMutation(child.args[arg], specs[arg], *op);
    child.trace.push_back(AppliedMutation{arg, std::move(*op)});
  }
  return child;
}

StatusOr<std::vector<TypedValue>> ReplayTrace(
    std::span<const TypedValue> parent, std::span<const ArgSpec> specs,
    std::span<const AppliedMutation> trace) {
  std::vector<TypedValue> args(parent.begin(), parent.end());
  if (args.size() != specs.size()) {
    return MakeError(ErrorCode::kArgArityMismatch,
                     StrCat("parent has ", args.size(), " args, specs ",
                            specs.size()));
  }
  for (const AppliedMutation& m : trace) {
    if (m.arg >= args.size() || !OpFitsType(m.op, args[m.arg].type)) {
      return MakeError(ErrorCode::kSyntaxError,
                       StrCat("mutation does not fit its argument: ",
                              FormatMutation(m)));
    }
    args[m.arg] = ApplyMutation(args[m.arg], specs[m.arg], m.op);
  }
  return args;
}

namespace {
constexpr std::string_view kTestCaseMagic = "simt-forge testcase v1";
}  // namespace

std::string SerializeTestCase(const TestCase& tc,
                              std::span<const ArgSpec> specs) {
  std::string out = StrCat(kTestCaseMagic, "\n");
  out += StrCat("argspec ", ContentHash(DescribeArgSpecs(specs)), "\n");
  out += StrCat("rng_seed ", tc.rng_seed, "\n");
  out += StrCat("parent ", tc.parent_id.empty() ? "-" : tc.parent_id, "\n");
  for (const AppliedMutation& m : tc.trace) {
    out += StrCat("mutation ", FormatMutation(m), "\n");
  }
  for (const TypedValue& v : tc.args) {
    switch (v.type) {
      case ScalarType::kI32: out += StrCat("arg i32 ", v.i32(), "\n"); break;
      case ScalarType::kF32:
        out += fmt::format("arg f32 0x{:08X}\n", v.scalar);
        break;
      case ScalarType::kPtr: {
        const ArrayValue& a = v.array;
        const std::string data =
            a.bytes.empty()
                ? "-"
                : HexEncode(std::string_view(
                      reinterpret_cast<const char*>(a.bytes.data()),
                      a.bytes.size()));
        out += StrCat("arg ptr ", ElemTypeName(a.elem),
                      " space=", MemSpaceName(a.placement.space),
                      " extents=", FormatExtents(a.extents),
                      " offset=", a.placement.offset, " size=",
                      a.placement.size_override
                          ? std::to_string(*a.placement.size_override)
                          : "-",
                      " data=", data, "\n");
        break;
      }
    }
  }
  return out;
}

StatusOr<TestCase> ParseTestCase(std::string_view text,
                                 std::string* argspec_digest) {
  TestCase tc;
  int line_no = 0;
  bool saw_magic = false;
  for (std::string_view raw : Split(text, '\n')) {
    ++line_no;
    std::string_view line = Trim(raw);
    if (line.empty()) continue;
    auto bad = [&](std::string_view why) {
      return MakeError(ErrorCode::kSyntaxError,
                       StrCat("testcase line ", line_no, ": ", why));
    };
    if (!saw_magic) {
      if (line != kTestCaseMagic) return bad("missing version header");
      saw_magic = true;
      continue;
    }
    std::string_view rest = line;
    if (ConsumePrefix(rest, "argspec ")) {
      if (argspec_digest != nullptr) *argspec_digest = std::string(Trim(rest));
    } else if (ConsumePrefix(rest, "rng_seed ")) {
      auto v = ParseUint(Trim(rest));
      if (!v) return bad("rng_seed");
      tc.rng_seed = *v;
    } else if (ConsumePrefix(rest, "parent ")) {
      rest = Trim(rest);
      tc.parent_id = rest == "-" ? "" : std::string(rest);
    } else if (ConsumePrefix(rest, "mutation ")) {
      SF_ASSIGN_OR_RETURN(AppliedMutation m, ParseMutation(Trim(rest)));
      tc.trace.push_back(std::move(m));
    } else if (ConsumePrefix(rest, "arg ")) {
      std::vector<std::string_view> w = SplitWords(rest);
      if (w.size() == 2 && w[0] == "i32") {
        auto v = ParseInt(w[1]);
        if (!v || *v < INT32_MIN || *v > INT32_MAX) return bad("i32 value");
        tc.args.push_back(TypedValue::I32(static_cast<int32_t>(*v)));
      } else if (w.size() == 2 && w[0] == "f32") {
        auto v = ParseUint(w[1]);
        if (!v || *v > UINT32_MAX) return bad("f32 bits");
        tc.args.push_back(TypedValue::F32Bits(static_cast<uint32_t>(*v)));
      } else if (w.size() == 7 && w[0] == "ptr") {
        ArrayValue a;
        if (w[1] == "i32") {
          a.elem = ElemType::kI32;
        } else if (w[1] == "f32") {
          a.elem = ElemType::kF32;
        } else {
          return bad("element type");
        }
        std::map<std::string_view, std::string_view> kv;
        for (size_t i = 2; i < w.size(); ++i) {
          const size_t eq = w[i].find('=');
          if (eq == std::string_view::npos) return bad(w[i]);
          kv[w[i].substr(0, eq)] = w[i].substr(eq + 1);
        }
        auto space = ParseMemSpace(kv["space"]);
        auto extents = ParseExtents(kv["extents"]);
        auto offset = ParseInt(kv["offset"]);
        if (!space || !extents || !offset) return bad("array placement");
        a.placement.space = *space;
        a.extents = *extents;
        a.placement.offset = *offset;
        if (kv["size"] != "-") {
          auto size = ParseUint(kv["size"]);
          if (!size) return bad("size");
          a.placement.size_override = *size;
        }
        if (kv["data"] != "-") {
          auto bytes = HexDecode(kv["data"]);
          if (!bytes) return bad("data");
          a.bytes.assign(bytes->begin(), bytes->end());
        }
        tc.args.push_back(TypedValue::Array(std::move(a)));
      } else {
        return bad("argument record");
      }
    } else {
      return bad("unknown record");
    }
  }
  if (!saw_magic) {
    return MakeError(ErrorCode::kSyntaxError, "empty testcase");
  }
  return tc;
}

std::string TestCaseId(const TestCase& tc, std::span<const ArgSpec> specs) {
  return ContentHash(SerializeTestCase(tc, specs));
}

}  // namespace simt_forge
