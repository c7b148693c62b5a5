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

// Textual SIMT kernel IR ("SIR"): types, parser, validator, control-flow
// graph construction and canonical printer.
//
// Grammar, one construct per line, `#` starts a comment:
//
//   kernel <name>(<param>, ...) regs=<n>
//   [<label>:] <opcode> <operands>
//
// Parameters are `<name>:i32`, `<name>:f32` or `<name>:ptr.<space>` with
// space one of global, shared, local. Registers are `%r<k>` (i32), `%f<k>`
// (f32), `%p<k>` (predicate) and `%a<k>` (64-bit device address). `$<param>`
// reads a kernel parameter. Immediates are decimal or 0x-prefixed integers,
// decimal floats, or PTX-style `0f<8 hex digits>` f32 bit patterns.
//
//   mov   d, s                    add|sub|mul d, a, b
//   fadd|fsub|fmul d, a, b        setp.<eq|ne|lt|le|gt|ge> %p, a, b
//   bra [[!]%p,] <label>          sreg %r, <tid|ntid|ctaid|nctaid>
//   ld.<space>.<type> d, [%a(+|-)off]
//   st.<space>.<type> [%a(+|-)off], s
//   cvt.f32.i32 %f, %r            cvt.i32.f32 %r, %f
//   exit
//
// Load/store types are u8, s8, u16, s16, i32, f32 and ptr (8 bytes).

#ifndef SIMT_FORGE_KERNEL_IR_H_
#define SIMT_FORGE_KERNEL_IR_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "simt_forge/error.h"

namespace simt_forge {

enum class ScalarType : uint8_t { kI32, kF32, kPtr };
enum class MemSpace : uint8_t { kGlobal = 0, kShared = 1, kLocal = 2 };
inline constexpr int kNumSpaces = 3;
inline constexpr MemSpace kAllSpaces[kNumSpaces] = {
    MemSpace::kGlobal, MemSpace::kShared, MemSpace::kLocal};

std::string_view ScalarTypeName(ScalarType type);
std::string_view MemSpaceName(MemSpace space);
std::optional<MemSpace> ParseMemSpace(std::string_view name);

enum class RegClass : uint8_t { kI32, kF32, kPred, kPtr };

enum class Opcode : uint8_t {
  kMov,
  kAdd,
  kSub,
  kMul,
  kFAdd,
  kFMul,
  kFSub,
  kSetp,
  kBra,
  kLd,
  kSt,
  kCvt,
  kSreg,
  kExit,
};

enum class CmpOp : uint8_t { kEq, kNe, kLt, kLe, kGt, kGe };
enum class SpecialReg : uint8_t { kTid, kNtid, kCtaid, kNctaid };
enum class MemType : uint8_t { kU8, kS8, kU16, kS16, kI32, kF32, kPtr };

uint8_t MemTypeWidth(MemType type);

struct Operand {
  enum class Kind : uint8_t { kNone, kReg, kImm, kParam };

  Kind kind = Kind::kNone;
  RegClass reg_class = RegClass::kI32;  // kReg only
  uint32_t index = 0;                   // register or parameter index
  // Immediates keep both readings; validation decides which is legal.
  bool float_literal = false;
  int64_t int_value = 0;
  uint32_t float_bits = 0;

  bool is_reg(RegClass c) const { return kind == Kind::kReg && reg_class == c; }
};

struct Instruction {
  uint32_t id = 0;
  Opcode opcode = Opcode::kExit;
  CmpOp cmp = CmpOp::kEq;
  SpecialReg sreg = SpecialReg::kTid;
  MemSpace space = MemSpace::kGlobal;
  MemType mem_type = MemType::kI32;
  ScalarType cvt_dst = ScalarType::kI32;
  ScalarType cvt_src = ScalarType::kI32;
  // ld: dst <- [a + offset]; st: [a + offset] <- b; bra: a is the optional
  // predicate.
  Operand dst;
  Operand a;
  Operand b;
  int64_t offset = 0;
  bool pred_negated = false;
  std::string target_label;
  uint32_t target = 0;  // instruction index of the branch target
  int line = 0;

  bool is_memory_access() const {
    return opcode == Opcode::kLd || opcode == Opcode::kSt;
  }
  bool is_control_flow() const {
    return opcode == Opcode::kBra || opcode == Opcode::kExit;
  }
  bool is_conditional_branch() const {
    return opcode == Opcode::kBra && a.kind == Operand::Kind::kReg;
  }
  uint8_t width() const { return MemTypeWidth(mem_type); }
};

enum class Terminator : uint8_t { kBranch, kExit, kFallthrough };

struct BasicBlock {
  uint32_t id = 0;
  uint32_t begin = 0;  // instruction range [begin, end)
  uint32_t end = 0;
  Terminator terminator = Terminator::kFallthrough;
};

struct Edge {
  uint32_t src = 0;
  uint32_t dst = 0;
  friend bool operator==(const Edge&, const Edge&) = default;
  friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct Param {
  std::string name;
  ScalarType type = ScalarType::kI32;
  std::optional<MemSpace> space;  // PTR only
  friend bool operator==(const Param&, const Param&) = default;
};

struct Cfg {
  std::vector<BasicBlock> blocks;
  std::vector<Edge> static_edges;
};

struct KernelDef {
  std::string name;
  uint32_t index = 0;  // position within the program
  std::vector<Param> params;
  uint32_t register_count = 0;
  std::vector<Instruction> instructions;
  // Labels in source order, paired with the instruction they precede.
  std::vector<std::pair<std::string, uint32_t>> labels;
  std::vector<BasicBlock> blocks;
  std::vector<Edge> static_edges;
  // Per instruction: owning block.
  std::vector<uint32_t> block_of;
  int line = 0;

  std::optional<uint32_t> FindParam(std::string_view param_name) const;
};

struct Program {
  std::vector<KernelDef> kernels;
  std::map<std::string, uint32_t, std::less<>> by_name;
  std::string source_digest;

  const KernelDef* FindKernel(std::string_view name) const;
};

// Syntax, duplicate-kernel and label resolution errors fail the parse;
// typing problems are left for Validate.
StatusOr<Program> ParseProgram(std::string_view text);

// Leaders are instruction 0, branch targets and instructions following a
// branch or exit. Edges are listed in discovery order without duplicates.
Cfg BuildCfg(const KernelDef& kernel);

struct Diagnostic {
  enum class Kind : uint8_t {
    kTypeMismatch,
    kMissingSpaceAnnotation,
    kRegisterOutOfRange,
    kMissingExit,
  };
  Kind kind = Kind::kTypeMismatch;
  std::string kernel;
  std::optional<uint32_t> instruction;
  int line = 0;
  std::string reason;
};

std::string_view DiagnosticKindName(Diagnostic::Kind kind);
std::string FormatDiagnostic(const Diagnostic& diagnostic);

std::vector<Diagnostic> Validate(const Program& program);

// ParseProgram followed by Validate; the first diagnostic becomes a
// TypeMismatch error.
StatusOr<Program> LoadProgram(std::string_view text);
StatusOr<Program> LoadProgramFile(const std::string& path);

// Canonical text: no comments, labels on their own lines, f32 immediates
// as 0f bit patterns. ParseProgram(PrintProgram(p)) reproduces p.
std::string PrintProgram(const Program& program);

bool SameStructure(const Program& a, const Program& b);

}  // namespace simt_forge

#endif  // SIMT_FORGE_KERNEL_IR_H_
