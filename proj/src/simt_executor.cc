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

#include "simt_forge/simt_executor.h"

#include <bit>
#include <cmath>
#include <cstring>
#include <limits>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "simt_forge/strings.h"

namespace simt_forge {

KernelArg KernelArg::I32(int32_t v) {
  return KernelArg{ScalarType::kI32, static_cast<uint32_t>(v), kNoAlloc};
}

KernelArg KernelArg::F32Bits(uint32_t bits) {
  return KernelArg{ScalarType::kF32, bits, kNoAlloc};
}

KernelArg KernelArg::F32(float v) {
  return F32Bits(std::bit_cast<uint32_t>(v));
}

KernelArg KernelArg::Ptr(uint64_t address, AllocId tag) {
  return KernelArg{ScalarType::kPtr, address, tag};
}

std::string_view ExecStatusName(ExecStatus status) {
  switch (status) {
    case ExecStatus::kCompleted: return "COMPLETED";
    case ExecStatus::kSanitizerStop: return "SANITIZER_STOP";
    case ExecStatus::kBudgetExhausted: return "BUDGET_EXHAUSTED";
  }
  return "?";
}

void ThreadCtx::Reset(const KernelDef& kernel, uint32_t cta, uint32_t t) {
  const size_t n = kernel.register_count;
  r.assign(n, 0);
  f.assign(n, 0);
  p.assign(n, 0);
  a.assign(n, 0);
  tags.assign(n, kNoAlloc);
  ctaid = cta;
  tid = t;
  pc = 0;
  retired = 0;
}

int32_t ReadSpecial(const ThreadCtx& ctx, SpecialReg sreg) {
  switch (sreg) {
    case SpecialReg::kTid: return static_cast<int32_t>(ctx.tid);
    case SpecialReg::kNtid: return static_cast<int32_t>(ctx.ntid);
    case SpecialReg::kCtaid: return static_cast<int32_t>(ctx.ctaid);
    case SpecialReg::kNctaid: return static_cast<int32_t>(ctx.nctaid);
  }
  return 0;
}

namespace {

float AsFloat(uint32_t bits) { return std::bit_cast<float>(bits); }
uint32_t AsBits(float v) { return std::bit_cast<uint32_t>(v); }

// Round to nearest even, saturate, NaN to zero.
int32_t FloatToI32(float v) {
  if (std::isnan(v)) return 0;
  const double d = std::nearbyint(static_cast<double>(v));
  if (d >= 2147483647.0) return std::numeric_limits<int32_t>::max();
  if (d <= -2147483648.0) return std::numeric_limits<int32_t>::min();
  return static_cast<int32_t>(d);
}

class Interp {
 public:
  Interp(const StepEnv& env, ThreadCtx& ctx) : env_(env), k_(*env.kernel), ctx_(ctx) {}

  StepResult Run();

 private:
  uint32_t I32(const Operand& op) const {
    switch (op.kind) {
      case Operand::Kind::kReg: return ctx_.r[op.index];
      case Operand::Kind::kImm: return static_cast<uint32_t>(op.int_value);
      case Operand::Kind::kParam:
        return static_cast<uint32_t>(env_.args[op.index].bits);
      default: return 0;
    }
  }

  uint32_t F32(const Operand& op) const {
    switch (op.kind) {
      case Operand::Kind::kReg: return ctx_.f[op.index];
      case Operand::Kind::kImm: return op.float_bits;
      case Operand::Kind::kParam:
        return static_cast<uint32_t>(env_.args[op.index].bits);
      default: return 0;
    }
  }

  bool Pred(const Operand& op) const {
    if (op.kind == Operand::Kind::kReg) return ctx_.p[op.index] != 0;
    return op.int_value != 0;
  }

  uint64_t Ptr(const Operand& op, AllocId* tag) const {
    *tag = kNoAlloc;
    switch (op.kind) {
      case Operand::Kind::kReg:
        *tag = ctx_.tags[op.index];
        return ctx_.a[op.index];
      case Operand::Kind::kImm: return static_cast<uint64_t>(op.int_value);
      case Operand::Kind::kParam:
        *tag = env_.args[op.index].tag;
        return env_.args[op.index].bits;
      default: return 0;
    }
  }

  // Class of the value an operand yields, used by setp.
  RegClass ClassOf(const Operand& op) const {
    if (op.kind == Operand::Kind::kReg) return op.reg_class;
    if (op.kind == Operand::Kind::kParam) {
      switch (k_.params[op.index].type) {
        case ScalarType::kI32: return RegClass::kI32;
        case ScalarType::kF32: return RegClass::kF32;
        case ScalarType::kPtr: return RegClass::kPtr;
      }
    }
    return RegClass::kI32;
  }

  template <typename T>
  static bool Compare(CmpOp cmp, T x, T y) {
    switch (cmp) {
      case CmpOp::kEq: return x == y;
      case CmpOp::kNe: return x != y;
      case CmpOp::kLt: return x < y;
      case CmpOp::kLe: return x <= y;
      case CmpOp::kGt: return x > y;
      case CmpOp::kGe: return x >= y;
    }
    return false;
  }

  bool Setp(const Instruction& in) const {
    RegClass cls = ClassOf(in.a);
    if (in.a.kind == Operand::Kind::kImm) cls = ClassOf(in.b);
    switch (cls) {
      case RegClass::kF32:
        return Compare(in.cmp, AsFloat(F32(in.a)), AsFloat(F32(in.b)));
      case RegClass::kPtr: {
        AllocId unused;
        return Compare(in.cmp, Ptr(in.a, &unused), Ptr(in.b, &unused));
      }
      default:
        return Compare(in.cmp, static_cast<int32_t>(I32(in.a)),
                       static_cast<int32_t>(I32(in.b)));
    }
  }

  // Reports the access and runs the sanitizer. False means stop.
  bool Access(const Instruction& in, uint64_t address, AllocId tag,
              bool is_store, bool* skip) {
    *skip = false;
    const uint32_t width = in.width();
    MemAccessEvent ev{&k_,   in.id,    in.space,   address, width,
                      tag,   is_store, ctx_.ctaid, ctx_.tid};
    env_.hooks->OnMemAccess(ev);
    if (env_.options->trace != nullptr) {
      fmt::print(*env_.options->trace, "EV mem {} {} {} {} 0x{:x} {} {}\n",
                 k_.name, in.id, is_store ? "st" : "ld",
                 MemSpaceName(in.space), address, width, tag);
    }
    if (env_.options->sanitize) {
      AccessEvent check{in.id, in.space, address, width, tag};
      if (auto v = CheckAccess(*env_.image, check)) {
        *env_.bug = MakeReport(
            *v, check,
            ReportSite{k_.name, in.id, ctx_.ctaid, ctx_.tid,
                       env_.options->iteration});
        return false;
      }
    } else if (!env_.image->InArena(address, width)) {
      *skip = true;  // unchecked mode: loads read zero, stores vanish
    }
    return true;
  }

  StepResult Load(const Instruction& in) {
    AllocId tag;
    const uint64_t address = Ptr(in.a, &tag) + static_cast<uint64_t>(in.offset);
    bool skip;
    if (!Access(in, address, tag, false, &skip)) return StepResult::kStopped;
    uint8_t buf[8] = {};
    if (!skip) env_.image->ReadRaw(address, std::span(buf, in.width()));
    const uint32_t d = in.dst.index;
    switch (in.mem_type) {
      case MemType::kU8: ctx_.r[d] = buf[0]; break;
      case MemType::kS8:
        ctx_.r[d] = static_cast<uint32_t>(static_cast<int8_t>(buf[0]));
        break;
      case MemType::kU16: {
        uint16_t v;
        std::memcpy(&v, buf, 2);
        ctx_.r[d] = v;
        break;
      }
      case MemType::kS16: {
        int16_t v;
        std::memcpy(&v, buf, 2);
        ctx_.r[d] = static_cast<uint32_t>(static_cast<int32_t>(v));
        break;
      }
      case MemType::kI32: std::memcpy(&ctx_.r[d], buf, 4); break;
      case MemType::kF32: std::memcpy(&ctx_.f[d], buf, 4); break;
      case MemType::kPtr:
        std::memcpy(&ctx_.a[d], buf, 8);
        ctx_.tags[d] = kNoAlloc;  // loaded pointers carry no provenance
        break;
    }
    return StepResult::kContinue;
  }

  StepResult Store(const Instruction& in) {
    AllocId tag;
    const uint64_t address = Ptr(in.a, &tag) + static_cast<uint64_t>(in.offset);
    uint8_t buf[8] = {};
    switch (in.mem_type) {
      case MemType::kF32: {
        const uint32_t v = F32(in.b);
        std::memcpy(buf, &v, 4);
        break;
      }
      case MemType::kPtr: {
        AllocId unused;
        const uint64_t v = Ptr(in.b, &unused);
        std::memcpy(buf, &v, 8);
        break;
      }
      default: {
        const uint32_t v = I32(in.b);
        std::memcpy(buf, &v, 4);  // little-endian truncation
        break;
      }
    }
    bool skip;
    if (!Access(in, address, tag, true, &skip)) return StepResult::kStopped;
    if (!skip) env_.image->WriteRaw(address, std::span<const uint8_t>(buf, in.width()));
    return StepResult::kContinue;
  }

  const StepEnv& env_;
  const KernelDef& k_;
  ThreadCtx& ctx_;
};

StepResult Interp::Run() {
  const Instruction& in = k_.instructions[ctx_.pc];
  uint32_t next = ctx_.pc + 1;
  ++ctx_.retired;
  switch (in.opcode) {
    case Opcode::kMov: {
      const uint32_t d = in.dst.index;
      switch (in.dst.reg_class) {
        case RegClass::kI32: ctx_.r[d] = I32(in.a); break;
        case RegClass::kF32: ctx_.f[d] = F32(in.a); break;
        case RegClass::kPred: ctx_.p[d] = Pred(in.a) ? 1 : 0; break;
        case RegClass::kPtr: ctx_.a[d] = Ptr(in.a, &ctx_.tags[d]); break;
      }
      break;
    }
    case Opcode::kAdd:
    case Opcode::kSub: {
      const uint32_t d = in.dst.index;
      const bool sub = in.opcode == Opcode::kSub;
      if (in.dst.reg_class == RegClass::kPtr) {
        AllocId tag;
        const uint64_t base = Ptr(in.a, &tag);
        const uint64_t delta = static_cast<uint64_t>(
            static_cast<int64_t>(static_cast<int32_t>(I32(in.b))));
        ctx_.a[d] = sub ? base - delta : base + delta;
        ctx_.tags[d] = tag;
      } else {
        const uint32_t x = I32(in.a);
        const uint32_t y = I32(in.b);
        ctx_.r[d] = sub ? x - y : x + y;
      }
      break;
    }
    case Opcode::kMul: ctx_.r[in.dst.index] = I32(in.a) * I32(in.b); break;
    case Opcode::kFAdd:
      ctx_.f[in.dst.index] = AsBits(AsFloat(F32(in.a)) + AsFloat(F32(in.b)));
      break;
    case Opcode::kFSub:
      ctx_.f[in.dst.index] = AsBits(AsFloat(F32(in.a)) - AsFloat(F32(in.b)));
      break;
    case Opcode::kFMul:
      ctx_.f[in.dst.index] = AsBits(AsFloat(F32(in.a)) * AsFloat(F32(in.b)));
      break;
    case Opcode::kSetp: ctx_.p[in.dst.index] = Setp(in) ? 1 : 0; break;
    case Opcode::kBra: {
      bool taken = true;
      if (in.is_conditional_branch()) taken = Pred(in.a) != in.pred_negated;
      if (taken) next = in.target;
      break;
    }
    case Opcode::kLd:
      if (Load(in) == StepResult::kStopped) return StepResult::kStopped;
      break;
    case Opcode::kSt:
      if (Store(in) == StepResult::kStopped) return StepResult::kStopped;
      break;
    case Opcode::kCvt:
      if (in.cvt_dst == ScalarType::kF32) {
        ctx_.f[in.dst.index] =
            AsBits(static_cast<float>(static_cast<int32_t>(I32(in.a))));
      } else {
        ctx_.r[in.dst.index] =
            static_cast<uint32_t>(FloatToI32(AsFloat(F32(in.a))));
      }
      break;
    case Opcode::kSreg:
      ctx_.r[in.dst.index] = static_cast<uint32_t>(ReadSpecial(ctx_, in.sreg));
      break;
    case Opcode::kExit: return StepResult::kExited;
  }
  const uint32_t src = k_.block_of[ctx_.pc];
  const bool block_end = k_.blocks[src].end == ctx_.pc + 1;
  ctx_.pc = next;
  if (next >= k_.instructions.size()) return StepResult::kExited;
  if (block_end) {
    const uint32_t dst = k_.block_of[next];
    env_.hooks->OnControlFlow(k_, src, dst);
    if (env_.options->trace != nullptr) {
      fmt::print(*env_.options->trace, "EV cf {} {},{}\n", k_.name, src, dst);
    }
  }
  return StepResult::kContinue;
}

Status CheckArgs(const KernelDef& kernel, const LaunchConfig& config) {
  if (config.grid_dim == 0 || config.block_dim == 0) {
    return MakeError(ErrorCode::kLaunchArityMismatch,
                     StrCat("launch of ", kernel.name,
                            " needs grid and block dimensions >= 1"));
  }
  if (config.args.size() != kernel.params.size()) {
    return MakeError(ErrorCode::kLaunchArityMismatch,
                     StrCat(kernel.name, " takes ", kernel.params.size(),
                            " arguments, got ", config.args.size()));
  }
  for (size_t i = 0; i < config.args.size(); ++i) {
    if (config.args[i].type != kernel.params[i].type) {
      return MakeError(ErrorCode::kLaunchArityMismatch,
                       StrCat(kernel.name, " argument ", i, " (",
                              kernel.params[i].name, ") must be ",
                              ScalarTypeName(kernel.params[i].type)));
    }
  }
  return OkStatus();
}

}  // namespace

StepResult Step(const StepEnv& env, ThreadCtx& ctx) {
  return Interp(env, ctx).Run();
}

StatusOr<ExecOutcome> Launch(const Program& program, DeviceMemoryImage& image,
                             const LaunchConfig& config, ExecHooks& hooks,
                             const ExecOptions& options) {
  const KernelDef* kernel = program.FindKernel(config.kernel);
  if (kernel == nullptr) {
    return MakeError(ErrorCode::kUnknownKernel,
                     StrCat("no kernel named ", config.kernel));
  }
  SF_RETURN_IF_ERROR(CheckArgs(*kernel, config));
  hooks.OnLaunch(*kernel);

  ExecOutcome outcome;
  std::optional<BugReport> bug;
  StepEnv env{kernel, config.args, &image, &hooks, &options, &bug};
  ThreadCtx ctx;
  ctx.ntid = config.block_dim;
  ctx.nctaid = config.grid_dim;
  for (uint32_t cta = 0; cta < config.grid_dim; ++cta) {
    for (uint32_t t = 0; t < config.block_dim; ++t) {
      ctx.Reset(*kernel, cta, t);
      StepResult result = StepResult::kContinue;
      while (result == StepResult::kContinue) {
        if (ctx.retired >= config.instruction_budget) {
          outcome.retired += ctx.retired;
          outcome.status = ExecStatus::kBudgetExhausted;
          return outcome;
        }
        result = Step(env, ctx);
      }
      outcome.retired += ctx.retired;
      if (result == StepResult::kStopped) {
        outcome.status = ExecStatus::kSanitizerStop;
        outcome.bug = std::move(bug);
        return outcome;
      }
    }
  }
  return outcome;
}

std::vector<StatusOr<ExecOutcome>> LaunchBatchSerial(
    const Program& program, std::span<BatchJob> jobs,
    const ExecOptions& options) {
  std::vector<StatusOr<ExecOutcome>> out;
  out.reserve(jobs.size());
  ExecHooks hooks;
  for (BatchJob& job : jobs) {
    out.push_back(Launch(program, *job.image, job.config, hooks, options));
  }
  return out;
}

std::vector<StatusOr<ExecOutcome>> LaunchBatch(const Program& program,
                                               std::span<BatchJob> jobs,
                                               const ExecOptions& options) {
  std::vector<StatusOr<ExecOutcome>> out(jobs.size(), ExecOutcome{});
  const int64_t n = static_cast<int64_t>(jobs.size());
#pragma omp parallel for schedule(dynamic)
  for (int64_t i = 0; i < n; ++i) {
    ExecHooks hooks;
    out[i] = Launch(program, *jobs[i].image, jobs[i].config, hooks, options);
  }
  return out;
}

}  // namespace simt_forge
