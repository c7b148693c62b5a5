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

#include "simt_forge/kernel_ir.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cctype>
#include <cstring>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "simt_forge/error.h"
#include "simt_forge/hash.h"
#include "simt_forge/strings.h"

namespace simt_forge {

std::string_view ScalarTypeName(ScalarType type) {
  switch (type) {
    case ScalarType::kI32: return "i32";
    case ScalarType::kF32: return "f32";
    case ScalarType::kPtr: return "ptr";
  }
  return "?";
}

std::string_view MemSpaceName(MemSpace space) {
  switch (space) {
    case MemSpace::kGlobal: return "global";
    case MemSpace::kShared: return "shared";
    case MemSpace::kLocal: return "local";
  }
  return "?";
}

std::optional<MemSpace> ParseMemSpace(std::string_view name) {
  if (name == "global") return MemSpace::kGlobal;
  if (name == "shared") return MemSpace::kShared;
  if (name == "local") return MemSpace::kLocal;
  return std::nullopt;
}

uint8_t MemTypeWidth(MemType type) {
  switch (type) {
    case MemType::kU8:
    case MemType::kS8: return 1;
    case MemType::kU16:
    case MemType::kS16: return 2;
    case MemType::kI32:
    case MemType::kF32: return 4;
    case MemType::kPtr: return 8;
  }
  return 0;
}

std::optional<uint32_t> KernelDef::FindParam(
    std::string_view param_name) const {
  for (uint32_t i = 0; i < params.size(); ++i) {
    if (params[i].name == param_name) return i;
  }
  return std::nullopt;
}

const KernelDef* Program::FindKernel(std::string_view name) const {
  auto it = by_name.find(name);
  return it == by_name.end() ? nullptr : &kernels[it->second];
}

namespace {

constexpr std::string_view kCmpNames[] = {"eq", "ne", "lt", "le", "gt", "ge"};
constexpr std::string_view kSregNames[] = {"tid", "ntid", "ctaid", "nctaid"};
constexpr std::string_view kMemTypeNames[] = {"u8",  "s8",  "u16", "s16",
                                              "i32", "f32", "ptr"};

template <typename E, size_t N>
std::optional<E> LookupName(const std::string_view (&names)[N],
                            std::string_view name) {
  for (size_t i = 0; i < N; ++i) {
    if (names[i] == name) return static_cast<E>(i);
  }
  return std::nullopt;
}

bool IsIdentStart(char c) {
  return std::isalpha(static_cast<unsigned char>(c)) || c == '_';
}
bool IsIdentChar(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' ||
         c == '.';
}
bool IsIdentifier(std::string_view s) {
  if (s.empty() || !IsIdentStart(s[0])) return false;
  return std::all_of(s.begin(), s.end(), IsIdentChar);
}

Status Syntax(int line, std::string_view reason) {
  return MakeError(ErrorCode::kSyntaxError,
                   StrCat("line ", line, ": ", reason));
}

bool ParseHexDigits(std::string_view s, uint64_t& out) {
  if (s.empty() || s.size() > 16) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out, 16);
  return ec == std::errc() && ptr == s.data() + s.size();
}

// Integer or float literal.
std::optional<Operand> ParseLiteral(std::string_view tok) {
  Operand op;
  op.kind = Operand::Kind::kImm;
  if (tok.size() == 10 && tok[0] == '0' && (tok[1] == 'f' || tok[1] == 'F')) {
    uint64_t bits = 0;
    if (!ParseHexDigits(tok.substr(2), bits)) return std::nullopt;
    op.float_literal = true;
    op.float_bits = static_cast<uint32_t>(bits);
    return op;
  }
  std::string_view body = tok;
  bool negative = false;
  if (!body.empty() && (body[0] == '-' || body[0] == '+')) {
    negative = body[0] == '-';
    body.remove_prefix(1);
  }
  if (body.empty()) return std::nullopt;
  if (body.size() > 2 && body[0] == '0' && (body[1] == 'x' || body[1] == 'X')) {
    uint64_t v = 0;
    if (!ParseHexDigits(body.substr(2), v)) return std::nullopt;
    if (v > (1ull << 63)) return std::nullopt;
    op.int_value = negative ? -static_cast<int64_t>(v) : static_cast<int64_t>(v);
  } else if (std::all_of(body.begin(), body.end(), [](char c) {
               return c >= '0' && c <= '9';
             })) {
    uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), v);
    if (ec != std::errc() || ptr != body.data() + body.size()) {
      return std::nullopt;
    }
    if (v > (1ull << 63) || (!negative && v == (1ull << 63))) {
      return std::nullopt;
    }
    op.int_value = negative ? static_cast<int64_t>(0 - v)
                            : static_cast<int64_t>(v);
  } else {
    float f = 0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), f);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      return std::nullopt;
    }
    op.float_literal = true;
    std::memcpy(&op.float_bits, &f, sizeof f);
    return op;
  }
  const float as_float = static_cast<float>(op.int_value);
  std::memcpy(&op.float_bits, &as_float, sizeof as_float);
  return op;
}

std::optional<Operand> ParseRegister(std::string_view tok) {
  if (tok.size() < 3 || tok[0] != '%') return std::nullopt;
  Operand op;
  op.kind = Operand::Kind::kReg;
  switch (tok[1]) {
    case 'r': op.reg_class = RegClass::kI32; break;
    case 'f': op.reg_class = RegClass::kF32; break;
    case 'p': op.reg_class = RegClass::kPred; break;
    case 'a': op.reg_class = RegClass::kPtr; break;
    default: return std::nullopt;
  }
  std::string_view digits = tok.substr(2);
  if (digits.size() > 6) return std::nullopt;
  uint32_t index = 0;
  auto [ptr, ec] =
      std::from_chars(digits.data(), digits.data() + digits.size(), index);
  if (ec != std::errc() || ptr != digits.data() + digits.size()) {
    return std::nullopt;
  }
  op.index = index;
  return op;
}

struct KernelBuilder {
  KernelDef def;
  std::map<std::string, uint32_t, std::less<>> labels;
  std::vector<std::string> pending_labels;
};

class Parser {
 public:
  StatusOr<Program> Run(std::string_view text) {
    int line_no = 0;
    for (std::string_view raw : Split(text, '\n')) {
      ++line_no;
      std::string_view line = raw;
      if (auto hash = line.find('#'); hash != std::string_view::npos) {
        line = line.substr(0, hash);
      }
      line = Trim(line);
      if (line.empty()) continue;
      Status st = ParseLine(line, line_no);
      if (!st.ok()) return st;
    }
    Status st = FinishKernel();
    if (!st.ok()) return st;
    program_.source_digest = ContentHash(PrintProgram(program_));
    return std::move(program_);
  }

 private:
  Status ParseLine(std::string_view line, int line_no) {
    if (line.starts_with("kernel ") || line == "kernel") {
      Status st = FinishKernel();
      if (!st.ok()) return st;
      return ParseHeader(line, line_no);
    }
    if (!current_.has_value()) {
      return Syntax(line_no, "instruction outside of a kernel");
    }
    // Optional label prefix.
    size_t i = 0;
    while (i < line.size() && IsIdentChar(line[i])) ++i;
    if (i > 0 && i < line.size() && line[i] == ':') {
      std::string_view label = line.substr(0, i);
      if (!IsIdentifier(label)) return Syntax(line_no, "bad label");
      if (current_->labels.count(label) > 0 ||
          std::find(current_->pending_labels.begin(),
                    current_->pending_labels.end(),
                    label) != current_->pending_labels.end()) {
        return Syntax(line_no, StrCat("duplicate label ", label));
      }
      current_->pending_labels.emplace_back(label);
      line = Trim(line.substr(i + 1));
      if (line.empty()) return OkStatus();
    }
    return ParseInstruction(line, line_no);
  }

  Status ParseHeader(std::string_view line, int line_no) {
    std::string_view rest = Trim(line.substr(6));
    const size_t open = rest.find('(');
    const size_t close = rest.rfind(')');
    if (open == std::string_view::npos || close == std::string_view::npos ||
        close < open) {
      return Syntax(line_no, "kernel header needs (params)");
    }
    KernelBuilder kb;
    std::string_view name = Trim(rest.substr(0, open));
    if (!IsIdentifier(name)) return Syntax(line_no, "bad kernel name");
    kb.def.name = std::string(name);
    kb.def.line = line_no;
    std::string_view params =
        Trim(rest.substr(open + 1, close - open - 1));
    if (!params.empty()) {
      for (std::string_view p : Split(params, ',')) {
        p = Trim(p);
        const size_t colon = p.find(':');
        if (colon == std::string_view::npos) {
          return Syntax(line_no, "parameter needs name:type");
        }
        std::string_view pname = Trim(p.substr(0, colon));
        std::string_view ptype = Trim(p.substr(colon + 1));
        if (!IsIdentifier(pname)) return Syntax(line_no, "bad parameter name");
        Param param;
        param.name = std::string(pname);
        if (ptype == "i32") {
          param.type = ScalarType::kI32;
        } else if (ptype == "f32") {
          param.type = ScalarType::kF32;
        } else if (ptype == "ptr") {
          param.type = ScalarType::kPtr;
        } else if (ptype.starts_with("ptr.")) {
          param.type = ScalarType::kPtr;
          param.space = ParseMemSpace(ptype.substr(4));
          if (!param.space) return Syntax(line_no, "unknown memory space");
        } else {
          return Syntax(line_no, StrCat("bad parameter type '", ptype,
                                              "'"));
        }
        if (kb.def.FindParam(param.name)) {
          return Syntax(line_no, "duplicate parameter");
        }
        kb.def.params.push_back(std::move(param));
      }
    }
    std::string_view tail = Trim(rest.substr(close + 1));
    if (!ConsumePrefix(tail, "regs=")) {
      return Syntax(line_no, "kernel header needs regs=<n>");
    }
    uint32_t regs = 0;
    auto [ptr, ec] = std::from_chars(tail.data(), tail.data() + tail.size(), regs);
    if (ec != std::errc() || ptr != tail.data() + tail.size() || regs == 0 ||
        regs > 4096) {
      return Syntax(line_no, "bad regs count");
    }
    kb.def.register_count = regs;
    if (program_.by_name.count(kb.def.name) > 0) {
      return MakeError(ErrorCode::kDuplicateKernel,
                       StrCat("line ", line_no, ": ", kb.def.name));
    }
    current_ = std::move(kb);
    return OkStatus();
  }

  StatusOr<Operand> ParseValueOperand(std::string_view tok,
                                            int line_no) {
    if (tok.empty()) return Syntax(line_no, "missing operand");
    if (tok[0] == '%') {
      auto reg = ParseRegister(tok);
      if (!reg) return Syntax(line_no, StrCat("bad register ", tok));
      return *reg;
    }
    if (tok[0] == '$') {
      auto idx = current_->def.FindParam(tok.substr(1));
      if (!idx) return Syntax(line_no, StrCat("unknown parameter ", tok));
      Operand op;
      op.kind = Operand::Kind::kParam;
      op.index = *idx;
      return op;
    }
    auto lit = ParseLiteral(tok);
    if (!lit) return Syntax(line_no, StrCat("bad operand ", tok));
    return *lit;
  }

  Status ParseAddress(std::string_view tok, int line_no,
                            Instruction& inst) {
    if (tok.size() < 2 || tok.front() != '[' || tok.back() != ']') {
      return Syntax(line_no, "address must be [reg(+|-)offset]");
    }
    std::string_view body = Trim(tok.substr(1, tok.size() - 2));
    size_t sign = body.find_first_of("+-", 1);
    std::string_view base = body;
    inst.offset = 0;
    if (sign != std::string_view::npos) {
      base = Trim(body.substr(0, sign));
      std::string_view off = Trim(body.substr(sign + 1));
      auto lit = ParseLiteral(off);
      if (!lit || lit->float_literal || lit->int_value < 0) {
        return Syntax(line_no, "bad address offset");
      }
      inst.offset = body[sign] == '-' ? -lit->int_value : lit->int_value;
    }
    if (base.empty() || (base[0] != '%' && base[0] != '$')) {
      return Syntax(line_no, "address base must be a register or parameter");
    }
    auto op = ParseValueOperand(base, line_no);
    if (!op.ok()) return op.status();
    inst.a = *op;
    return OkStatus();
  }

  Status ParseInstruction(std::string_view line, int line_no) {
    Instruction inst;
    inst.line = line_no;
    size_t ws = line.find_first_of(" \t");
    std::string_view mnemonic = line.substr(0, ws);
    std::string_view rest =
        ws == std::string_view::npos
            ? std::string_view()
            : Trim(line.substr(ws));
    std::vector<std::string_view> ops;
    if (!rest.empty()) {
      for (std::string_view o : Split(rest, ',')) {
        ops.push_back(Trim(o));
      }
    }
    std::vector<std::string_view> parts = Split(mnemonic, '.');
    std::string_view base = parts[0];
    auto want = [&](size_t n_ops, size_t n_parts) -> Status {
      if (ops.size() != n_ops) {
        return Syntax(line_no, StrCat(base, " expects ", n_ops,
                                            " operands"));
      }
      if (parts.size() != n_parts) {
        return Syntax(line_no, StrCat("bad suffix on ", mnemonic));
      }
      return OkStatus();
    };
    auto operand = [&](size_t i, Operand& out) -> Status {
      auto op = ParseValueOperand(ops[i], line_no);
      if (!op.ok()) return op.status();
      out = *op;
      return OkStatus();
    };
    Status st;
    if (base == "mov") {
      inst.opcode = Opcode::kMov;
      if (st = want(2, 1); !st.ok()) return st;
      if (st = operand(0, inst.dst); !st.ok()) return st;
      if (st = operand(1, inst.a); !st.ok()) return st;
    } else if (base == "add" || base == "sub" || base == "mul" ||
               base == "fadd" || base == "fsub" || base == "fmul") {
      inst.opcode = base == "add"    ? Opcode::kAdd
                    : base == "sub"  ? Opcode::kSub
                    : base == "mul"  ? Opcode::kMul
                    : base == "fadd" ? Opcode::kFAdd
                    : base == "fsub" ? Opcode::kFSub
                                     : Opcode::kFMul;
      if (st = want(3, 1); !st.ok()) return st;
      if (st = operand(0, inst.dst); !st.ok()) return st;
      if (st = operand(1, inst.a); !st.ok()) return st;
      if (st = operand(2, inst.b); !st.ok()) return st;
    } else if (base == "setp") {
      inst.opcode = Opcode::kSetp;
      if (st = want(3, 2); !st.ok()) return st;
      auto cmp = LookupName<CmpOp>(kCmpNames, parts[1]);
      if (!cmp) return Syntax(line_no, "unknown comparison");
      inst.cmp = *cmp;
      if (st = operand(0, inst.dst); !st.ok()) return st;
      if (st = operand(1, inst.a); !st.ok()) return st;
      if (st = operand(2, inst.b); !st.ok()) return st;
    } else if (base == "bra") {
      inst.opcode = Opcode::kBra;
      if (parts.size() != 1 || ops.empty() || ops.size() > 2) {
        return Syntax(line_no, "bra expects [pred,] label");
      }
      std::string_view label = ops.back();
      if (!IsIdentifier(label)) return Syntax(line_no, "bad branch label");
      inst.target_label = std::string(label);
      if (ops.size() == 2) {
        std::string_view pred = ops[0];
        if (ConsumePrefix(pred, "!")) inst.pred_negated = true;
        auto reg = ParseRegister(pred);
        if (!reg) return Syntax(line_no, "bad branch predicate");
        inst.a = *reg;
      }
    } else if (base == "ld" || base == "st") {
      inst.opcode = base == "ld" ? Opcode::kLd : Opcode::kSt;
      if (st = want(2, 3); !st.ok()) return st;
      auto space = ParseMemSpace(parts[1]);
      if (!space) return Syntax(line_no, "unknown memory space");
      inst.space = *space;
      auto type = LookupName<MemType>(kMemTypeNames, parts[2]);
      if (!type) return Syntax(line_no, "unknown access type");
      inst.mem_type = *type;
      if (inst.opcode == Opcode::kLd) {
        if (st = operand(0, inst.dst); !st.ok()) return st;
        if (st = ParseAddress(ops[1], line_no, inst); !st.ok()) return st;
      } else {
        if (st = ParseAddress(ops[0], line_no, inst); !st.ok()) return st;
        if (st = operand(1, inst.b); !st.ok()) return st;
      }
    } else if (base == "cvt") {
      inst.opcode = Opcode::kCvt;
      if (st = want(2, 3); !st.ok()) return st;
      if (parts[1] == "f32" && parts[2] == "i32") {
        inst.cvt_dst = ScalarType::kF32;
        inst.cvt_src = ScalarType::kI32;
      } else if (parts[1] == "i32" && parts[2] == "f32") {
        inst.cvt_dst = ScalarType::kI32;
        inst.cvt_src = ScalarType::kF32;
      } else {
        return Syntax(line_no, "cvt supports f32.i32 and i32.f32");
      }
      if (st = operand(0, inst.dst); !st.ok()) return st;
      if (st = operand(1, inst.a); !st.ok()) return st;
    } else if (base == "sreg") {
      inst.opcode = Opcode::kSreg;
      if (st = want(2, 1); !st.ok()) return st;
      if (st = operand(0, inst.dst); !st.ok()) return st;
      auto sreg = LookupName<SpecialReg>(kSregNames, ops[1]);
      if (!sreg) return Syntax(line_no, "unknown special register");
      inst.sreg = *sreg;
    } else if (base == "exit") {
      inst.opcode = Opcode::kExit;
      if (st = want(0, 1); !st.ok()) return st;
    } else {
      return Syntax(line_no, StrCat("unknown opcode '", mnemonic, "'"));
    }
    if (inst.dst.kind != Operand::Kind::kNone &&
        inst.dst.kind != Operand::Kind::kReg) {
      return Syntax(line_no, "destination must be a register");
    }
    KernelDef& def = current_->def;
    inst.id = static_cast<uint32_t>(def.instructions.size());
    for (std::string& label : current_->pending_labels) {
      current_->labels.emplace(label, inst.id);
      def.labels.emplace_back(std::move(label), inst.id);
    }
    current_->pending_labels.clear();
    def.instructions.push_back(std::move(inst));
    return OkStatus();
  }

  Status FinishKernel() {
    if (!current_.has_value()) return OkStatus();
    KernelBuilder kb = std::move(*current_);
    current_.reset();
    if (!kb.pending_labels.empty()) {
      return Syntax(kb.def.line, StrCat("label ", kb.pending_labels[0],
                                              " has no instruction"));
    }
    if (kb.def.instructions.empty()) {
      return Syntax(kb.def.line, StrCat("kernel ", kb.def.name,
                                              " has no instructions"));
    }
    for (Instruction& inst : kb.def.instructions) {
      if (inst.opcode != Opcode::kBra) continue;
      auto it = kb.labels.find(inst.target_label);
      if (it == kb.labels.end()) {
        return MakeError(ErrorCode::kUnresolvedLabel,
                         StrCat("line ", inst.line, ": ",
                                      inst.target_label));
      }
      inst.target = it->second;
    }
    Cfg cfg = BuildCfg(kb.def);
    kb.def.blocks = std::move(cfg.blocks);
    kb.def.static_edges = std::move(cfg.static_edges);
    kb.def.block_of.assign(kb.def.instructions.size(), 0);
    for (const BasicBlock& bb : kb.def.blocks) {
      for (uint32_t i = bb.begin; i < bb.end; ++i) kb.def.block_of[i] = bb.id;
    }
    kb.def.index = static_cast<uint32_t>(program_.kernels.size());
    program_.by_name.emplace(kb.def.name, kb.def.index);
    program_.kernels.push_back(std::move(kb.def));
    return OkStatus();
  }

  Program program_;
  std::optional<KernelBuilder> current_;
};

}  // namespace

StatusOr<Program> ParseProgram(std::string_view text) {
  return Parser().Run(text);
}

Cfg BuildCfg(const KernelDef& kernel) {
  const auto& insts = kernel.instructions;
  const uint32_t n = static_cast<uint32_t>(insts.size());
  std::vector<bool> leader(n, false);
  if (n > 0) leader[0] = true;
  for (uint32_t i = 0; i < n; ++i) {
    if (insts[i].opcode == Opcode::kBra) leader[insts[i].target] = true;
    if (insts[i].is_control_flow() && i + 1 < n) leader[i + 1] = true;
  }
  Cfg cfg;
  std::vector<uint32_t> block_of_leader(n, 0);
  for (uint32_t i = 0; i < n; ++i) {
    if (!leader[i]) continue;
    BasicBlock bb;
    bb.id = static_cast<uint32_t>(cfg.blocks.size());
    bb.begin = i;
    block_of_leader[i] = bb.id;
    cfg.blocks.push_back(bb);
  }
  for (size_t b = 0; b < cfg.blocks.size(); ++b) {
    cfg.blocks[b].end =
        b + 1 < cfg.blocks.size() ? cfg.blocks[b + 1].begin : n;
  }
  std::set<Edge> seen;
  auto add_edge = [&](uint32_t src, uint32_t dst) {
    Edge e{src, dst};
    if (seen.insert(e).second) cfg.static_edges.push_back(e);
  };
  for (BasicBlock& bb : cfg.blocks) {
    const Instruction& last = insts[bb.end - 1];
    const bool has_next = bb.end < n;
    if (last.opcode == Opcode::kExit) {
      bb.terminator = Terminator::kExit;
    } else if (last.opcode == Opcode::kBra) {
      bb.terminator = Terminator::kBranch;
      add_edge(bb.id, block_of_leader[last.target]);
      if (last.is_conditional_branch() && has_next) {
        add_edge(bb.id, bb.id + 1);
      }
    } else {
      bb.terminator = Terminator::kFallthrough;
      if (has_next) add_edge(bb.id, bb.id + 1);
    }
  }
  return cfg;
}

std::string_view DiagnosticKindName(Diagnostic::Kind kind) {
  switch (kind) {
    case Diagnostic::Kind::kTypeMismatch: return "TypeMismatch";
    case Diagnostic::Kind::kMissingSpaceAnnotation:
      return "MissingSpaceAnnotation";
    case Diagnostic::Kind::kRegisterOutOfRange: return "RegisterOutOfRange";
    case Diagnostic::Kind::kMissingExit: return "MissingExit";
  }
  return "?";
}

std::string FormatDiagnostic(const Diagnostic& d) {
  std::string where =
      d.instruction ? StrCat(" instruction ", *d.instruction) : "";
  return StrCat("line ", d.line, ": ", DiagnosticKindName(d.kind), ": ",
                      d.kernel, where, ": ", d.reason);
}

namespace {

// Value class an operand yields, or nullopt when it cannot be typed.
std::optional<RegClass> OperandClass(const KernelDef& k, const Operand& op) {
  switch (op.kind) {
    case Operand::Kind::kReg: return op.reg_class;
    case Operand::Kind::kParam:
      switch (k.params[op.index].type) {
        case ScalarType::kI32: return RegClass::kI32;
        case ScalarType::kF32: return RegClass::kF32;
        case ScalarType::kPtr: return RegClass::kPtr;
      }
      return std::nullopt;
    default: return std::nullopt;
  }
}

class Checker {
 public:
  Checker(const KernelDef& k, std::vector<Diagnostic>& out) : k_(k), out_(out) {}

  void Run() {
    for (const Param& p : k_.params) {
      if (p.type == ScalarType::kPtr && !p.space) {
        Report(Diagnostic::Kind::kMissingSpaceAnnotation, std::nullopt,
               k_.line, StrCat("pointer parameter ", p.name,
                                     " has no memory space"));
      }
    }
    for (const Instruction& inst : k_.instructions) Check(inst);
    const Instruction& last = k_.instructions.back();
    const bool terminates =
        last.opcode == Opcode::kExit ||
        (last.opcode == Opcode::kBra && !last.is_conditional_branch());
    if (!terminates) {
      Report(Diagnostic::Kind::kMissingExit, last.id, last.line,
             "control falls off the end of the kernel");
    }
  }

 private:
  void Report(Diagnostic::Kind kind, std::optional<uint32_t> iid, int line,
              std::string reason) {
    out_.push_back(Diagnostic{kind, k_.name, iid, line, std::move(reason)});
  }

  void Mismatch(const Instruction& inst, std::string reason) {
    Report(Diagnostic::Kind::kTypeMismatch, inst.id, inst.line,
           std::move(reason));
  }

  void CheckRegIndex(const Instruction& inst, const Operand& op) {
    if (op.kind == Operand::Kind::kReg && op.index >= k_.register_count) {
      Report(Diagnostic::Kind::kRegisterOutOfRange, inst.id, inst.line,
             StrCat("register index ", op.index, " >= regs=",
                          k_.register_count));
    }
  }

  // True if `op` can be read as a value of class `want`.
  bool Accepts(const Operand& op, RegClass want) const {
    if (op.kind == Operand::Kind::kImm) {
      switch (want) {
        case RegClass::kF32: return true;
        case RegClass::kI32:
          return !op.float_literal && op.int_value >= INT32_MIN &&
                 op.int_value <= UINT32_MAX;
        case RegClass::kPtr: return !op.float_literal && op.int_value >= 0;
        case RegClass::kPred:
          return !op.float_literal && (op.int_value == 0 || op.int_value == 1);
      }
    }
    auto cls = OperandClass(k_, op);
    return cls.has_value() && *cls == want;
  }

  void Expect(const Instruction& inst, const Operand& op, RegClass want,
              std::string_view what) {
    if (!Accepts(op, want)) {
      static constexpr std::string_view kNames[] = {"i32", "f32", "pred",
                                                    "ptr"};
      Mismatch(inst, StrCat(what, " must be ",
                                  kNames[static_cast<int>(want)]));
    }
  }

  static RegClass LoadClass(MemType t) {
    switch (t) {
      case MemType::kF32: return RegClass::kF32;
      case MemType::kPtr: return RegClass::kPtr;
      default: return RegClass::kI32;
    }
  }

  void Check(const Instruction& inst) {
    CheckRegIndex(inst, inst.dst);
    CheckRegIndex(inst, inst.a);
    CheckRegIndex(inst, inst.b);
    const RegClass dcls = inst.dst.reg_class;
    switch (inst.opcode) {
      case Opcode::kMov:
        Expect(inst, inst.a, dcls, "mov source");
        break;
      case Opcode::kAdd:
      case Opcode::kSub:
        if (inst.dst.is_reg(RegClass::kPtr)) {
          Expect(inst, inst.a, RegClass::kPtr, "pointer arithmetic base");
          Expect(inst, inst.b, RegClass::kI32, "pointer arithmetic offset");
        } else if (inst.dst.is_reg(RegClass::kI32)) {
          Expect(inst, inst.a, RegClass::kI32, "integer operand");
          Expect(inst, inst.b, RegClass::kI32, "integer operand");
        } else {
          Mismatch(inst, "add/sub destination must be i32 or ptr");
        }
        break;
      case Opcode::kMul:
        Expect(inst, inst.dst, RegClass::kI32, "mul destination");
        Expect(inst, inst.a, RegClass::kI32, "integer operand");
        Expect(inst, inst.b, RegClass::kI32, "integer operand");
        break;
      case Opcode::kFAdd:
      case Opcode::kFSub:
      case Opcode::kFMul:
        Expect(inst, inst.dst, RegClass::kF32, "float destination");
        Expect(inst, inst.a, RegClass::kF32, "float operand");
        Expect(inst, inst.b, RegClass::kF32, "float operand");
        break;
      case Opcode::kSetp: {
        Expect(inst, inst.dst, RegClass::kPred, "setp destination");
        auto cls = OperandClass(k_, inst.a);
        if (!cls) cls = OperandClass(k_, inst.b);
        if (!cls || *cls == RegClass::kPred) {
          Mismatch(inst, "setp needs i32, f32 or ptr operands");
          break;
        }
        Expect(inst, inst.a, *cls, "setp operand");
        Expect(inst, inst.b, *cls, "setp operand");
        break;
      }
      case Opcode::kBra:
        if (inst.a.kind != Operand::Kind::kNone) {
          Expect(inst, inst.a, RegClass::kPred, "branch predicate");
        }
        break;
      case Opcode::kLd:
        Expect(inst, inst.a, RegClass::kPtr, "load address");
        Expect(inst, inst.dst, LoadClass(inst.mem_type), "load destination");
        break;
      case Opcode::kSt:
        Expect(inst, inst.a, RegClass::kPtr, "store address");
        Expect(inst, inst.b, LoadClass(inst.mem_type), "stored value");
        break;
      case Opcode::kCvt:
        if (inst.cvt_dst == ScalarType::kF32) {
          Expect(inst, inst.dst, RegClass::kF32, "cvt destination");
          Expect(inst, inst.a, RegClass::kI32, "cvt source");
        } else {
          Expect(inst, inst.dst, RegClass::kI32, "cvt destination");
          Expect(inst, inst.a, RegClass::kF32, "cvt source");
        }
        break;
      case Opcode::kSreg:
        Expect(inst, inst.dst, RegClass::kI32, "sreg destination");
        break;
      case Opcode::kExit:
        break;
    }
  }

  const KernelDef& k_;
  std::vector<Diagnostic>& out_;
};

}  // namespace

std::vector<Diagnostic> Validate(const Program& program) {
  std::vector<Diagnostic> out;
  for (const KernelDef& k : program.kernels) Checker(k, out).Run();
  return out;
}

StatusOr<Program> LoadProgram(std::string_view text) {
  StatusOr<Program> program = ParseProgram(text);
  if (!program.ok()) return program.status();
  std::vector<Diagnostic> diags = Validate(*program);
  if (!diags.empty()) {
    return MakeError(ErrorCode::kTypeMismatch, FormatDiagnostic(diags[0]));
  }
  return program;
}

StatusOr<Program> LoadProgramFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return MakeError(ErrorCode::kIo, StrCat("cannot read ", path));
  std::stringstream ss;
  ss << in.rdbuf();
  return LoadProgram(ss.str());
}

namespace {

std::string PrintOperand(const KernelDef& k, const Operand& op) {
  switch (op.kind) {
    case Operand::Kind::kNone: return "";
    case Operand::Kind::kReg: {
      static constexpr char kPrefix[] = {'r', 'f', 'p', 'a'};
      return StrCat("%", std::string(1, kPrefix[static_cast<int>(
                                                  op.reg_class)]),
                          op.index);
    }
    case Operand::Kind::kParam: return StrCat("$", k.params[op.index].name);
    case Operand::Kind::kImm:
      if (op.float_literal) return fmt::format("0f{:08X}", op.float_bits);
      return StrCat(op.int_value);
  }
  return "";
}

std::string PrintAddress(const KernelDef& k, const Instruction& inst) {
  std::string out = StrCat("[", PrintOperand(k, inst.a));
  if (inst.offset > 0) out += StrCat("+", inst.offset);
  if (inst.offset < 0) out += StrCat("-", -inst.offset);
  out += "]";
  return out;
}

std::string PrintInstruction(const KernelDef& k, const Instruction& inst) {
  auto op = [&](const Operand& o) { return PrintOperand(k, o); };
  switch (inst.opcode) {
    case Opcode::kMov: return StrCat("mov ", op(inst.dst), ", ", op(inst.a));
    case Opcode::kAdd:
    case Opcode::kSub:
    case Opcode::kMul:
    case Opcode::kFAdd:
    case Opcode::kFSub:
    case Opcode::kFMul: {
      static constexpr std::string_view kNames[] = {"", "add", "sub", "mul",
                                                    "fadd", "fmul", "fsub"};
      return StrCat(kNames[static_cast<int>(inst.opcode)], " ",
                          op(inst.dst), ", ", op(inst.a), ", ", op(inst.b));
    }
    case Opcode::kSetp:
      return StrCat("setp.", kCmpNames[static_cast<int>(inst.cmp)], " ",
                          op(inst.dst), ", ", op(inst.a), ", ", op(inst.b));
    case Opcode::kBra:
      if (inst.a.kind == Operand::Kind::kNone) {
        return StrCat("bra ", inst.target_label);
      }
      return StrCat("bra ", inst.pred_negated ? "!" : "", op(inst.a),
                          ", ", inst.target_label);
    case Opcode::kLd:
      return StrCat("ld.", MemSpaceName(inst.space), ".",
                          kMemTypeNames[static_cast<int>(inst.mem_type)], " ",
                          op(inst.dst), ", ", PrintAddress(k, inst));
    case Opcode::kSt:
      return StrCat("st.", MemSpaceName(inst.space), ".",
                          kMemTypeNames[static_cast<int>(inst.mem_type)], " ",
                          PrintAddress(k, inst), ", ", op(inst.b));
    case Opcode::kCvt:
      return StrCat("cvt.", ScalarTypeName(inst.cvt_dst), ".",
                          ScalarTypeName(inst.cvt_src), " ", op(inst.dst),
                          ", ", op(inst.a));
    case Opcode::kSreg:
      return StrCat("sreg ", op(inst.dst), ", ",
                          kSregNames[static_cast<int>(inst.sreg)]);
    case Opcode::kExit: return "exit";
  }
  return "";
}

}  // namespace

std::string PrintProgram(const Program& program) {
  std::string out;
  for (const KernelDef& k : program.kernels) {
    std::vector<std::string> params;
    for (const Param& p : k.params) {
      std::string type(ScalarTypeName(p.type));
      if (p.space) type += StrCat(".", MemSpaceName(*p.space));
      params.push_back(StrCat(p.name, ":", type));
    }
    out += StrCat("kernel ", k.name, "(", fmt::format("{}", fmt::join(params, ", ")),
                    ") regs=", k.register_count, "\n");
    size_t next_label = 0;
    for (const Instruction& inst : k.instructions) {
      while (next_label < k.labels.size() &&
             k.labels[next_label].second == inst.id) {
        out += StrCat(k.labels[next_label].first, ":\n");
        ++next_label;
      }
      out += StrCat("  ", PrintInstruction(k, inst), "\n");
    }
  }
  return out;
}

namespace {

bool SameOperand(const Operand& a, const Operand& b) {
  if (a.kind != b.kind) return false;
  switch (a.kind) {
    case Operand::Kind::kNone: return true;
    case Operand::Kind::kReg:
      return a.reg_class == b.reg_class && a.index == b.index;
    case Operand::Kind::kParam: return a.index == b.index;
    case Operand::Kind::kImm:
      return a.float_literal == b.float_literal &&
             a.float_bits == b.float_bits &&
             (a.float_literal || a.int_value == b.int_value);
  }
  return false;
}

bool SameInstruction(const Instruction& a, const Instruction& b) {
  if (a.id != b.id || a.opcode != b.opcode) return false;
  if (!SameOperand(a.dst, b.dst) || !SameOperand(a.a, b.a) ||
      !SameOperand(a.b, b.b)) {
    return false;
  }
  switch (a.opcode) {
    case Opcode::kSetp: return a.cmp == b.cmp;
    case Opcode::kSreg: return a.sreg == b.sreg;
    case Opcode::kBra:
      return a.target == b.target && a.target_label == b.target_label &&
             a.pred_negated == b.pred_negated;
    case Opcode::kLd:
    case Opcode::kSt:
      return a.space == b.space && a.mem_type == b.mem_type &&
             a.offset == b.offset;
    case Opcode::kCvt: return a.cvt_dst == b.cvt_dst && a.cvt_src == b.cvt_src;
    default: return true;
  }
}

bool SameBlock(const BasicBlock& a, const BasicBlock& b) {
  return a.id == b.id && a.begin == b.begin && a.end == b.end &&
         a.terminator == b.terminator;
}

}  // namespace

bool SameStructure(const Program& a, const Program& b) {
  if (a.kernels.size() != b.kernels.size()) return false;
  for (size_t i = 0; i < a.kernels.size(); ++i) {
    const KernelDef& x = a.kernels[i];
    const KernelDef& y = b.kernels[i];
    if (x.name != y.name || x.index != y.index || x.params != y.params ||
        x.register_count != y.register_count || x.labels != y.labels ||
        x.static_edges != y.static_edges || x.block_of != y.block_of ||
        x.instructions.size() != y.instructions.size() ||
        x.blocks.size() != y.blocks.size()) {
      return false;
    }
    for (size_t j = 0; j < x.instructions.size(); ++j) {
      if (!SameInstruction(x.instructions[j], y.instructions[j])) return false;
    }
    for (size_t j = 0; j < x.blocks.size(); ++j) {
      if (!SameBlock(x.blocks[j], y.blocks[j])) return false;
    }
  }
  return true;
}

}  // namespace simt_forge
