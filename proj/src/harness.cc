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

#include "simt_forge/harness.h"

#include <bit>
#include <charconv>
#include <filesystem>
#include <set>

#include "simt_forge/hash.h"
#include "simt_forge/strings.h"

namespace simt_forge {

namespace {

Status Syntax(int line, std::string_view why) {
  return MakeError(ErrorCode::kManifestSyntax, StrCat("line ", line, ": ", why));
}

std::optional<uint32_t> ParseF32Bits(std::string_view s) {
  if (s.starts_with("0x") || s.starts_with("0X")) {
    auto v = ParseUint(s);
    if (!v || *v > UINT32_MAX) return std::nullopt;
    return static_cast<uint32_t>(*v);
  }
  float f = 0;
  const char* end = s.data() + s.size();
  auto [ptr, ec] = std::from_chars(s.data(), end, f);
  if (ec != std::errc() || ptr != end) return std::nullopt;
  return std::bit_cast<uint32_t>(f);
}

std::optional<int32_t> ParseI32(std::string_view s) {
  auto v = ParseInt(s);
  if (!v || *v < INT32_MIN || *v > INT32_MAX) return std::nullopt;
  return static_cast<int32_t>(*v);
}

std::optional<MemSpace> ParseUpperSpace(std::string_view s) {
  if (s == "GLOBAL") return MemSpace::kGlobal;
  if (s == "SHARED") return MemSpace::kShared;
  if (s == "LOCAL") return MemSpace::kLocal;
  return std::nullopt;
}

std::optional<std::vector<uint32_t>> ParseExtentList(std::string_view s) {
  std::vector<uint32_t> out;
  for (std::string_view part : Split(s, 'x')) {
    auto v = ParseUint(part);
    if (!v || *v == 0 || *v > (1u << 24)) return std::nullopt;
    out.push_back(static_cast<uint32_t>(*v));
  }
  return out;
}

Status ParseArg(const std::vector<std::string_view>& w, int line,
                ArgSpec* spec) {
  if (w.size() < 3) return Syntax(line, "arg needs a name and a type");
  spec->name = std::string(w[1]);
  size_t next = 3;
  std::string_view type = w[2];
  if (type == "i32" || type == "f32") {
    spec->type = type == "i32" ? ScalarType::kI32 : ScalarType::kF32;
  } else if (ConsumePrefix(type, "ptr.")) {
    auto space = ParseMemSpace(type);
    if (!space) return Syntax(line, StrCat("unknown space ", type));
    spec->type = ScalarType::kPtr;
    spec->space = *space;
    if (w.size() < 5) return Syntax(line, "array arg needs element type and extents");
    if (w[3] == "i32") {
      spec->elem = ElemType::kI32;
    } else if (w[3] == "f32") {
      spec->elem = ElemType::kF32;
    } else {
      return Syntax(line, StrCat("bad element type ", w[3]));
    }
    auto extents = ParseExtentList(w[4]);
    if (!extents) return Syntax(line, StrCat("bad extents ", w[4]));
    spec->extents = *extents;
    next = 5;
  } else {
    return Syntax(line, StrCat("unknown arg type ", type));
  }
  auto elem_bits = [&](std::string_view v) -> std::optional<uint32_t> {
    if (spec->elem == ElemType::kF32) return ParseF32Bits(v);
    auto i = ParseI32(v);
    if (!i) return std::nullopt;
    return static_cast<uint32_t>(*i);
  };
  for (size_t i = next; i < w.size(); ++i) {
    std::string_view opt = w[i];
    if (opt == "fixed") {
      spec->mutable_arg = false;
    } else if (ConsumePrefix(opt, "default=")) {
      if (spec->type == ScalarType::kI32) {
        auto v = ParseI32(opt);
        if (!v) return Syntax(line, "bad i32 default");
        spec->scalar_default = static_cast<uint32_t>(*v);
      } else if (spec->type == ScalarType::kF32) {
        auto v = ParseF32Bits(opt);
        if (!v) return Syntax(line, "bad f32 default");
        spec->scalar_default = *v;
      } else {
        return Syntax(line, "arrays take init=, not default=");
      }
    } else if (ConsumePrefix(opt, "clamp=")) {
      const size_t dots = opt.find("..");
      if (spec->type != ScalarType::kI32 || dots == std::string_view::npos) {
        return Syntax(line, "clamp=LO..HI applies to i32 args");
      }
      auto lo = ParseI32(opt.substr(0, dots));
      auto hi = ParseI32(opt.substr(dots + 2));
      if (!lo || !hi || *lo > *hi) return Syntax(line, "bad clamp range");
      spec->clamp = std::make_pair(*lo, *hi);
    } else if (ConsumePrefix(opt, "init=")) {
      if (spec->type != ScalarType::kPtr) return Syntax(line, "init= needs an array");
      if (opt == "iota") {
        spec->init = ArrayInit::kIota;
      } else if (opt == "zero") {
        spec->init = ArrayInit::kZero;
      } else if (ConsumePrefix(opt, "fill:")) {
        auto v = elem_bits(opt);
        if (!v) return Syntax(line, "bad fill value");
        spec->init = ArrayInit::kFill;
        spec->init_values = {*v};
      } else if (ConsumePrefix(opt, "list:")) {
        spec->init = ArrayInit::kList;
        for (std::string_view item : Split(opt, ',')) {
          auto v = elem_bits(item);
          if (!v) return Syntax(line, StrCat("bad list value ", item));
          spec->init_values.push_back(*v);
        }
      } else {
        return Syntax(line, StrCat("bad init ", opt));
      }
    } else if (ConsumePrefix(opt, "mut=")) {
      if (spec->type != ScalarType::kPtr) return Syntax(line, "mut= needs an array");
      spec->mutations = 0;
      if (opt != "none") {
        for (std::string_view m : Split(opt, ',')) {
          if (m == "value") {
            spec->mutations |= kMutValue;
          } else if (m == "dims") {
            spec->mutations |= kMutDims;
          } else if (m == "space") {
            spec->mutations |= kMutSpace;
          } else if (m == "offset") {
            spec->mutations |= kMutOffset;
          } else {
            return Syntax(line, StrCat("bad mutation kind ", m));
          }
        }
      }
      if (spec->mutations == 0) spec->mutable_arg = false;
    } else {
      return Syntax(line, StrCat("unknown arg option ", opt));
    }
  }
  return OkStatus();
}

StatusOr<HostOpSpec> ParseOp(const std::vector<std::string_view>& w, int line) {
  HostOpSpec op;
  op.line = line;
  const std::string_view verb = w[0];
  auto need = [&](size_t n) { return w.size() >= n; };
  auto parse_arg_index = [&](std::string_view s) -> std::optional<uint32_t> {
    auto v = ParseUint(s);
    if (!v || *v > 1024) return std::nullopt;
    return static_cast<uint32_t>(*v);
  };
  if (verb == "ALLOC") {
    op.kind = HostOpSpec::Kind::kAlloc;
    if (!need(4) || w.size() != 4) return Syntax(line, "ALLOC <name> <SPACE> <bytes> | ALLOC <name> arg <k>");
    op.name = std::string(w[1]);
    if (w[2] == "arg") {
      op.arg = parse_arg_index(w[3]);
      if (!op.arg) return Syntax(line, "bad arg index");
    } else {
      auto space = ParseUpperSpace(w[2]);
      auto size = ParseUint(w[3]);
      if (!space) return Syntax(line, StrCat("unknown space ", w[2]));
      if (!size || *size == 0) return Syntax(line, "ALLOC size must be >= 1");
      op.space = *space;
      op.size = *size;
    }
  } else if (verb == "COPY_IN") {
    op.kind = HostOpSpec::Kind::kCopyIn;
    if (w.size() != 4) return Syntax(line, "COPY_IN <name> inline <hex> | zero <bytes> | arg <k>");
    op.name = std::string(w[1]);
    if (w[2] == "inline") {
      op.source = HostOpSpec::Source::kInline;
      auto bytes = HexDecode(w[3]);
      if (!bytes) return Syntax(line, "bad inline hex payload");
      op.payload.assign(bytes->begin(), bytes->end());
    } else if (w[2] == "zero") {
      op.source = HostOpSpec::Source::kZero;
      auto size = ParseUint(w[3]);
      if (!size) return Syntax(line, "bad zero length");
      op.size = *size;
    } else if (w[2] == "arg") {
      op.source = HostOpSpec::Source::kArg;
      op.arg = parse_arg_index(w[3]);
      if (!op.arg) return Syntax(line, "bad arg index");
    } else {
      return Syntax(line, StrCat("unknown COPY_IN source ", w[2]));
    }
  } else if (verb == "LAUNCH") {
    op.kind = HostOpSpec::Kind::kLaunch;
    if (!need(4)) return Syntax(line, "LAUNCH <kernel> grid=<g> block=<b> <bindings>");
    op.kernel = std::string(w[1]);
    std::string_view grid = w[2];
    std::string_view block = w[3];
    if (!ConsumePrefix(grid, "grid=") || !ConsumePrefix(block, "block=")) {
      return Syntax(line, "LAUNCH needs grid= and block=");
    }
    auto g = ParseUint(grid);
    auto b = ParseUint(block);
    if (!g || !b || *g == 0 || *b == 0 || *g > 65535 || *b > 1024) {
      return Syntax(line, "grid and block must be in 1..65535 and 1..1024");
    }
    op.grid = static_cast<uint32_t>(*g);
    op.block = static_cast<uint32_t>(*b);
    for (size_t i = 4; i < w.size(); ++i) {
      std::string_view s = w[i];
      Binding bind;
      if (ConsumePrefix(s, "arg:")) {
        bind.kind = Binding::Kind::kArg;
        auto k = parse_arg_index(s);
        if (!k) return Syntax(line, "bad arg binding");
        bind.arg = *k;
      } else if (ConsumePrefix(s, "@")) {
        bind.kind = Binding::Kind::kNamed;
        bind.name = std::string(s);
      } else if (ConsumePrefix(s, "i32:")) {
        bind.kind = Binding::Kind::kI32;
        auto v = ParseI32(s);
        if (!v) return Syntax(line, "bad i32 literal");
        bind.bits = static_cast<uint32_t>(*v);
      } else if (ConsumePrefix(s, "f32:")) {
        bind.kind = Binding::Kind::kF32;
        auto v = ParseF32Bits(s);
        if (!v) return Syntax(line, "bad f32 literal");
        bind.bits = *v;
      } else {
        return Syntax(line, StrCat("bad binding ", s));
      }
      op.bindings.push_back(std::move(bind));
    }
  } else if (verb == "COPY_OUT") {
    op.kind = HostOpSpec::Kind::kCopyOut;
    if (w.size() != 3) return Syntax(line, "COPY_OUT <name> <bytes|all>");
    op.name = std::string(w[1]);
    if (w[2] != "all") {
      auto len = ParseUint(w[2]);
      if (!len) return Syntax(line, "bad COPY_OUT length");
      op.length = *len;
    }
  } else if (verb == "FREE") {
    op.kind = HostOpSpec::Kind::kFree;
    if (w.size() != 2) return Syntax(line, "FREE <name>");
    op.name = std::string(w[1]);
  } else if (verb == "SYNC") {
    op.kind = HostOpSpec::Kind::kSync;
    if (w.size() != 1) return Syntax(line, "SYNC takes no operands");
  } else {
    return Syntax(line, StrCat("unknown host op ", verb));
  }
  return op;
}

// Checks the cross-line invariants of a parsed manifest.
Status ValidateManifest(const HarnessManifest& m) {
  std::map<std::string, bool> live;  // name -> currently live
  std::set<uint32_t> used_args;
  auto arg_ok = [&](uint32_t k, int line) -> Status {
    if (k >= m.args.size()) {
      return MakeError(ErrorCode::kArgArityMismatch,
                       StrCat("line ", line, ": arg ", k, " but only ",
                              m.args.size(), " args are declared"));
    }
    used_args.insert(k);
    return OkStatus();
  };
  auto array_arg = [&](uint32_t k, int line) -> Status {
    SF_RETURN_IF_ERROR(arg_ok(k, line));
    if (m.args[k].type != ScalarType::kPtr) {
      return MakeError(ErrorCode::kArgArityMismatch,
                       StrCat("line ", line, ": arg ", k, " (", m.args[k].name,
                              ") is not an array"));
    }
    return OkStatus();
  };
  auto known = [&](const std::string& name, int line) -> Status {
    if (!live.contains(name)) {
      return Syntax(line, StrCat("allocation ", name, " was never allocated"));
    }
    return OkStatus();
  };
  for (const Phase* phase : {&m.init, &m.compute, &m.term}) {
    for (const HostOpSpec& op : phase->ops) {
      switch (op.kind) {
        case HostOpSpec::Kind::kAlloc:
          if (op.arg) SF_RETURN_IF_ERROR(array_arg(*op.arg, op.line));
          if (live.contains(op.name) && live[op.name]) {
            return Syntax(op.line, StrCat("allocation ", op.name, " is already live"));
          }
          live[op.name] = true;
          break;
        case HostOpSpec::Kind::kCopyIn:
          if (op.arg) SF_RETURN_IF_ERROR(array_arg(*op.arg, op.line));
          SF_RETURN_IF_ERROR(known(op.name, op.line));
          break;
        case HostOpSpec::Kind::kCopyOut:
          SF_RETURN_IF_ERROR(known(op.name, op.line));
          break;
        case HostOpSpec::Kind::kFree:
          if (!live.contains(op.name) || !live[op.name]) {
            return MakeError(ErrorCode::kDanglingFree,
                             StrCat("line ", op.line, ": FREE of ", op.name,
                                    ", which is not allocated"));
          }
          live[op.name] = false;
          break;
        case HostOpSpec::Kind::kLaunch: {
          const KernelDef* k = m.program.FindKernel(op.kernel);
          if (k == nullptr) {
            return MakeError(ErrorCode::kUnknownKernel,
                             StrCat("line ", op.line, ": no kernel named ",
                                    op.kernel));
          }
          if (op.bindings.size() != k->params.size()) {
            return MakeError(ErrorCode::kArgArityMismatch,
                             StrCat("line ", op.line, ": ", op.kernel, " takes ",
                                    k->params.size(), " arguments, ",
                                    op.bindings.size(), " bound"));
          }
          for (size_t i = 0; i < op.bindings.size(); ++i) {
            const Binding& b = op.bindings[i];
            const Param& p = k->params[i];
            ScalarType got = ScalarType::kPtr;
            switch (b.kind) {
              case Binding::Kind::kArg:
                SF_RETURN_IF_ERROR(arg_ok(b.arg, op.line));
                got = m.args[b.arg].type;
                if (got == ScalarType::kPtr) {
                  return MakeError(ErrorCode::kArgArityMismatch,
                                   StrCat("line ", op.line, ": array arg ",
                                          b.arg, " must be bound through an "
                                          "ALLOC name"));
                }
                break;
              case Binding::Kind::kNamed:
                SF_RETURN_IF_ERROR(known(b.name, op.line));
                break;
              case Binding::Kind::kI32: got = ScalarType::kI32; break;
              case Binding::Kind::kF32: got = ScalarType::kF32; break;
            }
            if (got != p.type) {
              return MakeError(ErrorCode::kArgArityMismatch,
                               StrCat("line ", op.line, ": binding ", i,
                                      " does not match parameter ", p.name,
                                      ":", ScalarTypeName(p.type)));
            }
          }
          break;
        }
        case HostOpSpec::Kind::kSync: break;
      }
    }
  }
  if (m.compute_launches() == 0) {
    return MakeError(ErrorCode::kManifestSyntax,
                     "COMPUTE must contain at least one LAUNCH");
  }
  for (const auto& [name, is_live] : live) {
    if (is_live) {
      return MakeError(ErrorCode::kManifestSyntax,
                       StrCat("allocation ", name, " is still live after TERM"));
    }
  }
  for (uint32_t k = 0; k < m.args.size(); ++k) {
    if (!used_args.contains(k)) {
      return MakeError(ErrorCode::kArgArityMismatch,
                       StrCat("arg ", k, " (", m.args[k].name,
                              ") is never referenced"));
    }
  }
  for (const Trigger& t : m.triggers) {
    bool found = false;
    for (const ArgSpec& a : m.args) found = found || a.name == t.arg;
    if (!found) {
      return MakeError(ErrorCode::kManifestSyntax,
                       StrCat("trigger names unknown arg ", t.arg));
    }
  }
  return OkStatus();
}

}  // namespace

size_t HarnessManifest::compute_launches() const {
  size_t n = 0;
  for (const HostOpSpec& op : compute.ops) {
    n += op.kind == HostOpSpec::Kind::kLaunch ? 1 : 0;
  }
  return n;
}

StatusOr<HarnessManifest> ParseManifest(std::string_view text,
                                        const std::string& base_dir,
                                        const Program* program_override) {
  HarnessManifest m;
  m.manifest_digest = ContentHash(text);
  Phase* section = nullptr;
  int line_no = 0;
  for (std::string_view raw : Split(text, '\n')) {
    ++line_no;
    std::string_view line = raw;
    if (const size_t hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = Trim(line);
    if (line.empty()) continue;
    if (line == "[INIT]") {
      section = &m.init;
      continue;
    }
    if (line == "[COMPUTE]") {
      section = &m.compute;
      continue;
    }
    if (line == "[TERM]") {
      section = &m.term;
      continue;
    }
    std::vector<std::string_view> w = SplitWords(line);
    if (section != nullptr) {
      SF_ASSIGN_OR_RETURN(HostOpSpec op, ParseOp(w, line_no));
      section->ops.push_back(std::move(op));
      continue;
    }
    if (w[0] == "program") {
      if (w.size() != 2) return Syntax(line_no, "program <path>");
      m.program_path = std::string(w[1]);
    } else if (w[0] == "arg") {
      ArgSpec spec;
      SF_RETURN_IF_ERROR(ParseArg(w, line_no, &spec));
      for (const ArgSpec& other : m.args) {
        if (other.name == spec.name) {
          return Syntax(line_no, StrCat("duplicate arg ", spec.name));
        }
      }
      m.args.push_back(std::move(spec));
    } else if (w[0] == "reference") {
      if (w.size() != 2) return Syntax(line_no, "reference <benchmark>");
      m.reference = std::string(w[1]);
    } else if (w[0] == "trigger") {
      if (w.size() != 2) return Syntax(line_no, "trigger <arg>[.<field>]=<value>");
      const size_t eq = w[1].find('=');
      if (eq == std::string_view::npos) return Syntax(line_no, "trigger needs =");
      std::string_view lhs = w[1].substr(0, eq);
      Trigger t;
      t.value = std::string(w[1].substr(eq + 1));
      if (const size_t dot = lhs.find('.'); dot != std::string_view::npos) {
        t.field = std::string(lhs.substr(dot + 1));
        lhs = lhs.substr(0, dot);
        if (t.field != "space" && t.field != "offset" && t.field != "extents") {
          return Syntax(line_no, StrCat("unknown trigger field ", t.field));
        }
      }
      t.arg = std::string(lhs);
      m.triggers.push_back(std::move(t));
    } else if (w[0] == "expect") {
      if (w.size() != 2) return Syntax(line_no, "expect <BUG_CLASS>");
      auto c = ParseBugClass(w[1]);
      if (!c) return Syntax(line_no, StrCat("unknown bug class ", w[1]));
      m.expect = *c;
    } else {
      return Syntax(line_no, StrCat("unknown directive ", w[0]));
    }
  }
  if (m.program_path.empty() && program_override == nullptr) {
    return MakeError(ErrorCode::kManifestSyntax, "missing program directive");
  }
  if (program_override != nullptr) {
    m.program = *program_override;
    m.program_text = PrintProgram(m.program);
  } else {
    const std::string path =
        (std::filesystem::path(base_dir) / m.program_path).string();
    std::optional<std::string> text = ReadFile(path);
    if (!text) return MakeError(ErrorCode::kIo, StrCat("cannot read ", path));
    SF_ASSIGN_OR_RETURN(m.program, LoadProgram(*text));
    m.program_text = std::move(*text);
  }
  SF_RETURN_IF_ERROR(ValidateManifest(m));
  return m;
}

StatusOr<HarnessManifest> LoadHarness(const std::string& path) {
  std::optional<std::string> text = ReadFile(path);
  if (!text) {
    return MakeError(ErrorCode::kIo, StrCat("cannot read harness ", path));
  }
  const std::string dir = std::filesystem::path(path).parent_path().string();
  SF_ASSIGN_OR_RETURN(HarnessManifest m, ParseManifest(*text, dir));
  m.path = path;
  return m;
}

StatusOr<TestCase> TriggerTestCase(const HarnessManifest& manifest) {
  TestCase tc = SeedTestCase(manifest.args);
  for (const Trigger& t : manifest.triggers) {
    size_t k = 0;
    while (k < manifest.args.size() && manifest.args[k].name != t.arg) ++k;
    const ArgSpec& spec = manifest.args[k];
    TypedValue& v = tc.args[k];
    auto bad = [&] {
      return MakeError(ErrorCode::kManifestSyntax,
                       StrCat("bad trigger value for ", t.arg, ": ", t.value));
    };
    if (t.field.empty()) {
      if (spec.type == ScalarType::kI32) {
        auto x = ParseI32(t.value);
        if (!x) return bad();
        v = TypedValue::I32(*x);
      } else if (spec.type == ScalarType::kF32) {
        auto x = ParseF32Bits(t.value);
        if (!x) return bad();
        v = TypedValue::F32Bits(*x);
      } else {
        return bad();
      }
    } else if (spec.type != ScalarType::kPtr) {
      return bad();
    } else if (t.field == "space") {
      auto s = ParseMemSpace(t.value);
      if (!s) return bad();
      v.array = MutateArray(v.array, spec, PointerSpaceSwap{*s});
    } else if (t.field == "offset") {
      auto x = ParseInt(t.value);
      if (!x) return bad();
      v.array = MutateArray(v.array, spec, PointerOffset{*x});
    } else {
      auto e = ParseExtentList(t.value);
      if (!e) return bad();
      v.array = MutateArray(v.array, spec, ArrayDimension{*e});
    }
  }
  return tc;
}

namespace {

class RecordingHooks : public ExecHooks {
 public:
  explicit RecordingHooks(CoverageMap* map) : map_(map) {}

  void OnLaunch(const KernelDef& kernel) override {
    if (map_ != nullptr) map_->RecordEntry(kernel.index);
  }
  void OnControlFlow(const KernelDef& kernel, uint32_t src,
                     uint32_t dst) override {
    if (map_ != nullptr && status_.ok()) {
      status_ = map_->RecordEdge(kernel.index, src, dst);
    }
  }
  const Status& status() const { return status_; }

 private:
  CoverageMap* map_;
  Status status_;
};

}  // namespace

StatusOr<PhaseOutcome> RunPhase(const PhaseContext& ctx, const Phase& phase,
                                DeviceMemoryImage& image, NameTable& names,
                                const TestCase& tc) {
  const Program& program =
      ctx.program != nullptr ? *ctx.program : ctx.manifest->program;
  PhaseOutcome out;
  for (uint32_t index = 0; index < phase.ops.size(); ++index) {
    const HostOpSpec& op = phase.ops[index];
    const HostOp host{phase.name, index, ctx.iteration};
    auto lookup = [&](const std::string& name) -> StatusOr<NamedAlloc*> {
      auto it = names.find(name);
      if (it == names.end()) {
        return MakeError(ErrorCode::kManifestSyntax,
                         StrCat("line ", op.line, ": ", name,
                                " is not allocated"));
      }
      return &it->second;
    };
    switch (op.kind) {
      case HostOpSpec::Kind::kAlloc: {
        NamedAlloc named;
        named.space = op.space;
        named.size = op.size;
        if (op.arg) {
          const ArrayValue& array = tc.args[*op.arg].array;
          named.arg = op.arg;
          named.space = array.placement.space;
          named.size = array.alloc_size();
        }
        StatusOr<Allocation> a =
            named.size == 0 ? image.AllocEmpty(named.space, op.name)
                            : image.Alloc(named.space, named.size, op.name);
        if (!a.ok()) return a.status();
        named.address = a->address;
        named.id = a->id;
        names[op.name] = named;
        break;
      }
      case HostOpSpec::Kind::kCopyIn: {
        SF_ASSIGN_OR_RETURN(NamedAlloc * dst, lookup(op.name));
        std::vector<uint8_t> zeros;
        std::span<const uint8_t> bytes;
        switch (op.source) {
          case HostOpSpec::Source::kInline: bytes = op.payload; break;
          case HostOpSpec::Source::kZero:
            zeros.assign(op.size, 0);
            bytes = zeros;
            break;
          case HostOpSpec::Source::kArg: bytes = tc.args[*op.arg].array.bytes; break;
        }
        out.bug = CheckedCopyIn(image, host, dst->address, dst->space, dst->id,
                                bytes);
        if (out.bug) return out;
        break;
      }
      case HostOpSpec::Kind::kLaunch: {
        LaunchConfig config;
        config.kernel = op.kernel;
        config.grid_dim = op.grid;
        config.block_dim = op.block;
        config.instruction_budget = ctx.instruction_budget;
        for (const Binding& b : op.bindings) {
          switch (b.kind) {
            case Binding::Kind::kArg: {
              const TypedValue& v = tc.args[b.arg];
              config.args.push_back(v.type == ScalarType::kI32
                                        ? KernelArg::I32(v.i32())
                                        : KernelArg::F32Bits(v.scalar));
              break;
            }
            case Binding::Kind::kNamed: {
              SF_ASSIGN_OR_RETURN(NamedAlloc * n, lookup(b.name));
              uint64_t address = n->address;
              if (n->arg) {
                address += static_cast<uint64_t>(
                    tc.args[*n->arg].array.placement.offset);
              }
              config.args.push_back(KernelArg::Ptr(address, n->id));
              break;
            }
            case Binding::Kind::kI32:
              config.args.push_back(KernelArg::I32(static_cast<int32_t>(b.bits)));
              break;
            case Binding::Kind::kF32:
              config.args.push_back(KernelArg::F32Bits(b.bits));
              break;
          }
        }
        RecordingHooks hooks(ctx.coverage);
        ExecOptions options{ctx.sanitize, ctx.trace, ctx.iteration};
        SF_ASSIGN_OR_RETURN(ExecOutcome result,
                            Launch(program, image, config, hooks, options));
        SF_RETURN_IF_ERROR(hooks.status());
        ++out.launches;
        out.retired += result.retired;
        if (result.status == ExecStatus::kSanitizerStop) {
          out.bug = std::move(result.bug);
          return out;
        }
        if (result.status == ExecStatus::kBudgetExhausted) {
          out.budget_exhausted = true;
          return out;
        }
        break;
      }
      case HostOpSpec::Kind::kCopyOut: {
        if (!ctx.copy_out) break;
        SF_ASSIGN_OR_RETURN(NamedAlloc * src, lookup(op.name));
        std::vector<uint8_t> bytes;
        out.bug = CheckedCopyOut(image, host, src->address, src->space, src->id,
                                 op.length.value_or(src->size), &bytes);
        if (out.bug) return out;
        out.outputs.emplace_back(op.name, std::move(bytes));
        break;
      }
      case HostOpSpec::Kind::kFree: {
        SF_ASSIGN_OR_RETURN(NamedAlloc * n, lookup(op.name));
        out.bug = CheckedFree(image, host, n->address);
        if (out.bug) return out;
        break;
      }
      case HostOpSpec::Kind::kSync: break;
    }
  }
  return out;
}

}  // namespace simt_forge
