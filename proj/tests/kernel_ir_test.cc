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
#include <set>
#include <string>

#include <gtest/gtest.h>

#include "simt_forge/bench_corpus.h"
#include "simt_forge/rng.h"
#include "simt_forge/strings.h"

namespace simt_forge {
namespace {

constexpr char kStraight[] = R"(
kernel k(x:ptr.global) regs=2
  mov %r0, 1
  add %r1, %r0, 2
  mul %r1, %r1, %r1
  st.global.i32 [$x], %r1
  exit
)";

constexpr char kSkip[] = R"(
kernel k(n:i32) regs=2
  mov %r0, 1
  setp.lt %p0, %r0, $n
  bra %p0, skip
  add %r0, %r0, 1
skip:
  add %r1, %r0, 2
  exit
)";

std::set<std::pair<uint32_t, uint32_t>> EdgeSet(const KernelDef& k) {
  std::set<std::pair<uint32_t, uint32_t>> out;
  for (const Edge& e : k.static_edges) out.insert({e.src, e.dst});
  return out;
}

TEST(ParseProgramTest, StraightLineKernel) {
  StatusOr<Program> p = ParseProgram(kStraight);
  ASSERT_TRUE(p.ok()) << p.status().ToString();
  ASSERT_EQ(p->kernels.size(), 1u);
  EXPECT_EQ(p->kernels[0].instructions.size(), 5u);
  EXPECT_EQ(p->kernels[0].blocks.size(), 1u);
  EXPECT_TRUE(p->kernels[0].static_edges.empty());
  EXPECT_TRUE(Validate(*p).empty());
}

TEST(ParseProgramTest, UndefinedLabel) {
  StatusOr<Program> p = ParseProgram(
      "kernel k(n:i32) regs=1\n  setp.lt %p0, $n, 0\n  bra %p0, L1\n  exit\n");
  ASSERT_FALSE(p.ok());
  EXPECT_EQ(p.status().code(), ErrorCode::kUnresolvedLabel);
}

TEST(ParseProgramTest, DuplicateKernel) {
  StatusOr<Program> p =
      ParseProgram("kernel k() regs=1\n  exit\nkernel k() regs=1\n  exit\n");
  ASSERT_FALSE(p.ok());
  EXPECT_EQ(p.status().code(), ErrorCode::kDuplicateKernel);
}

TEST(ParseProgramTest, SyntaxErrorNamesTheLine) {
  StatusOr<Program> p = ParseProgram("kernel k() regs=1\n  mov %r0,\n  exit\n");
  ASSERT_FALSE(p.ok());
  EXPECT_EQ(p.status().code(), ErrorCode::kSyntaxError);
  EXPECT_NE(p.status().message().find("line 2"), std::string::npos);
}

TEST(BuildCfgTest, ConditionalSkip) {
  StatusOr<Program> p = ParseProgram(kSkip);
  ASSERT_TRUE(p.ok()) << p.status().ToString();
  const KernelDef& k = p->kernels[0];
  EXPECT_EQ(k.blocks.size(), 3u);
  std::set<std::pair<uint32_t, uint32_t>> want = {{0, 1}, {0, 2}, {1, 2}};
  EXPECT_EQ(EdgeSet(k), want);
}

TEST(BuildCfgTest, SelfLoop) {
  StatusOr<Program> p = ParseProgram(R"(
kernel k(n:i32) regs=1
  mov %r0, 0
L0:
  add %r0, %r0, 1
  setp.lt %p0, %r0, $n
  bra %p0, L0
  exit
)");
  ASSERT_TRUE(p.ok()) << p.status().ToString();
  const KernelDef& k = p->kernels[0];
  uint32_t loop = k.block_of[1];
  EXPECT_TRUE(EdgeSet(k).contains({loop, loop}));
}

// Counts frozen from a hand walk of the bundled axpy kernel: prologue,
// loop test, loop body and exit.
TEST(BuildCfgTest, BundledAxpyMatchesGolden) {
  std::optional<std::string> golden =
      ReadFile(SIMT_FORGE_TESTDATA_DIR "/axpy_cfg.golden");
  ASSERT_TRUE(golden.has_value());
  StatusOr<BenchmarkEntry> axpy = FindBenchmark("axpy");
  ASSERT_TRUE(axpy.ok());
  StatusOr<Program> p = LoadProgramFile(axpy->kernel_path);
  ASSERT_TRUE(p.ok()) << p.status().ToString();
  const KernelDef& k = p->kernels[0];
  std::string text = StrCat("blocks ", k.blocks.size(), "\nedges ",
                            k.static_edges.size(), "\n");
  for (auto [src, dst] : EdgeSet(k)) text += StrCat(src, "->", dst, "\n");
  EXPECT_EQ(text, *golden);
}

TEST(ValidateTest, LoadThroughIntegerRegister) {
  StatusOr<Program> p = ParseProgram(
      "kernel k() regs=3\n  ld.global.f32 %f1, [%r2]\n  exit\n");
  ASSERT_TRUE(p.ok()) << p.status().ToString();
  std::vector<Diagnostic> d = Validate(*p);
  ASSERT_FALSE(d.empty());
  EXPECT_EQ(d[0].kind, Diagnostic::Kind::kTypeMismatch);
  EXPECT_EQ(d[0].line, 2);
}

TEST(ValidateTest, PointerWithoutSpace) {
  StatusOr<Program> p = ParseProgram("kernel k(x:ptr) regs=1\n  exit\n");
  ASSERT_TRUE(p.ok()) << p.status().ToString();
  std::vector<Diagnostic> d = Validate(*p);
  ASSERT_FALSE(d.empty());
  EXPECT_EQ(d[0].kind, Diagnostic::Kind::kMissingSpaceAnnotation);
}

TEST(ValidateTest, RegisterOutOfRange) {
  StatusOr<Program> p = ParseProgram("kernel k() regs=2\n  mov %r2, 1\n  exit\n");
  ASSERT_TRUE(p.ok()) << p.status().ToString();
  std::vector<Diagnostic> d = Validate(*p);
  ASSERT_FALSE(d.empty());
  EXPECT_EQ(d[0].kind, Diagnostic::Kind::kRegisterOutOfRange);
}

TEST(ValidateTest, EveryBundledProgramIsClean) {
  for (const BenchmarkEntry& e : ListBenchmarks()) {
    std::optional<std::string> text = ReadFile(e.kernel_path);
    ASSERT_TRUE(text.has_value()) << e.kernel_path;
    StatusOr<Program> p = ParseProgram(*text);
    ASSERT_TRUE(p.ok()) << e.name << ": " << p.status().ToString();
    EXPECT_TRUE(Validate(*p).empty()) << e.name;
  }
}

void ExpectStructuralInvariants(const Program& p) {
  for (const KernelDef& k : p.kernels) {
    size_t covered = 0;
    for (const BasicBlock& b : k.blocks) covered += b.end - b.begin;
    EXPECT_EQ(covered, k.instructions.size()) << k.name;
    bool entry_has_pred = false, back_to_entry = false;
    for (const Edge& e : k.static_edges) {
      EXPECT_LT(e.src, k.blocks.size());
      EXPECT_LT(e.dst, k.blocks.size());
      if (e.dst == 0) {
        entry_has_pred = true;
        if (e.src >= e.dst) back_to_entry = true;
      }
    }
    if (entry_has_pred) {
      EXPECT_TRUE(back_to_entry) << k.name;
    }
  }
}

TEST(PrintProgramTest, RoundTripIsAFixedPoint) {
  for (const BenchmarkEntry& e : ListBenchmarks()) {
    for (const BenchmarkVariant& v : e.variants) {
      std::string path = e.kernel_path;
      if (v.bug_class && *v.bug_class != BugClass::kSpaceMismatch) {
        path = v.harness_path.substr(0, v.harness_path.size() - 4) + ".sir";
      }
      StatusOr<Program> p = LoadProgramFile(path);
      ASSERT_TRUE(p.ok()) << path << ": " << p.status().ToString();
      ExpectStructuralInvariants(*p);
      std::string printed = PrintProgram(*p);
      StatusOr<Program> q = ParseProgram(printed);
      ASSERT_TRUE(q.ok()) << path << ": " << q.status().ToString();
      EXPECT_TRUE(SameStructure(*p, *q)) << path;
      EXPECT_EQ(PrintProgram(*q), printed) << path;
    }
  }
}

// Random token soup never crashes the parser; it yields a Program or an
// error status.
TEST(ParseProgramTest, TotalOnRandomTokenStreams) {
  const std::vector<std::string> tokens = {
      "kernel", "k", "(", ")", "x:ptr.global", "n:i32", "regs=4", "\n",
      "mov", "add", "fadd", "setp.lt", "bra", "ld.global.f32", "st.shared.i32",
      "%r0", "%f1", "%p0", "%a2", "$n", "$x", "[", "]", "[%a0+4]", ",",
      "L0:", "L0", "exit", "0f3F800000", "1.5", "-7", "0x10", "cvt.f32.i32",
      "sreg", "tid", "!%p0", "#", ":", "+", "kernel k() regs=1\n"};
  CounterRng rng(1234);
  for (int trial = 0; trial < 2000; ++trial) {
    std::string text;
    int n = static_cast<int>(rng.Uniform(40));
    for (int i = 0; i < n; ++i) {
      text += tokens[rng.Uniform(tokens.size())];
      text += rng.Chance(1, 4) ? "\n" : " ";
    }
    StatusOr<Program> p = ParseProgram(text);
    if (p.ok()) {
      ExpectStructuralInvariants(*p);
      Validate(*p);
    } else {
      EXPECT_NE(p.status().code(), ErrorCode::kNone);
    }
  }
}

}  // namespace
}  // namespace simt_forge
