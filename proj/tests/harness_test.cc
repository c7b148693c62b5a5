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

#include <climits>

#include <gtest/gtest.h>

#include "simt_forge/bench_corpus.h"

namespace simt_forge {
namespace {

std::string AxpyDir() { return FindBenchmark("axpy")->dir; }

HarnessManifest Axpy() {
  StatusOr<HarnessManifest> m = LoadHarness(FindBenchmark("axpy")->harness_path);
  EXPECT_TRUE(m.ok()) << m.status().ToString();
  return m.ok() ? std::move(*m) : HarnessManifest{};
}

constexpr char kHead[] = R"(program kernel.sir
arg a f32 default=2.0
arg x ptr.global f32 32
arg y ptr.global f32 32
arg n i32 default=32
)";

StatusOr<HarnessManifest> Parse(std::string_view body) {
  return ParseManifest(std::string(kHead) + std::string(body), AxpyDir());
}

TEST(LoadHarnessTest, BundledAxpy) {
  HarnessManifest m = Axpy();
  EXPECT_EQ(m.compute_launches(), 1u);
  ASSERT_EQ(m.args.size(), 4u);
  EXPECT_EQ(m.args[0].type, ScalarType::kF32);
  EXPECT_EQ(m.args[1].type, ScalarType::kPtr);
  EXPECT_EQ(m.args[2].type, ScalarType::kPtr);
  EXPECT_EQ(m.args[3].type, ScalarType::kI32);
  EXPECT_EQ(m.reference, "axpy");
  EXPECT_EQ(m.args[3].clamp, std::make_pair(0, 32));
  EXPECT_EQ(m.manifest_digest.size(), 16u);
}

TEST(LoadHarnessTest, EveryBundledManifestLoads) {
  for (const BenchmarkEntry& e : ListBenchmarks()) {
    for (const BenchmarkVariant& v : e.variants) {
      StatusOr<HarnessManifest> m = LoadHarness(v.harness_path);
      ASSERT_TRUE(m.ok()) << v.harness_path << ": " << m.status().ToString();
      EXPECT_EQ(m->expect, v.bug_class) << v.harness_path;
    }
  }
}

TEST(ParseManifestTest, DanglingFree) {
  StatusOr<HarnessManifest> m = Parse(
      "[INIT]\nFREE ghost\n[COMPUTE]\nALLOC x arg 1\nALLOC y arg 2\n"
      "LAUNCH axpy grid=1 block=1 arg:0 @x @y arg:3\nFREE x\nFREE y\n");
  ASSERT_FALSE(m.ok());
  EXPECT_EQ(m.status().code(), ErrorCode::kDanglingFree);
}

TEST(ParseManifestTest, ComputeNeedsALaunch) {
  StatusOr<HarnessManifest> m = Parse("[INIT]\n[COMPUTE]\nSYNC\n[TERM]\n");
  ASSERT_FALSE(m.ok());
  EXPECT_EQ(m.status().code(), ErrorCode::kManifestSyntax);
}

TEST(ParseManifestTest, LeakedAllocation) {
  StatusOr<HarnessManifest> m = Parse(
      "[INIT]\nALLOC ws GLOBAL 64\n[COMPUTE]\nALLOC x arg 1\nALLOC y arg 2\n"
      "LAUNCH axpy grid=1 block=1 arg:0 @x @y arg:3\nFREE x\nFREE y\n");
  ASSERT_FALSE(m.ok());
  EXPECT_EQ(m.status().code(), ErrorCode::kManifestSyntax);
}

TEST(ParseManifestTest, BindingErrors) {
  StatusOr<HarnessManifest> m = Parse(
      "[COMPUTE]\nALLOC x arg 1\nALLOC y arg 2\n"
      "LAUNCH axpy grid=1 block=1 arg:0 @x @y\nFREE x\nFREE y\n");
  ASSERT_FALSE(m.ok());
  EXPECT_EQ(m.status().code(), ErrorCode::kArgArityMismatch);
  m = Parse("[COMPUTE]\nALLOC x arg 1\nALLOC y arg 2\n"
            "LAUNCH saxpy grid=1 block=1 arg:0 @x @y arg:3\nFREE x\nFREE y\n");
  ASSERT_FALSE(m.ok());
  EXPECT_EQ(m.status().code(), ErrorCode::kUnknownKernel);
  m = Parse("[COMPUTE]\nALLOC x arg 1\nALLOC y arg 2\n"
            "LAUNCH axpy grid=1 block=1 arg:0 @x @y arg:3 extra\n");
  ASSERT_FALSE(m.ok());
}

TEST(TriggerTest, AppliesOverrides) {
  for (const BenchmarkEntry& e : ListBenchmarks()) {
    for (const BenchmarkVariant* v : e.seeded()) {
      HarnessManifest m = *LoadHarness(v->harness_path);
      StatusOr<TestCase> tc = TriggerTestCase(m);
      ASSERT_TRUE(tc.ok()) << tc.status().ToString();
      EXPECT_NE(SerializeTestCase(*tc, m.args),
                SerializeTestCase(SeedTestCase(m.args), m.args))
          << v->harness_path;
    }
  }
}

struct PhaseRun {
  DeviceMemoryImage image;
  NameTable names;
};

StatusOr<PhaseOutcome> RunOne(const HarnessManifest& m, const Phase& phase,
                           PhaseRun& run, const TestCase& tc) {
  PhaseContext ctx;
  ctx.manifest = &m;
  return RunPhase(ctx, phase, run.image, run.names, tc);
}

TEST(RunPhaseTest, InitComputeTerm) {
  HarnessManifest m = Axpy();
  TestCase tc = SeedTestCase(m.args);
  PhaseRun run;
  StatusOr<PhaseOutcome> init = RunOne(m, m.init, run, tc);
  ASSERT_TRUE(init.ok()) << init.status().ToString();
  EXPECT_FALSE(init->bug.has_value());
  EXPECT_EQ(run.image.live_count(), 1u);
  EXPECT_TRUE(run.names.contains("handle_ws"));

  StatusOr<PhaseOutcome> compute = RunOne(m, m.compute, run, tc);
  ASSERT_TRUE(compute.ok()) << compute.status().ToString();
  EXPECT_FALSE(compute->bug.has_value());
  EXPECT_EQ(compute->launches, 1u);
  ASSERT_EQ(compute->outputs.size(), 1u);
  EXPECT_EQ(compute->outputs[0].first, "y");
  EXPECT_EQ(run.image.live_count(), 1u);

  StatusOr<PhaseOutcome> term = RunOne(m, m.term, run, tc);
  ASSERT_TRUE(term.ok());
  EXPECT_EQ(run.image.live_count(), 0u);
}

// Scans n upward until COMPUTE reports; the buffers hold 32 elements, so
// the first overflowing n is 33.
TEST(RunPhaseTest, SmallestOverflowingLength) {
  HarnessManifest m = Axpy();
  int32_t first = -1;
  for (int32_t n = 0; n <= 64 && first < 0; ++n) {
    TestCase tc = SeedTestCase(m.args);
    tc.args[3] = TypedValue::I32(n);
    PhaseRun run;
    ASSERT_TRUE(RunOne(m, m.init, run, tc).ok());
    StatusOr<PhaseOutcome> out = RunOne(m, m.compute, run, tc);
    ASSERT_TRUE(out.ok());
    if (out->bug) {
      EXPECT_EQ(out->bug->bug_class, BugClass::kSpatialOob);
      first = n;
    }
  }
  EXPECT_EQ(first, 33);
}

TEST(RunPhaseTest, BudgetExhaustionStopsThePhase) {
  HarnessManifest m = Axpy();
  TestCase tc = SeedTestCase(m.args);
  PhaseRun run;
  ASSERT_TRUE(RunOne(m, m.init, run, tc).ok());
  PhaseContext ctx;
  ctx.manifest = &m;
  ctx.instruction_budget = 10;
  StatusOr<PhaseOutcome> out = RunPhase(ctx, m.compute, run.image, run.names, tc);
  ASSERT_TRUE(out.ok());
  EXPECT_TRUE(out->budget_exhausted);
  EXPECT_FALSE(out->bug.has_value());
}

TEST(RunPhaseTest, EmptyArrayPlacement) {
  HarnessManifest m = Axpy();
  TestCase tc = SeedTestCase(m.args);
  tc.args[1].array = MutateArray(tc.args[1].array, m.args[1], ArrayEmpty{});
  PhaseRun run;
  ASSERT_TRUE(RunOne(m, m.init, run, tc).ok());
  StatusOr<PhaseOutcome> out = RunOne(m, m.compute, run, tc);
  ASSERT_TRUE(out.ok()) << out.status().ToString();
  ASSERT_TRUE(out->bug.has_value());
  EXPECT_EQ(out->bug->bug_class, BugClass::kSpatialOob);
}

}  // namespace
}  // namespace simt_forge
