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


#include "simt_forge/bench_corpus.h"

#include <bit>
#include <cstring>
#include <filesystem>

#include <gtest/gtest.h>

#include "test_util.h"

namespace simt_forge {
namespace {

TypedValue FloatArray(std::vector<float> v) {
  ArrayValue a;
  a.elem = ElemType::kF32;
  a.bytes.resize(v.size() * 4);
  std::memcpy(a.bytes.data(), v.data(), a.bytes.size());
  a.extents = {static_cast<uint32_t>(v.size())};
  return TypedValue::Array(a);
}

std::vector<float> AsFloats(const std::vector<uint8_t>& b) {
  std::vector<float> out(b.size() / 4);
  std::memcpy(out.data(), b.data(), b.size());
  return out;
}

float Sum(const std::vector<uint8_t>& b) {
  float s = 0;
  for (float f : AsFloats(b)) s += f;
  return s;
}

TEST(ListBenchmarksTest, TableOrder) {
  std::vector<BenchmarkEntry> list = ListBenchmarks();
  ASSERT_EQ(list.size(), 11u);
  EXPECT_EQ(list.front().name, "amax");
  EXPECT_EQ(list.back().name, "swap");
  for (const BenchmarkEntry& e : list) {
    EXPECT_FALSE(e.seeded().empty());
    EXPECT_FALSE(e.variants.front().bug_class.has_value());
    for (const BenchmarkVariant& v : e.variants) {
      EXPECT_TRUE(std::filesystem::exists(v.harness_path)) << v.harness_path;
      if (v.bug_class) {
        EXPECT_FALSE(v.trigger_note.empty());
      }
    }
  }
  EXPECT_EQ(FindBenchmark("gemm").status().code(), ErrorCode::kUnknownBenchmark);
}

TEST(ReferenceResultTest, Axpy) {
  std::vector<TypedValue> args = {TypedValue::F32Bits(std::bit_cast<uint32_t>(2.0f)),
                                  FloatArray({1, 2, 3, 4}),
                                  FloatArray({10, 20, 30, 40}), TypedValue::I32(4)};
  StatusOr<NamedOutputs> out = ReferenceResult("axpy", args);
  ASSERT_TRUE(out.ok()) << out.status().ToString();
  ASSERT_EQ(out->size(), 1u);
  EXPECT_EQ(AsFloats((*out)[0].second), (std::vector<float>{12, 24, 36, 48}));
}

TEST(ReferenceResultTest, DotOfOrthogonalVectors) {
  std::vector<TypedValue> args = {FloatArray({1, 0}), FloatArray({0, 1}),
                                  TypedValue::I32(2)};
  StatusOr<NamedOutputs> out = ReferenceResult("dot", args);
  ASSERT_TRUE(out.ok());
  EXPECT_EQ(Sum((*out)[0].second), 0.0f);
}

TEST(ReferenceResultTest, AbsoluteSum) {
  std::vector<TypedValue> args = {FloatArray({-1, 2, -3}), TypedValue::I32(3)};
  StatusOr<NamedOutputs> out = ReferenceResult("asum", args);
  ASSERT_TRUE(out.ok());
  EXPECT_EQ(Sum((*out)[0].second), 6.0f);
}

TEST(ReferenceResultTest, ArgExtremesAreOneBased) {
  std::vector<TypedValue> args = {FloatArray({1, -7, 3, 0.5f}), TypedValue::I32(4)};
  // Eight threads each see one element; thread 1 holds |-7|.
  StatusOr<NamedOutputs> out = ReferenceResult("amax", args);
  ASSERT_TRUE(out.ok());
  std::vector<int32_t> idx(8);
  std::memcpy(idx.data(), (*out)[0].second.data(), 32);
  EXPECT_EQ(idx, (std::vector<int32_t>{1, 2, 3, 4, 0, 0, 0, 0}));
}

TEST(ReferenceResultTest, Errors) {
  EXPECT_EQ(ReferenceResult("gemm", {}).status().code(),
            ErrorCode::kUnknownBenchmark);
  EXPECT_EQ(ReferenceResult("axpy", {}).status().code(),
            ErrorCode::kArgArityMismatch);
}

TEST(CompareOutputsTest, ReportsFirstDifference) {
  NamedOutputs a = {{"y", {1, 2, 3}}};
  NamedOutputs b = {{"y", {1, 9, 3}}};
  EXPECT_FALSE(CompareOutputs(a, a).has_value());
  EXPECT_EQ(*CompareOutputs(a, b), "y: first difference at byte 1");
}

// The SIMT run of every clean benchmark equals its reference bit for bit.
TEST(DifferentialTest, CleanBenchmarksMatchReference) {
  CounterRng rng(99);
  for (const BenchmarkEntry& e : ListBenchmarks()) {
    HarnessManifest m = *LoadHarness(e.harness_path);
    StatusOr<DiffChecker> check = MakeDiffChecker(m);
    ASSERT_TRUE(check.ok()) << check.status().ToString();
    for (int i = 0; i < 20; ++i) {
      TestCase tc = RandomValidTestCase(m.args, rng);
      StatusOr<PhaseOutcome> out = RunOnce(m, tc);
      ASSERT_TRUE(out.ok()) << out.status().ToString();
      ASSERT_FALSE(out->bug.has_value()) << e.name;
      std::optional<std::string> diff = (*check)(tc, *out);
      EXPECT_FALSE(diff.has_value()) << e.name << ": " << *diff;
    }
  }
}

TEST(ExportBenchmarkTest, CopiesAssets) {
  std::string dir = testing::ScratchDir("export");
  ASSERT_TRUE(ExportBenchmark("rot", dir).ok());
  EXPECT_TRUE(std::filesystem::exists(dir + "/rot/kernel.sir"));
  EXPECT_TRUE(std::filesystem::exists(dir + "/rot/variants/temporal_uaf.man"));
  EXPECT_TRUE(LoadHarness(dir + "/rot/harness.man").ok());
  EXPECT_EQ(ExportBenchmark("nope", dir).code(), ErrorCode::kUnknownBenchmark);
}

}  // namespace
}  // namespace simt_forge
