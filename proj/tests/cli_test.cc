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


#include "simt_forge/cli.h"

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <sys/wait.h>

#include <gtest/gtest.h>

#include "simt_forge/bench_corpus.h"
#include "simt_forge/coverage.h"
#include "test_util.h"

namespace simt_forge {
namespace {

namespace fs = std::filesystem;

struct Result {
  int code;
  std::string out, err;
};

Result Cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = RunCli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string Harness(const std::string& bench, const std::string& variant = "") {
  StatusOr<BenchmarkEntry> e = FindBenchmark(bench);
  return variant.empty() ? e->harness_path
                         : e->dir + "/variants/" + variant + ".man";
}

TEST(CliRunTest, CleanCampaign) {
  std::string dir = testing::ScratchDir("cli_clean");
  Result r = Cli({"run", "--harness", Harness("axpy"), "--out", dir, "--iters",
                  "100", "--diff-check"});
  EXPECT_EQ(r.code, kExitOk) << r.err;
  EXPECT_NE(r.out.find("iterations=100\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("diff_mismatches=0\n"), std::string::npos) << r.out;
  EXPECT_TRUE(fs::exists(dir + "/summary.rec"));
}

TEST(CliRunTest, SeededBugExitsWithFindings) {
  std::string dir = testing::ScratchDir("cli_oob");
  Result r = Cli({"run", "--harness", Harness("axpy", "spatial_oob"), "--out",
                  dir, "--iters", "10000", "--stop-on", "first-finding"});
  EXPECT_EQ(r.code, kExitFindings) << r.err;
  EXPECT_FALSE(fs::is_empty(dir + "/crashes"));

  fs::path artifact = fs::directory_iterator(dir + "/crashes")->path();
  Result repro = Cli({"repro", "--artifact", artifact.string()});
  EXPECT_EQ(repro.code, kExitFindings) << repro.err;
  EXPECT_NE(repro.out.find("bug_class: SPATIAL_OOB"), std::string::npos);
}

TEST(CliRunTest, UsageErrors) {
  EXPECT_EQ(Cli({"run", "--out", "/tmp/x"}).code, kExitUsage);
  EXPECT_EQ(Cli({}).code, kExitUsage);
  EXPECT_EQ(Cli({"frobnicate"}).code, kExitUsage);
  EXPECT_EQ(Cli({"run", "--harness", Harness("axpy"), "--out", "/tmp/x",
                 "--stop-on", "never"}).code,
            kExitUsage);
  EXPECT_EQ(Cli({"run", "--harness", "/nonexistent.man", "--out", "/tmp/x"}).code,
            kExitUsage);
  EXPECT_EQ(Cli({"repro", "--artifact", "/nonexistent"}).code, kExitUsage);
}

TEST(CliCovTest, PublishedTable) {
  std::string dir = testing::ScratchDir("cli_cov");
  const std::pair<uint64_t, uint64_t> rows[] = {
      {47, 95}, {47, 106}, {9, 14}, {7, 30}, {6, 35}, {23, 57},
      {177, 340}, {10, 81}, {12, 132}, {4, 19}, {10, 77}};
  std::vector<CoverageRow> r;
  int i = 0;
  for (auto [hit, total] : rows) {
    r.push_back(*MakeRow(StrCat("k", i++), hit, total, hit, std::nullopt));
  }
  ASSERT_TRUE(WriteFile(dir + "/coverage.rec", RenderRecords(*Summarize(r))));
  Result res = Cli({"cov", "--dir", dir});
  EXPECT_EQ(res.code, kExitOk);
  size_t geo = res.out.find("GeoMean");
  ASSERT_NE(geo, std::string::npos);
  EXPECT_NE(res.out.find("25.98", geo), std::string::npos) << res.out;

  Result rec = Cli({"cov", "--dir", dir, "--format", "rec"});
  EXPECT_EQ(rec.out, *ReadFile(dir + "/coverage.rec"));
}

TEST(CliCovTest, EmptyAndSingle) {
  std::string dir = testing::ScratchDir("cli_cov_small");
  ASSERT_TRUE(WriteFile(dir + "/coverage.rec", RenderRecords(*Summarize({}))));
  Result empty = Cli({"cov", "--dir", dir});
  EXPECT_EQ(empty.code, kExitOk);
  EXPECT_NE(empty.out.find("GeoMean omitted"), std::string::npos) << empty.out;

  ASSERT_TRUE(WriteFile(dir + "/coverage.rec",
                        RenderRecords(*Summarize({*MakeRow("asum", 9, 14, 13, 20)}))));
  Result one = Cli({"cov", "--dir", dir});
  EXPECT_NE(one.out.find("64.29"), std::string::npos) << one.out;

  EXPECT_EQ(Cli({"cov", "--dir", dir + "/missing"}).code, kExitUsage);
}

TEST(CliValidateTest, Diagnostics) {
  std::string dir = testing::ScratchDir("cli_validate");
  ASSERT_TRUE(WriteFile(dir + "/bad.sir", "kernel k() regs=1\n  mov %r0,\n  exit\n"));
  Result bad = Cli({"validate", "--program", dir + "/bad.sir"});
  EXPECT_EQ(bad.code, kExitUsage);
  EXPECT_NE(bad.err.find("line 2"), std::string::npos) << bad.err;

  ASSERT_TRUE(WriteFile(dir + "/typed.sir",
                        "kernel k() regs=3\n  ld.global.f32 %f1, [%r2]\n  exit\n"));
  Result typed = Cli({"validate", "--program", dir + "/typed.sir"});
  EXPECT_EQ(typed.code, kExitUsage);
  EXPECT_NE(typed.err.find("TypeMismatch"), std::string::npos) << typed.err;

  StatusOr<BenchmarkEntry> e = FindBenchmark("dot");
  EXPECT_EQ(Cli({"validate", "--program", e->kernel_path, "--harness",
                 e->harness_path}).code,
            kExitOk);
}

TEST(CliBenchTest, ListAndExport) {
  Result list = Cli({"bench", "list"});
  EXPECT_EQ(list.code, kExitOk);
  EXPECT_EQ(std::count(list.out.begin(), list.out.end(), '\n'), 11);
  EXPECT_EQ(list.out.substr(0, 5), "amax\n");
  std::string dir = testing::ScratchDir("cli_export");
  EXPECT_EQ(Cli({"bench", "export", "nrm2", dir}).code, kExitOk);
  EXPECT_TRUE(fs::exists(dir + "/nrm2/harness.man"));
  EXPECT_EQ(Cli({"bench", "export", "gemm", dir}).code, kExitUsage);
  EXPECT_EQ(Cli({"bench", "frob"}).code, kExitUsage);
}

// The installed binary honours the same exit-code contract.
TEST(CliBinaryTest, ExitCodes) {
  std::string bin = SIMT_FORGE_CLI_PATH;
  int list = std::system((bin + " bench list > /dev/null").c_str());
  EXPECT_EQ(WEXITSTATUS(list), kExitOk);
  int usage = std::system((bin + " run > /dev/null 2>&1").c_str());
  EXPECT_EQ(WEXITSTATUS(usage), kExitUsage);
}

}  // namespace
}  // namespace simt_forge
