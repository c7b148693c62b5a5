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


#include "simt_forge/fuzz_campaign.h"

#include <filesystem>

#include <gtest/gtest.h>

#include "simt_forge/bench_corpus.h"
#include "test_util.h"

namespace simt_forge {
namespace {

namespace fs = std::filesystem;

HarnessManifest Load(const std::string& path) {
  StatusOr<HarnessManifest> m = LoadHarness(path);
  EXPECT_TRUE(m.ok()) << m.status().ToString();
  return m.ok() ? std::move(*m) : HarnessManifest{};
}

std::string Variant(const std::string& bench, BugClass c) {
  StatusOr<BenchmarkEntry> entry = FindBenchmark(bench);
  for (const BenchmarkVariant* v : entry->seeded()) {
    if (v->bug_class == c) return v->harness_path;
  }
  return "";
}

TEST(FuzzLoopTest, CleanCampaignAmortizes) {
  HarnessManifest m = Load(FindBenchmark("axpy")->harness_path);
  CampaignConfig config;
  config.max_iterations = 100;
  StatusOr<CampaignSummary> s = FuzzLoop(m, config);
  ASSERT_TRUE(s.ok()) << s.status().ToString();
  EXPECT_EQ(s->iterations, 100u);
  EXPECT_EQ(s->compute_executions, 100u);
  EXPECT_EQ(s->init_executions, 1u);
  EXPECT_EQ(s->term_executions, 1u);
  EXPECT_TRUE(s->findings.empty());
  EXPECT_EQ(s->stop_reason, "iteration limit");
}

TEST(FuzzLoopTest, InitAndTermOncePerWorker) {
  HarnessManifest m = Load(FindBenchmark("dot")->harness_path);
  CampaignConfig config;
  config.max_iterations = 300;
  config.workers = 3;
  config.sync_interval = 16;
  StatusOr<CampaignSummary> s = FuzzLoop(m, config);
  ASSERT_TRUE(s.ok()) << s.status().ToString();
  EXPECT_EQ(s->compute_executions, 300u);
  EXPECT_EQ(s->init_executions, 3u);
  EXPECT_EQ(s->term_executions, 3u);
}

TEST(FuzzLoopTest, ReinitModeRunsEveryPhase) {
  HarnessManifest m = Load(FindBenchmark("scal")->harness_path);
  CampaignConfig config;
  config.max_iterations = 20;
  config.amortize = false;
  StatusOr<CampaignSummary> s = FuzzLoop(m, config);
  ASSERT_TRUE(s.ok()) << s.status().ToString();
  EXPECT_EQ(s->init_executions, 20u);
  EXPECT_EQ(s->term_executions, 20u);
}

TEST(FuzzLoopTest, AdmissionsStrictlyGrowCoverage) {
  HarnessManifest m = Load(FindBenchmark("rotm")->harness_path);
  CampaignConfig config;
  config.max_iterations = 2000;
  config.seed = 3;
  StatusOr<CampaignSummary> s = FuzzLoop(m, config);
  ASSERT_TRUE(s.ok());
  EXPECT_EQ(s->admission_edge_counts.size(), s->corpus.interesting.size());
  for (size_t i = 1; i < s->admission_edge_counts.size(); ++i) {
    EXPECT_GT(s->admission_edge_counts[i], s->admission_edge_counts[i - 1]);
  }
  EXPECT_FALSE(s->corpus.interesting.empty());
  for (const CorpusEntry& e : s->corpus.interesting) EXPECT_GT(e.new_edges, 0u);
}

TEST(FuzzLoopTest, FindsSeededBugAndReplays) {
  HarnessManifest m = Load(Variant("axpy", BugClass::kSpatialOob));
  CampaignConfig config;
  config.max_iterations = 10000;
  config.stop_on_first_finding = true;
  std::string dir = testing::ScratchDir("oob");
  StatusOr<CampaignSummary> s = FuzzLoop(m, config);
  ASSERT_TRUE(s.ok());
  EXPECT_EQ(s->stop_reason, "first finding");
  EXPECT_LE(s->iterations, 10000u);
  ASSERT_GE(s->findings.size(), 1u);
  ASSERT_TRUE(WriteCampaignOutputs(m, config, *s, dir).ok());
  std::vector<fs::path> crashes;
  for (const auto& e : fs::directory_iterator(fs::path(dir) / "crashes")) {
    crashes.push_back(e.path());
  }
  ASSERT_EQ(crashes.size(), 1u);
  StatusOr<ReplayResult> r = Replay(crashes[0].string());
  ASSERT_TRUE(r.ok()) << r.status().ToString();
  EXPECT_EQ(r->report.bug_class, BugClass::kSpatialOob);
  EXPECT_EQ(r->report.dedupe_key, r->recorded_dedupe_key);
  EXPECT_EQ(r->report.dedupe_key, s->findings.Findings()[0].first.dedupe_key);
}

TEST(ReplayTest, ModifiedKernelIsADigestMismatch) {
  std::string root = testing::ScratchDir("digest");
  ASSERT_TRUE(ExportBenchmark("axpy", root).ok());
  std::string harness = root + "/axpy/variants/spatial_oob.man";
  HarnessManifest m = Load(harness);
  CampaignConfig config;
  config.max_iterations = 10000;
  config.stop_on_first_finding = true;
  StatusOr<CampaignSummary> s = FuzzLoop(m, config);
  ASSERT_TRUE(s.ok());
  ASSERT_FALSE(s->corpus.crashes.empty());
  std::string artifact = root + "/crash.txt";
  ASSERT_TRUE(WriteFile(artifact, FormatCrashArtifact(m, *s, s->corpus.crashes[0])));
  ASSERT_TRUE(Replay(artifact).ok());

  std::string sir = root + "/axpy/variants/spatial_oob.sir";
  // Comments do not change the canonical digest; a changed constant does.
  std::string text = *ReadFile(sir);
  size_t at = text.find(", 33");
  ASSERT_NE(at, std::string::npos);
  text.replace(at, 4, ", 34");
  ASSERT_TRUE(WriteFile(sir, text));
  StatusOr<ReplayResult> r = Replay(artifact);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.status().code(), ErrorCode::kDigestMismatch);
}

TEST(ReplayTest, CleanTraceIsNonReproducing) {
  HarnessManifest m = Load(Variant("axpy", BugClass::kSpatialOob));
  CampaignConfig config;
  config.max_iterations = 10000;
  config.stop_on_first_finding = true;
  StatusOr<CampaignSummary> s = FuzzLoop(m, config);
  ASSERT_TRUE(s.ok());
  ASSERT_FALSE(s->corpus.crashes.empty());
  std::string text = FormatCrashArtifact(m, *s, s->corpus.crashes[0]);
  // Turn the final boundary mutation into a harmless one.
  size_t op = text.rfind("which=max");
  size_t val = text.rfind("arg i32 2147483647");
  ASSERT_NE(op, std::string::npos);
  ASSERT_NE(val, std::string::npos);
  text.replace(val, 18, "arg i32 0");
  text.replace(op, 9, "which=zero");
  std::string artifact = testing::ScratchDir("nonrepro") + "/crash.txt";
  ASSERT_TRUE(WriteFile(artifact, text));
  StatusOr<ReplayResult> r = Replay(artifact);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.status().code(), ErrorCode::kNonReproducing);
}

TEST(DeterminismTest, SameSeedSameFiles) {
  HarnessManifest m = Load(Variant("rotm", BugClass::kProvenanceEscape));
  std::string a = testing::ScratchDir("det_a"), b = testing::ScratchDir("det_b");
  for (const std::string& dir : {a, b}) {
    CampaignConfig config;
    config.max_iterations = 1500;
    config.seed = 42;
    config.output_dir = dir;
    StatusOr<CampaignSummary> s = FuzzLoop(m, config);
    ASSERT_TRUE(s.ok());
    ASSERT_TRUE(WriteCampaignOutputs(m, config, *s, dir).ok());
  }
  auto ca = testing::DirContents(a), cb = testing::DirContents(b);
  ca.erase("timing.rec");
  cb.erase("timing.rec");
  EXPECT_EQ(ca, cb);
  EXPECT_TRUE(ca.contains("summary.rec"));
  EXPECT_FALSE(ca.contains("FAILED"));
}

TEST(PickParentTest, SeedsOnlyAndDeterministic) {
  Corpus corpus;
  corpus.seeds.push_back({CorpusEntry::Kind::kSeed, "s0", {}, 0, 0, 0, {}});
  CounterRng r1(8), r2(8);
  for (int i = 0; i < 50; ++i) {
    EXPECT_EQ(PickParent(corpus, 100, 256, 4, r1).id, "s0");
  }
  for (int i = 0; i < 5; ++i) {
    corpus.interesting.push_back(
        {CorpusEntry::Kind::kInteresting, StrCat("i", i), {}, 10u * i, 1, 0, {}});
  }
  CounterRng a(8), b(8);
  for (int i = 0; i < 100; ++i) {
    EXPECT_EQ(PickParent(corpus, 60, 256, 4, a).id,
              PickParent(corpus, 60, 256, 4, b).id);
  }
}

TEST(PickParentTest, NewEntryIsPickedSoon) {
  Corpus corpus;
  corpus.seeds.push_back({CorpusEntry::Kind::kSeed, "s0", {}, 0, 0, 0, {}});
  for (int i = 0; i < 20; ++i) {
    corpus.interesting.push_back(
        {CorpusEntry::Kind::kInteresting, StrCat("old", i), {}, 1, 1, 0, {}});
  }
  corpus.interesting.push_back(
      {CorpusEntry::Kind::kInteresting, "new", {}, 1000, 1, 0, {}});
  CounterRng rng(2026);
  int first = -1;
  for (int i = 0; i < 100 && first < 0; ++i) {
    if (PickParent(corpus, 1001, 256, 4, rng).id == "new") first = i;
  }
  EXPECT_GE(first, 0);
}

TEST(HarnessRunnerTest, ComputeStartsFromTheSnapshot) {
  HarnessManifest m = Load(FindBenchmark("swap")->harness_path);
  StatusOr<HarnessRunner> runner = HarnessRunner::Create(m);
  ASSERT_TRUE(runner.ok()) << runner.status().ToString();
  CounterRng rng(1);
  for (int i = 0; i < 20; ++i) {
    TestCase tc = RandomValidTestCase(m.args, rng);
    PhaseContext ctx;
    ASSERT_TRUE(runner->RunCompute(tc, ctx).ok());
    EXPECT_FALSE(runner->image() == runner->snapshot().image());
    DeviceMemoryImage probe = runner->image();
    Restore(probe, runner->snapshot());
    EXPECT_TRUE(probe == runner->snapshot().image());
  }
  // Leftover state from one iteration would make a rerun diverge.
  TestCase a = RandomValidTestCase(m.args, rng);
  ASSERT_TRUE(runner->RunCompute(a, PhaseContext{}).ok());
  DeviceMemoryImage after_a = runner->image();
  ASSERT_TRUE(runner->RunCompute(RandomValidTestCase(m.args, rng), PhaseContext{}).ok());
  ASSERT_TRUE(runner->RunCompute(a, PhaseContext{}).ok());
  EXPECT_TRUE(runner->image() == after_a);
}

TEST(CampaignConfigTest, RejectsBadValues) {
  CampaignConfig c;
  c.workers = 0;
  EXPECT_FALSE(c.Check().ok());
  c = CampaignConfig();
  c.wall_clock_seconds = 0.0;
  EXPECT_FALSE(c.Check().ok());
  EXPECT_TRUE(CampaignConfig().Check().ok());
}

}  // namespace
}  // namespace simt_forge
