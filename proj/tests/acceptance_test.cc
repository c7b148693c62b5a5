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


// Acceptance suite. Each criterion prints one PASS/FAIL line with its
// measured runtime; the process exits nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "properties.h"
#include "simt_forge/bench_corpus.h"
#include "simt_forge/coverage.h"
#include "simt_forge/fuzz_campaign.h"
#include "test_util.h"

namespace simt_forge {
namespace {

// A failed check describes itself; an empty string means the check passed.
using Check = std::function<std::string()>;

struct Criterion {
  int number;
  std::string title;
  double limit_seconds;
  Check run;
};

std::string CoverageArithmetic() {
  struct Row {
    const char* name;
    uint64_t hit, total;
    double published;
  };
  const Row rows[] = {
      {"amax", 47, 95, 49.47},   {"amin", 47, 106, 44.34}, {"asum", 9, 14, 64.29},
      {"axpy", 7, 30, 23.33},    {"copy", 6, 35, 17.14},   {"dot", 23, 57, 40.35},
      {"nrm2", 177, 340, 52.06}, {"rot", 10, 81, 12.35},   {"rotm", 12, 132, 9.09},
      {"scal", 4, 19, 21.05},    {"swap", 10, 77, 12.99},
  };
  std::vector<CoverageRow> report_rows;
  for (const Row& r : rows) {
    StatusOr<CoverageRow> row = MakeRow(r.name, r.hit, r.total, 0, std::nullopt);
    if (!row.ok()) return row.status().ToString();
    if (std::fabs(row->bb_cov.exact - r.published) > 0.005) {
      return fmt::format("{}: {} is not within 0.005 of {}", r.name,
                         row->bb_cov.exact, r.published);
    }
    if (row->bb_cov.ToString() != fmt::format("{:.2f}", r.published)) {
      return fmt::format("{}: rounded {} != {:.2f}", r.name,
                         row->bb_cov.ToString(), r.published);
    }
    report_rows.push_back(*row);
  }
  StatusOr<CoverageReport> report = Summarize(report_rows);
  if (!report.ok()) return report.status().ToString();
  if (!report->geomean || report->geomean->ToString() != "25.98") {
    return "geometric mean is not 25.98";
  }
  return "";
}

struct VariantRef {
  std::string bench;
  BugClass bug_class;
  std::string harness;
};

std::vector<VariantRef> AllVariants() {
  std::vector<VariantRef> out;
  for (const BenchmarkEntry& e : ListBenchmarks()) {
    for (const BenchmarkVariant* v : e.seeded()) {
      out.push_back({e.name, *v->bug_class, v->harness_path});
    }
  }
  return out;
}

std::string SanitizerCompleteness() {
  std::vector<VariantRef> variants = AllVariants();
  if (variants.size() != 44) return fmt::format("{} variants, expected 44", variants.size());
  for (const VariantRef& v : variants) {
    StatusOr<HarnessManifest> m = LoadHarness(v.harness);
    if (!m.ok()) return m.status().ToString();
    StatusOr<TestCase> tc = TriggerTestCase(*m);
    if (!tc.ok()) return tc.status().ToString();
    StatusOr<PhaseOutcome> out = RunOnce(*m, *tc, false, false);
    if (!out.ok()) return out.status().ToString();
    if (!out->bug) return fmt::format("{}: trigger ran clean", v.harness);
    if (out->bug->bug_class != v.bug_class) {
      return fmt::format("{}: got {}", v.harness, BugClassName(out->bug->bug_class));
    }
  }
  return "";
}

std::string SanitizerSoundness() {
  constexpr int kTotal = 10'000;
  std::vector<BenchmarkEntry> list = ListBenchmarks();
  CounterRng rng(20261018);
  int done = 0;
  for (size_t b = 0; b < list.size(); ++b) {
    StatusOr<HarnessManifest> m = LoadHarness(list[b].harness_path);
    if (!m.ok()) return m.status().ToString();
    StatusOr<HarnessRunner> runner = HarnessRunner::Create(*m);
    if (!runner.ok()) return runner.status().ToString();
    int share = (kTotal - done) / static_cast<int>(list.size() - b);
    for (int i = 0; i < share; ++i, ++done) {
      TestCase tc = RandomValidTestCase(m->args, rng);
      PhaseContext ctx;
      ctx.iteration = static_cast<uint64_t>(i);
      StatusOr<PhaseOutcome> out = runner->RunCompute(tc, ctx);
      if (!out.ok()) return out.status().ToString();
      if (out->bug) {
        return fmt::format("{}: false positive\n{}", list[b].name,
                           FormatBugReport(*out->bug));
      }
      if (out->budget_exhausted) return list[b].name + ": budget exhausted";
    }
    StatusOr<PhaseOutcome> term = runner->RunTerm();
    if (!term.ok()) return term.status().ToString();
    if (term->bug) return list[b].name + ": TERM finding";
  }
  if (done != kTotal) return fmt::format("ran {} executions", done);
  return "";
}

bool UsesTypeAwareOp(const TestCase& tc) {
  for (const AppliedMutation& m : tc.trace) {
    if (IsTypeAware(m.op)) return true;
  }
  return false;
}

std::string FuzzingEffectiveness() {
  uint64_t worst = 0;
  for (const VariantRef& v : AllVariants()) {
    StatusOr<HarnessManifest> m = LoadHarness(v.harness);
    if (!m.ok()) return m.status().ToString();
    CampaignConfig config;
    config.max_iterations = 10'000;
    config.seed = 1;
    config.stop_on_first_finding = true;
    config.stop_classes = {v.bug_class};
    StatusOr<CampaignSummary> s = FuzzLoop(*m, config);
    if (!s.ok()) return s.status().ToString();
    const CorpusEntry* crash = nullptr;
    for (const CorpusEntry& c : s->corpus.crashes) {
      if (c.bug && c.bug->bug_class == v.bug_class) crash = &c;
    }
    if (crash == nullptr) {
      return fmt::format("{}: not found in {} iterations", v.harness, s->iterations);
    }
    worst = std::max(worst, crash->iteration + 1);
    bool needs_type_aware = v.bug_class == BugClass::kSpatialOob ||
                            v.bug_class == BugClass::kSpaceMismatch;
    if (needs_type_aware && !UsesTypeAwareOp(crash->tc)) {
      return fmt::format("{}: discovering trace has no type-aware op", v.harness);
    }
  }
  std::cout << fmt::format("    slowest discovery at iteration {}\n", worst);
  return "";
}

std::string Amortization() {
  double worst = 1e300;
  std::string worst_name;
  for (const BenchmarkEntry& e : ListBenchmarks()) {
    StatusOr<HarnessManifest> m = LoadHarness(e.harness_path);
    if (!m.ok()) return m.status().ToString();
    CampaignConfig fast;
    fast.max_iterations = 3000;
    CampaignConfig slow = fast;
    slow.max_iterations = 150;
    slow.amortize = false;
    StatusOr<CampaignSummary> a = FuzzLoop(*m, fast);
    StatusOr<CampaignSummary> r = FuzzLoop(*m, slow);
    if (!a.ok()) return a.status().ToString();
    if (!r.ok()) return r.status().ToString();
    double ratio = a->exec_per_second / r->exec_per_second;
    if (ratio < worst) {
      worst = ratio;
      worst_name = e.name;
    }
  }
  std::cout << fmt::format("    lowest speedup {:.1f}x ({})\n", worst, worst_name);
  if (worst < 5.0) return fmt::format("{} speedup only {:.2f}x", worst_name, worst);
  return "";
}

std::string Determinism() {
  const std::vector<std::string> harnesses = {
      FindBenchmark("axpy")->harness_path,
      FindBenchmark("rotm")->dir + "/variants/provenance_escape.man",
      FindBenchmark("amin")->dir + "/variants/temporal_uaf.man",
  };
  int k = 0;
  for (const std::string& h : harnesses) {
    StatusOr<HarnessManifest> m = LoadHarness(h);
    if (!m.ok()) return m.status().ToString();
    std::map<std::string, std::string> contents[2];
    for (int run = 0; run < 2; ++run) {
      std::string dir = testing::ScratchDir(fmt::format("accept_det_{}_{}", k, run));
      CampaignConfig config;
      config.max_iterations = 3000;
      config.seed = 7;
      config.output_dir = dir;
      StatusOr<CampaignSummary> s = FuzzLoop(*m, config);
      if (!s.ok()) return s.status().ToString();
      Status st = WriteCampaignOutputs(*m, config, *s, dir);
      if (!st.ok()) return st.ToString();
      contents[run] = testing::DirContents(dir);
      contents[run].erase("timing.rec");
    }
    if (contents[0] != contents[1]) return h + ": outputs differ";
    for (const char* f : {"summary.rec", "findings.txt", "coverage.rec", "corpus.rec"}) {
      if (!contents[0].contains(f)) return fmt::format("{}: missing {}", h, f);
    }
    ++k;
  }
  return "";
}

std::string ShadowCoherence() {
  for (uint64_t seed = 0; seed < 1000; ++seed) {
    if (auto bad = testing::RunShadowSequence(seed, 1000)) {
      return fmt::format("sequence {}: {}", seed, *bad);
    }
  }
  return "";
}

std::string DifferentialCorrectness() {
  CounterRng rng(8);
  for (const BenchmarkEntry& e : ListBenchmarks()) {
    StatusOr<HarnessManifest> m = LoadHarness(e.harness_path);
    if (!m.ok()) return m.status().ToString();
    StatusOr<HarnessRunner> runner = HarnessRunner::Create(*m);
    if (!runner.ok()) return runner.status().ToString();
    for (int i = 0; i < 100; ++i) {
      TestCase tc = RandomValidTestCase(m->args, rng);
      PhaseContext ctx;
      ctx.copy_out = true;
      StatusOr<PhaseOutcome> out = runner->RunCompute(tc, ctx);
      if (!out.ok()) return out.status().ToString();
      if (out->bug) return e.name + ": unexpected finding";
      StatusOr<NamedOutputs> want = ReferenceResult(m->reference, tc.args);
      if (!want.ok()) return want.status().ToString();
      if (auto diff = CompareOutputs(*want, out->outputs)) {
        return fmt::format("{} input {}: {}", e.name, i, *diff);
      }
    }
  }
  return "";
}

int Main() {
  const std::vector<Criterion> criteria = {
      {1, "coverage arithmetic reproduces the published table", 1, CoverageArithmetic},
      {2, "seeded variants detected with their intended class", 30, SanitizerCompleteness},
      {3, "10,000 valid executions of clean benchmarks are finding-free", 300,
       SanitizerSoundness},
      {4, "fuzzing finds every seeded bug within 10,000 iterations", 600,
       FuzzingEffectiveness},
      {5, "amortized mode is at least 5x faster than re-INIT", 120, Amortization},
      {6, "single-worker runs with one seed are byte-identical", 60, Determinism},
      {7, "shadow coherence over 1,000 random sequences", 60, ShadowCoherence},
      {8, "clean benchmarks match the scalar reference bit for bit", 60,
       DifferentialCorrectness},
  };
  int failures = 0;
  for (const Criterion& c : criteria) {
    auto start = std::chrono::steady_clock::now();
    std::string error = c.run();
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (error.empty() && secs >= c.limit_seconds) {
      error = fmt::format("took {:.2f} s, limit {} s", secs, c.limit_seconds);
    }
    bool pass = error.empty();
    failures += !pass;
    std::cout << fmt::format("[{}] criterion {}: {} ({:.2f} s)\n",
                             pass ? "PASS" : "FAIL", c.number, c.title, secs);
    if (!pass) std::cout << "    " << error << "\n";
    std::cout.flush();
  }
  std::cout << fmt::format("{} of {} criteria passed\n", criteria.size() - failures,
                           criteria.size());
  return failures == 0 ? 0 : 1;
}

}  // namespace
}  // namespace simt_forge

int main() { return simt_forge::Main(); }
