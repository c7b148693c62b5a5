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

// Coverage-guided fuzzing over the COMPUTE phase of a harness.
//
// Each worker runs INIT once, snapshots the device image, and then per
// iteration restores the snapshot, mutates a corpus entry and runs COMPUTE.
// Workers own their image, schedule and RNG stream; a coordinator merges
// coverage and admits interesting inputs at fixed sync points, in worker
// order, so a run is reproducible for a fixed worker count and seed.

#ifndef SIMT_FORGE_FUZZ_CAMPAIGN_H_
#define SIMT_FORGE_FUZZ_CAMPAIGN_H_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "simt_forge/coverage.h"
#include "simt_forge/device_memory.h"
#include "simt_forge/error.h"
#include "simt_forge/harness.h"
#include "simt_forge/mutation_engine.h"
#include "simt_forge/rng.h"
#include "simt_forge/sanitizer.h"

namespace simt_forge {

// Runs a harness against a private image: INIT once at creation, then
// COMPUTE from the post-INIT snapshot as often as needed.
class HarnessRunner {
 public:
  static StatusOr<HarnessRunner> Create(const HarnessManifest& manifest,
                                        const MemoryConfig& config = {});

  // Restores the post-INIT state, then runs COMPUTE on `tc`.
  StatusOr<PhaseOutcome> RunCompute(const TestCase& tc, PhaseContext ctx);
  // Restores the post-INIT state, then runs TERM.
  StatusOr<PhaseOutcome> RunTerm(uint64_t iteration = 0);

  const DeviceMemoryImage& image() const { return image_; }
  const Snapshot& snapshot() const { return snapshot_; }
  const NameTable& names() const { return names_; }
  const HarnessManifest& manifest() const { return *manifest_; }

 private:
  HarnessRunner(const HarnessManifest& manifest, const MemoryConfig& config)
      : manifest_(&manifest), image_(config) {}

  const HarnessManifest* manifest_;
  DeviceMemoryImage image_;
  Snapshot snapshot_;
  NameTable init_names_;
  NameTable names_;
};

// INIT, COMPUTE and (when `run_term`) TERM on a fresh image.
StatusOr<PhaseOutcome> RunOnce(const HarnessManifest& manifest,
                               const TestCase& tc, bool copy_out = true,
                               bool run_term = false);

// Returns a description of the mismatch, or nullopt when outputs agree.
using DiffChecker = std::function<std::optional<std::string>(
    const TestCase& tc, const PhaseOutcome& outcome)>;

struct CampaignConfig {
  uint64_t max_iterations = 1000;
  bool stop_on_first_finding = false;
  // With stop_on_first_finding, only these classes stop the campaign; an
  // empty set means any finding does.
  std::set<BugClass> stop_classes;
  std::optional<double> wall_clock_seconds;
  uint32_t workers = 1;
  uint64_t seed = 0;
  std::string output_dir;  // nothing is written when empty
  bool amortize = true;    // false reruns INIT and TERM every iteration
  bool diff_check = false;
  DiffChecker diff_checker;
  uint32_t sync_interval = 0;  // 0: every iteration for 1 worker, else 64
  uint32_t admission_window = 256;
  uint32_t recent_weight = 4;
  uint32_t boundary_period = 16;
  uint64_t instruction_budget = kDefaultInstructionBudget;
  MutationWeights weights;
  std::ostream* trace = nullptr;  // executor events; single worker only

  Status Check() const;
};

struct CorpusEntry {
  enum class Kind : uint8_t { kSeed, kInteresting, kCrash };
  Kind kind = Kind::kSeed;
  std::string id;
  TestCase tc;
  uint64_t iteration = 0;  // when found
  uint32_t new_edges = 0;  // at admission
  uint32_t worker = 0;
  std::optional<BugReport> bug;  // crashes
};

struct Corpus {
  std::vector<CorpusEntry> seeds;
  std::vector<CorpusEntry> interesting;
  std::vector<CorpusEntry> crashes;

  const CorpusEntry* Find(const std::string& id) const;
  // Entries from a seed down to `id`, inclusive.
  std::vector<const CorpusEntry*> Lineage(const std::string& id) const;
};

// Weighted pick over seeds and interesting entries: entries admitted within
// `window` iterations of `now` weigh `recent_weight`, all others 1.
const CorpusEntry& PickParent(const Corpus& corpus, uint64_t now,
                              uint32_t window, uint32_t recent_weight,
                              CounterRng& rng);

struct CampaignSummary {
  uint64_t iterations = 0;
  uint64_t compute_executions = 0;
  uint64_t init_executions = 0;
  uint64_t term_executions = 0;
  uint64_t retired_instructions = 0;
  uint64_t budget_exhaustions = 0;
  uint64_t diff_checks = 0;
  uint64_t diff_mismatches = 0;
  double elapsed_seconds = 0;
  double exec_per_second = 0;
  std::string stop_reason;
  std::optional<std::string> abort_reason;
  FindingLog findings;
  CoverageMap coverage;
  CoverageReport coverage_report;
  Corpus corpus;
  // Global hit-edge count after each admission, in admission order.
  std::vector<size_t> admission_edge_counts;
};

StatusOr<CampaignSummary> FuzzLoop(const HarnessManifest& manifest,
                                   const CampaignConfig& config);

// Writes corpus/, crashes/, findings.txt, coverage.txt, coverage.rec,
// summary.rec and timing.rec under `dir`.
Status WriteCampaignOutputs(const HarnessManifest& manifest,
                            const CampaignConfig& config,
                            const CampaignSummary& summary,
                            const std::string& dir);

// Crash artifact text: digests plus the test-case lineage from its seed.
std::string FormatCrashArtifact(const HarnessManifest& manifest,
                                const CampaignSummary& summary,
                                const CorpusEntry& crash);

struct ReplayResult {
  PhaseOutcome outcome;
  BugReport report;
  std::string recorded_dedupe_key;
};

StatusOr<ReplayResult> Replay(const std::string& artifact_path,
                              std::ostream* trace = nullptr);

}  // namespace simt_forge

#endif  // SIMT_FORGE_FUZZ_CAMPAIGN_H_
