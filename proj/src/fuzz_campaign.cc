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

#include <algorithm>
#include <chrono>
#include <filesystem>

#include <nlohmann/json.hpp>

#include "simt_forge/hash.h"
#include "simt_forge/strings.h"

namespace simt_forge {

namespace fs = std::filesystem;

StatusOr<HarnessRunner> HarnessRunner::Create(const HarnessManifest& manifest,
                                              const MemoryConfig& config) {
  SF_RETURN_IF_ERROR(config.Check());
  HarnessRunner runner(manifest, config);
  PhaseContext ctx;
  ctx.manifest = &manifest;
  const TestCase seed = SeedTestCase(manifest.args);
  SF_ASSIGN_OR_RETURN(
      PhaseOutcome init,
      RunPhase(ctx, manifest.init, runner.image_, runner.names_, seed));
  if (init.bug) {
    return MakeError(ErrorCode::kManifestSyntax,
                     StrCat("INIT phase reported ",
                            BugClassName(init.bug->bug_class), " in ",
                            init.bug->kernel));
  }
  runner.snapshot_ = TakeSnapshot(runner.image_);
  runner.init_names_ = runner.names_;
  return runner;
}

StatusOr<PhaseOutcome> HarnessRunner::RunCompute(const TestCase& tc,
                                                 PhaseContext ctx) {
  Restore(image_, snapshot_);
  names_ = init_names_;
  image_.set_iteration(ctx.iteration);
  ctx.manifest = manifest_;
  return RunPhase(ctx, manifest_->compute, image_, names_, tc);
}

StatusOr<PhaseOutcome> HarnessRunner::RunTerm(uint64_t iteration) {
  Restore(image_, snapshot_);
  names_ = init_names_;
  image_.set_iteration(iteration);
  PhaseContext ctx;
  ctx.manifest = manifest_;
  ctx.iteration = iteration;
  return RunPhase(ctx, manifest_->term, image_, names_,
                  SeedTestCase(manifest_->args));
}

StatusOr<PhaseOutcome> RunOnce(const HarnessManifest& manifest,
                               const TestCase& tc, bool copy_out,
                               bool run_term) {
  DeviceMemoryImage image;
  NameTable names;
  PhaseContext ctx;
  ctx.manifest = &manifest;
  ctx.copy_out = copy_out;
  SF_ASSIGN_OR_RETURN(PhaseOutcome init,
                      RunPhase(ctx, manifest.init, image, names, tc));
  if (init.bug) return init;
  SF_ASSIGN_OR_RETURN(PhaseOutcome compute,
                      RunPhase(ctx, manifest.compute, image, names, tc));
  if (compute.bug || compute.budget_exhausted || !run_term) return compute;
  SF_ASSIGN_OR_RETURN(PhaseOutcome term,
                      RunPhase(ctx, manifest.term, image, names, tc));
  if (term.bug) compute.bug = term.bug;
  return compute;
}

Status CampaignConfig::Check() const {
  if (max_iterations == 0) {
    return MakeError(ErrorCode::kManifestSyntax, "max_iterations must be >= 1");
  }
  if (workers == 0) {
    return MakeError(ErrorCode::kManifestSyntax, "workers must be >= 1");
  }
  if (wall_clock_seconds && *wall_clock_seconds <= 0) {
    return MakeError(ErrorCode::kManifestSyntax, "wall clock must be > 0");
  }
  if (trace != nullptr && workers != 1) {
    return MakeError(ErrorCode::kManifestSyntax, "tracing needs one worker");
  }
  return OkStatus();
}

const CorpusEntry* Corpus::Find(const std::string& id) const {
  for (const auto* list : {&seeds, &interesting, &crashes}) {
    for (const CorpusEntry& e : *list) {
      if (e.id == id) return &e;
    }
  }
  return nullptr;
}

std::vector<const CorpusEntry*> Corpus::Lineage(const std::string& id) const {
  std::vector<const CorpusEntry*> chain;
  const CorpusEntry* e = Find(id);
  while (e != nullptr) {
    chain.push_back(e);
    if (e->tc.parent_id.empty()) break;
    e = Find(e->tc.parent_id);
  }
  std::reverse(chain.begin(), chain.end());
  return chain;
}

const CorpusEntry& PickParent(const Corpus& corpus, uint64_t now,
                              uint32_t window, uint32_t recent_weight,
                              CounterRng& rng) {
  auto weight = [&](const CorpusEntry& e) -> uint64_t {
    const bool recent = e.kind == CorpusEntry::Kind::kInteresting &&
                        now >= e.iteration && now - e.iteration < window;
    return recent ? recent_weight : 1;
  };
  uint64_t total = 0;
  for (const auto& e : corpus.seeds) total += weight(e);
  for (const auto& e : corpus.interesting) total += weight(e);
  uint64_t r = rng.Uniform(total);
  for (const auto* list : {&corpus.seeds, &corpus.interesting}) {
    for (const CorpusEntry& e : *list) {
      const uint64_t w = weight(e);
      if (r < w) return e;
      r -= w;
    }
  }
  return corpus.seeds.front();
}

namespace {

using Clock = std::chrono::steady_clock;

struct Candidate {
  CorpusEntry entry;
  CoverageMap delta;
};

struct Worker {
  uint32_t index = 0;
  std::optional<HarnessRunner> runner;
  CounterRng rng;
  MutationSchedule schedule;
  CoverageMap view;
  CoverageMap delta;
  FindingLog findings;
  std::vector<Candidate> candidates;
  std::vector<CorpusEntry> crashes;
  uint64_t iterations = 0;
  uint64_t inits = 0;
  uint64_t terms = 0;
  uint64_t retired = 0;
  uint64_t budget = 0;
  uint64_t diff_checks = 0;
  uint64_t diff_mismatches = 0;
  bool hit_stop = false;
  bool out_of_time = false;
  Status fatal;
};

bool IsStopFinding(const CampaignConfig& config, const BugReport& bug) {
  return config.stop_on_first_finding &&
         (config.stop_classes.empty() ||
          config.stop_classes.contains(bug.bug_class));
}

// One COMPUTE execution in the per-iteration re-INIT mode: reload the
// program, build a fresh image, run INIT, COMPUTE and TERM.
StatusOr<PhaseOutcome> RunReinit(const HarnessManifest& manifest,
                                 const TestCase& tc, PhaseContext ctx) {
  SF_ASSIGN_OR_RETURN(Program program, LoadProgram(manifest.program_text));
  DeviceMemoryImage image;
  image.set_iteration(ctx.iteration);
  NameTable names;
  ctx.manifest = &manifest;
  ctx.program = &program;
  CoverageMap* coverage = ctx.coverage;
  ctx.coverage = nullptr;
  SF_ASSIGN_OR_RETURN(PhaseOutcome init,
                      RunPhase(ctx, manifest.init, image, names, tc));
  if (init.bug) {
    return MakeError(ErrorCode::kManifestSyntax,
                     StrCat("INIT phase reported ",
                            BugClassName(init.bug->bug_class)));
  }
  ctx.coverage = coverage;
  SF_ASSIGN_OR_RETURN(PhaseOutcome compute,
                      RunPhase(ctx, manifest.compute, image, names, tc));
  if (compute.bug || compute.budget_exhausted) return compute;
  ctx.coverage = nullptr;
  SF_ASSIGN_OR_RETURN(PhaseOutcome term,
                      RunPhase(ctx, manifest.term, image, names, tc));
  (void)term;
  return compute;
}

void RunWorkerSlice(const HarnessManifest& manifest,
                    const CampaignConfig& config, const Corpus& corpus,
                    const FindingLog& global_findings,
                    const CoverageMap& zero_map, uint64_t base,
                    uint64_t round_size, uint32_t workers,
                    Clock::time_point start, Worker& w) {
  for (uint64_t j = 0;; ++j) {
    const uint64_t slot = j * workers + w.index;
    if (slot >= round_size || w.hit_stop || !w.fatal.ok()) return;
    if (config.wall_clock_seconds &&
        std::chrono::duration<double>(Clock::now() - start).count() >=
            *config.wall_clock_seconds) {
      w.out_of_time = true;
      return;
    }
    const uint64_t iteration = base + slot;
    TestCase tc;
    if (iteration < corpus.seeds.size()) {
      tc = corpus.seeds[iteration].tc;
    } else {
      const CorpusEntry& parent =
          PickParent(corpus, iteration, config.admission_window,
                     config.recent_weight, w.rng);
      tc = MutateTestCase(parent.tc, parent.id, manifest.args, w.schedule,
                          w.rng.Next(), config.weights);
    }

    CoverageMap iter_cov = zero_map;
    PhaseContext ctx;
    ctx.manifest = &manifest;
    ctx.coverage = &iter_cov;
    ctx.copy_out = config.diff_check;
    ctx.iteration = iteration;
    ctx.instruction_budget = config.instruction_budget;
    ctx.trace = config.trace;
    StatusOr<PhaseOutcome> result =
        config.amortize ? w.runner->RunCompute(tc, ctx)
                        : RunReinit(manifest, tc, ctx);
    if (!result.ok()) {
      w.fatal = result.status();
      return;
    }
    ++w.iterations;
    if (!config.amortize) {
      ++w.inits;
      ++w.terms;
    }
    PhaseOutcome& out = *result;
    w.retired += out.retired;
    if (out.budget_exhausted) ++w.budget;

    if (out.bug) {
      const bool fresh = w.findings.Add(*out.bug);
      if (fresh && !global_findings.Contains(out.bug->dedupe_key)) {
        CorpusEntry crash;
        crash.kind = CorpusEntry::Kind::kCrash;
        crash.id = TestCaseId(tc, manifest.args);
        crash.tc = tc;
        crash.iteration = iteration;
        crash.worker = w.index;
        crash.bug = out.bug;
        w.crashes.push_back(std::move(crash));
      }
      if (IsStopFinding(config, *out.bug)) w.hit_stop = true;
    } else if (config.diff_check && config.diff_checker &&
               !out.budget_exhausted) {
      ++w.diff_checks;
      if (config.diff_checker(tc, out)) ++w.diff_mismatches;
    }

    StatusOr<std::vector<KernelEdge>> fresh_edges =
        NewEdgesSince(iter_cov, w.view);
    StatusOr<CoverageMap> view = Merge(w.view, iter_cov);
    StatusOr<CoverageMap> delta = Merge(w.delta, iter_cov);
    if (!fresh_edges.ok() || !view.ok() || !delta.ok()) {
      w.fatal = !fresh_edges.ok() ? fresh_edges.status()
                                  : (!view.ok() ? view.status() : delta.status());
      return;
    }
    w.view = std::move(*view);
    w.delta = std::move(*delta);
    if (!fresh_edges->empty() && !out.bug && iteration >= corpus.seeds.size()) {
      Candidate c;
      c.entry.kind = CorpusEntry::Kind::kInteresting;
      c.entry.id = TestCaseId(tc, manifest.args);
      c.entry.tc = std::move(tc);
      c.entry.iteration = iteration;
      c.entry.worker = w.index;
      c.delta = std::move(iter_cov);
      w.candidates.push_back(std::move(c));
    }
  }
}

}  // namespace

StatusOr<CampaignSummary> FuzzLoop(const HarnessManifest& manifest,
                                   const CampaignConfig& config) {
  SF_RETURN_IF_ERROR(config.Check());
  const Clock::time_point start = Clock::now();
  const uint32_t n_workers = config.workers;
  const uint32_t interval =
      config.sync_interval != 0 ? config.sync_interval
                                : (n_workers == 1 ? 1 : 64);

  CampaignSummary summary;
  summary.coverage = CoverageMap(manifest.program);
  const CoverageMap zero_map = summary.coverage;

  CorpusEntry seed;
  seed.kind = CorpusEntry::Kind::kSeed;
  seed.tc = SeedTestCase(manifest.args);
  seed.id = TestCaseId(seed.tc, manifest.args);
  summary.corpus.seeds.push_back(seed);

  const CounterRng master(config.seed);
  std::vector<Worker> workers(n_workers);
  for (uint32_t i = 0; i < n_workers; ++i) {
    workers[i].index = i;
    workers[i].rng = master.Split(i);
    workers[i].schedule = MutationSchedule(config.boundary_period);
  }

  auto finish = [&](std::string reason) {
    summary.stop_reason = std::move(reason);
    summary.elapsed_seconds =
        std::chrono::duration<double>(Clock::now() - start).count();
    summary.exec_per_second =
        summary.elapsed_seconds > 0
            ? static_cast<double>(summary.compute_executions) /
                  summary.elapsed_seconds
            : 0.0;
    StatusOr<CoverageReport> report = BuildReport(summary.coverage);
    if (report.ok()) summary.coverage_report = std::move(*report);
    return summary;
  };

  if (config.amortize) {
    std::vector<Status> init_status(n_workers);
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < static_cast<int64_t>(n_workers); ++i) {
      StatusOr<HarnessRunner> runner = HarnessRunner::Create(manifest);
      if (runner.ok()) {
        workers[i].runner.emplace(std::move(*runner));
        workers[i].inits = 1;
      } else {
        init_status[i] = runner.status();
      }
    }
    for (uint32_t i = 0; i < n_workers; ++i) {
      summary.init_executions += workers[i].inits;
      if (!init_status[i].ok()) {
        summary.abort_reason = init_status[i].ToString();
        return finish("aborted");
      }
    }
  }

  std::string reason = "iteration limit";
  uint64_t scheduled = 0;
  bool stop = false;
  while (!stop && scheduled < config.max_iterations) {
    const uint64_t round_size = std::min<uint64_t>(
        config.max_iterations - scheduled,
        static_cast<uint64_t>(interval) * n_workers);
    for (Worker& w : workers) {
      w.view = summary.coverage;
      w.delta = CoverageMap();
    }
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < static_cast<int64_t>(n_workers); ++i) {
      RunWorkerSlice(manifest, config, summary.corpus, summary.findings,
                     zero_map, scheduled, round_size, n_workers, start,
                     workers[i]);
    }
    scheduled += round_size;

    // Sync point: merge in worker order.
    for (Worker& w : workers) {
      for (CorpusEntry& crash : w.crashes) {
        if (summary.corpus.Find(crash.id) == nullptr) {
          summary.corpus.crashes.push_back(std::move(crash));
        }
      }
      w.crashes.clear();
      summary.findings.Merge(w.findings);
      w.findings = FindingLog();
      for (Candidate& c : w.candidates) {
        SF_ASSIGN_OR_RETURN(std::vector<KernelEdge> fresh,
                            NewEdgesSince(c.delta, summary.coverage));
        if (fresh.empty() || summary.corpus.Find(c.entry.id) != nullptr) {
          continue;
        }
        SF_ASSIGN_OR_RETURN(summary.coverage, Merge(summary.coverage, c.delta));
        c.entry.new_edges = static_cast<uint32_t>(fresh.size());
        summary.corpus.interesting.push_back(std::move(c.entry));
        summary.admission_edge_counts.push_back(summary.coverage.TotalHitEdges());
      }
      w.candidates.clear();
      if (!w.delta.empty_identity()) {
        SF_ASSIGN_OR_RETURN(summary.coverage, Merge(summary.coverage, w.delta));
      }
      summary.iterations += w.iterations;
      summary.compute_executions += w.iterations;
      summary.retired_instructions += w.retired;
      summary.budget_exhaustions += w.budget;
      summary.diff_checks += w.diff_checks;
      summary.diff_mismatches += w.diff_mismatches;
      summary.init_executions += config.amortize ? 0 : w.inits;
      summary.term_executions += config.amortize ? 0 : w.terms;
      w.iterations = w.retired = w.budget = w.diff_checks = w.diff_mismatches = 0;
      w.inits = w.terms = 0;
      if (!w.fatal.ok() && !summary.abort_reason) {
        summary.abort_reason = w.fatal.ToString();
      }
      if (w.hit_stop) {
        stop = true;
        reason = "first finding";
      }
      if (w.out_of_time && !stop) {
        stop = true;
        reason = "wall clock";
      }
    }
    if (summary.abort_reason) return finish("aborted");
  }

  if (config.amortize) {
    std::vector<StatusOr<PhaseOutcome>> terms(n_workers, PhaseOutcome{});
#pragma omp parallel for schedule(static)
    for (int64_t i = 0; i < static_cast<int64_t>(n_workers); ++i) {
      terms[i] = workers[i].runner->RunTerm(summary.iterations);
    }
    for (uint32_t i = 0; i < n_workers; ++i) {
      if (!terms[i].ok()) {
        summary.abort_reason = terms[i].status().ToString();
        return finish("aborted");
      }
      ++summary.term_executions;
      if (terms[i]->bug) summary.findings.Add(*terms[i]->bug);
    }
  }
  return finish(reason);
}

std::string FormatCrashArtifact(const HarnessManifest& manifest,
                                const CampaignSummary& summary,
                                const CorpusEntry& crash) {
  std::string out = "simt-forge crash v1\n";
  const std::string harness =
      manifest.path.empty() ? "-" : fs::absolute(manifest.path).lexically_normal().string();
  out += StrCat("harness ", harness, "\n");
  out += StrCat("program_digest ", manifest.program_digest(), "\n");
  out += StrCat("manifest_digest ", manifest.manifest_digest, "\n");
  out += StrCat("bug_class ", BugClassName(crash.bug->bug_class), "\n");
  out += StrCat("dedupe_key ", crash.bug->dedupe_key, "\n");
  out += StrCat("iteration ", crash.iteration, "\n");
  // A seed record followed by one step per mutation generation. A crash on
  // an unmutated seed is its own seed with an empty step.
  const TestCase* seed = &crash.tc;
  std::vector<const TestCase*> steps;
  if (!crash.tc.parent_id.empty()) {
    std::vector<const CorpusEntry*> chain =
        summary.corpus.Lineage(crash.tc.parent_id);
    if (!chain.empty()) {
      seed = &chain.front()->tc;
      for (size_t i = 1; i < chain.size(); ++i) steps.push_back(&chain[i]->tc);
    }
  }
  steps.push_back(&crash.tc);
  out += "[seed]\n";
  out += SerializeTestCase(*seed, manifest.args);
  for (const TestCase* tc : steps) {
    out += "[step]\n";
    out += SerializeTestCase(*tc, manifest.args);
  }
  return out;
}

Status WriteCampaignOutputs(const HarnessManifest& manifest,
                            const CampaignConfig& config,
                            const CampaignSummary& summary,
                            const std::string& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) return MakeError(ErrorCode::kIo, StrCat("cannot create ", dir));
  fs::remove_all(fs::path(dir) / "corpus", ec);
  fs::remove_all(fs::path(dir) / "crashes", ec);
  fs::remove(fs::path(dir) / "FAILED", ec);
  fs::create_directories(fs::path(dir) / "corpus", ec);
  fs::create_directories(fs::path(dir) / "crashes", ec);
  if (ec) return MakeError(ErrorCode::kIo, StrCat("cannot populate ", dir));

  auto write = [&](const fs::path& path, std::string_view text) -> Status {
    if (!WriteFile(path.string(), text)) {
      return MakeError(ErrorCode::kIo, StrCat("cannot write ", path.string()));
    }
    return OkStatus();
  };

  std::string index;
  for (const auto* list : {&summary.corpus.seeds, &summary.corpus.interesting}) {
    for (const CorpusEntry& e : *list) {
      SF_RETURN_IF_ERROR(write(fs::path(dir) / "corpus" / e.id,
                               SerializeTestCase(e.tc, manifest.args)));
      nlohmann::ordered_json j;
      j["id"] = e.id;
      j["kind"] = e.kind == CorpusEntry::Kind::kSeed ? "seed" : "interesting";
      j["iteration"] = e.iteration;
      j["new_edges"] = e.new_edges;
      j["worker"] = e.worker;
      index += j.dump() + "\n";
    }
  }
  SF_RETURN_IF_ERROR(write(fs::path(dir) / "corpus.rec", index));
  for (const CorpusEntry& crash : summary.corpus.crashes) {
    const std::string artifact = FormatCrashArtifact(manifest, summary, crash);
    SF_RETURN_IF_ERROR(
        write(fs::path(dir) / "crashes" / ContentHash(artifact), artifact));
  }
  SF_RETURN_IF_ERROR(
      write(fs::path(dir) / "findings.txt", FormatFindings(summary.findings)));
  SF_RETURN_IF_ERROR(write(fs::path(dir) / "coverage.txt",
                           RenderTable(summary.coverage_report)));
  SF_RETURN_IF_ERROR(write(fs::path(dir) / "coverage.rec",
                           RenderRecords(summary.coverage_report)));

  nlohmann::ordered_json s;
  s["format"] = "simt-forge summary v1";
  s["program_digest"] = manifest.program_digest();
  s["manifest_digest"] = manifest.manifest_digest;
  s["seed"] = config.seed;
  s["workers"] = config.workers;
  s["mode"] = config.amortize ? "amortized" : "reinit";
  s["iterations"] = summary.iterations;
  s["compute_executions"] = summary.compute_executions;
  s["init_executions"] = summary.init_executions;
  s["term_executions"] = summary.term_executions;
  s["retired_instructions"] = summary.retired_instructions;
  s["budget_exhaustions"] = summary.budget_exhaustions;
  s["findings"] = summary.findings.size();
  s["finding_occurrences"] = summary.findings.total();
  s["corpus_seeds"] = summary.corpus.seeds.size();
  s["corpus_interesting"] = summary.corpus.interesting.size();
  s["crashes"] = summary.corpus.crashes.size();
  s["hit_edges"] = summary.coverage.TotalHitEdges();
  s["geomean"] = summary.coverage_report.geomean
                     ? nlohmann::ordered_json(
                           summary.coverage_report.geomean->ToString())
                     : nlohmann::ordered_json(nullptr);
  s["diff_checks"] = summary.diff_checks;
  s["diff_mismatches"] = summary.diff_mismatches;
  s["stop_reason"] = summary.stop_reason;
  SF_RETURN_IF_ERROR(write(fs::path(dir) / "summary.rec", s.dump() + "\n"));

  nlohmann::ordered_json t;
  t["elapsed_seconds"] = summary.elapsed_seconds;
  t["exec_per_second"] = summary.exec_per_second;
  SF_RETURN_IF_ERROR(write(fs::path(dir) / "timing.rec", t.dump() + "\n"));

  if (summary.abort_reason) {
    SF_RETURN_IF_ERROR(
        write(fs::path(dir) / "FAILED", *summary.abort_reason + "\n"));
  }
  return OkStatus();
}

StatusOr<ReplayResult> Replay(const std::string& artifact_path,
                              std::ostream* trace) {
  std::optional<std::string> text = ReadFile(artifact_path);
  if (!text) {
    return MakeError(ErrorCode::kIo, StrCat("cannot read ", artifact_path));
  }
  std::map<std::string, std::string, std::less<>> header;
  std::vector<std::string> sections;
  bool in_header = true;
  for (std::string_view raw : Split(*text, '\n')) {
    std::string_view line = Trim(raw);
    if (line == "[seed]" || line == "[step]") {
      in_header = false;
      sections.emplace_back();
      continue;
    }
    if (in_header) {
      const size_t sp = line.find(' ');
      if (sp != std::string_view::npos) {
        header[std::string(line.substr(0, sp))] = std::string(line.substr(sp + 1));
      }
    } else {
      sections.back() += std::string(line) + "\n";
    }
  }
  auto field = [&](std::string_view key) -> StatusOr<std::string> {
    auto it = header.find(key);
    if (it == header.end()) {
      return MakeError(ErrorCode::kSyntaxError,
                       StrCat("crash artifact lacks ", key));
    }
    return it->second;
  };
  SF_ASSIGN_OR_RETURN(std::string harness_path, field("harness"));
  SF_ASSIGN_OR_RETURN(std::string program_digest, field("program_digest"));
  SF_ASSIGN_OR_RETURN(std::string manifest_digest, field("manifest_digest"));
  SF_ASSIGN_OR_RETURN(std::string dedupe_key, field("dedupe_key"));
  SF_ASSIGN_OR_RETURN(std::string iteration_text, field("iteration"));
  if (sections.size() < 2) {
    return MakeError(ErrorCode::kSyntaxError, "crash artifact lacks a lineage");
  }
  auto iteration = ParseUint(iteration_text);
  if (!iteration) return MakeError(ErrorCode::kSyntaxError, "bad iteration");

  SF_ASSIGN_OR_RETURN(HarnessManifest manifest, LoadHarness(harness_path));
  if (manifest.manifest_digest != manifest_digest) {
    return MakeError(ErrorCode::kDigestMismatch,
                     StrCat("harness digest ", manifest.manifest_digest,
                            " != recorded ", manifest_digest));
  }
  if (manifest.program_digest() != program_digest) {
    return MakeError(ErrorCode::kDigestMismatch,
                     StrCat("program digest ", manifest.program_digest(),
                            " != recorded ", program_digest));
  }

  SF_ASSIGN_OR_RETURN(TestCase seed, ParseTestCase(sections[0]));
  std::vector<TypedValue> args = seed.args;
  TestCase last;
  for (size_t i = 1; i < sections.size(); ++i) {
    SF_ASSIGN_OR_RETURN(last, ParseTestCase(sections[i]));
    SF_ASSIGN_OR_RETURN(args, ReplayTrace(args, manifest.args, last.trace));
    if (args != last.args) {
      return MakeError(ErrorCode::kNonReproducing,
                       StrCat("lineage step ", i,
                              " does not reproduce its recorded arguments"));
    }
  }

  SF_ASSIGN_OR_RETURN(HarnessRunner runner, HarnessRunner::Create(manifest));
  PhaseContext ctx;
  ctx.iteration = *iteration;
  ctx.trace = trace;
  SF_ASSIGN_OR_RETURN(PhaseOutcome outcome, runner.RunCompute(last, ctx));
  if (!outcome.bug) {
    return MakeError(ErrorCode::kNonReproducing,
                     "the recorded input runs clean");
  }
  if (outcome.bug->dedupe_key != dedupe_key) {
    return MakeError(ErrorCode::kNonReproducing,
                     StrCat("replay found ", BugClassName(outcome.bug->bug_class),
                            " with dedupe key ", outcome.bug->dedupe_key,
                            ", recorded ", dedupe_key));
  }
  ReplayResult result;
  result.report = *outcome.bug;
  result.outcome = std::move(outcome);
  result.recorded_dedupe_key = dedupe_key;
  return result;
}

}  // namespace simt_forge
