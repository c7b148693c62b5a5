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
#include <iostream>
#include <optional>
#include <string_view>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ostream.h>

#include "simt_forge/bench_corpus.h"
#include "simt_forge/coverage.h"
#include "simt_forge/fuzz_campaign.h"
#include "simt_forge/harness.h"
#include "simt_forge/kernel_ir.h"
#include "simt_forge/strings.h"

namespace simt_forge {
namespace {

namespace fs = std::filesystem;

struct RunFlags {
  std::string harness;
  std::string out;
  uint64_t iters = 1000;
  uint64_t seed = 0;
  uint32_t workers = 1;
  std::string stop_on = "iters";
  bool diff_check = false;
};

bool TraceEnabled() {
  const char* v = std::getenv("SIMT_FORGE_TRACE");
  return v != nullptr && std::string_view(v) == "1";
}

int CmdRun(const RunFlags& f, std::ostream& out, std::ostream& err) {
  CampaignConfig config;
  config.max_iterations = f.iters;
  config.seed = f.seed;
  config.workers = f.workers;
  config.output_dir = f.out;
  if (TraceEnabled() && f.workers == 1) config.trace = &std::cerr;
  if (f.stop_on == "first-finding") {
    config.stop_on_first_finding = true;
  } else if (f.stop_on.starts_with("wall:")) {
    std::optional<uint64_t> secs = ParseUint(f.stop_on.substr(5));
    if (!secs || *secs == 0) {
      fmt::print(err, "error: bad --stop-on value '{}'\n", f.stop_on);
      return kExitUsage;
    }
    config.wall_clock_seconds = static_cast<double>(*secs);
    // The wall clock is the stopping rule; lift the default iteration cap.
    config.max_iterations = UINT64_MAX;
  } else if (f.stop_on != "iters") {
    fmt::print(err, "error: bad --stop-on value '{}'\n", f.stop_on);
    return kExitUsage;
  }

  StatusOr<HarnessManifest> manifest = LoadHarness(f.harness);
  if (!manifest.ok()) {
    fmt::print(err, "error: {}\n", manifest.status().ToString());
    return kExitUsage;
  }
  if (f.diff_check) {
    StatusOr<DiffChecker> checker = MakeDiffChecker(*manifest);
    if (!checker.ok()) {
      fmt::print(err, "error: {}\n", checker.status().ToString());
      return kExitUsage;
    }
    config.diff_check = true;
    config.diff_checker = std::move(*checker);
  }
  if (Status st = config.Check(); !st.ok()) {
    fmt::print(err, "error: {}\n", st.ToString());
    return kExitUsage;
  }

  StatusOr<CampaignSummary> summary = FuzzLoop(*manifest, config);
  if (!summary.ok()) {
    fmt::print(err, "fatal: {}\n", summary.status().ToString());
    return kExitFatal;
  }
  if (Status st = WriteCampaignOutputs(*manifest, config, *summary, f.out);
      !st.ok()) {
    fmt::print(err, "fatal: {}\n", st.ToString());
    return kExitFatal;
  }
  const CampaignSummary& s = *summary;
  fmt::print(out, "iterations={}\n", s.iterations);
  fmt::print(out, "stop_reason={}\n", s.stop_reason);
  fmt::print(out, "corpus={}\n", s.corpus.seeds.size() + s.corpus.interesting.size());
  fmt::print(out, "findings={}\n", s.findings.size());
  fmt::print(out, "hit_edges={}\n", s.coverage.TotalHitEdges());
  if (config.diff_check) {
    fmt::print(out, "diff_mismatches={}\n", s.diff_mismatches);
  }
  fmt::print(out, "exec_per_second={:.1f}\n", s.exec_per_second);
  for (const FindingLog::Entry& e : s.findings.Findings()) {
    fmt::print(out, "finding {} {} {} count={}\n",
               BugClassName(e.first.bug_class), e.first.kernel,
               e.first.dedupe_key, e.count);
  }
  if (s.abort_reason) {
    fmt::print(err, "fatal: {}\n", *s.abort_reason);
    return kExitFatal;
  }
  return s.findings.empty() && s.diff_mismatches == 0 ? kExitOk
                                                       : kExitFindings;
}

int CmdCov(const std::string& dir, const std::string& format,
           std::ostream& out, std::ostream& err) {
  if (!fs::is_directory(dir)) {
    fmt::print(err, "error: no campaign directory '{}'\n", dir);
    return kExitUsage;
  }
  std::optional<std::string> text =
      ReadFile((fs::path(dir) / "coverage.rec").string());
  if (!text) {
    fmt::print(err, "error: '{}' has no coverage.rec\n", dir);
    return kExitUsage;
  }
  StatusOr<CoverageReport> report = ParseRecords(*text);
  if (!report.ok()) {
    fmt::print(err, "error: {}\n", report.status().ToString());
    return kExitUsage;
  }
  out << (format == "rec" ? RenderRecords(*report) : RenderTable(*report));
  return kExitOk;
}

int CmdRepro(const std::string& artifact, std::ostream& out,
             std::ostream& err) {
  StatusOr<ReplayResult> result = Replay(artifact, TraceEnabled() ? &std::cerr : nullptr);
  if (!result.ok()) {
    fmt::print(err, "error: {}\n", result.status().ToString());
    return result.status().code() == ErrorCode::kNonReproducing ? kExitFatal
                                                                 : kExitUsage;
  }
  out << FormatBugReport(result->report);
  return kExitFindings;
}

int CmdValidate(const std::string& program, const std::string& harness,
                std::ostream& out, std::ostream& err) {
  std::optional<std::string> text = ReadFile(program);
  if (!text) {
    fmt::print(err, "{}: cannot read\n", program);
    return kExitUsage;
  }
  StatusOr<Program> parsed = ParseProgram(*text);
  if (!parsed.ok()) {
    fmt::print(err, "{}: {}\n", program, parsed.status().message());
    return kExitUsage;
  }
  std::vector<Diagnostic> diags = Validate(*parsed);
  for (const Diagnostic& d : diags) {
    fmt::print(err, "{}: {}\n", program, FormatDiagnostic(d));
  }
  if (!diags.empty()) return kExitUsage;
  if (!harness.empty()) {
    StatusOr<HarnessManifest> m = LoadHarness(harness);
    if (!m.ok()) {
      fmt::print(err, "{}: {}\n", harness, m.status().ToString());
      return kExitUsage;
    }
  }
  fmt::print(out, "ok: {} kernel(s)\n", parsed->kernels.size());
  return kExitOk;
}

int CmdBench(const std::vector<std::string>& words, std::ostream& out,
             std::ostream& err) {
  if (words.size() == 1 && words[0] == "list") {
    for (const BenchmarkEntry& e : ListBenchmarks()) {
      fmt::print(out, "{}\n", e.name);
    }
    return kExitOk;
  }
  if (words.size() == 3 && words[0] == "export") {
    if (Status st = ExportBenchmark(words[1], words[2]); !st.ok()) {
      fmt::print(err, "error: {}\n", st.ToString());
      return kExitUsage;
    }
    fmt::print(out, "exported {} to {}\n", words[1], words[2]);
    return kExitOk;
  }
  fmt::print(err, "usage: bench list | bench export NAME DIR\n");
  return kExitUsage;
}

}  // namespace

int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err) {
  CLI::App app{"Coverage-guided fuzzer for SIMT kernels", "simt-forge"};
  app.require_subcommand(1);

  RunFlags run;
  CLI::App* run_cmd = app.add_subcommand("run", "Run a fuzzing campaign");
  run_cmd->add_option("--harness", run.harness, "Harness manifest")
      ->required();
  run_cmd->add_option("--out", run.out, "Output directory")->required();
  run_cmd->add_option("--iters", run.iters, "Iteration limit");
  run_cmd->add_option("--seed", run.seed, "Master seed");
  run_cmd->add_option("--workers", run.workers, "Worker count")
      ->check(CLI::Range(1u, 1024u));
  run_cmd->add_option("--stop-on", run.stop_on,
                      "first-finding, iters or wall:SECS");
  run_cmd->add_flag("--diff-check", run.diff_check,
                    "Compare outputs with the scalar reference");

  std::string cov_dir, cov_format = "text";
  CLI::App* cov_cmd = app.add_subcommand("cov", "Render a coverage report");
  cov_cmd->add_option("--dir", cov_dir, "Campaign directory")->required();
  cov_cmd->add_option("--format", cov_format)
      ->check(CLI::IsMember({"text", "rec"}));

  std::string artifact;
  CLI::App* repro_cmd = app.add_subcommand("repro", "Replay a crash artifact");
  repro_cmd->add_option("--artifact", artifact)->required();

  std::string program, harness;
  CLI::App* validate_cmd =
      app.add_subcommand("validate", "Check a program and manifest");
  validate_cmd->add_option("--program", program)->required();
  validate_cmd->add_option("--harness", harness);

  std::vector<std::string> bench_words;
  CLI::App* bench_cmd = app.add_subcommand("bench", "Bundled benchmarks");
  bench_cmd->add_option("words", bench_words, "list | export NAME DIR")
      ->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    fmt::print(err, "error: {}\n", e.what());
    for (CLI::App* sub : app.get_subcommands()) err << sub->help();
    return kExitUsage;
  }

  if (*run_cmd) return CmdRun(run, out, err);
  if (*cov_cmd) return CmdCov(cov_dir, cov_format, out, err);
  if (*repro_cmd) return CmdRepro(artifact, out, err);
  if (*validate_cmd) return CmdValidate(program, harness, out, err);
  return CmdBench(bench_words, out, err);
}

}  // namespace simt_forge
