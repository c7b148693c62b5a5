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

#include "simt_forge/coverage.h"

#include <algorithm>
#include <cmath>
#include <limits>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "simt_forge/strings.h"

namespace simt_forge {

namespace {

uint64_t SlotKey(uint32_t src, uint32_t dst) {
  return (static_cast<uint64_t>(src) << 32) | dst;
}

uint64_t SaturatingAdd(uint64_t a, uint64_t b) {
  const uint64_t sum = a + b;
  return sum < a ? std::numeric_limits<uint64_t>::max() : sum;
}

const std::string& EmptyString() {
  static const std::string* empty = new std::string();
  return *empty;
}

}  // namespace

CoverageMap::CoverageMap(const Program& program) {
  auto layout = std::make_shared<Layout>();
  layout->digest = program.source_digest;
  for (const KernelDef& k : program.kernels) {
    KernelLayout kl;
    kl.name = k.name;
    kl.total_bbs = static_cast<uint32_t>(k.blocks.size());
    kl.edges = k.static_edges;
    for (uint32_t i = 0; i < kl.edges.size(); ++i) {
      kl.slot.emplace(SlotKey(kl.edges[i].src, kl.edges[i].dst), i);
    }
    counters_.push_back(Counters{0, std::vector<uint64_t>(kl.edges.size())});
    layout->kernels.push_back(std::move(kl));
  }
  layout_ = std::move(layout);
}

const std::string& CoverageMap::digest() const {
  return layout_ ? layout_->digest : EmptyString();
}

size_t CoverageMap::kernel_count() const {
  return layout_ ? layout_->kernels.size() : 0;
}

const std::string& CoverageMap::kernel_name(uint32_t kernel) const {
  return layout_->kernels[kernel].name;
}

uint32_t CoverageMap::total_bbs(uint32_t kernel) const {
  return layout_->kernels[kernel].total_bbs;
}

uint32_t CoverageMap::total_edges(uint32_t kernel) const {
  return static_cast<uint32_t>(layout_->kernels[kernel].edges.size());
}

void CoverageMap::RecordEntry(uint32_t kernel) {
  counters_[kernel].entries = SaturatingAdd(counters_[kernel].entries, 1);
}

Status CoverageMap::RecordEdge(uint32_t kernel, uint32_t src_bb,
                               uint32_t dst_bb) {
  if (layout_ == nullptr || kernel >= layout_->kernels.size()) {
    return MakeError(ErrorCode::kPhantomEdge,
                     StrCat("edge for unknown kernel ", kernel));
  }
  const KernelLayout& kl = layout_->kernels[kernel];
  auto it = kl.slot.find(SlotKey(src_bb, dst_bb));
  if (it == kl.slot.end()) {
    return MakeError(ErrorCode::kPhantomEdge,
                     StrCat(kl.name, ": edge (", src_bb, ",", dst_bb,
                            ") is not in the static CFG"));
  }
  uint64_t& c = counters_[kernel].edges[it->second];
  c = SaturatingAdd(c, 1);
  return OkStatus();
}

uint64_t CoverageMap::EdgeCount(uint32_t kernel, Edge edge) const {
  if (layout_ == nullptr) return 0;
  const KernelLayout& kl = layout_->kernels[kernel];
  auto it = kl.slot.find(SlotKey(edge.src, edge.dst));
  return it == kl.slot.end() ? 0 : counters_[kernel].edges[it->second];
}

uint64_t CoverageMap::entries(uint32_t kernel) const {
  return layout_ ? counters_[kernel].entries : 0;
}

uint32_t CoverageMap::HitEdges(uint32_t kernel) const {
  if (layout_ == nullptr) return 0;
  const auto& e = counters_[kernel].edges;
  return static_cast<uint32_t>(
      std::count_if(e.begin(), e.end(), [](uint64_t c) { return c > 0; }));
}

std::vector<uint32_t> CoverageMap::HitBlocks(uint32_t kernel) const {
  std::vector<uint32_t> out;
  if (layout_ == nullptr) return out;
  const KernelLayout& kl = layout_->kernels[kernel];
  std::vector<bool> hit(kl.total_bbs, false);
  if (counters_[kernel].entries > 0 && kl.total_bbs > 0) hit[0] = true;
  for (size_t i = 0; i < kl.edges.size(); ++i) {
    if (counters_[kernel].edges[i] == 0) continue;
    hit[kl.edges[i].src] = true;
    hit[kl.edges[i].dst] = true;
  }
  for (uint32_t b = 0; b < kl.total_bbs; ++b) {
    if (hit[b]) out.push_back(b);
  }
  return out;
}

std::vector<KernelEdge> CoverageMap::HitEdgeList() const {
  std::vector<KernelEdge> out;
  for (uint32_t k = 0; k < kernel_count(); ++k) {
    const KernelLayout& kl = layout_->kernels[k];
    for (size_t i = 0; i < kl.edges.size(); ++i) {
      if (counters_[k].edges[i] > 0) out.push_back(KernelEdge{k, kl.edges[i]});
    }
  }
  return out;
}

size_t CoverageMap::TotalHitEdges() const {
  size_t n = 0;
  for (uint32_t k = 0; k < kernel_count(); ++k) n += HitEdges(k);
  return n;
}

bool operator==(const CoverageMap& a, const CoverageMap& b) {
  auto all_zero = [](const CoverageMap& m) {
    for (const auto& c : m.counters_) {
      if (c.entries != 0) return false;
      for (uint64_t e : c.edges) {
        if (e != 0) return false;
      }
    }
    return true;
  };
  if (a.empty_identity() || b.empty_identity()) {
    return all_zero(a) && all_zero(b);
  }
  return a.digest() == b.digest() && a.counters_ == b.counters_;
}

StatusOr<CoverageMap> Merge(const CoverageMap& a, const CoverageMap& b) {
  if (a.empty_identity()) return b;
  if (b.empty_identity()) return a;
  if (a.digest() != b.digest()) {
    return MakeError(ErrorCode::kDigestMismatch,
                     StrCat("cannot merge coverage of programs ", a.digest(),
                            " and ", b.digest()));
  }
  CoverageMap out = a;
  for (size_t k = 0; k < out.counters_.size(); ++k) {
    auto& dst = out.counters_[k];
    const auto& src = b.counters_[k];
    dst.entries = SaturatingAdd(dst.entries, src.entries);
    for (size_t i = 0; i < dst.edges.size(); ++i) {
      dst.edges[i] = SaturatingAdd(dst.edges[i], src.edges[i]);
    }
  }
  return out;
}

StatusOr<std::vector<KernelEdge>> NewEdgesSince(const CoverageMap& map,
                                                const CoverageMap& baseline) {
  if (baseline.empty_identity()) return map.HitEdgeList();
  if (map.empty_identity()) return std::vector<KernelEdge>{};
  if (map.digest() != baseline.digest()) {
    return MakeError(ErrorCode::kDigestMismatch,
                     StrCat("coverage digests differ: ", map.digest(), " vs ",
                            baseline.digest()));
  }
  std::vector<KernelEdge> out;
  for (uint32_t k = 0; k < map.kernel_count(); ++k) {
    const auto& edges = map.layout_->kernels[k].edges;
    for (size_t i = 0; i < edges.size(); ++i) {
      if (map.counters_[k].edges[i] > 0 &&
          baseline.counters_[k].edges[i] == 0) {
        out.push_back(KernelEdge{k, edges[i]});
      }
    }
  }
  return out;
}

std::string Percent::ToString() const {
  const int64_t h = hundredths < 0 ? -hundredths : hundredths;
  return fmt::format("{}{}.{:02d}", hundredths < 0 ? "-" : "", h / 100,
                     h % 100);
}

StatusOr<Percent> CoveragePercent(uint64_t hit, uint64_t total) {
  if (total == 0) {
    return MakeError(ErrorCode::kZeroTotal, "coverage total must be >= 1");
  }
  // Exact half-up rounding of 10000 * hit / total in integer arithmetic.
  const unsigned __int128 num = static_cast<unsigned __int128>(hit) * 20000 + total;
  const unsigned __int128 den = static_cast<unsigned __int128>(total) * 2;
  Percent p;
  p.hundredths = static_cast<int64_t>(num / den);
  p.exact = 100.0 * static_cast<double>(hit) / static_cast<double>(total);
  return p;
}

StatusOr<Percent> GeometricMean(std::span<const double> percents) {
  if (percents.empty()) {
    return MakeError(ErrorCode::kEmptyList, "geometric mean of no values");
  }
  double sum = 0.0;
  for (double p : percents) {
    if (!(p > 0.0)) {
      return MakeError(ErrorCode::kNonPositiveEntry,
                       StrCat("geometric mean entry ", p, " is not positive"));
    }
    sum += std::log(p);
  }
  Percent out;
  out.exact = std::exp(sum / static_cast<double>(percents.size()));
  out.hundredths = static_cast<int64_t>(std::floor(out.exact * 100.0 + 0.5));
  return out;
}

StatusOr<CoverageRow> MakeRow(std::string kernel, uint64_t hit_bbs,
                              uint64_t total_bbs, uint64_t hit_edges,
                              std::optional<uint64_t> total_edges) {
  SF_ASSIGN_OR_RETURN(Percent pct, CoveragePercent(hit_bbs, total_bbs));
  return CoverageRow{std::move(kernel), total_bbs, hit_bbs, pct, hit_edges,
                     total_edges};
}

StatusOr<CoverageReport> Summarize(std::vector<CoverageRow> rows) {
  CoverageReport report;
  std::vector<double> pcts;
  for (const CoverageRow& row : rows) {
    if (row.bb_cov.hundredths == 0) {
      report.excluded.push_back(row.kernel);
    } else {
      pcts.push_back(row.bb_cov.value());
    }
  }
  if (!pcts.empty()) {
    SF_ASSIGN_OR_RETURN(Percent g, GeometricMean(pcts));
    report.geomean = g;
  }
  report.rows = std::move(rows);
  return report;
}

StatusOr<CoverageReport> BuildReport(const CoverageMap& map) {
  std::vector<CoverageRow> rows;
  for (uint32_t k = 0; k < map.kernel_count(); ++k) {
    SF_ASSIGN_OR_RETURN(
        CoverageRow row,
        MakeRow(map.kernel_name(k), map.HitBlocks(k).size(), map.total_bbs(k),
                map.HitEdges(k), map.total_edges(k)));
    rows.push_back(std::move(row));
  }
  return Summarize(std::move(rows));
}

std::string RenderTable(const CoverageReport& report) {
  const std::vector<std::string> header = {"Kernel",      "Total BBs",
                                           "Hit BBs",     "BB Cov. (%)",
                                           "Hit Edges",   "Total Edges*"};
  std::vector<std::vector<std::string>> cells;
  for (const CoverageRow& row : report.rows) {
    cells.push_back({row.kernel, std::to_string(row.total_bbs),
                     std::to_string(row.hit_bbs), row.bb_cov.ToString(),
                     std::to_string(row.hit_edges),
                     row.total_edges ? std::to_string(*row.total_edges) : "-"});
  }
  if (report.geomean) {
    cells.push_back({"GeoMean", "", "", report.geomean->ToString(), "", ""});
  }
  std::vector<size_t> width;
  for (const auto& h : header) width.push_back(h.size());
  for (const auto& line : cells) {
    for (size_t c = 0; c < line.size(); ++c) {
      width[c] = std::max(width[c], line[c].size());
    }
  }
  auto render = [&](const std::vector<std::string>& line) {
    std::string out = fmt::format("{:<{}}", line[0], width[0]);
    for (size_t c = 1; c < line.size(); ++c) {
      out += fmt::format("  {:>{}}", line[c], width[c]);
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::string out = render(header);
  size_t rule = width[0];
  for (size_t c = 1; c < width.size(); ++c) rule += 2 + width[c];
  out += std::string(rule, '-') + "\n";
  for (const auto& line : cells) out += render(line);
  out += "\n* Total Edges counts static CFG edges; it extends the standard "
         "columns.\n";
  if (!report.geomean) {
    out += "GeoMean omitted: no kernel has nonzero block coverage.\n";
  }
  if (!report.excluded.empty() && report.geomean) {
    out += StrCat("GeoMean excludes zero-coverage kernels: ",
                  fmt::format("{}", fmt::join(report.excluded, ", ")), "\n");
  }
  return out;
}

std::string RenderRecords(const CoverageReport& report) {
  std::string out;
  for (const CoverageRow& row : report.rows) {
    nlohmann::ordered_json j;
    j["kernel"] = row.kernel;
    j["total_bbs"] = row.total_bbs;
    j["hit_bbs"] = row.hit_bbs;
    j["bb_cov_pct"] = row.bb_cov.ToString();
    j["hit_edges"] = row.hit_edges;
    if (row.total_edges) j["total_edges"] = *row.total_edges;
    out += j.dump() + "\n";
  }
  nlohmann::ordered_json summary;
  summary["summary"] = true;
  summary["geomean"] = report.geomean ? nlohmann::ordered_json(report.geomean->ToString())
                                      : nlohmann::ordered_json(nullptr);
  summary["excluded"] = report.excluded;
  out += summary.dump() + "\n";
  return out;
}

StatusOr<CoverageReport> ParseRecords(std::string_view text) {
  std::vector<CoverageRow> rows;
  int line_no = 0;
  for (std::string_view raw : Split(text, '\n')) {
    ++line_no;
    std::string_view line = Trim(raw);
    if (line.empty()) continue;
    auto bad = [&](std::string_view why) {
      return MakeError(ErrorCode::kSyntaxError,
                       StrCat("coverage.rec line ", line_no, ": ", why));
    };
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) return bad("not a JSON object");
    if (j.contains("summary")) continue;  // recomputed from the rows
    if (!j.contains("kernel") || !j["kernel"].is_string() ||
        !j.contains("total_bbs") || !j["total_bbs"].is_number_unsigned() ||
        !j.contains("hit_bbs") || !j["hit_bbs"].is_number_unsigned() ||
        !j.contains("hit_edges") || !j["hit_edges"].is_number_unsigned()) {
      return bad("missing or mistyped field");
    }
    std::optional<uint64_t> total_edges;
    if (j.contains("total_edges")) {
      if (!j["total_edges"].is_number_unsigned()) return bad("total_edges");
      total_edges = j["total_edges"].get<uint64_t>();
    }
    const uint64_t hit = j["hit_bbs"].get<uint64_t>();
    const uint64_t total = j["total_bbs"].get<uint64_t>();
    if (hit > total) return bad("hit_bbs exceeds total_bbs");
    StatusOr<CoverageRow> row =
        MakeRow(j["kernel"].get<std::string>(), hit, total,
                j["hit_edges"].get<uint64_t>(), total_edges);
    if (!row.ok()) return bad(row.status().message());
    rows.push_back(std::move(*row));
  }
  return Summarize(std::move(rows));
}

}  // namespace simt_forge
