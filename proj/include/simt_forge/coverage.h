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

// Edge-count coverage over the static CFGs of a program, and the per-kernel
// block-coverage report with its geometric-mean summary.

#ifndef SIMT_FORGE_COVERAGE_H_
#define SIMT_FORGE_COVERAGE_H_

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "simt_forge/error.h"
#include "simt_forge/kernel_ir.h"

namespace simt_forge {

struct KernelEdge {
  uint32_t kernel = 0;
  Edge edge;
  friend bool operator==(const KernelEdge&, const KernelEdge&) = default;
  friend auto operator<=>(const KernelEdge&, const KernelEdge&) = default;
};

class CoverageMap {
 public:
  // The empty map: the identity of Merge for any program.
  CoverageMap() = default;
  explicit CoverageMap(const Program& program);

  bool empty_identity() const { return layout_ == nullptr; }
  const std::string& digest() const;
  size_t kernel_count() const;
  const std::string& kernel_name(uint32_t kernel) const;
  uint32_t total_bbs(uint32_t kernel) const;
  uint32_t total_edges(uint32_t kernel) const;

  void RecordEntry(uint32_t kernel);
  // PhantomEdge when the edge is not in the kernel's static edge set.
  Status RecordEdge(uint32_t kernel, uint32_t src_bb, uint32_t dst_bb);

  uint64_t EdgeCount(uint32_t kernel, Edge edge) const;
  uint64_t entries(uint32_t kernel) const;
  uint32_t HitEdges(uint32_t kernel) const;
  std::vector<uint32_t> HitBlocks(uint32_t kernel) const;  // ascending
  std::vector<KernelEdge> HitEdgeList() const;
  size_t TotalHitEdges() const;

  friend StatusOr<CoverageMap> Merge(const CoverageMap& a,
                                     const CoverageMap& b);
  friend StatusOr<std::vector<KernelEdge>> NewEdgesSince(
      const CoverageMap& map, const CoverageMap& baseline);
  friend bool operator==(const CoverageMap& a, const CoverageMap& b);

 private:
  struct KernelLayout {
    std::string name;
    uint32_t total_bbs = 0;
    std::vector<Edge> edges;
    std::unordered_map<uint64_t, uint32_t> slot;  // (src << 32 | dst) -> idx
  };
  struct Layout {
    std::string digest;
    std::vector<KernelLayout> kernels;
  };
  struct Counters {
    uint64_t entries = 0;
    std::vector<uint64_t> edges;
    friend bool operator==(const Counters&, const Counters&) = default;
  };

  std::shared_ptr<const Layout> layout_;
  std::vector<Counters> counters_;
};

StatusOr<CoverageMap> Merge(const CoverageMap& a, const CoverageMap& b);
// Edges with a nonzero count in `map` and zero in `baseline`.
StatusOr<std::vector<KernelEdge>> NewEdgesSince(const CoverageMap& map,
                                                const CoverageMap& baseline);

// A percentage held as exact hundredths after half-up rounding.
struct Percent {
  int64_t hundredths = 0;
  double exact = 0.0;  // before rounding

  double value() const { return static_cast<double>(hundredths) / 100.0; }
  std::string ToString() const;  // "64.29"
  friend bool operator==(const Percent& a, const Percent& b) {
    return a.hundredths == b.hundredths;
  }
};

StatusOr<Percent> CoveragePercent(uint64_t hit, uint64_t total);
// exp(mean(ln p)) rounded half-up to two decimals.
StatusOr<Percent> GeometricMean(std::span<const double> percents);

struct CoverageRow {
  std::string kernel;
  uint64_t total_bbs = 0;
  uint64_t hit_bbs = 0;
  Percent bb_cov;
  uint64_t hit_edges = 0;
  std::optional<uint64_t> total_edges;
};

struct CoverageReport {
  std::vector<CoverageRow> rows;  // program order
  std::optional<Percent> geomean;
  std::vector<std::string> excluded;  // zero-coverage kernels
};

StatusOr<CoverageRow> MakeRow(std::string kernel, uint64_t hit_bbs,
                              uint64_t total_bbs, uint64_t hit_edges,
                              std::optional<uint64_t> total_edges);
// Fills in the geomean and the exclusion list from the rows.
StatusOr<CoverageReport> Summarize(std::vector<CoverageRow> rows);
StatusOr<CoverageReport> BuildReport(const CoverageMap& map);

// Aligned plain-text table with a GeoMean row and footnotes.
std::string RenderTable(const CoverageReport& report);
// One JSON object per line: kernel rows, then a summary record.
std::string RenderRecords(const CoverageReport& report);
StatusOr<CoverageReport> ParseRecords(std::string_view text);

}  // namespace simt_forge

#endif  // SIMT_FORGE_COVERAGE_H_
