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

// Memory-safety checks over the shadow map, the allocation registry and
// pointer provenance tags, plus finding reports and their deduplication.
//
// CheckAccess classifies an access with a fixed order, first hit wins:
//   1. SPACE_MISMATCH     the address (or the allocation it resolves to)
//                         lives in a space other than the declared one
//   2. TEMPORAL_UAF       the resolved or the provenance allocation is FREED
//   3. SPATIAL_OOB        resolved, but shadow marks some byte unaddressable
//   4. PROVENANCE_ESCAPE  tagged, and the range leaves the tagged payload
//   5. WILD_ACCESS        nothing resolves the address

#ifndef SIMT_FORGE_SANITIZER_H_
#define SIMT_FORGE_SANITIZER_H_

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "simt_forge/device_memory.h"
#include "simt_forge/error.h"
#include "simt_forge/kernel_ir.h"

namespace simt_forge {

enum class BugClass : uint8_t {
  kSpatialOob,
  kTemporalUaf,
  kSpaceMismatch,
  kProvenanceEscape,
  kWildAccess,
  kInvalidFree,
};

std::string_view BugClassName(BugClass bug_class);
std::optional<BugClass> ParseBugClass(std::string_view name);

struct AccessEvent {
  uint32_t instruction = 0;
  MemSpace declared_space = MemSpace::kGlobal;
  uint64_t address = 0;
  uint32_t width = 0;
  AllocId provenance = kNoAlloc;
};

struct Violation {
  BugClass bug_class = BugClass::kWildAccess;
  // The allocation the report is anchored to: the resolved one, else the
  // provenance one.
  std::optional<AllocationRecord> allocation;
};

std::optional<Violation> CheckAccess(const DeviceMemoryImage& image,
                                     const AccessEvent& event);

// The two detection paths, exposed separately so they can be compared.
bool ShadowRejects(const DeviceMemoryImage& image, uint64_t address,
                   uint32_t width);
bool ProvenanceRejects(const DeviceMemoryImage& image, AllocId tag,
                       uint64_t address, uint32_t width);

struct AllocationInfo {
  uint64_t base = 0;
  uint64_t size = 0;
  AllocState state = AllocState::kLive;
  MemSpace space = MemSpace::kGlobal;
  std::string site;
  friend bool operator==(const AllocationInfo&, const AllocationInfo&) = default;
};

struct BugReport {
  BugClass bug_class = BugClass::kWildAccess;
  // Kernel name, or "host.<PHASE>" for host-side operations.
  std::string kernel;
  uint32_t instruction = 0;
  uint32_t ctaid = 0;
  uint32_t tid = 0;
  uint64_t address = 0;
  uint32_t width = 0;
  MemSpace declared_space = MemSpace::kGlobal;
  std::optional<AllocId> alloc_id;
  std::optional<AllocationInfo> allocation;
  uint64_t iteration = 0;
  std::string dedupe_key;

  friend bool operator==(const BugReport&, const BugReport&) = default;
};

std::string DedupeKey(BugClass bug_class, std::string_view kernel,
                      uint32_t instruction, std::string_view alloc_site);

struct ReportSite {
  std::string kernel;
  uint32_t instruction = 0;
  uint32_t ctaid = 0;
  uint32_t tid = 0;
  uint64_t iteration = 0;
};

BugReport MakeReport(const Violation& violation, const AccessEvent& event,
                     const ReportSite& site);

// `key: value` lines in a fixed order. `count`, when given, is appended.
std::string FormatBugReport(const BugReport& report,
                            std::optional<uint64_t> count = std::nullopt);
StatusOr<BugReport> ParseBugReport(std::string_view text);

// Deduplicated findings, one representative per dedupe key.
class FindingLog {
 public:
  struct Entry {
    BugReport first;
    uint64_t count = 0;
  };

  // Returns true when the key was new.
  bool Add(const BugReport& report);
  void Merge(const FindingLog& other);
  // Ordered by the first-seen iteration, ties by insertion order.
  std::vector<Entry> Findings() const;
  bool Contains(const std::string& dedupe_key) const {
    return index_.contains(dedupe_key);
  }
  bool empty() const { return entries_.empty(); }
  size_t size() const { return entries_.size(); }
  uint64_t total() const;

 private:
  std::vector<Entry> entries_;
  std::map<std::string, size_t> index_;
};

std::string FormatFindings(const FindingLog& log);

// Host-side transfers and frees, checked through the same path as kernel
// accesses. The access is performed only when no finding is returned.
struct HostOp {
  std::string phase;  // INIT, COMPUTE or TERM
  uint32_t index = 0;
  uint64_t iteration = 0;
};

std::optional<BugReport> CheckedCopyIn(DeviceMemoryImage& image,
                                       const HostOp& op, uint64_t address,
                                       MemSpace space, AllocId provenance,
                                       std::span<const uint8_t> bytes);
std::optional<BugReport> CheckedCopyOut(const DeviceMemoryImage& image,
                                        const HostOp& op, uint64_t address,
                                        MemSpace space, AllocId provenance,
                                        uint64_t length,
                                        std::vector<uint8_t>* out);
// InvalidFree from the image becomes an INVALID_FREE report.
std::optional<BugReport> CheckedFree(DeviceMemoryImage& image,
                                     const HostOp& op, uint64_t address);

}  // namespace simt_forge

#endif  // SIMT_FORGE_SANITIZER_H_
