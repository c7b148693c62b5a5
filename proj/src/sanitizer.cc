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

#include "simt_forge/sanitizer.h"

#include <algorithm>

#include "simt_forge/hash.h"
#include "simt_forge/strings.h"

namespace simt_forge {

namespace {
constexpr std::string_view kBugClassNames[] = {
    "SPATIAL_OOB",       "TEMPORAL_UAF", "SPACE_MISMATCH",
    "PROVENANCE_ESCAPE", "WILD_ACCESS",  "INVALID_FREE"};
}  // namespace

std::string_view BugClassName(BugClass bug_class) {
  return kBugClassNames[static_cast<int>(bug_class)];
}

std::optional<BugClass> ParseBugClass(std::string_view name) {
  for (int i = 0; i < 6; ++i) {
    if (kBugClassNames[i] == name) return static_cast<BugClass>(i);
  }
  return std::nullopt;
}

bool ShadowRejects(const DeviceMemoryImage& image, uint64_t address,
                   uint32_t width) {
  return !image.RangeAddressable(address, width);
}

bool ProvenanceRejects(const DeviceMemoryImage& image, AllocId tag,
                       uint64_t address, uint32_t width) {
  const AllocationRecord* rec = image.Find(tag);
  if (rec == nullptr) return false;
  return address < rec->base || address > rec->payload_end() ||
         rec->payload_end() - address < width;
}

std::optional<Violation> CheckAccess(const DeviceMemoryImage& image,
                                     const AccessEvent& event) {
  const AllocationRecord* resolved = image.Resolve(event.address);
  const AllocationRecord* tagged = image.Find(event.provenance);
  auto violation = [&](BugClass c) {
    const AllocationRecord* anchor = resolved != nullptr ? resolved : tagged;
    Violation v{c, std::nullopt};
    if (anchor != nullptr) v.allocation = *anchor;
    return v;
  };
  const auto arena = image.SpaceOf(event.address);
  if ((resolved != nullptr && resolved->space != event.declared_space) ||
      (arena.has_value() && *arena != event.declared_space)) {
    return violation(BugClass::kSpaceMismatch);
  }
  if (resolved != nullptr && resolved->state == AllocState::kFreed) {
    return violation(BugClass::kTemporalUaf);
  }
  if (tagged != nullptr && tagged->state == AllocState::kFreed) {
    Violation v{BugClass::kTemporalUaf, *tagged};
    return v;
  }
  if (resolved != nullptr &&
      ShadowRejects(image, event.address, event.width)) {
    return violation(BugClass::kSpatialOob);
  }
  if (tagged != nullptr &&
      ProvenanceRejects(image, event.provenance, event.address, event.width)) {
    Violation v{BugClass::kProvenanceEscape, *tagged};
    return v;
  }
  if (resolved == nullptr) return violation(BugClass::kWildAccess);
  return std::nullopt;
}

std::string DedupeKey(BugClass bug_class, std::string_view kernel,
                      uint32_t instruction, std::string_view alloc_site) {
  return ContentHash(StrCat(BugClassName(bug_class), "|", kernel, "|",
                            instruction, "|", alloc_site));
}

BugReport MakeReport(const Violation& violation, const AccessEvent& event,
                     const ReportSite& site) {
  BugReport r;
  r.bug_class = violation.bug_class;
  r.kernel = site.kernel;
  r.instruction = site.instruction;
  r.ctaid = site.ctaid;
  r.tid = site.tid;
  r.address = event.address;
  r.width = event.width;
  r.declared_space = event.declared_space;
  r.iteration = site.iteration;
  std::string alloc_site = "none";
  if (violation.allocation) {
    const AllocationRecord& rec = *violation.allocation;
    r.alloc_id = rec.id;
    r.allocation =
        AllocationInfo{rec.base, rec.size, rec.state, rec.space, rec.site};
    alloc_site = rec.site.empty() ? "anon" : rec.site;
  }
  r.dedupe_key = DedupeKey(r.bug_class, r.kernel, r.instruction, alloc_site);
  return r;
}

std::string FormatBugReport(const BugReport& r, std::optional<uint64_t> count) {
  std::string out;
  auto line = [&](std::string_view key, const std::string& value) {
    out += StrCat(key, ": ", value, "\n");
  };
  line("bug_class", std::string(BugClassName(r.bug_class)));
  line("kernel", r.kernel);
  line("instruction", std::to_string(r.instruction));
  line("thread", StrCat(r.ctaid, " ", r.tid));
  line("address", fmt::format("0x{:x}", r.address));
  line("width", std::to_string(r.width));
  line("declared_space", std::string(MemSpaceName(r.declared_space)));
  line("alloc_id", r.alloc_id ? std::to_string(*r.alloc_id) : "none");
  if (r.allocation) {
    const AllocationInfo& a = *r.allocation;
    line("alloc_base", fmt::format("0x{:x}", a.base));
    line("alloc_size", std::to_string(a.size));
    line("alloc_state", a.state == AllocState::kLive ? "LIVE" : "FREED");
    line("alloc_space", std::string(MemSpaceName(a.space)));
    line("alloc_site", a.site);
  }
  line("iteration", std::to_string(r.iteration));
  line("dedupe_key", r.dedupe_key);
  if (count) line("count", std::to_string(*count));
  return out;
}

StatusOr<BugReport> ParseBugReport(std::string_view text) {
  BugReport r;
  AllocationInfo info;
  bool has_alloc = false;
  bool has_class = false;
  auto bad = [](std::string_view why) {
    return MakeError(ErrorCode::kManifestSyntax,
                     StrCat("bad finding record: ", why));
  };
  for (std::string_view raw : Split(text, '\n')) {
    std::string_view line = Trim(raw);
    if (line.empty()) continue;
    const size_t colon = line.find(':');
    if (colon == std::string_view::npos) return bad(line);
    std::string_view key = Trim(line.substr(0, colon));
    std::string_view value = Trim(line.substr(colon + 1));
    auto num = [&](std::string_view v) { return ParseUint(v); };
    if (key == "bug_class") {
      auto c = ParseBugClass(value);
      if (!c) return bad(value);
      r.bug_class = *c;
      has_class = true;
    } else if (key == "kernel") {
      r.kernel = std::string(value);
    } else if (key == "instruction") {
      auto v = num(value);
      if (!v) return bad(key);
      r.instruction = static_cast<uint32_t>(*v);
    } else if (key == "thread") {
      auto parts = SplitWords(value);
      if (parts.size() != 2 || !num(parts[0]) || !num(parts[1])) {
        return bad(key);
      }
      r.ctaid = static_cast<uint32_t>(*num(parts[0]));
      r.tid = static_cast<uint32_t>(*num(parts[1]));
    } else if (key == "address") {
      auto v = num(value);
      if (!v) return bad(key);
      r.address = *v;
    } else if (key == "width") {
      auto v = num(value);
      if (!v) return bad(key);
      r.width = static_cast<uint32_t>(*v);
    } else if (key == "declared_space") {
      auto s = ParseMemSpace(value);
      if (!s) return bad(key);
      r.declared_space = *s;
    } else if (key == "alloc_id") {
      if (value != "none") {
        auto v = num(value);
        if (!v) return bad(key);
        r.alloc_id = *v;
      }
    } else if (key == "alloc_base") {
      auto v = num(value);
      if (!v) return bad(key);
      info.base = *v;
      has_alloc = true;
    } else if (key == "alloc_size") {
      auto v = num(value);
      if (!v) return bad(key);
      info.size = *v;
    } else if (key == "alloc_state") {
      info.state = value == "FREED" ? AllocState::kFreed : AllocState::kLive;
    } else if (key == "alloc_space") {
      auto s = ParseMemSpace(value);
      if (!s) return bad(key);
      info.space = *s;
    } else if (key == "alloc_site") {
      info.site = std::string(value);
    } else if (key == "iteration") {
      auto v = num(value);
      if (!v) return bad(key);
      r.iteration = *v;
    } else if (key == "dedupe_key") {
      r.dedupe_key = std::string(value);
    }
  }
  if (!has_class) return bad("missing bug_class");
  if (has_alloc) r.allocation = info;
  return r;
}

bool FindingLog::Add(const BugReport& report) {
  auto it = index_.find(report.dedupe_key);
  if (it != index_.end()) {
    Entry& e = entries_[it->second];
    ++e.count;
    if (report.iteration < e.first.iteration) e.first = report;
    return false;
  }
  index_.emplace(report.dedupe_key, entries_.size());
  entries_.push_back(Entry{report, 1});
  return true;
}

void FindingLog::Merge(const FindingLog& other) {
  for (const Entry& e : other.entries_) {
    auto it = index_.find(e.first.dedupe_key);
    if (it == index_.end()) {
      index_.emplace(e.first.dedupe_key, entries_.size());
      entries_.push_back(e);
      continue;
    }
    Entry& mine = entries_[it->second];
    mine.count += e.count;
    if (e.first.iteration < mine.first.iteration) mine.first = e.first;
  }
}

std::vector<FindingLog::Entry> FindingLog::Findings() const {
  std::vector<Entry> out = entries_;
  std::stable_sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
    return a.first.iteration < b.first.iteration;
  });
  return out;
}

uint64_t FindingLog::total() const {
  uint64_t n = 0;
  for (const Entry& e : entries_) n += e.count;
  return n;
}

std::string FormatFindings(const FindingLog& log) {
  std::string out;
  for (const FindingLog::Entry& e : log.Findings()) {
    if (!out.empty()) out += "\n";
    out += FormatBugReport(e.first, e.count);
  }
  return out;
}

namespace {

std::optional<BugReport> HostCheck(const DeviceMemoryImage& image,
                                   const HostOp& op, uint64_t address,
                                   MemSpace space, AllocId provenance,
                                   uint64_t length) {
  if (length == 0) return std::nullopt;
  // Host transfers are checked as one access spanning the whole range.
  AccessEvent ev{op.index, space, address,
                 static_cast<uint32_t>(std::min<uint64_t>(length, UINT32_MAX)),
                 provenance};
  auto v = CheckAccess(image, ev);
  if (!v && !image.InArena(address, length)) {
    v = Violation{BugClass::kWildAccess, std::nullopt};
  }
  if (!v) return std::nullopt;
  return MakeReport(*v, ev,
                    ReportSite{StrCat("host.", op.phase), op.index, 0, 0,
                               op.iteration});
}

}  // namespace

std::optional<BugReport> CheckedCopyIn(DeviceMemoryImage& image,
                                       const HostOp& op, uint64_t address,
                                       MemSpace space, AllocId provenance,
                                       std::span<const uint8_t> bytes) {
  auto bug = HostCheck(image, op, address, space, provenance, bytes.size());
  if (bug) return bug;
  if (!bytes.empty()) image.WriteRaw(address, bytes);
  return std::nullopt;
}

std::optional<BugReport> CheckedCopyOut(const DeviceMemoryImage& image,
                                        const HostOp& op, uint64_t address,
                                        MemSpace space, AllocId provenance,
                                        uint64_t length,
                                        std::vector<uint8_t>* out) {
  auto bug = HostCheck(image, op, address, space, provenance, length);
  if (bug) return bug;
  out->resize(length);
  if (length > 0) image.ReadRaw(address, *out);
  return std::nullopt;
}

std::optional<BugReport> CheckedFree(DeviceMemoryImage& image,
                                     const HostOp& op, uint64_t address) {
  const AllocationRecord* resolved = image.Resolve(address);
  std::optional<AllocationRecord> anchor;
  if (resolved != nullptr) anchor = *resolved;
  StatusOr<AllocId> freed = image.Free(address);
  if (freed.ok()) return std::nullopt;
  Violation v{BugClass::kInvalidFree, anchor};
  AccessEvent ev{op.index,
                 anchor ? anchor->space
                        : image.SpaceOf(address).value_or(MemSpace::kGlobal),
                 address, 0, kNoAlloc};
  return MakeReport(v, ev,
                    ReportSite{StrCat("host.", op.phase), op.index, 0, 0,
                               op.iteration});
}

}  // namespace simt_forge
