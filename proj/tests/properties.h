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


// Randomized property checks shared by the unit tests and the acceptance
// binary.

#ifndef SIMT_FORGE_TESTS_PROPERTIES_H_
#define SIMT_FORGE_TESTS_PROPERTIES_H_

#include <algorithm>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "simt_forge/device_memory.h"
#include "simt_forge/rng.h"
#include "simt_forge/sanitizer.h"
#include "simt_forge/strings.h"

namespace simt_forge::testing {

// Small arenas keep full-shadow comparisons cheap.
inline MemoryConfig SmallConfig() {
  MemoryConfig c;
  c.space_size = {64 * KiB, 16 * KiB, 4 * KiB};
  c.quarantine_capacity = {2 * KiB, 512, 0};
  return c;
}

inline std::optional<std::string> CheckCoherent(
    const DeviceMemoryImage& image,
    const std::array<std::vector<AllocId>, kNumSpaces>& freed_order) {
  for (int s = 0; s < kNumSpaces; ++s) {
    MemSpace space = static_cast<MemSpace>(s);
    if (image.RecomputeShadow(space) != image.shadow(space)) {
      return StrCat("shadow diverges from registry in ", MemSpaceName(space));
    }
    // Quarantine must be a suffix of the free order: oldest evicts first.
    std::vector<AllocId> q = image.QuarantineOrder(space);
    const std::vector<AllocId>& all = freed_order[s];
    if (q.size() > all.size() ||
        !std::equal(q.begin(), q.end(), all.end() - q.size())) {
      return StrCat("quarantine order broken in ", MemSpaceName(space));
    }
    for (size_t i = 0; i + q.size() < all.size(); ++i) {
      const AllocationRecord* r = image.Find(all[i]);
      if (r == nullptr || r->quarantined) {
        return StrCat("evicted allocation ", all[i], " still quarantined");
      }
    }
  }
  // LIVE extents never overlap within a space.
  std::vector<std::pair<uint64_t, uint64_t>> extents;
  for (const AllocationRecord& r : image.records()) {
    if (r.state != AllocState::kLive) continue;
    extents.emplace_back(r.base - r.redzone, r.payload_end() + r.redzone);
  }
  std::sort(extents.begin(), extents.end());
  for (size_t i = 1; i < extents.size(); ++i) {
    if (extents[i].first < extents[i - 1].second) {
      return StrCat("live extents overlap at 0x", extents[i].first);
    }
  }
  return std::nullopt;
}

// One randomized alloc/free/access sequence of up to `max_ops` steps.
// Returns a description of the first violated property.
inline std::optional<std::string> RunShadowSequence(uint64_t seed,
                                                    uint32_t max_ops) {
  CounterRng rng(seed);
  DeviceMemoryImage image(SmallConfig());
  std::array<std::vector<AllocId>, kNumSpaces> freed;
  std::vector<Allocation> live;
  std::optional<Snapshot> snap;
  std::optional<DeviceMemoryImage> at_snap;
  std::optional<CounterRng> rng_at_snap;
  uint32_t ops = 1 + static_cast<uint32_t>(rng.Uniform(max_ops));

  for (uint32_t step = 0; step < ops; ++step) {
    uint64_t kind = rng.Uniform(10);
    if (kind < 4) {
      MemSpace space = static_cast<MemSpace>(rng.Uniform(kNumSpaces));
      uint64_t size = rng.Uniform(600);
      StatusOr<Allocation> a = size == 0 ? image.AllocEmpty(space)
                                         : image.Alloc(space, size);
      if (a.ok()) live.push_back(*a);
    } else if (kind < 7 && !live.empty()) {
      size_t pick = rng.Uniform(live.size());
      Allocation a = live[pick];
      live.erase(live.begin() + static_cast<long>(pick));
      MemSpace space = image.Find(a.id)->space;
      StatusOr<AllocId> id = image.Free(a.address);
      if (!id.ok()) return StrCat("free of live base failed: ", id.status().ToString());
      freed[static_cast<int>(space)].push_back(*id);
    } else if (kind == 7) {
      // Non-base and double frees are rejected without side effects.
      DeviceMemoryImage before = image;
      uint64_t addr = live.empty() ? SpaceBase(MemSpace::kGlobal) + 1
                                   : live[rng.Uniform(live.size())].address + 1;
      if (image.Free(addr).ok()) return "free of a non-base address succeeded";
      if (!(image == before)) return "rejected free changed the image";
    } else if (kind == 8 && !live.empty()) {
      const Allocation& a = live[rng.Uniform(live.size())];
      const AllocationRecord* r = image.Find(a.id);
      if (r->size > 0) {
        uint64_t off = rng.Uniform(r->size);
        uint64_t len = 1 + rng.Uniform(r->size - off);
        std::vector<uint8_t> bytes(len);
        for (uint8_t& b : bytes) b = static_cast<uint8_t>(rng.Next());
        if (!image.CopyIn(a.address + off, bytes).ok()) return "copy-in failed";
        StatusOr<std::vector<uint8_t>> back = image.CopyOut(a.address + off, len);
        if (!back.ok() || *back != bytes) return "copy round trip differs";
      }
    } else if (kind == 9) {
      if (!snap) {
        snap = TakeSnapshot(image, rng);
        at_snap = image;
        rng_at_snap = rng;
      }
    }
    if (auto bad = CheckCoherent(image, freed)) {
      return StrCat("step ", step, ": ", *bad);
    }
  }
  if (!snap) {
    snap = TakeSnapshot(image, rng);
    at_snap = image;
    rng_at_snap = rng;
    // Dirty the image so the restore has work to do.
    (void)image.Alloc(MemSpace::kGlobal, 16);
  }
  CounterRng restored_rng = rng;
  Restore(image, *snap, &restored_rng);
  if (!(image == *at_snap)) return "restore(snapshot) is not the identity";
  if (!(restored_rng == *rng_at_snap)) return "restore lost the RNG position";
  if (image.RecomputeShadow(MemSpace::kGlobal) !=
      image.shadow(MemSpace::kGlobal)) {
    return "shadow incoherent after restore";
  }
  return std::nullopt;
}

}  // namespace simt_forge::testing

#endif  // SIMT_FORGE_TESTS_PROPERTIES_H_
