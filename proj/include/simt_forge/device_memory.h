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

// Simulated device memory: one arena per memory space, an allocation
// registry, per-granule shadow metadata and snapshot/restore.
//
// Each space occupies its own range of the 64-bit device address space
// (see SpaceBase). Allocations are laid out as
//
//   [left redzone][payload rounded up to granule][right redzone]
//
// and the payload base is granule-aligned. Shadow bytes encode one granule
// each: 0 means fully addressable, k in [1, granule) means only the first
// k bytes are addressable, and the kShadow* markers below are reserved.

#ifndef SIMT_FORGE_DEVICE_MEMORY_H_
#define SIMT_FORGE_DEVICE_MEMORY_H_

#include <array>
#include <cstdint>
#include <deque>
#include <map>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "simt_forge/error.h"
#include "simt_forge/kernel_ir.h"
#include "simt_forge/rng.h"

namespace simt_forge {

using AllocId = uint64_t;
inline constexpr AllocId kNoAlloc = 0;

inline constexpr uint8_t kShadowAddressable = 0x00;
inline constexpr uint8_t kShadowRedzone = 0xFA;
inline constexpr uint8_t kShadowFreed = 0xFD;
inline constexpr uint8_t kShadowUnallocated = 0xFF;

inline constexpr uint64_t KiB = 1024;
inline constexpr uint64_t MiB = 1024 * KiB;

struct MemoryConfig {
  std::array<uint64_t, kNumSpaces> space_size = {16 * MiB, 48 * KiB, 16 * KiB};
  std::array<uint64_t, kNumSpaces> quarantine_capacity = {1 * MiB, 0, 0};
  uint32_t granule = 4;
  uint32_t redzone = 32;

  // Granule must be in [1, 0xF0) and divide the redzone and every space
  // size.
  Status Check() const;
};

// First device address of `space`'s arena.
uint64_t SpaceBase(MemSpace space);

enum class AllocState : uint8_t { kLive, kFreed };

struct AllocationRecord {
  AllocId id = kNoAlloc;
  uint64_t base = 0;
  uint64_t size = 0;
  MemSpace space = MemSpace::kGlobal;
  AllocState state = AllocState::kLive;
  uint32_t redzone = 0;
  // FREED records stay resolvable while quarantined; once evicted their
  // extent returns to the allocator.
  bool quarantined = false;
  // Stable name of the allocation site, e.g. the harness buffer name.
  std::string site;
  std::optional<uint64_t> birth_iteration;
  std::optional<uint64_t> death_iteration;

  uint64_t payload_end() const { return base + size; }
  friend bool operator==(const AllocationRecord&,
                         const AllocationRecord&) = default;
};

struct Allocation {
  uint64_t address = 0;
  AllocId id = kNoAlloc;
};

class Snapshot;

class DeviceMemoryImage {
 public:
  explicit DeviceMemoryImage(const MemoryConfig& config = MemoryConfig());

  const MemoryConfig& config() const { return config_; }

  StatusOr<Allocation> Alloc(MemSpace space, uint64_t size,
                             std::string site = "");
  // Reserves redzones around a zero-byte payload. Every access to the
  // returned address is out of bounds; Free accepts it like any other.
  StatusOr<Allocation> AllocEmpty(MemSpace space, std::string site = "");
  // `address` must be the base of a LIVE allocation, else InvalidFree.
  StatusOr<AllocId> Free(uint64_t address);

  // Unchecked transfers. Fail only when the range leaves the arena.
  Status CopyIn(uint64_t address, std::span<const uint8_t> bytes);
  StatusOr<std::vector<uint8_t>> CopyOut(uint64_t address,
                                         uint64_t length) const;
  bool InArena(uint64_t address, uint64_t length) const;
  // Callers must check InArena first.
  void ReadRaw(uint64_t address, std::span<uint8_t> out) const;
  void WriteRaw(uint64_t address, std::span<const uint8_t> bytes);

  std::optional<MemSpace> SpaceOf(uint64_t address) const;
  // LIVE or quarantined allocation whose extent (payload plus redzones)
  // contains `address`.
  const AllocationRecord* Resolve(uint64_t address) const;
  const AllocationRecord* Find(AllocId id) const;
  const AllocationRecord* FindLiveBase(uint64_t address) const;
  const std::vector<AllocationRecord>& records() const { return records_; }
  size_t live_count() const;

  uint8_t ShadowAt(uint64_t address) const;
  // True iff every byte of [address, address + length) is addressable per
  // shadow. Addresses outside every arena are not addressable.
  bool RangeAddressable(uint64_t address, uint64_t length) const;
  const std::vector<uint8_t>& shadow(MemSpace space) const {
    return spaces_[Index(space)].shadow;
  }
  // Shadow recomputed from the registry alone.
  std::vector<uint8_t> RecomputeShadow(MemSpace space) const;

  std::vector<AllocId> QuarantineOrder(MemSpace space) const;
  uint64_t QuarantineBytes(MemSpace space) const {
    return spaces_[Index(space)].quarantine_bytes;
  }

  // Stamped into birth/death iterations of records touched afterwards.
  void set_iteration(std::optional<uint64_t> iteration) {
    iteration_ = iteration;
  }

  // Observable state: bytes, registry, shadow, quarantine, allocator.
  friend bool operator==(const DeviceMemoryImage& a,
                         const DeviceMemoryImage& b);

 private:
  friend class Snapshot;
  friend Snapshot TakeSnapshot(const DeviceMemoryImage&,
                               std::optional<CounterRng>);
  friend void Restore(DeviceMemoryImage&, const Snapshot&, CounterRng*);
  friend std::string SerializeSnapshot(const Snapshot&);
  friend StatusOr<Snapshot> DeserializeSnapshot(std::string_view);

  struct SpaceState {
    std::vector<uint8_t> bytes;
    std::vector<uint8_t> shadow;
    uint64_t cursor = 0;
    // offset -> length of evicted, reusable extents.
    std::map<uint64_t, uint64_t> free_extents;
    // extent start address -> id, for LIVE and quarantined records.
    std::map<uint64_t, AllocId> extents;
    std::map<uint64_t, AllocId> live_by_base;
    std::deque<AllocId> quarantine;
    uint64_t quarantine_bytes = 0;
    // Pages written since the last snapshot or restore.
    mutable std::vector<uint8_t> dirty_bytes;
    mutable std::vector<uint32_t> dirty_byte_pages;
    mutable std::vector<uint8_t> dirty_shadow;
    mutable std::vector<uint32_t> dirty_shadow_pages;
  };

  static constexpr uint64_t kPage = 4096;
  static int Index(MemSpace space) { return static_cast<int>(space); }

  StatusOr<Allocation> AllocImpl(MemSpace space, uint64_t size,
                                 std::string site);
  void FillShadow(MemSpace space, uint64_t address, uint64_t length,
                  uint8_t code);
  void PoisonLive(const AllocationRecord& rec);
  void Evict(MemSpace space);
  void ClearDirty() const;
  void MarkBytesDirty(SpaceState& s, uint64_t offset, uint64_t length);
  void MarkShadowDirty(SpaceState& s, uint64_t index, uint64_t count);
  uint64_t ExtentSize(uint64_t size) const;
  static void PaintShadow(std::vector<uint8_t>& shadow, uint32_t granule,
                          uint64_t offset, uint64_t length, uint8_t code);
  static void PaintRecord(std::vector<uint8_t>& shadow, uint32_t granule,
                          const AllocationRecord& rec);

  MemoryConfig config_;
  std::array<SpaceState, kNumSpaces> spaces_;
  std::vector<AllocationRecord> records_;  // index = id - 1
  std::optional<uint64_t> iteration_;
  // Snapshot whose contents equal this image apart from dirty pages.
  mutable uint64_t restore_base_ = 0;
};

// Immutable deep copy of an image plus an optional generator position.
class Snapshot {
 public:
  const DeviceMemoryImage& image() const { return *image_; }
  const std::optional<CounterRng>& rng() const { return rng_; }
  uint64_t id() const { return id_; }

 private:
  friend Snapshot TakeSnapshot(const DeviceMemoryImage&,
                               std::optional<CounterRng>);
  friend StatusOr<Snapshot> DeserializeSnapshot(std::string_view);

  uint64_t id_ = 0;
  std::shared_ptr<const DeviceMemoryImage> image_;
  std::optional<CounterRng> rng_;
};

Snapshot TakeSnapshot(const DeviceMemoryImage& image,
                      std::optional<CounterRng> rng = std::nullopt);
// Makes `image` (and `*rng` when both sides carry one) bit-identical to
// capture time. Restoring the snapshot the image was last synced with only
// copies pages dirtied since.
void Restore(DeviceMemoryImage& image, const Snapshot& snapshot,
             CounterRng* rng = nullptr);

// Versioned little-endian blob: magic, version, config, per-space lengths
// and raw bytes, allocator state, registry records, quarantine order and
// generator position. Shadow is rebuilt from the registry on load.
std::string SerializeSnapshot(const Snapshot& snapshot);
StatusOr<Snapshot> DeserializeSnapshot(std::string_view blob);

}  // namespace simt_forge

#endif  // SIMT_FORGE_DEVICE_MEMORY_H_
