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

#include "simt_forge/device_memory.h"

#include <algorithm>
#include <atomic>
#include <cstring>

#include "simt_forge/strings.h"

namespace simt_forge {

namespace {

std::atomic<uint64_t> next_snapshot_id{1};

uint64_t RoundUp(uint64_t v, uint64_t m) { return (v + m - 1) / m * m; }

}  // namespace

Status MemoryConfig::Check() const {
  if (granule == 0 || granule >= 0xF0) {
    return MakeError(ErrorCode::kBadSnapshot, "granule must be in [1, 240)");
  }
  if (redzone % granule != 0) {
    return MakeError(ErrorCode::kBadSnapshot,
                     "redzone must be a multiple of the granule");
  }
  for (uint64_t size : space_size) {
    if (size == 0 || size % granule != 0) {
      return MakeError(ErrorCode::kBadSnapshot,
                       "space sizes must be non-zero granule multiples");
    }
  }
  return OkStatus();
}

uint64_t SpaceBase(MemSpace space) {
  // 4 GiB apart, so a space never grows into its neighbour.
  return (static_cast<uint64_t>(space) + 1) << 32;
}

DeviceMemoryImage::DeviceMemoryImage(const MemoryConfig& config)
    : config_(config) {
  for (MemSpace space : kAllSpaces) {
    SpaceState& s = spaces_[Index(space)];
    const uint64_t size = config_.space_size[Index(space)];
    s.bytes.assign(size, 0);
    s.shadow.assign(size / config_.granule, kShadowUnallocated);
    s.dirty_bytes.assign((size + kPage - 1) / kPage, 0);
    s.dirty_shadow.assign((s.shadow.size() + kPage - 1) / kPage, 0);
  }
}

uint64_t DeviceMemoryImage::ExtentSize(uint64_t size) const {
  return 2ull * config_.redzone + RoundUp(size, config_.granule);
}

void DeviceMemoryImage::MarkBytesDirty(SpaceState& s, uint64_t offset,
                                       uint64_t length) {
  if (length == 0) return;
  for (uint64_t p = offset / kPage; p <= (offset + length - 1) / kPage; ++p) {
    if (!s.dirty_bytes[p]) {
      s.dirty_bytes[p] = 1;
      s.dirty_byte_pages.push_back(static_cast<uint32_t>(p));
    }
  }
}

void DeviceMemoryImage::MarkShadowDirty(SpaceState& s, uint64_t index,
                                        uint64_t count) {
  if (count == 0) return;
  for (uint64_t p = index / kPage; p <= (index + count - 1) / kPage; ++p) {
    if (!s.dirty_shadow[p]) {
      s.dirty_shadow[p] = 1;
      s.dirty_shadow_pages.push_back(static_cast<uint32_t>(p));
    }
  }
}

void DeviceMemoryImage::ClearDirty() const {
  for (const SpaceState& s : spaces_) {
    for (uint32_t p : s.dirty_byte_pages) s.dirty_bytes[p] = 0;
    for (uint32_t p : s.dirty_shadow_pages) s.dirty_shadow[p] = 0;
    s.dirty_byte_pages.clear();
    s.dirty_shadow_pages.clear();
  }
}

void DeviceMemoryImage::PaintShadow(std::vector<uint8_t>& shadow,
                                    uint32_t granule, uint64_t offset,
                                    uint64_t length, uint8_t code) {
  std::fill_n(shadow.begin() + offset / granule, length / granule, code);
}

void DeviceMemoryImage::PaintRecord(std::vector<uint8_t>& shadow,
                                    uint32_t granule,
                                    const AllocationRecord& rec) {
  const uint64_t start = rec.base - SpaceBase(rec.space);
  const uint64_t rounded = RoundUp(rec.size, granule);
  PaintShadow(shadow, granule, start - rec.redzone, rec.redzone,
              kShadowRedzone);
  PaintShadow(shadow, granule, start + rounded, rec.redzone, kShadowRedzone);
  if (rec.state == AllocState::kFreed) {
    PaintShadow(shadow, granule, start, rounded, kShadowFreed);
    return;
  }
  PaintShadow(shadow, granule, start, rounded, kShadowAddressable);
  if (const uint64_t tail = rec.size % granule; tail != 0) {
    shadow[(start + rounded) / granule - 1] = static_cast<uint8_t>(tail);
  }
}

void DeviceMemoryImage::FillShadow(MemSpace space, uint64_t address,
                                   uint64_t length, uint8_t code) {
  SpaceState& s = spaces_[Index(space)];
  const uint64_t offset = address - SpaceBase(space);
  PaintShadow(s.shadow, config_.granule, offset, length, code);
  MarkShadowDirty(s, offset / config_.granule, length / config_.granule);
}

void DeviceMemoryImage::PoisonLive(const AllocationRecord& rec) {
  SpaceState& s = spaces_[Index(rec.space)];
  const uint64_t start = rec.base - SpaceBase(rec.space);
  PaintRecord(s.shadow, config_.granule, rec);
  MarkShadowDirty(s, (start - rec.redzone) / config_.granule,
                  ExtentSize(rec.size) / config_.granule);
}

StatusOr<Allocation> DeviceMemoryImage::AllocImpl(MemSpace space,
                                                  uint64_t size,
                                                  std::string site) {
  SpaceState& s = spaces_[Index(space)];
  const uint64_t capacity = config_.space_size[Index(space)];
  const uint64_t need = ExtentSize(size);
  if (size > capacity || need > capacity) {
    return MakeError(ErrorCode::kOutOfDeviceMemory,
                     StrCat(MemSpaceName(space), ": ", size, " bytes"));
  }
  std::optional<uint64_t> offset;
  for (auto it = s.free_extents.begin(); it != s.free_extents.end(); ++it) {
    if (it->second < need) continue;
    offset = it->first;
    const uint64_t rest = it->second - need;
    s.free_extents.erase(it);
    if (rest > 0) s.free_extents.emplace(*offset + need, rest);
    break;
  }
  if (!offset) {
    if (s.cursor + need > capacity) {
      return MakeError(ErrorCode::kOutOfDeviceMemory,
                       StrCat(MemSpaceName(space), ": ", size, " bytes"));
    }
    offset = s.cursor;
    s.cursor += need;
  }
  AllocationRecord rec;
  rec.id = records_.size() + 1;
  rec.base = SpaceBase(space) + *offset + config_.redzone;
  rec.size = size;
  rec.space = space;
  rec.state = AllocState::kLive;
  rec.redzone = config_.redzone;
  rec.site = std::move(site);
  rec.birth_iteration = iteration_;
  s.extents.emplace(rec.base - rec.redzone, rec.id);
  s.live_by_base.emplace(rec.base, rec.id);
  PoisonLive(rec);
  records_.push_back(std::move(rec));
  return Allocation{records_.back().base, records_.back().id};
}

StatusOr<Allocation> DeviceMemoryImage::Alloc(MemSpace space, uint64_t size,
                                              std::string site) {
  if (size == 0) {
    return MakeError(ErrorCode::kZeroSize, "allocation size must be > 0");
  }
  return AllocImpl(space, size, std::move(site));
}

StatusOr<Allocation> DeviceMemoryImage::AllocEmpty(MemSpace space,
                                                   std::string site) {
  return AllocImpl(space, 0, std::move(site));
}

StatusOr<AllocId> DeviceMemoryImage::Free(uint64_t address) {
  auto space = SpaceOf(address);
  if (!space) {
    return MakeError(ErrorCode::kInvalidFree,
                     fmt::format("0x{:x} is not a device address", address));
  }
  SpaceState& s = spaces_[Index(*space)];
  auto it = s.live_by_base.find(address);
  if (it == s.live_by_base.end()) {
    return MakeError(ErrorCode::kInvalidFree,
                     fmt::format("0x{:x} is not the base of a live allocation",
                                 address));
  }
  const AllocId id = it->second;
  s.live_by_base.erase(it);
  AllocationRecord& rec = records_[id - 1];
  rec.state = AllocState::kFreed;
  rec.death_iteration = iteration_;
  rec.quarantined = true;
  FillShadow(*space, rec.base, RoundUp(rec.size, config_.granule),
             kShadowFreed);
  s.quarantine.push_back(id);
  s.quarantine_bytes += rec.size;
  Evict(*space);
  return id;
}

void DeviceMemoryImage::Evict(MemSpace space) {
  SpaceState& s = spaces_[Index(space)];
  const uint64_t capacity = config_.quarantine_capacity[Index(space)];
  while (!s.quarantine.empty() && s.quarantine_bytes > capacity) {
    AllocationRecord& rec = records_[s.quarantine.front() - 1];
    s.quarantine.pop_front();
    s.quarantine_bytes -= rec.size;
    rec.quarantined = false;
    const uint64_t start = rec.base - rec.redzone;
    const uint64_t length = ExtentSize(rec.size);
    s.extents.erase(start);
    FillShadow(space, start, length, kShadowUnallocated);
    // Return the extent to the allocator, merging with neighbours.
    uint64_t offset = start - SpaceBase(space);
    uint64_t len = length;
    auto next = s.free_extents.lower_bound(offset);
    if (next != s.free_extents.end() && offset + len == next->first) {
      len += next->second;
      next = s.free_extents.erase(next);
    }
    if (next != s.free_extents.begin()) {
      auto prev = std::prev(next);
      if (prev->first + prev->second == offset) {
        offset = prev->first;
        len += prev->second;
        s.free_extents.erase(prev);
      }
    }
    s.free_extents.emplace(offset, len);
  }
}

std::optional<MemSpace> DeviceMemoryImage::SpaceOf(uint64_t address) const {
  for (MemSpace space : kAllSpaces) {
    const uint64_t base = SpaceBase(space);
    if (address >= base && address - base < config_.space_size[Index(space)]) {
      return space;
    }
  }
  return std::nullopt;
}

bool DeviceMemoryImage::InArena(uint64_t address, uint64_t length) const {
  auto space = SpaceOf(address);
  if (!space) return false;
  const uint64_t offset = address - SpaceBase(*space);
  return length <= config_.space_size[Index(*space)] - offset;
}

void DeviceMemoryImage::ReadRaw(uint64_t address,
                                std::span<uint8_t> out) const {
  const MemSpace space = *SpaceOf(address);
  const SpaceState& s = spaces_[Index(space)];
  std::memcpy(out.data(), s.bytes.data() + (address - SpaceBase(space)),
              out.size());
}

void DeviceMemoryImage::WriteRaw(uint64_t address,
                                 std::span<const uint8_t> bytes) {
  const MemSpace space = *SpaceOf(address);
  SpaceState& s = spaces_[Index(space)];
  const uint64_t offset = address - SpaceBase(space);
  if (bytes.empty()) return;
  std::memcpy(s.bytes.data() + offset, bytes.data(), bytes.size());
  MarkBytesDirty(s, offset, bytes.size());
}

Status DeviceMemoryImage::CopyIn(uint64_t address,
                                 std::span<const uint8_t> bytes) {
  if (!InArena(address, bytes.size())) {
    return MakeError(ErrorCode::kOutOfDeviceMemory,
                     fmt::format("copy to 0x{:x} leaves the arena", address));
  }
  WriteRaw(address, bytes);
  return OkStatus();
}

StatusOr<std::vector<uint8_t>> DeviceMemoryImage::CopyOut(
    uint64_t address, uint64_t length) const {
  if (!InArena(address, length)) {
    return MakeError(ErrorCode::kOutOfDeviceMemory,
                     fmt::format("copy from 0x{:x} leaves the arena", address));
  }
  std::vector<uint8_t> out(length);
  ReadRaw(address, out);
  return out;
}

const AllocationRecord* DeviceMemoryImage::Resolve(uint64_t address) const {
  auto space = SpaceOf(address);
  if (!space) return nullptr;
  const SpaceState& s = spaces_[Index(*space)];
  auto it = s.extents.upper_bound(address);
  if (it == s.extents.begin()) return nullptr;
  --it;
  const AllocationRecord& rec = records_[it->second - 1];
  if (address < rec.base - rec.redzone + ExtentSize(rec.size)) return &rec;
  return nullptr;
}

const AllocationRecord* DeviceMemoryImage::Find(AllocId id) const {
  if (id == kNoAlloc || id > records_.size()) return nullptr;
  return &records_[id - 1];
}

const AllocationRecord* DeviceMemoryImage::FindLiveBase(
    uint64_t address) const {
  auto space = SpaceOf(address);
  if (!space) return nullptr;
  const SpaceState& s = spaces_[Index(*space)];
  auto it = s.live_by_base.find(address);
  return it == s.live_by_base.end() ? nullptr : &records_[it->second - 1];
}

size_t DeviceMemoryImage::live_count() const {
  size_t n = 0;
  for (const SpaceState& s : spaces_) n += s.live_by_base.size();
  return n;
}

uint8_t DeviceMemoryImage::ShadowAt(uint64_t address) const {
  auto space = SpaceOf(address);
  if (!space) return kShadowUnallocated;
  return spaces_[Index(*space)]
      .shadow[(address - SpaceBase(*space)) / config_.granule];
}

bool DeviceMemoryImage::RangeAddressable(uint64_t address,
                                         uint64_t length) const {
  if (length == 0) return true;
  if (!InArena(address, length)) return false;
  const MemSpace space = *SpaceOf(address);
  const std::vector<uint8_t>& shadow = spaces_[Index(space)].shadow;
  const uint64_t g = config_.granule;
  const uint64_t first = address - SpaceBase(space);
  const uint64_t last = first + length - 1;
  for (uint64_t gi = first / g; gi <= last / g; ++gi) {
    const uint8_t code = shadow[gi];
    if (code == kShadowAddressable) continue;
    if (code >= g) return false;
    // Partial granule: bytes [0, code) are addressable.
    if (last - gi * g >= code) return false;
  }
  return true;
}

std::vector<uint8_t> DeviceMemoryImage::RecomputeShadow(MemSpace space) const {
  std::vector<uint8_t> shadow(
      config_.space_size[Index(space)] / config_.granule, kShadowUnallocated);
  for (const AllocationRecord& rec : records_) {
    if (rec.space != space) continue;
    if (rec.state == AllocState::kFreed && !rec.quarantined) continue;
    PaintRecord(shadow, config_.granule, rec);
  }
  return shadow;
}

std::vector<AllocId> DeviceMemoryImage::QuarantineOrder(MemSpace space) const {
  const auto& q = spaces_[Index(space)].quarantine;
  return {q.begin(), q.end()};
}

bool operator==(const DeviceMemoryImage& a, const DeviceMemoryImage& b) {
  if (a.config_.space_size != b.config_.space_size ||
      a.config_.quarantine_capacity != b.config_.quarantine_capacity ||
      a.config_.granule != b.config_.granule ||
      a.config_.redzone != b.config_.redzone || a.records_ != b.records_) {
    return false;
  }
  for (int i = 0; i < kNumSpaces; ++i) {
    const auto& x = a.spaces_[i];
    const auto& y = b.spaces_[i];
    if (x.bytes != y.bytes || x.shadow != y.shadow || x.cursor != y.cursor ||
        x.free_extents != y.free_extents || x.extents != y.extents ||
        x.live_by_base != y.live_by_base || x.quarantine != y.quarantine ||
        x.quarantine_bytes != y.quarantine_bytes) {
      return false;
    }
  }
  return true;
}

Snapshot TakeSnapshot(const DeviceMemoryImage& image,
                      std::optional<CounterRng> rng) {
  Snapshot snap;
  snap.id_ = next_snapshot_id.fetch_add(1);
  auto copy = std::make_shared<DeviceMemoryImage>(image);
  copy->ClearDirty();
  copy->restore_base_ = snap.id_;
  snap.image_ = std::move(copy);
  snap.rng_ = rng;
  image.ClearDirty();
  image.restore_base_ = snap.id_;
  return snap;
}

void Restore(DeviceMemoryImage& image, const Snapshot& snapshot,
             CounterRng* rng) {
  const DeviceMemoryImage& src = snapshot.image();
  const bool incremental =
      image.restore_base_ == snapshot.id() &&
      image.config_.space_size == src.config_.space_size &&
      image.config_.granule == src.config_.granule;
  constexpr uint64_t kPage = DeviceMemoryImage::kPage;
  for (int i = 0; i < kNumSpaces; ++i) {
    auto& dst = image.spaces_[i];
    const auto& from = src.spaces_[i];
    if (incremental) {
      for (uint32_t p : dst.dirty_byte_pages) {
        const uint64_t off = p * kPage;
        const uint64_t len = std::min<uint64_t>(kPage, dst.bytes.size() - off);
        std::memcpy(dst.bytes.data() + off, from.bytes.data() + off, len);
      }
      for (uint32_t p : dst.dirty_shadow_pages) {
        const uint64_t off = p * kPage;
        const uint64_t len = std::min<uint64_t>(kPage, dst.shadow.size() - off);
        std::memcpy(dst.shadow.data() + off, from.shadow.data() + off, len);
      }
    } else {
      dst.bytes = from.bytes;
      dst.shadow = from.shadow;
      dst.dirty_bytes.assign(from.dirty_bytes.size(), 0);
      dst.dirty_shadow.assign(from.dirty_shadow.size(), 0);
      dst.dirty_byte_pages.clear();
      dst.dirty_shadow_pages.clear();
    }
    dst.cursor = from.cursor;
    dst.free_extents = from.free_extents;
    dst.extents = from.extents;
    dst.live_by_base = from.live_by_base;
    dst.quarantine = from.quarantine;
    dst.quarantine_bytes = from.quarantine_bytes;
  }
  image.config_ = src.config_;
  image.records_ = src.records_;
  image.iteration_ = src.iteration_;
  image.ClearDirty();
  image.restore_base_ = snapshot.id();
  if (rng != nullptr && snapshot.rng().has_value()) *rng = *snapshot.rng();
}

namespace {

constexpr char kSnapshotMagic[8] = {'S', 'F', 'S', 'N', 'A', 'P', '\0', '\1'};
constexpr uint32_t kSnapshotVersion = 1;

class Writer {
 public:
  void U8(uint8_t v) { out_.push_back(static_cast<char>(v)); }
  void U32(uint32_t v) {
    for (int i = 0; i < 4; ++i) U8(static_cast<uint8_t>(v >> (8 * i)));
  }
  void U64(uint64_t v) {
    for (int i = 0; i < 8; ++i) U8(static_cast<uint8_t>(v >> (8 * i)));
  }
  void Bytes(const void* data, size_t n) {
    out_.append(static_cast<const char*>(data), n);
  }
  void Str(const std::string& s) {
    U64(s.size());
    Bytes(s.data(), s.size());
  }
  void OptU64(const std::optional<uint64_t>& v) {
    U8(v.has_value());
    U64(v.value_or(0));
  }
  std::string Take() { return std::move(out_); }

 private:
  std::string out_;
};

class Reader {
 public:
  explicit Reader(std::string_view in) : in_(in) {}
  bool ok() const { return ok_; }
  uint8_t U8() {
    if (pos_ + 1 > in_.size()) return Fail();
    return static_cast<uint8_t>(in_[pos_++]);
  }
  uint32_t U32() {
    uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<uint32_t>(U8()) << (8 * i);
    return v;
  }
  uint64_t U64() {
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<uint64_t>(U8()) << (8 * i);
    return v;
  }
  bool Bytes(void* out, size_t n) {
    if (n > in_.size() - pos_) return Fail();
    std::memcpy(out, in_.data() + pos_, n);
    pos_ += n;
    return true;
  }
  std::string Str() {
    const uint64_t n = U64();
    if (!ok_ || n > in_.size() - pos_) return Fail(), std::string();
    std::string s(in_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  std::optional<uint64_t> OptU64() {
    const bool has = U8() != 0;
    const uint64_t v = U64();
    return has ? std::optional<uint64_t>(v) : std::nullopt;
  }
  bool AtEnd() const { return pos_ == in_.size(); }

 private:
  uint8_t Fail() {
    ok_ = false;
    pos_ = in_.size();
    return 0;
  }
  std::string_view in_;
  size_t pos_ = 0;
  bool ok_ = true;
};

}  // namespace

std::string SerializeSnapshot(const Snapshot& snapshot) {
  const DeviceMemoryImage& img = snapshot.image();
  Writer w;
  w.Bytes(kSnapshotMagic, sizeof kSnapshotMagic);
  w.U32(kSnapshotVersion);
  w.U32(img.config_.granule);
  w.U32(img.config_.redzone);
  for (int i = 0; i < kNumSpaces; ++i) {
    w.U64(img.config_.space_size[i]);
    w.U64(img.config_.quarantine_capacity[i]);
  }
  for (const auto& s : img.spaces_) {
    w.U64(s.bytes.size());
    w.Bytes(s.bytes.data(), s.bytes.size());
    w.U64(s.cursor);
    w.U64(s.free_extents.size());
    for (const auto& [off, len] : s.free_extents) {
      w.U64(off);
      w.U64(len);
    }
  }
  w.U64(img.records_.size());
  for (const AllocationRecord& r : img.records_) {
    w.U64(r.id);
    w.U64(r.base);
    w.U64(r.size);
    w.U8(static_cast<uint8_t>(r.space));
    w.U8(static_cast<uint8_t>(r.state));
    w.U32(r.redzone);
    w.U8(r.quarantined);
    w.Str(r.site);
    w.OptU64(r.birth_iteration);
    w.OptU64(r.death_iteration);
  }
  for (const auto& s : img.spaces_) {
    w.U64(s.quarantine.size());
    for (AllocId id : s.quarantine) w.U64(id);
  }
  w.U8(snapshot.rng().has_value());
  w.U64(snapshot.rng() ? snapshot.rng()->key() : 0);
  w.U64(snapshot.rng() ? snapshot.rng()->counter() : 0);
  return w.Take();
}

StatusOr<Snapshot> DeserializeSnapshot(std::string_view blob) {
  auto bad = [](std::string_view why) {
    return MakeError(ErrorCode::kBadSnapshot, std::string(why));
  };
  Reader r(blob);
  char magic[sizeof kSnapshotMagic];
  if (!r.Bytes(magic, sizeof magic) ||
      std::memcmp(magic, kSnapshotMagic, sizeof magic) != 0) {
    return bad("bad magic");
  }
  if (r.U32() != kSnapshotVersion) return bad("unsupported version");
  MemoryConfig config;
  config.granule = r.U32();
  config.redzone = r.U32();
  for (int i = 0; i < kNumSpaces; ++i) {
    config.space_size[i] = r.U64();
    config.quarantine_capacity[i] = r.U64();
  }
  if (!r.ok()) return bad("truncated header");
  if (Status st = config.Check(); !st.ok()) return st;
  auto image = std::make_shared<DeviceMemoryImage>(config);
  for (auto& s : image->spaces_) {
    if (r.U64() != s.bytes.size()) return bad("space length mismatch");
    if (!r.Bytes(s.bytes.data(), s.bytes.size())) return bad("truncated bytes");
    s.cursor = r.U64();
    const uint64_t n = r.U64();
    for (uint64_t i = 0; i < n && r.ok(); ++i) {
      const uint64_t off = r.U64();
      s.free_extents.emplace(off, r.U64());
    }
  }
  const uint64_t nrec = r.U64();
  if (!r.ok() || nrec > blob.size()) return bad("truncated registry");
  for (uint64_t i = 0; i < nrec && r.ok(); ++i) {
    AllocationRecord rec;
    rec.id = r.U64();
    rec.base = r.U64();
    rec.size = r.U64();
    const uint8_t space = r.U8();
    const uint8_t state = r.U8();
    if (space >= kNumSpaces || state > 1 || rec.id != i + 1) {
      return bad("bad registry record");
    }
    rec.space = static_cast<MemSpace>(space);
    rec.state = static_cast<AllocState>(state);
    rec.redzone = r.U32();
    rec.quarantined = r.U8() != 0;
    const uint64_t space_base = SpaceBase(rec.space);
    if (rec.redzone != config.redzone ||
        rec.base < space_base + rec.redzone ||
        rec.size > config.space_size[space] ||
        rec.base - space_base - rec.redzone + 2ull * rec.redzone +
                (rec.size + config.granule - 1) / config.granule *
                    config.granule >
            config.space_size[space] ||
        (rec.base - space_base) % config.granule != 0) {
      return bad("record outside its arena");
    }
    rec.site = r.Str();
    rec.birth_iteration = r.OptU64();
    rec.death_iteration = r.OptU64();
    image->records_.push_back(std::move(rec));
  }
  for (auto& s : image->spaces_) {
    const uint64_t n = r.U64();
    for (uint64_t i = 0; i < n && r.ok(); ++i) {
      const AllocId id = r.U64();
      const AllocationRecord* rec = image->Find(id);
      if (rec == nullptr || !rec->quarantined) return bad("bad quarantine");
      s.quarantine.push_back(id);
      s.quarantine_bytes += rec->size;
    }
  }
  const bool has_rng = r.U8() != 0;
  const uint64_t key = r.U64();
  const uint64_t counter = r.U64();
  if (!r.ok() || !r.AtEnd()) return bad("trailing or truncated data");
  for (const AllocationRecord& rec : image->records_) {
    if (rec.state == AllocState::kFreed && !rec.quarantined) continue;
    auto& s = image->spaces_[static_cast<int>(rec.space)];
    s.extents.emplace(rec.base - rec.redzone, rec.id);
    if (rec.state == AllocState::kLive) s.live_by_base.emplace(rec.base, rec.id);
  }
  for (MemSpace space : kAllSpaces) {
    image->spaces_[static_cast<int>(space)].shadow =
        image->RecomputeShadow(space);
  }
  Snapshot snap;
  snap.id_ = next_snapshot_id.fetch_add(1);
  image->restore_base_ = snap.id_;
  snap.image_ = std::move(image);
  if (has_rng) snap.rng_ = CounterRng(key, counter);
  return snap;
}

}  // namespace simt_forge
