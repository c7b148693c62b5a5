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


#include "simt_forge/bench_corpus.h"

#include <array>
#include <bit>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <system_error>

#include "simt_forge/strings.h"

namespace simt_forge {
namespace {

namespace fs = std::filesystem;

struct SeededSpec {
  BugClass bug_class;
  const char* file;
  const char* note;
};

constexpr std::array<SeededSpec, 4> kSeeded = {{
    {BugClass::kSpatialOob, "spatial_oob.man",
     "n = INT32_MAX wraps the kernel's n + 1 length check"},
    {BugClass::kTemporalUaf, "temporal_uaf.man",
     "incx < 0 reads the workspace released during INIT"},
    {BugClass::kSpaceMismatch, "space_mismatch.man",
     "x placed in shared memory while the kernel uses ld.global"},
    {BugClass::kProvenanceEscape, "provenance_escape.man",
     "off = 64 moves x accesses past its redzone"},
}};

constexpr std::array<const char*, 11> kNames = {
    "amax", "amin", "asum", "axpy", "copy", "dot",
    "nrm2", "rot",  "rotm", "scal", "swap"};

float F(uint32_t bits) { return std::bit_cast<float>(bits); }
uint32_t B(float f) { return std::bit_cast<uint32_t>(f); }

class Args {
 public:
  Args(std::string_view name, std::span<const TypedValue> args)
      : name_(name), args_(args) {}

  Status Expect(std::initializer_list<ScalarType> types) const {
    if (args_.size() != types.size()) {
      return MakeError(ErrorCode::kArgArityMismatch,
                       StrCat(name_, " expects ", types.size(),
                              " arguments, got ", args_.size()));
    }
    size_t i = 0;
    for (ScalarType t : types) {
      if (args_[i].type != t) {
        return MakeError(ErrorCode::kArgArityMismatch,
                         StrCat(name_, " argument ", i, " has the wrong type"));
      }
      ++i;
    }
    return OkStatus();
  }

  float f32(size_t i) const { return F(args_[i].scalar); }
  int32_t i32(size_t i) const { return args_[i].i32(); }
  const std::vector<uint8_t>& bytes(size_t i) const {
    return args_[i].array.bytes;
  }

  // The element count a kernel visits: n, bounded by the buffer.
  int32_t Count(size_t n_index, std::initializer_list<size_t> arrays) const {
    int64_t n = i32(n_index);
    for (size_t a : arrays) {
      n = std::min<int64_t>(n, static_cast<int64_t>(bytes(a).size() / 4));
    }
    return static_cast<int32_t>(std::max<int64_t>(n, 0));
  }

 private:
  std::string_view name_;
  std::span<const TypedValue> args_;
};

float Load(const std::vector<uint8_t>& v, int32_t i) {
  uint32_t bits;
  std::memcpy(&bits, v.data() + 4 * static_cast<size_t>(i), 4);
  return F(bits);
}

void Store(std::vector<uint8_t>& v, int32_t i, float f) {
  uint32_t bits = B(f);
  std::memcpy(v.data() + 4 * static_cast<size_t>(i), &bits, 4);
}

void StoreI32(std::vector<uint8_t>& v, int32_t i, int32_t x) {
  std::memcpy(v.data() + 4 * static_cast<size_t>(i), &x, 4);
}

float Abs(float v) { return v < 0.0f ? 0.0f - v : v; }

// Runs `body(i)` for the elements of thread g in visiting order.
template <typename Body>
void ForThread(uint32_t g, int32_t n, Body body) {
  for (int64_t i = g; i < n; i += kBenchThreads) body(static_cast<int32_t>(i));
}

enum class Reduction : uint8_t { kAbsSum, kSquareSum, kDot };

NamedOutputs Reduce(Reduction kind, const std::vector<uint8_t>& x,
                    const std::vector<uint8_t>* y, int32_t n) {
  std::vector<uint8_t> out(4 * kBenchThreads, 0);
  for (uint32_t g = 0; g < kBenchThreads; ++g) {
    float sum = 0.0f;
    ForThread(g, n, [&](int32_t i) {
      float v = Load(x, i);
      switch (kind) {
        case Reduction::kAbsSum: sum = sum + Abs(v); break;
        case Reduction::kSquareSum: sum = sum + v * v; break;
        case Reduction::kDot: sum = sum + v * Load(*y, i); break;
      }
    });
    Store(out, static_cast<int32_t>(g), sum);
  }
  return {{"out", std::move(out)}};
}

NamedOutputs ArgExtreme(bool largest, const std::vector<uint8_t>& x,
                        int32_t n) {
  std::vector<uint8_t> out(4 * kBenchThreads, 0);
  for (uint32_t g = 0; g < kBenchThreads; ++g) {
    float best = largest ? -1.0f : F(0x7F800000u);
    int32_t index = 0;
    ForThread(g, n, [&](int32_t i) {
      float v = Abs(Load(x, i));
      if (largest ? v > best : v < best) {
        best = v;
        index = i + 1;
      }
    });
    StoreI32(out, static_cast<int32_t>(g), index);
  }
  return {{"out", std::move(out)}};
}

NamedOutputs Rotm(std::vector<uint8_t> x, std::vector<uint8_t> y, int32_t n,
                  const std::vector<uint8_t>& param) {
  float flag = Load(param, 0), h11 = Load(param, 1), h21 = Load(param, 2),
        h12 = Load(param, 3), h22 = Load(param, 4);
  if (!(flag == -2.0f)) {
    for (uint32_t g = 0; g < kBenchThreads; ++g) {
      ForThread(g, n, [&](int32_t i) {
        float xi = Load(x, i), yi = Load(y, i), xo, yo;
        if (flag < 0.0f) {
          xo = h11 * xi + h12 * yi;
          yo = h21 * xi + h22 * yi;
        } else if (flag == 0.0f) {
          xo = xi + h12 * yi;
          yo = h21 * xi + yi;
        } else {
          xo = h11 * xi + yi;
          yo = h22 * yi - xi;
        }
        Store(x, i, xo);
        Store(y, i, yo);
      });
    }
  }
  return {{"x", std::move(x)}, {"y", std::move(y)}};
}

constexpr ScalarType kI = ScalarType::kI32;
constexpr ScalarType kF = ScalarType::kF32;
constexpr ScalarType kP = ScalarType::kPtr;

}  // namespace

std::vector<const BenchmarkVariant*> BenchmarkEntry::seeded() const {
  std::vector<const BenchmarkVariant*> out;
  for (const BenchmarkVariant& v : variants) {
    if (v.bug_class) out.push_back(&v);
  }
  return out;
}

std::string BenchmarkRoot() {
  if (const char* env = std::getenv("SIMT_FORGE_BENCH_DIR"); env && *env) {
    return env;
  }
  return SIMT_FORGE_BENCH_DIR;
}

std::vector<BenchmarkEntry> ListBenchmarks(const std::string& root) {
  std::vector<BenchmarkEntry> out;
  for (const char* name : kNames) {
    BenchmarkEntry e;
    e.name = name;
    e.dir = (fs::path(root) / name).string();
    e.kernel_path = (fs::path(e.dir) / "kernel.sir").string();
    e.harness_path = (fs::path(e.dir) / "harness.man").string();
    e.variants.push_back({std::nullopt, e.harness_path, ""});
    for (const SeededSpec& s : kSeeded) {
      e.variants.push_back(
          {s.bug_class, (fs::path(e.dir) / "variants" / s.file).string(),
           s.note});
    }
    out.push_back(std::move(e));
  }
  return out;
}

StatusOr<BenchmarkEntry> FindBenchmark(std::string_view name,
                                       const std::string& root) {
  for (BenchmarkEntry& e : ListBenchmarks(root)) {
    if (e.name == name) return std::move(e);
  }
  return MakeError(ErrorCode::kUnknownBenchmark,
                   StrCat("unknown benchmark '", name, "'"));
}

StatusOr<NamedOutputs> ReferenceResult(std::string_view name,
                                       std::span<const TypedValue> args) {
  Args a(name, args);
  if (name == "amax" || name == "amin") {
    SF_RETURN_IF_ERROR(a.Expect({kP, kI}));
    return ArgExtreme(name == "amax", a.bytes(0), a.Count(1, {0}));
  }
  if (name == "asum" || name == "nrm2") {
    SF_RETURN_IF_ERROR(a.Expect({kP, kI}));
    return Reduce(name == "asum" ? Reduction::kAbsSum : Reduction::kSquareSum,
                  a.bytes(0), nullptr, a.Count(1, {0}));
  }
  if (name == "dot") {
    SF_RETURN_IF_ERROR(a.Expect({kP, kP, kI}));
    return Reduce(Reduction::kDot, a.bytes(0), &a.bytes(1),
                  a.Count(2, {0, 1}));
  }
  if (name == "axpy") {
    SF_RETURN_IF_ERROR(a.Expect({kF, kP, kP, kI}));
    std::vector<uint8_t> y = a.bytes(2);
    float alpha = a.f32(0);
    int32_t n = a.Count(3, {1, 2});
    for (uint32_t g = 0; g < kBenchThreads; ++g) {
      ForThread(g, n, [&](int32_t i) {
        Store(y, i, alpha * Load(a.bytes(1), i) + Load(y, i));
      });
    }
    return NamedOutputs{{"y", std::move(y)}};
  }
  if (name == "copy") {
    SF_RETURN_IF_ERROR(a.Expect({kP, kP, kI}));
    std::vector<uint8_t> y = a.bytes(1);
    int32_t n = a.Count(2, {0, 1});
    std::memcpy(y.data(), a.bytes(0).data(), 4 * static_cast<size_t>(n));
    return NamedOutputs{{"y", std::move(y)}};
  }
  if (name == "swap") {
    SF_RETURN_IF_ERROR(a.Expect({kP, kP, kI}));
    std::vector<uint8_t> x = a.bytes(0), y = a.bytes(1);
    int32_t n = a.Count(2, {0, 1});
    std::swap_ranges(x.begin(), x.begin() + 4 * n, y.begin());
    return NamedOutputs{{"x", std::move(x)}, {"y", std::move(y)}};
  }
  if (name == "scal") {
    SF_RETURN_IF_ERROR(a.Expect({kF, kP, kI}));
    std::vector<uint8_t> x = a.bytes(1);
    float alpha = a.f32(0);
    int32_t n = a.Count(2, {1});
    for (int32_t i = 0; i < n; ++i) Store(x, i, alpha * Load(x, i));
    return NamedOutputs{{"x", std::move(x)}};
  }
  if (name == "rot") {
    SF_RETURN_IF_ERROR(a.Expect({kP, kP, kI, kF, kF}));
    std::vector<uint8_t> x = a.bytes(0), y = a.bytes(1);
    float c = a.f32(3), s = a.f32(4);
    int32_t n = a.Count(2, {0, 1});
    for (int32_t i = 0; i < n; ++i) {
      float xi = Load(x, i), yi = Load(y, i);
      Store(x, i, c * xi + s * yi);
      Store(y, i, c * yi - s * xi);
    }
    return NamedOutputs{{"x", std::move(x)}, {"y", std::move(y)}};
  }
  if (name == "rotm") {
    SF_RETURN_IF_ERROR(a.Expect({kP, kP, kI, kP}));
    if (a.bytes(3).size() < 20) {
      return MakeError(ErrorCode::kArgArityMismatch,
                       "rotm param needs 5 elements");
    }
    return Rotm(a.bytes(0), a.bytes(1), a.Count(2, {0, 1}), a.bytes(3));
  }
  return MakeError(ErrorCode::kUnknownBenchmark,
                   StrCat("no reference for '", name, "'"));
}

std::optional<std::string> CompareOutputs(const NamedOutputs& expected,
                                          const NamedOutputs& actual) {
  if (expected.size() != actual.size()) {
    return StrCat("expected ", expected.size(), " outputs, got ",
                  actual.size());
  }
  for (size_t k = 0; k < expected.size(); ++k) {
    const auto& [name, want] = expected[k];
    const auto& [got_name, got] = actual[k];
    if (name != got_name) {
      return StrCat("output ", k, " is '", got_name, "', expected '", name,
                    "'");
    }
    if (want.size() != got.size()) {
      return StrCat(name, ": size ", got.size(), " != ", want.size());
    }
    for (size_t i = 0; i < want.size(); ++i) {
      if (want[i] != got[i]) {
        return StrCat(name, ": first difference at byte ", i);
      }
    }
  }
  return std::nullopt;
}

StatusOr<DiffChecker> MakeDiffChecker(const HarnessManifest& manifest) {
  if (manifest.reference.empty()) {
    return MakeError(ErrorCode::kUnknownBenchmark,
                     StrCat(manifest.path, " declares no reference"));
  }
  // Probe once so unknown names fail up front.
  TestCase seed = SeedTestCase(manifest.args);
  StatusOr<NamedOutputs> probe = ReferenceResult(manifest.reference, seed.args);
  if (!probe.ok()) return probe.status();
  std::string name = manifest.reference;
  return DiffChecker([name](const TestCase& tc, const PhaseOutcome& outcome)
                         -> std::optional<std::string> {
    StatusOr<NamedOutputs> want = ReferenceResult(name, tc.args);
    if (!want.ok()) return want.status().ToString();
    return CompareOutputs(*want, outcome.outputs);
  });
}

Status ExportBenchmark(std::string_view name, const std::string& dest,
                       const std::string& root) {
  SF_ASSIGN_OR_RETURN(BenchmarkEntry entry, FindBenchmark(name, root));
  std::error_code ec;
  fs::path target = fs::path(dest) / entry.name;
  fs::create_directories(target, ec);
  if (!ec) {
    fs::copy(entry.dir, target,
             fs::copy_options::recursive | fs::copy_options::overwrite_existing,
             ec);
  }
  if (ec) {
    return MakeError(ErrorCode::kIo,
                     StrCat("export to ", target.string(), ": ", ec.message()));
  }
  return OkStatus();
}

}  // namespace simt_forge
