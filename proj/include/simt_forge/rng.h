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

#ifndef SIMT_FORGE_RNG_H_
#define SIMT_FORGE_RNG_H_

#include <cstdint>

namespace simt_forge {

// Counter-based generator: the n-th output is a pure function of
// (key, n), so a stream position is just the counter and streams split by
// deriving a fresh key. Outputs are the SplitMix64 finalizer applied to
// key + n * golden-ratio increment.
//
// Bounded draws use Lemire's multiply-shift with rejection so results do not
// depend on the standard library's distribution implementations.
class CounterRng {
 public:
  CounterRng() = default;
  explicit CounterRng(uint64_t seed) : key_(Mix(seed)) {}
  CounterRng(uint64_t key, uint64_t counter) : key_(key), counter_(counter) {}

  uint64_t Next();
  // Uniform in [0, bound). bound must be non-zero.
  uint64_t Uniform(uint64_t bound);
  // Uniform in [lo, hi].
  int64_t UniformRange(int64_t lo, int64_t hi);
  // True with probability numerator / denominator.
  bool Chance(uint64_t numerator, uint64_t denominator);
  // Uniform in [0, 1).
  double NextDouble();

  // Independent child stream `index`. Does not advance this stream.
  CounterRng Split(uint64_t index) const;

  uint64_t key() const { return key_; }
  uint64_t counter() const { return counter_; }

  friend bool operator==(const CounterRng&, const CounterRng&) = default;

  static uint64_t Mix(uint64_t x);

 private:
  uint64_t key_ = 0;
  uint64_t counter_ = 0;
};

}  // namespace simt_forge

#endif  // SIMT_FORGE_RNG_H_
