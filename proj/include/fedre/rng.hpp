// Copyright 2026 The FedRE Simulator Authors
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

#pragma once

#include <cmath>
#include <cstdint>

namespace fedre {

// Counter-based pseudo-random generator. Output i is a pure function of
// (seed, stream, i), so independent streams can be handed to clients,
// rounds and attack trials and replayed exactly, in any order, from any
// thread. The mixing function is the SplitMix64 finalizer applied to a
// keyed counter.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(derive_key(seed, stream)) {}

  // Derives a child generator. Children with distinct tags are
  // independent of each other and of the parent.
  CounterRng derive(std::uint64_t tag) const {
    CounterRng child(0);
    child.key_ = derive_key(key_, tag ^ 0x943f7e2a1b6c5d38ULL);
    return child;
  }

  std::uint64_t next_u64() { return mix(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  // Uniform in [0, 1), 53-bit resolution.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform in [lo, hi).
  double next_double(double lo, double hi) { return lo + (hi - lo) * next_double(); }

  // Uniform integer in [0, n). n must be > 0.
  std::uint64_t next_below(std::uint64_t n) {
    // Multiply-shift; bias is negligible for the desk-scale ranges used here.
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

  // Standard normal draw via Box-Muller. Always consumes two uniforms, so
  // the stream position stays a pure function of the draw count.
  double next_normal() {
    double u1 = next_double();
    double u2 = next_double();
    if (u1 <= 0.0) u1 = 0x1.0p-53;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

  std::uint64_t counter() const { return counter_; }

 private:
  static constexpr double kPi = 3.14159265358979323846;

  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
    return mix(mix(seed + 0x2545f4914f6cdd1dULL) ^ mix(stream + 0x6a09e667f3bcc909ULL));
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace fedre
