// nrt/rng.h

// Copyright 2026  The noisy-rnnt Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef NRT_RNG_H_
#define NRT_RNG_H_

#include <cmath>
#include <cstdint>
#include <numbers>

namespace nrt {

namespace internal {

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

inline constexpr std::uint64_t Mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace internal

// Counter-based random stream. The i-th draw is a pure function of
// (seed, i), so integer draws are bit-identical on every platform and a
// stream can be checkpointed as two integers.
class RngStream {
 public:
  RngStream() : RngStream(0) {}
  explicit RngStream(std::uint64_t seed, std::uint64_t counter = 0)
      : seed_(seed), key_(internal::Mix64(seed + internal::kGolden)),
        counter_(counter) {}

  std::uint64_t seed() const { return seed_; }
  std::uint64_t counter() const { return counter_; }

  std::uint64_t NextU64() {
    return internal::Mix64(key_ + (++counter_) * internal::kGolden);
  }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform() {
    return static_cast<double>(NextU64() >> 11) * 0x1.0p-53;
  }

  // Uniform integer on the closed range [lo, hi]; rejection sampling keeps it
  // unbiased and platform independent.
  std::int64_t UniformInt(std::int64_t lo, std::int64_t hi) {
    if (hi <= lo) return lo;
    const std::uint64_t span = static_cast<std::uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(NextU64());
    const std::uint64_t limit = (~std::uint64_t{0}) - (~std::uint64_t{0}) % span;
    std::uint64_t v;
    do {
      v = NextU64();
    } while (v >= limit);
    return lo + static_cast<std::int64_t>(v % span);
  }

  // Standard normal via Box-Muller. Always consumes exactly two draws.
  double Normal() {
    const double u1 = 1.0 - Uniform();  // (0, 1]
    const double u2 = Uniform();
    return std::sqrt(-2.0 * std::log(u1)) *
           std::cos(2.0 * std::numbers::pi * u2);
  }

  bool Bernoulli(double p) { return Uniform() < p; }

  // Independent child stream keyed by `id`; the parent is not advanced.
  RngStream Split(std::uint64_t id) const {
    return RngStream(internal::Mix64(key_ ^ internal::Mix64(id + 0x5851F42D4C957F2DULL)));
  }

  friend bool operator==(const RngStream &a, const RngStream &b) {
    return a.seed_ == b.seed_ && a.counter_ == b.counter_;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t key_;
  std::uint64_t counter_;
};

}  // namespace nrt

#endif  // NRT_RNG_H_
