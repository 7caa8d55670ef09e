// Copyright 2026 The dadopt Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef DADOPT_RNG_HPP
#define DADOPT_RNG_HPP

#include <cstddef>
#include <cstdint>
#include <limits>

namespace dadopt {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based generator: the k-th output is mix64(key + (k+1) * golden).
/// Satisfies UniformRandomBitGenerator, so it plugs into <random>
/// distributions.
class CounterRng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr CounterRng(std::uint64_t key) : key_(key) {}

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

  constexpr result_type operator()() {
    counter_ += 0x9e3779b97f4a7c15ULL;
    return mix64(key_ + counter_);
  }

  /// Uniform double in [0, 1) from the top 53 bits.
  double uniform01() { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Per-(node, round) randomness. stream(i, t) depends only on (seed, i, t),
/// so draws are unaffected by thread scheduling or recording cadence.
class RngStreams {
 public:
  RngStreams(std::uint64_t seed, std::size_t node_count, std::size_t horizon)
      : seed_(seed), node_count_(node_count), horizon_(horizon) {}

  CounterRng stream(std::size_t node, std::size_t round) const;

  /// Stream reserved for run-level draws (e.g. a shared random x_init).
  CounterRng global_stream(std::uint64_t purpose) const;

  std::size_t node_count() const { return node_count_; }
  std::size_t horizon() const { return horizon_; }
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::size_t node_count_;
  std::size_t horizon_;
};

RngStreams derive_rng_streams(std::uint64_t seed, std::size_t node_count, std::size_t horizon);

}  // namespace dadopt

#endif  // DADOPT_RNG_HPP
