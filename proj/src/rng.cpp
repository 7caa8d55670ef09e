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

#include "dadopt/rng.hpp"

#include <stdexcept>
#include <string>

namespace dadopt {

namespace {

// Distinct domain tags keep node streams and global streams apart.
constexpr std::uint64_t kNodeTag = 0x6e6f64655f726e67ULL;
constexpr std::uint64_t kGlobalTag = 0x676c6f62616c5f72ULL;

}  // namespace

CounterRng RngStreams::stream(std::size_t node, std::size_t round) const {
  if (node >= node_count_) {
    throw std::out_of_range("rng stream requested for node " + std::to_string(node) + " of " +
                            std::to_string(node_count_));
  }
  std::uint64_t key = mix64(seed_ ^ kNodeTag);
  key = mix64(key + static_cast<std::uint64_t>(node));
  key = mix64(key ^ (static_cast<std::uint64_t>(round) * 0xd1b54a32d192ed03ULL));
  return CounterRng(key);
}

CounterRng RngStreams::global_stream(std::uint64_t purpose) const {
  return CounterRng(mix64(mix64(seed_ ^ kGlobalTag) + purpose));
}

RngStreams derive_rng_streams(std::uint64_t seed, std::size_t node_count, std::size_t horizon) {
  if (node_count == 0) throw std::invalid_argument("rng streams need at least one node");
  return RngStreams(seed, node_count, horizon);
}

}  // namespace dadopt
