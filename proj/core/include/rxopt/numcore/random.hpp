// Copyright 2026 The rxopt Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace rxopt {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
///
/// The key is the 64-bit master seed; the upper half of the 128-bit counter
/// is the stream index and the lower half counts blocks within the stream.
/// Two streams with different indices therefore never share a counter value,
/// and any (master_seed, stream_index) pair can be materialized on any thread
/// without shared state.
class Philox4x32 {
 public:
  using Block = std::array<std::uint32_t, 4>;
  using Key = std::array<std::uint32_t, 2>;

  static Block generate(Block counter, Key key);
};

/// Reproducible stream of random draws identified by (master_seed, stream_index).
class SeedStream {
 public:
  using result_type = std::uint64_t;

  SeedStream(std::uint64_t master_seed, std::uint64_t stream_index);

  std::uint64_t master_seed() const noexcept { return master_seed_; }
  std::uint64_t stream_index() const noexcept { return stream_index_; }

  std::uint64_t next_u64();
  /// Uniform on the open interval (0, 1).
  double uniform();
  /// Standard normal draw (Box-Muller; the second variate of each pair is cached).
  double normal();
  /// Uniform integer in [0, bound); bound must be positive.
  std::uint64_t below(std::uint64_t bound);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }
  result_type operator()() { return next_u64(); }

 private:
  void refill();

  std::uint64_t master_seed_;
  std::uint64_t stream_index_;
  std::uint64_t block_counter_ = 0;
  std::array<std::uint64_t, 2> buffer_{};
  unsigned buffered_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

SeedStream derive_stream(std::uint64_t master_seed, std::uint64_t run_index);

/// Combines a parent seed with a child tag into a new master seed
/// (splitmix64 finalizer over both words). Used for hierarchical seeding.
std::uint64_t mix_seed(std::uint64_t parent, std::uint64_t tag);

/// FNV-1a over bytes; stable across platforms.
std::uint64_t stable_hash(const void* data, std::size_t size);

}  // namespace rxopt
