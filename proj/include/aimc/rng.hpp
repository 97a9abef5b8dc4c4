/**
 * (C) Copyright 2026 aimcsim contributors. All Rights Reserved.
 *
 * This code is licensed under the Apache License, Version 2.0. You may
 * obtain a copy of this license in the LICENSE file in the root directory
 * of this source tree or at http://www.apache.org/licenses/LICENSE-2.0.
 */

#pragma once

#include <cstdint>

namespace aimc {

/* well-known derivation tags so independent consumers of the same base
 * stream never collide */
namespace rng_tag {
constexpr std::uint64_t kWeights = 0x57454947;
constexpr std::uint64_t kInputs = 0x494e5055;
constexpr std::uint64_t kProgram = 0x50524f47;
constexpr std::uint64_t kDrift = 0x44524946;
constexpr std::uint64_t kRead = 0x52454144;
constexpr std::uint64_t kTrain = 0x5452414e;
constexpr std::uint64_t kData = 0x44415441;
constexpr std::uint64_t kEval = 0x4556414c;
constexpr std::uint64_t kCalib = 0x43414c42;
} // namespace rng_tag

/**
 * Deterministic, explicitly seeded random stream.
 *
 * A stream is fully identified by (seed, stream_id): equal pairs produce
 * bit-identical integer sequences on every platform (the generator is pure
 * 64-bit integer arithmetic, xoshiro256++ seeded through splitmix64).
 * Substreams for parallel or structurally separate work are derived with
 * derive(), which never advances the parent. There is no global RNG state
 * anywhere in the library.
 */
class RngStream {
public:
  explicit RngStream(std::uint64_t seed = 0, std::uint64_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint64_t stream_id() const { return stream_id_; }

  /** child stream keyed by `key`; does not advance this stream */
  RngStream derive(std::uint64_t key) const;

  std::uint64_t next_u64();

  /** uniform double in [0, 1) with 53 random bits */
  double uniform();

  /** uniform double in [lo, hi) */
  double uniform(double lo, double hi);

  /** standard normal draw (ziggurat, 256 layers) */
  double normal();

  /** normal with given mean / std */
  double normal(double mean, double std_dev);

private:
  std::uint64_t seed_ = 0;
  std::uint64_t stream_id_ = 0;
  std::uint64_t s_[4] = {0, 0, 0, 0};
};

} // namespace aimc
