// Copyright 2026 The fiberq Authors
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

#ifndef FIBERQ_RANDOM_H_
#define FIBERQ_RANDOM_H_

#include <cstdint>
#include <initializer_list>
#include <limits>

namespace fiberq {

// Counter-based random stream. A stream is fully determined by a master seed
// and a tuple of integer keys (experiment tag, point, shot, site, ...), so
// any shot can be regenerated independently of execution order or thread
// count. The generator is SplitMix64 over a hashed key.
//
// Satisfies UniformRandomBitGenerator, but the uniform/normal helpers below
// should be preferred over <random> distributions: their output is
// specified bit-for-bit and does not depend on the standard library vendor.
class RandomStream {
 public:
  using result_type = std::uint64_t;

  explicit RandomStream(std::uint64_t seed) : state_(seed) {}

  static RandomStream derive(std::uint64_t master_seed,
                             std::initializer_list<std::uint64_t> keys);

  static constexpr result_type min() { return 0; }
  static constexpr result_type max() {
    return std::numeric_limits<result_type>::max();
  }

  result_type operator()() { return next(); }
  std::uint64_t next();

  // Uniform on [0, 1) with 53 bits of resolution.
  double uniform();
  // Standard normal via Box-Muller; caches the second variate.
  double normal();
  bool bernoulli(double p);

 private:
  std::uint64_t state_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

// Stream tags. Distinct tags keep the sub-streams of one experiment
// statistically independent.
enum class StreamTag : std::uint64_t {
  kShotNoise = 1,
  kPrepare = 2,
  kMeasure = 3,
  kLoading = 4,
  kSequence = 5,
  kPulseJitter = 6,
};

inline std::uint64_t key(StreamTag tag) {
  return static_cast<std::uint64_t>(tag);
}

}  // namespace fiberq

#endif  // FIBERQ_RANDOM_H_
