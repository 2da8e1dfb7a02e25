// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <cstdint>
#include <initializer_list>

#include "pbigamp/types.hpp"

namespace pbigamp {

/// Stateless counter-based generator: every draw is a pure function of
/// (seed, stream, counter), so any entry of any trial can be regenerated
/// in isolation and work can be split across threads in any order.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0);

  /// Independent generator for a named sub-stream.
  CounterRng substream(std::uint64_t stream) const;

  std::uint64_t bits(std::uint64_t counter) const;

  /// Uniform on the open interval (0, 1).
  double uniform(std::uint64_t counter) const;

  /// Circularly-symmetric complex Gaussian with E|z|^2 = variance.
  /// Consumes counters 2c and 2c+1 of the underlying bit stream.
  cplx complex_normal(std::uint64_t counter, double variance = 1.0) const;

  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_;
};

std::uint64_t mix64(std::uint64_t x);

/// Folds a list of words into one 64-bit seed. Order-sensitive.
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> words);

/// Bit pattern of a double, for hashing real-valued grid coordinates.
std::uint64_t double_bits(double v);

// Fixed sub-stream identifiers used by the samplers.
namespace streams {
inline constexpr std::uint64_t kSupport = 0x5355505054ULL;
inline constexpr std::uint64_t kGain = 0x4741494eULL;
inline constexpr std::uint64_t kSignal = 0x5349474eULL;
inline constexpr std::uint64_t kNoise = 0x4e4f4953ULL;
inline constexpr std::uint64_t kInit = 0x494e4954ULL;
}  // namespace streams

}  // namespace pbigamp
