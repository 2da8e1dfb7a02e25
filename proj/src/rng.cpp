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

#include "pbigamp/rng.hpp"

#include <bit>
#include <cmath>
#include <numbers>

namespace pbigamp {

std::uint64_t mix64(std::uint64_t x) {
  // splitmix64 finalizer
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> words) {
  std::uint64_t h = mix64(base);
  for (std::uint64_t w : words) h = mix64(h ^ mix64(w + 0x632be59bd9b4e019ULL));
  return h;
}

std::uint64_t double_bits(double v) { return std::bit_cast<std::uint64_t>(v); }

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(derive_seed(seed, {stream})) {}

CounterRng CounterRng::substream(std::uint64_t stream) const { return CounterRng(key_, stream); }

std::uint64_t CounterRng::bits(std::uint64_t counter) const {
  // Two rounds keep neighbouring counters decorrelated.
  return mix64(mix64(key_ ^ counter) + counter);
}

double CounterRng::uniform(std::uint64_t counter) const {
  return (static_cast<double>(bits(counter) >> 11) + 0.5) * 0x1.0p-53;
}

cplx CounterRng::complex_normal(std::uint64_t counter, double variance) const {
  const double u1 = uniform(2 * counter);
  const double u2 = uniform(2 * counter + 1);
  const double r = std::sqrt(-variance * std::log(u1));
  const double phi = 2.0 * std::numbers::pi * u2;
  return {r * std::cos(phi), r * std::sin(phi)};
}

}  // namespace pbigamp
