// Copyright (c) 2026 The fda Authors. All Rights Reserved
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

#ifndef FDA_RNG_HPP_
#define FDA_RNG_HPP_

#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <random>

namespace fda {

/// Deterministic random source used by every stochastic operation.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The distributions are implemented here rather than taken from
/// <random> because the standard library distributions are allowed to differ
/// between implementations:
///   - uniform():  top 53 bits of one engine draw, scaled by 2^-53, in [0, 1)
///   - index(n):   rejection sampling on the 64-bit draw, exact uniform
///   - normal():   Marsaglia polar method, second variate cached
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  double uniform();
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
  std::size_t index(std::size_t n);
  double normal();
  bool coin() { return (engine_() >> 63) != 0; }

 private:
  std::mt19937_64 engine_;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

/// SplitMix64 finalizer; a bijection on 64-bit words.
std::uint64_t mix64(std::uint64_t x);

/// Derives an independent child seed from a parent seed and a stream path.
/// derive_seed(s, {a, b}) == derive_seed(derive_seed(s, {a}), {b}).
std::uint64_t derive_seed(std::uint64_t parent, std::initializer_list<std::uint64_t> path);

}  // namespace fda

#endif  // FDA_RNG_HPP_
