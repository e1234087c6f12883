// Copyright 2026 The GraphSentry Authors. All Rights Reserved.
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


// Seeded generator with platform-independent derived distributions.
//
// std::mt19937_64 has a fully specified output sequence, but the standard
// distributions do not; the conversions here are written out so fixtures and
// markers are byte-identical across standard libraries.

#ifndef GRAPHSENTRY_RANDOM_H_
#define GRAPHSENTRY_RANDOM_H_

#include <cmath>
#include <cstdint>
#include <random>

namespace graphsentry {

class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t Next() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double Uniform() { return static_cast<double>(Next() >> 11) * 0x1.0p-53; }

  double Uniform(double lo, double hi) { return lo + (hi - lo) * Uniform(); }

  float UniformF(float lo, float hi) {
    return static_cast<float>(Uniform(lo, hi));
  }

  // Uniform integer on [lo, hi] by rejection, no modulo bias.
  int64_t Int(int64_t lo, int64_t hi) {
    const uint64_t span = static_cast<uint64_t>(hi - lo) + 1;
    if (span == 0) return static_cast<int64_t>(Next());
    const uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    uint64_t x;
    do {
      x = Next();
    } while (x >= limit);
    return lo + static_cast<int64_t>(x % span);
  }

  bool Bernoulli(double p) { return Uniform() < p; }

  // Standard normal via Box-Muller; the second variate is discarded.
  double Normal() {
    double u1 = Uniform();
    while (u1 <= 0.0) u1 = Uniform();
    const double u2 = Uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace graphsentry

#endif  // GRAPHSENTRY_RANDOM_H_
