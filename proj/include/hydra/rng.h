// Copyright 2026 The Hydra Rank Authors.
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

#ifndef HYDRA_RNG_H_
#define HYDRA_RNG_H_

#include <cstdint>
#include <random>
#include <vector>

namespace hydra {

// Seeded generator whose derived draws do not depend on the standard
// library's distribution implementations, so sequences match across
// toolchains.
class Rng {
 public:
  explicit Rng(uint64_t seed) : engine_(seed) {}

  uint64_t NextU64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double Uniform();

  // Uniform integer in [lo, hi], both inclusive. Requires lo <= hi.
  int64_t UniformInt(int64_t lo, int64_t hi);

  double Normal(double mean = 0.0, double stddev = 1.0);

  template <typename T>
  void Shuffle(std::vector<T>& values) {
    for (size_t i = values.size(); i > 1; --i) {
      const auto j = static_cast<size_t>(UniformInt(0, static_cast<int64_t>(i) - 1));
      std::swap(values[i - 1], values[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

// SplitMix64 finalizer; derives independent child seeds.
uint64_t MixSeed(uint64_t seed, uint64_t salt);

}  // namespace hydra

#endif  // HYDRA_RNG_H_
