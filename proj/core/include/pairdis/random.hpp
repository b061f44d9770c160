/*
 * Copyright 2026 The pairdis Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstdint>

namespace pairdis {

/// Independent stream seed for (seed, stream) via splitmix64 finalisation.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

/// Named RNG streams so that, e.g., changing the shuffling never perturbs init.
namespace stream {
inline constexpr std::uint64_t kInit = 0;
inline constexpr std::uint64_t kShuffle = 1;
inline constexpr std::uint64_t kPairs = 2;
inline constexpr std::uint64_t kNoise = 3;
inline constexpr std::uint64_t kFolds = 4;
inline constexpr std::uint64_t kEval = 5;
inline constexpr std::uint64_t kData = 6;
inline constexpr std::uint64_t kLabels = 7;
inline constexpr std::uint64_t kLabelNoise = 8;
inline constexpr std::uint64_t kHeldout = 9;  // held-out evaluation images
}  // namespace stream

}  // namespace pairdis
