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

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "pairdis/similarity.hpp"
#include "pairdis/tensor.hpp"

namespace pairdis::data {

inline constexpr std::size_t kImageSide = 16;
inline constexpr std::size_t kBlobClasses = 10;

enum class FactorKind { discrete, cyclic };

std::string to_string(FactorKind kind);
FactorKind parse_factor_kind(const std::string& s);

/// Ground-truth factor per instance: a class id, or an angle in degrees [0, 360).
struct FactorTable {
  FactorKind kind = FactorKind::discrete;
  std::vector<double> values;

  std::size_t size() const noexcept { return values.size(); }
  /// Class ids as integers; throws for cyclic tables.
  std::vector<int> classes() const;
  void validate() const;
};

struct SyntheticDataset {
  Tensor images;  // [n, 16, 16], values in [0, 1]
  FactorTable factors;
};

/// "blobs": a 3x3 blob at one of 10 lattice positions (the class), with brightness
/// in [0.6, 1.0] and a one-pixel positional jitter as nuisance.
/// "bars": a bar through the image centre at angle t in [0, 360) (the factor), with
/// a long arm towards t and a short arm towards t + 180 so that t and t + 180 are
/// near-identical but distinguishable; nuisance is thickness {1, 2} and brightness.
SyntheticDataset gen_synthetic(const std::string& name, std::size_t n, std::uint64_t seed);

/// Renders one bars image; exposed for geometry tests.
Tensor render_bar(double angle_deg, int thickness, double brightness);
/// Renders one blobs image; class in [0, 10), offsets in {-1, 0, 1}.
Tensor render_blob(int cls, int dx, int dy, double brightness);

struct LabelGenConfig {
  double proportion = 1e-4;  // fraction of all n(n-1)/2 unordered pairs
  double rbf_sigma = 30.0;   // degrees
  double noise_gamma = 0.0;  // flip probability (binary) or noise variance (real)
  sim::LabelKind kind = sim::LabelKind::binary;
  std::uint64_t seed = 0;

  void validate() const;
};

/// ceil(proportion * n(n-1)/2), at least 1 and at most n(n-1)/2.
std::size_t pair_count(std::size_t n, double proportion);

/// m distinct unordered pairs (i < j), uniform without replacement, sorted.
std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(std::size_t n, std::size_t m,
                                                              std::uint64_t seed);

/// Cyclic difference in degrees, in [0, 180].
double angular_difference(double a_deg, double b_deg);

/// y = 1(t_i == t_j) on sampled pairs. Discrete factors only.
sim::PairBatch make_binary_labels(const FactorTable& t, const LabelGenConfig& cfg);
/// y = exp(-delta(t_i, t_j)^2 / sigma^2) on sampled pairs. Cyclic factors only.
sim::PairBatch make_rbf_labels(const FactorTable& t, const LabelGenConfig& cfg);
/// Binary: flip each label with probability gamma. Real: y <- clip(y + e, 0, 1),
/// e ~ N(0, gamma) with gamma the variance.
sim::PairBatch inject_noise(const sim::PairBatch& pairs, const LabelGenConfig& cfg);
/// Labels of cfg.kind followed by inject_noise.
sim::PairBatch make_labels(const FactorTable& t, const LabelGenConfig& cfg);

// CSV files: factors "index,kind,value"; pairs "i,j,y" (0-based indices).
void write_factors_csv(std::ostream& out, const FactorTable& t);
FactorTable read_factors_csv(std::istream& in);
void write_pairs_csv(std::ostream& out, const sim::PairBatch& pairs);
sim::PairBatch read_pairs_csv(std::istream& in);

}  // namespace pairdis::data
