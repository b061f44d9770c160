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

#include "pairdis/datasets.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <unordered_set>

#include "pairdis/error.hpp"
#include "pairdis/random.hpp"

namespace pairdis::data {

namespace {

// Blob centres: the first ten points of a 4x4 lattice with spacing 3, row-major.
constexpr int kLatticeStart = 3;
constexpr int kLatticeStep = 3;
constexpr int kLatticeCols = 4;

constexpr double kLongArm = 7.0;
constexpr double kShortArm = 3.5;
constexpr double kCentre = 7.5;

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) out.push_back(cell);
  return out;
}

std::string strip_cr(std::string s) {
  if (!s.empty() && s.back() == '\r') s.pop_back();
  return s;
}

double parse_double(const std::string& s, const char* what) {
  try {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::logic_error&) {
    throw FormatError(std::string(what) + ": bad number '" + s + "'");
  }
}

std::size_t parse_index(const std::string& s, const char* what) {
  if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos) {
    throw FormatError(std::string(what) + ": bad index '" + s + "'");
  }
  return static_cast<std::size_t>(std::stoull(s));
}

}  // namespace

std::string to_string(FactorKind kind) {
  return kind == FactorKind::discrete ? "discrete" : "cyclic";
}

FactorKind parse_factor_kind(const std::string& s) {
  if (s == "discrete") return FactorKind::discrete;
  if (s == "cyclic") return FactorKind::cyclic;
  throw FormatError("unknown factor kind '" + s + "'");
}

std::vector<int> FactorTable::classes() const {
  if (kind != FactorKind::discrete) throw ContractError("factors: classes() on a cyclic factor");
  std::vector<int> out;
  out.reserve(values.size());
  for (double v : values) out.push_back(static_cast<int>(v));
  return out;
}

void FactorTable::validate() const {
  for (double v : values) {
    if (kind == FactorKind::discrete) {
      if (!(v >= 0.0) || v != std::floor(v)) {
        throw DomainError("factors: discrete values must be non-negative integers");
      }
    } else if (!(v >= 0.0 && v < 360.0)) {
      throw DomainError("factors: cyclic values must lie in [0, 360)");
    }
  }
}

// ---------------------------------------------------------------------------

Tensor render_blob(int cls, int dx, int dy, double brightness) {
  if (cls < 0 || cls >= static_cast<int>(kBlobClasses)) throw ContractError("blob: bad class");
  Tensor img({kImageSide, kImageSide});
  const int cx = kLatticeStart + kLatticeStep * (cls % kLatticeCols) + dx;
  const int cy = kLatticeStart + kLatticeStep * (cls / kLatticeCols) + dy;
  for (int y = cy - 1; y <= cy + 1; ++y)
    for (int x = cx - 1; x <= cx + 1; ++x)
      img.at(static_cast<std::size_t>(y), static_cast<std::size_t>(x)) = brightness;
  return img;
}

Tensor render_bar(double angle_deg, int thickness, double brightness) {
  Tensor img({kImageSide, kImageSide});
  const double rad = angle_deg * std::numbers::pi / 180.0;
  const double ux = std::cos(rad), uy = -std::sin(rad);  // image y grows downwards
  const double half = 0.5 * thickness;
  for (std::size_t y = 0; y < kImageSide; ++y) {
    for (std::size_t x = 0; x < kImageSide; ++x) {
      const double px = static_cast<double>(x) - kCentre;
      const double py = static_cast<double>(y) - kCentre;
      // Distance to the segment from -kShortArm to +kLongArm along u.
      const double along = std::clamp(px * ux + py * uy, -kShortArm, kLongArm);
      const double dist = std::hypot(px - along * ux, py - along * uy);
      const double cover = std::clamp(half + 0.5 - dist, 0.0, 1.0);
      img.at(y, x) = brightness * cover;
    }
  }
  return img;
}

SyntheticDataset gen_synthetic(const std::string& name, std::size_t n, std::uint64_t seed) {
  if (n < 2) throw ContractError("gen_synthetic: n must be >= 2");
  std::mt19937_64 rng(derive_seed(seed, stream::kData));
  std::uniform_real_distribution<double> bright(0.6, 1.0);
  SyntheticDataset out;
  out.images = Tensor({n, kImageSide, kImageSide});
  const std::size_t plane = kImageSide * kImageSide;
  auto place = [&](std::size_t k, const Tensor& img) {
    std::copy(img.data().begin(), img.data().end(),
              out.images.data().begin() + static_cast<std::ptrdiff_t>(k * plane));
  };

  if (name == "blobs") {
    out.factors.kind = FactorKind::discrete;
    std::uniform_int_distribution<int> cls(0, static_cast<int>(kBlobClasses) - 1);
    std::uniform_int_distribution<int> jitter(-1, 1);
    for (std::size_t k = 0; k < n; ++k) {
      const int c = cls(rng);
      const int dx = jitter(rng);
      const int dy = jitter(rng);
      place(k, render_blob(c, dx, dy, bright(rng)));
      out.factors.values.push_back(c);
    }
  } else if (name == "bars") {
    out.factors.kind = FactorKind::cyclic;
    std::uniform_real_distribution<double> angle(0.0, 360.0);
    std::uniform_int_distribution<int> thick(1, 2);
    for (std::size_t k = 0; k < n; ++k) {
      const double t = angle(rng);
      const int w = thick(rng);
      place(k, render_bar(t, w, bright(rng)));
      out.factors.values.push_back(t);
    }
  } else {
    throw ContractError("gen_synthetic: unknown dataset '" + name + "' (expected blobs|bars)");
  }
  return out;
}

// ---------------------------------------------------------------------------

void LabelGenConfig::validate() const {
  if (!(proportion > 0.0 && proportion <= 1.0)) {
    throw ContractError("labels: proportion must lie in (0, 1]");
  }
  if (!(rbf_sigma > 0.0)) throw ContractError("labels: rbf_sigma must be > 0");
  if (!(noise_gamma >= 0.0)) throw ContractError("labels: gamma must be >= 0");
  if (kind == sim::LabelKind::binary && noise_gamma > 1.0) {
    throw ContractError("labels: binary flip probability gamma must be <= 1");
  }
}

std::size_t pair_count(std::size_t n, double proportion) {
  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  if (total == 0) throw ContractError("pair_count: need n >= 2");
  // Guard against products like 0.1 * 60 landing a hair above an integer.
  const double raw = proportion * static_cast<double>(total);
  const double m = std::ceil(raw * (1.0 - 1e-12));
  return static_cast<std::size_t>(std::clamp<double>(m, 1.0, static_cast<double>(total)));
}

std::vector<std::pair<std::size_t, std::size_t>> sample_pairs(std::size_t n, std::size_t m,
                                                              std::uint64_t seed) {
  const std::uint64_t total = static_cast<std::uint64_t>(n) * (n - 1) / 2;
  if (m > total) throw ContractError("sample_pairs: more pairs requested than exist");
  std::mt19937_64 rng(seed);
  // Floyd's algorithm: a uniform m-subset of [0, total).
  std::unordered_set<std::uint64_t> chosen;
  chosen.reserve(m * 2);
  std::vector<std::uint64_t> picks;
  picks.reserve(m);
  for (std::uint64_t j = total - m; j < total; ++j) {
    std::uniform_int_distribution<std::uint64_t> draw(0, j);
    const std::uint64_t t = draw(rng);
    const std::uint64_t v = chosen.count(t) ? j : t;
    chosen.insert(v);
    picks.push_back(v);
  }
  std::sort(picks.begin(), picks.end());

  // Row i (pairs (i, j > i)) starts at offset(i) = i * n - i * (i + 1) / 2.
  auto offset = [n](std::uint64_t i) { return i * n - i * (i + 1) / 2; };
  std::vector<std::pair<std::size_t, std::size_t>> out;
  out.reserve(m);
  std::uint64_t i = 0;
  for (std::uint64_t k : picks) {  // sorted, so the row index only moves forward
    while (offset(i + 1) <= k) ++i;
    out.emplace_back(static_cast<std::size_t>(i), static_cast<std::size_t>(i + 1 + k - offset(i)));
  }
  return out;
}

double angular_difference(double a_deg, double b_deg) {
  double d = std::fmod(std::abs(a_deg - b_deg), 360.0);
  return std::min(d, 360.0 - d);
}

sim::PairBatch make_binary_labels(const FactorTable& t, const LabelGenConfig& cfg) {
  cfg.validate();
  if (t.kind != FactorKind::discrete) {
    throw ContractError("binary labels need a discrete factor");
  }
  t.validate();
  sim::PairBatch out;
  for (const auto& [i, j] :
       sample_pairs(t.size(), pair_count(t.size(), cfg.proportion), derive_seed(cfg.seed, stream::kLabels))) {
    out.push_back(i, j, t.values[i] == t.values[j] ? 1.0 : 0.0);
  }
  return out;
}

sim::PairBatch make_rbf_labels(const FactorTable& t, const LabelGenConfig& cfg) {
  cfg.validate();
  if (t.kind != FactorKind::cyclic) throw ContractError("RBF labels need a cyclic factor");
  t.validate();
  sim::PairBatch out;
  const double s2 = cfg.rbf_sigma * cfg.rbf_sigma;
  for (const auto& [i, j] :
       sample_pairs(t.size(), pair_count(t.size(), cfg.proportion), derive_seed(cfg.seed, stream::kLabels))) {
    const double d = angular_difference(t.values[i], t.values[j]);
    out.push_back(i, j, std::exp(-d * d / s2));
  }
  return out;
}

sim::PairBatch inject_noise(const sim::PairBatch& pairs, const LabelGenConfig& cfg) {
  cfg.validate();
  if (cfg.noise_gamma == 0.0) return pairs;
  sim::PairBatch out = pairs;
  std::mt19937_64 rng(derive_seed(cfg.seed, stream::kLabelNoise));
  if (cfg.kind == sim::LabelKind::binary) {
    std::bernoulli_distribution flip(cfg.noise_gamma);
    for (double& y : out.y) {
      if (flip(rng)) y = 1.0 - y;
    }
  } else {
    std::normal_distribution<double> noise(0.0, std::sqrt(cfg.noise_gamma));
    for (double& y : out.y) y = std::clamp(y + noise(rng), 0.0, 1.0);
  }
  return out;
}

sim::PairBatch make_labels(const FactorTable& t, const LabelGenConfig& cfg) {
  const sim::PairBatch clean =
      cfg.kind == sim::LabelKind::binary ? make_binary_labels(t, cfg) : make_rbf_labels(t, cfg);
  return inject_noise(clean, cfg);
}

// ---------------------------------------------------------------------------

void write_factors_csv(std::ostream& out, const FactorTable& t) {
  out << "index,kind,value\n";
  const std::string kind = to_string(t.kind);
  for (std::size_t k = 0; k < t.size(); ++k) {
    out << k << ',' << kind << ',' << format_double(t.values[k]) << '\n';
  }
}

FactorTable read_factors_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "index,kind,value") {
    throw FormatError("factors csv: expected header 'index,kind,value'");
  }
  FactorTable t;
  bool first = true;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 3) throw FormatError("factors csv: bad row '" + line + "'");
    if (parse_index(cells[0], "factors csv") != t.values.size()) {
      throw FormatError("factors csv: indices must be 0..n-1 in order");
    }
    const FactorKind kind = parse_factor_kind(cells[1]);
    if (first) t.kind = kind;
    if (kind != t.kind) throw FormatError("factors csv: mixed factor kinds");
    first = false;
    t.values.push_back(parse_double(cells[2], "factors csv"));
  }
  t.validate();
  return t;
}

void write_pairs_csv(std::ostream& out, const sim::PairBatch& pairs) {
  out << "i,j,y\n";
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    out << pairs.i_idx[k] << ',' << pairs.j_idx[k] << ',' << format_double(pairs.y[k]) << '\n';
  }
}

sim::PairBatch read_pairs_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != "i,j,y") {
    throw FormatError("pairs csv: expected header 'i,j,y'");
  }
  sim::PairBatch pairs;
  while (std::getline(in, line)) {
    line = strip_cr(line);
    if (line.empty()) continue;
    const auto cells = split_csv(line);
    if (cells.size() != 3) throw FormatError("pairs csv: bad row '" + line + "'");
    pairs.push_back(parse_index(cells[0], "pairs csv"), parse_index(cells[1], "pairs csv"),
                    parse_double(cells[2], "pairs csv"));
  }
  return pairs;
}

}  // namespace pairdis::data
