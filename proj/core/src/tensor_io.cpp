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

#include "pairdis/tensor_io.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <json.hpp>
#include <ostream>
#include <string>

#include "pairdis/error.hpp"

namespace pairdis {

namespace {

constexpr char kMagic[] = "PDT1\n";
constexpr std::size_t kMagicSize = 5;

std::uint64_t to_little(std::uint64_t v) {
  if constexpr (std::endian::native == std::endian::big) {
    v = ((v & 0x00000000000000FFull) << 56) | ((v & 0x000000000000FF00ull) << 40) |
        ((v & 0x0000000000FF0000ull) << 24) | ((v & 0x00000000FF000000ull) << 8) |
        ((v & 0x000000FF00000000ull) >> 8) | ((v & 0x0000FF0000000000ull) >> 24) |
        ((v & 0x00FF000000000000ull) >> 40) | ((v & 0xFF00000000000000ull) >> 56);
  }
  return v;
}

}  // namespace

void write_tensor(std::ostream& out, const Tensor& t) {
  nlohmann::json header;
  header["dtype"] = "f64";
  header["shape"] = t.shape();
  out.write(kMagic, kMagicSize);
  const std::string line = header.dump() + "\n";
  out.write(line.data(), static_cast<std::streamsize>(line.size()));
  for (double v : t.data()) {
    const std::uint64_t bits = to_little(std::bit_cast<std::uint64_t>(v));
    char buf[8];
    std::memcpy(buf, &bits, 8);
    out.write(buf, 8);
  }
  if (!out) throw FormatError("pdt1: write failed");
}

Tensor read_tensor(std::istream& in) {
  char magic[kMagicSize];
  in.read(magic, kMagicSize);
  if (!in || std::memcmp(magic, kMagic, kMagicSize) != 0) {
    throw FormatError("pdt1: bad magic");
  }
  std::string line;
  if (!std::getline(in, line)) throw FormatError("pdt1: missing header");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(line);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("pdt1: header is not JSON: ") + e.what());
  }
  if (!header.is_object() || header.value("dtype", "") != "f64" ||
      !header.contains("shape") || !header["shape"].is_array()) {
    throw FormatError("pdt1: header must be {\"dtype\":\"f64\",\"shape\":[...]}");
  }
  Tensor::Shape shape;
  for (const auto& e : header["shape"]) {
    if (!e.is_number_unsigned()) throw FormatError("pdt1: shape entries must be unsigned");
    shape.push_back(e.get<std::size_t>());
  }
  std::vector<double> data(shape_size(shape));
  for (double& v : data) {
    char buf[8];
    in.read(buf, 8);
    if (!in) throw FormatError("pdt1: truncated payload");
    std::uint64_t bits;
    std::memcpy(&bits, buf, 8);
    v = std::bit_cast<double>(to_little(bits));
  }
  if (in.peek() != std::char_traits<char>::eof()) throw FormatError("pdt1: trailing bytes");
  return Tensor(std::move(shape), std::move(data));
}

void save_tensor(const std::filesystem::path& path, const Tensor& t) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("pdt1: cannot open " + path.string() + " for writing");
  write_tensor(out, t);
}

Tensor load_tensor(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("pdt1: cannot open " + path.string());
  return read_tensor(in);
}

}  // namespace pairdis
