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


#include "pairdis/cli/pgm.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <string>

#include "pairdis/error.hpp"

namespace pairdis::cli {

void write_pgm_grid(const std::filesystem::path& file, const Tensor& images, std::size_t rows,
                    std::size_t cols) {
  if (images.rank() != 3) throw DimensionError("pgm: images must be [count, h, w]");
  const std::size_t count = images.dim(0), h = images.dim(1), w = images.dim(2);
  if (count != rows * cols) throw DimensionError("pgm: grid does not match image count");
  const std::size_t width = cols * w, height = rows * h;
  std::string pixels(width * height, '\0');
  for (std::size_t k = 0; k < count; ++k) {
    const std::size_t r0 = (k / cols) * h, c0 = (k % cols) * w;
    for (std::size_t y = 0; y < h; ++y) {
      for (std::size_t x = 0; x < w; ++x) {
        const double v = std::clamp(images[(k * h + y) * w + x], 0.0, 1.0);
        pixels[(r0 + y) * width + c0 + x] = static_cast<char>(std::lround(255.0 * v));
      }
    }
  }
  std::ofstream out(file, std::ios::binary);
  out << "P5\n" << width << " " << height << "\n255\n";
  out.write(pixels.data(), static_cast<std::streamsize>(pixels.size()));
  if (!out) throw FormatError("cannot write " + file.string());
}

}  // namespace pairdis::cli
