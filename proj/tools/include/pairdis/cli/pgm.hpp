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

#include <filesystem>
#include <vector>

#include "pairdis/tensor.hpp"

namespace pairdis::cli {

/// Tiles images [count, h, w] with values in [0,1] into a rows x cols grid
/// (row-major) and writes a binary 8-bit PGM (P5). Pixel = round(255 * v).
void write_pgm_grid(const std::filesystem::path& file, const Tensor& images, std::size_t rows,
                    std::size_t cols);

}  // namespace pairdis::cli
