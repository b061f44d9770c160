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
#include <map>
#include <string>

#include "pairdis/model.hpp"

namespace pairdis {

// A checkpoint is a directory holding one PDT1 file per parameter
// (<name>.pdt) and manifest.txt:
//
//   pairdis-checkpoint 1
//   param <name> <shape>        (one per parameter, in model order)
//   config <key>=<value>        (ModelConfig key-values)
//   meta <key>=<value>          (free-form extras, e.g. seed)

void save_checkpoint(const std::filesystem::path& dir, const model::VaeModel& model,
                     const std::map<std::string, std::string>& meta = {});

struct LoadedCheckpoint {
  model::VaeModel model;
  std::map<std::string, std::string> meta;
};

LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir);

}  // namespace pairdis
