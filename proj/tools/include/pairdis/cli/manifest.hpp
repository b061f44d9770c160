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
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace pairdis::cli {

/// Hex SHA-1 of "blob <size>\0<bytes>", the object id git assigns to a file.
std::string git_blob_hash(const std::string& bytes);
std::string git_blob_hash_file(const std::filesystem::path& file);

/// Content hash over named inputs. A directory contributes every regular file
/// below it (name/relative-path). Lines "<blob-hash> <name>" are sorted and the
/// result hashed again, so the value depends on contents and names only.
std::string inputs_hash(const std::map<std::string, std::filesystem::path>& inputs);

/// "<UTC yyyymmddThhmmssZ>-seed<seed>-<command>" under root; a numeric suffix
/// is added if the directory already exists.
std::filesystem::path timestamped_run_dir(const std::filesystem::path& root,
                                          const std::string& command, std::uint64_t seed);

struct RunManifest {
  std::string command;
  std::uint64_t seed = 0;
  std::map<std::string, std::string> config;  // every option value, as text
  std::map<std::string, std::string> inputs;  // role -> path as given
  std::string input_hash;
  std::vector<std::string> outputs;  // relative to the run directory, sorted

  /// Writes manifest.json into run_dir.
  void write(const std::filesystem::path& run_dir) const;
  static RunManifest read(const std::filesystem::path& run_dir);
};

}  // namespace pairdis::cli
