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

#include "pairdis/checkpoint.hpp"

#include <fstream>
#include <sstream>

#include "pairdis/error.hpp"
#include "pairdis/tensor_io.hpp"

namespace pairdis {

namespace {
constexpr const char* kManifest = "manifest.txt";
constexpr const char* kHeader = "pairdis-checkpoint 1";
}  // namespace

void save_checkpoint(const std::filesystem::path& dir, const model::VaeModel& model,
                     const std::map<std::string, std::string>& meta) {
  std::filesystem::create_directories(dir);
  std::ofstream manifest(dir / kManifest, std::ios::trunc);
  if (!manifest) throw FormatError("checkpoint: cannot write " + (dir / kManifest).string());
  manifest << kHeader << '\n';
  const auto& names = model.parameter_names();
  const auto& params = model.parameters();
  for (std::size_t k = 0; k < params.size(); ++k) {
    save_tensor(dir / (names[k] + ".pdt"), params[k]);
    manifest << "param " << names[k] << ' ' << shape_string(params[k].shape()) << '\n';
  }
  for (const auto& [key, value] : model.config().to_key_values()) {
    manifest << "config " << key << '=' << value << '\n';
  }
  for (const auto& [key, value] : meta) manifest << "meta " << key << '=' << value << '\n';
  if (!manifest) throw FormatError("checkpoint: manifest write failed");
}

LoadedCheckpoint load_checkpoint(const std::filesystem::path& dir) {
  std::ifstream manifest(dir / kManifest);
  if (!manifest) throw FormatError("checkpoint: no manifest in " + dir.string());
  std::string line;
  if (!std::getline(manifest, line) || line != kHeader) {
    throw FormatError("checkpoint: unrecognised manifest header in " + dir.string());
  }
  std::vector<std::string> param_names;
  std::map<std::string, std::string> config, meta;
  while (std::getline(manifest, line)) {
    if (line.empty()) continue;
    const auto space = line.find(' ');
    if (space == std::string::npos) throw FormatError("checkpoint: bad manifest line: " + line);
    const std::string tag = line.substr(0, space);
    const std::string rest = line.substr(space + 1);
    if (tag == "param") {
      param_names.push_back(rest.substr(0, rest.find(' ')));
    } else if (tag == "config" || tag == "meta") {
      const auto eq = rest.find('=');
      if (eq == std::string::npos) throw FormatError("checkpoint: bad manifest line: " + line);
      (tag == "config" ? config : meta)[rest.substr(0, eq)] = rest.substr(eq + 1);
    } else {
      throw FormatError("checkpoint: unknown manifest tag '" + tag + "'");
    }
  }
  model::VaeModel model(model::ModelConfig::from_key_values(config), 0);
  std::map<std::string, Tensor> named;
  for (const std::string& name : param_names) named[name] = load_tensor(dir / (name + ".pdt"));
  model.load_parameters(named);
  return {std::move(model), std::move(meta)};
}

}  // namespace pairdis
