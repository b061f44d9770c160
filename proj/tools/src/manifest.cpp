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


#include "pairdis/cli/manifest.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>
#include <iterator>
#include <memory>
#include <sstream>

#include "json.hpp"
#include "pairdis/error.hpp"

namespace pairdis::cli {

namespace {

std::string sha1_hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha1(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest, &len) != 1) {
    throw std::runtime_error("sha1: digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += kHex[digest[k] >> 4];
    out += kHex[digest[k] & 15];
  }
  return out;
}

std::string read_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw FormatError("cannot read " + file.string());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

}  // namespace

std::string git_blob_hash(const std::string& bytes) {
  std::string object = "blob " + std::to_string(bytes.size());
  object.push_back('\0');
  object += bytes;
  return sha1_hex(object);
}

std::string git_blob_hash_file(const std::filesystem::path& file) {
  return git_blob_hash(read_file(file));
}

std::string inputs_hash(const std::map<std::string, std::filesystem::path>& inputs) {
  std::vector<std::string> lines;
  for (const auto& [name, path] : inputs) {
    if (std::filesystem::is_directory(path)) {
      for (const auto& e : std::filesystem::recursive_directory_iterator(path)) {
        if (!e.is_regular_file()) continue;
        const std::string rel = std::filesystem::relative(e.path(), path).generic_string();
        lines.push_back(git_blob_hash_file(e.path()) + " " + name + "/" + rel);
      }
    } else {
      lines.push_back(git_blob_hash_file(path) + " " + name);
    }
  }
  std::sort(lines.begin(), lines.end());
  std::string joined;
  for (const std::string& l : lines) joined += l + "\n";
  return git_blob_hash(joined);
}

std::filesystem::path timestamped_run_dir(const std::filesystem::path& root,
                                          const std::string& command, std::uint64_t seed) {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y%m%dT%H%M%SZ", &tm);
  const std::string base = std::string(stamp) + "-seed" + std::to_string(seed) + "-" + command;
  std::filesystem::path dir = root / base;
  for (int k = 2; std::filesystem::exists(dir); ++k) dir = root / (base + "-" + std::to_string(k));
  return dir;
}

void RunManifest::write(const std::filesystem::path& run_dir) const {
  nlohmann::ordered_json j;
  j["format"] = "pairdis-run-manifest 1";
  j["command"] = command;
  j["seed"] = seed;
  j["config"] = config;
  j["inputs"] = inputs;
  j["input_hash"] = input_hash;
  std::vector<std::string> sorted = outputs;
  std::sort(sorted.begin(), sorted.end());
  j["outputs"] = sorted;
  std::ofstream out(run_dir / "manifest.json", std::ios::binary);
  out << j.dump(2) << "\n";
  if (!out) throw FormatError("cannot write manifest in " + run_dir.string());
}

RunManifest RunManifest::read(const std::filesystem::path& run_dir) {
  const nlohmann::json j = nlohmann::json::parse(read_file(run_dir / "manifest.json"));
  if (j.value("format", "") != "pairdis-run-manifest 1")
    throw FormatError("not a run manifest: " + run_dir.string());
  RunManifest m;
  m.command = j.at("command").get<std::string>();
  m.seed = j.at("seed").get<std::uint64_t>();
  m.config = j.at("config").get<std::map<std::string, std::string>>();
  m.inputs = j.at("inputs").get<std::map<std::string, std::string>>();
  m.input_hash = j.at("input_hash").get<std::string>();
  m.outputs = j.at("outputs").get<std::vector<std::string>>();
  return m;
}

}  // namespace pairdis::cli
