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

#include "pairdis/log.hpp"

#include <atomic>
#include <iostream>
#include <mutex>
#include <set>

namespace pairdis {

namespace {
std::atomic<LogLevel> g_level{LogLevel::info};
std::mutex g_mutex;

void emit(LogLevel level, std::string_view tag, std::string_view msg) {
  if (level < g_level.load()) return;
  std::lock_guard<std::mutex> lock(g_mutex);
  std::clog << "[pairdis " << tag << "] " << msg << '\n';
}
}  // namespace

void set_log_level(LogLevel level) { g_level.store(level); }
LogLevel log_level() { return g_level.load(); }

void log_info(std::string_view msg) { emit(LogLevel::info, "info", msg); }
void log_warning(std::string_view msg) { emit(LogLevel::warning, "warning", msg); }

void warn_once(const std::string& key, std::string_view msg) {
  static std::set<std::string> seen;
  {
    std::lock_guard<std::mutex> lock(g_mutex);
    if (!seen.insert(key).second) return;
  }
  log_warning(msg);
}

}  // namespace pairdis
