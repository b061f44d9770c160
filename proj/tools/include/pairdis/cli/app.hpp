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

#include <ostream>
#include <string>
#include <vector>

namespace pairdis::cli {

/// Exit codes of run().
inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;  // runtime error or non-finite output
inline constexpr int kExitUsage = 2;    // bad flags or missing inputs

/// Runs one command line; args[0] is the program name. Human-readable output
/// goes to out, diagnostics to err. Every command writes its artifacts and a
/// manifest.json into one run directory and prints "run-dir <path>" last.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pairdis::cli
