// Copyright 2026 The liketrial Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace liketrial::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitUsage = 2;
/// `monitor` reached end of input before the trial stopped.
inline constexpr int kExitIncomplete = 3;
inline constexpr int kExitStoppedHigh = 10;
inline constexpr int kExitStoppedLow = 11;
inline constexpr int kExitStoppedMaxN = 12;

/// Runs one invocation. `args` excludes the program name. Output goes to
/// `out`, diagnostics to `err`; `in` feeds `monitor`. Returns the exit code.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
            std::ostream& err);

}  // namespace liketrial::cli
