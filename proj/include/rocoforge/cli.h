// Copyright 2026 The Rocoforge Authors.
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

#ifndef ROCOFORGE_CLI_H_
#define ROCOFORGE_CLI_H_

#include <ostream>
#include <string_view>

namespace rocoforge {

inline constexpr std::string_view kToolVersion = "0.1.0";

// Exit codes besides 0 (success) and 1 (any other failure).
inline constexpr int kExitMissingInput = 2;
inline constexpr int kExitProviderDown = 3;

// Entry point of the `rocoforge` tool. Subcommands: ingest, ei,
// gen-captions, gen-images, embed, eval, report. Normal output goes to
// `out`, diagnostics to `err`.
int RunCli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace rocoforge

#endif  // ROCOFORGE_CLI_H_
