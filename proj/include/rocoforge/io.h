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

#ifndef ROCOFORGE_IO_H_
#define ROCOFORGE_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace rocoforge {

std::string ReadFile(const std::filesystem::path& path);
std::vector<std::uint8_t> ReadBytes(const std::filesystem::path& path);

// Writes to a sibling temp file and renames it into place, creating parent
// directories as needed.
void WriteFileAtomic(const std::filesystem::path& path, std::string_view contents);
void WriteFileAtomic(const std::filesystem::path& path, std::span<const std::uint8_t> contents);

// Non-empty lines with surrounding whitespace trimmed; lines starting with
// '#' are skipped.
std::vector<std::string> ReadDataLines(const std::filesystem::path& path);
std::vector<std::string> SplitDataLines(std::string_view text);

std::string_view Trim(std::string_view s);

}  // namespace rocoforge

#endif  // ROCOFORGE_IO_H_
