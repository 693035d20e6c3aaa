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

#ifndef ROCOFORGE_HASHING_H_
#define ROCOFORGE_HASHING_H_

#include <array>
#include <cstdint>
#include <filesystem>
#include <initializer_list>
#include <span>
#include <string>
#include <string_view>

namespace rocoforge {

using Digest = std::array<std::uint8_t, 32>;

// SHA-256 of a byte range. Backed by OpenSSL.
Digest Sha256(std::span<const std::uint8_t> bytes);
Digest Sha256(std::string_view text);
Digest Sha256File(const std::filesystem::path& path);

std::string ToHex(const Digest& digest);

// Incremental hasher for multi-part keys (e.g. provider name followed by
// content). Each part is length-prefixed so ("ab","c") != ("a","bc").
class Sha256Builder {
 public:
  Sha256Builder();
  ~Sha256Builder();
  Sha256Builder(const Sha256Builder&) = delete;
  Sha256Builder& operator=(const Sha256Builder&) = delete;

  Sha256Builder& Add(std::span<const std::uint8_t> bytes);
  Sha256Builder& Add(std::string_view text);
  Sha256Builder& AddRaw(std::span<const std::uint8_t> bytes);
  Digest Finish();

 private:
  void* ctx_;
};

// Derives a 64-bit stream seed from a global seed and a list of labels such as
// a caption id and a policy name. Stable across platforms and thread counts.
std::uint64_t DeriveSeed(std::uint64_t seed, std::initializer_list<std::string_view> labels);

}  // namespace rocoforge

#endif  // ROCOFORGE_HASHING_H_
