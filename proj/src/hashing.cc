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

#include "rocoforge/hashing.h"

#include <openssl/evp.h>

#include <fstream>
#include <vector>

#include "rocoforge/errors.h"

namespace rocoforge {

namespace {

EVP_MD_CTX* Ctx(void* p) { return static_cast<EVP_MD_CTX*>(p); }

void AppendLength(Sha256Builder& b, std::uint64_t n) {
  std::array<std::uint8_t, 8> le{};
  for (int i = 0; i < 8; ++i) le[i] = static_cast<std::uint8_t>(n >> (8 * i));
  b.AddRaw(le);
}

}  // namespace

Sha256Builder::Sha256Builder() : ctx_(EVP_MD_CTX_new()) {
  if (ctx_ == nullptr || EVP_DigestInit_ex(Ctx(ctx_), EVP_sha256(), nullptr) != 1) {
    throw Error("sha256: digest init failed");
  }
}

Sha256Builder::~Sha256Builder() { EVP_MD_CTX_free(Ctx(ctx_)); }

Sha256Builder& Sha256Builder::AddRaw(std::span<const std::uint8_t> bytes) {
  EVP_DigestUpdate(Ctx(ctx_), bytes.data(), bytes.size());
  return *this;
}

Sha256Builder& Sha256Builder::Add(std::span<const std::uint8_t> bytes) {
  AppendLength(*this, bytes.size());
  return AddRaw(bytes);
}

Sha256Builder& Sha256Builder::Add(std::string_view text) {
  return Add(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()),
                                           text.size()));
}

Digest Sha256Builder::Finish() {
  Digest out{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(Ctx(ctx_), out.data(), &len);
  return out;
}

Digest Sha256(std::span<const std::uint8_t> bytes) {
  Sha256Builder b;
  b.AddRaw(bytes);
  return b.Finish();
}

Digest Sha256(std::string_view text) {
  return Sha256(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(text.data()),
                                              text.size()));
}

Digest Sha256File(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  Sha256Builder b;
  std::vector<char> buf(1 << 16);
  while (in) {
    in.read(buf.data(), static_cast<std::streamsize>(buf.size()));
    auto got = static_cast<std::size_t>(in.gcount());
    if (got == 0) break;
    b.AddRaw(std::span<const std::uint8_t>(reinterpret_cast<const std::uint8_t*>(buf.data()), got));
  }
  return b.Finish();
}

std::string ToHex(const Digest& digest) {
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(64);
  for (auto byte : digest) {
    out.push_back(kHex[byte >> 4]);
    out.push_back(kHex[byte & 0xF]);
  }
  return out;
}

std::uint64_t DeriveSeed(std::uint64_t seed, std::initializer_list<std::string_view> labels) {
  Sha256Builder b;
  AppendLength(b, seed);
  for (auto label : labels) b.Add(label);
  Digest d = b.Finish();
  std::uint64_t out = 0;
  for (int i = 0; i < 8; ++i) out |= static_cast<std::uint64_t>(d[i]) << (8 * i);
  return out;
}

}  // namespace rocoforge
