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

#ifndef ROCOFORGE_EMBEDDING_H_
#define ROCOFORGE_EMBEDDING_H_

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "rocoforge/hashing.h"

namespace rocoforge {

struct ProviderId {
  std::string name;
  std::size_t dim = 0;

  bool operator==(const ProviderId&) const = default;
};

// Encoders used for EI scoring plus the in-process stub.
const std::vector<ProviderId>& KnownProviders();

// Dimensionality of in-process stub providers.
inline constexpr std::size_t kStubDim = 64;

// True for "stub" and "stub-<label>"; these run in-process unless a sidecar
// URL is configured.
bool IsStubName(std::string_view name);

// Resolves "name" or "name:dim". Known names must agree with the registry dim;
// stub names default to kStubDim. Unknown names require an explicit dim.
ProviderId ParseProviderSpec(std::string_view spec);

// Rows are unit L2 norm (enforced at the provider boundary). Row keys are the
// content hashes the rows were cached under; a batch that repeats an input
// repeats its key.
class EmbeddingMatrix {
 public:
  EmbeddingMatrix() = default;
  EmbeddingMatrix(ProviderId provider, std::vector<Digest> keys, std::vector<float> data);

  const ProviderId& provider() const { return provider_; }
  std::size_t rows() const { return keys_.size(); }
  std::size_t dim() const { return provider_.dim; }
  const std::vector<Digest>& keys() const { return keys_; }
  std::span<const float> data() const { return data_; }
  std::span<const float> row(std::size_t i) const {
    return std::span<const float>(data_).subspan(i * dim(), dim());
  }

 private:
  ProviderId provider_;
  std::vector<Digest> keys_;
  std::vector<float> data_;
};

// Deterministic substrate for tests and the stub provider.
//
// Expansion: block k (k = 0, 1, ...) is SHA-256(bytes || uint32_le(k)); each
// little-endian uint32 word u of the block yields (u >> 8) * 2^-23 - 1. The
// first `dim` values are L2-normalized in double and rounded to float.
std::vector<float> StubVector(std::span<const std::uint8_t> bytes, std::size_t dim);
std::vector<float> StubVector(std::string_view bytes, std::size_t dim);

// Per-token weight overrides for the stub text encoder; tokens not listed
// get a hash-derived weight in [0.5, 1.5).
using StubWeights = std::unordered_map<std::string, double>;

// Bag-of-tokens text stub: sum over tokens t of weight(t) * StubVector(salt
// || 0x1f || t), normalized. Deleting a token t removes weight(t) times a
// near-orthogonal direction, so its influence grows with its weight.
std::vector<float> StubTextVector(std::string_view salt, std::span<const std::string> tokens,
                                  std::size_t dim, const StubWeights& weights = {});
double StubTokenWeight(std::string_view salt, std::string_view token,
                       const StubWeights& weights = {});

// Encoder backend. Implementations must be safe to call concurrently.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual const ProviderId& id() const = 0;
  // One row per input; rows need not be normalized.
  virtual std::vector<std::vector<float>> EmbedTexts(std::span<const std::string> texts) = 0;
  virtual std::vector<std::vector<float>> EmbedImages(
      std::span<const std::filesystem::path> paths) = 0;
};

class StubProvider : public EmbeddingProvider {
 public:
  explicit StubProvider(ProviderId id, StubWeights weights = {}, float scale = 1.0f);

  const ProviderId& id() const override { return id_; }
  std::vector<std::vector<float>> EmbedTexts(std::span<const std::string> texts) override;
  // Hashes decoded pixels so re-encoded but identical images embed equally.
  std::vector<std::vector<float>> EmbedImages(
      std::span<const std::filesystem::path> paths) override;

 private:
  ProviderId id_;
  StubWeights weights_;
  float scale_;
};

struct HttpOptions {
  int max_retries = 3;
  int backoff_ms = 50;
  int timeout_s = 60;
};

// Client for the sidecar wire protocol:
//   POST /v1/embed/text  {"model", "texts":[str]}      -> {"dim", "embeddings":[[f32]]}
//   POST /v1/embed/image {"model", "images_b64":[str]} -> same shape
// 503 and transport failures are retried, then ProviderUnavailable; 400 and
// malformed bodies are ProviderContractViolation.
class HttpProvider : public EmbeddingProvider {
 public:
  HttpProvider(ProviderId id, std::string base_url, HttpOptions options = {});

  const ProviderId& id() const override { return id_; }
  std::vector<std::vector<float>> EmbedTexts(std::span<const std::string> texts) override;
  std::vector<std::vector<float>> EmbedImages(
      std::span<const std::filesystem::path> paths) override;

 private:
  std::vector<std::vector<float>> Post(const std::string& route, const std::string& body,
                                       std::size_t expected_rows);

  ProviderId id_;
  std::string base_url_;
  HttpOptions options_;
};

// In-process stub when `url` is empty and the name is a stub name, otherwise
// an HTTP client.
std::shared_ptr<EmbeddingProvider> MakeProvider(const ProviderId& id, const std::string& url);

std::string Base64Encode(std::span<const std::uint8_t> bytes);

// File-backed (content hash -> vector) map for one provider. Concurrent
// readers, serialized writers. File layout (little-endian):
//   "EMBC" | u32 version | u16 name_len | name | u32 dim | u64 count |
//   count * (32-byte hash | dim * f32)
// Records are written sorted by hash so the file is a pure function of its
// contents.
class EmbeddingCache {
 public:
  static constexpr std::uint32_t kVersion = 1;

  // Loads `path` if it exists; otherwise starts empty.
  EmbeddingCache(std::filesystem::path path, ProviderId provider);

  const ProviderId& provider() const { return provider_; }
  std::optional<std::vector<float>> Get(const Digest& key) const;
  void Put(const Digest& key, std::span<const float> vector);
  std::size_t size() const;
  bool dirty() const;
  void Flush();

  const std::filesystem::path& path() const { return path_; }

 private:
  std::filesystem::path path_;
  ProviderId provider_;
  mutable std::shared_mutex mu_;
  std::map<Digest, std::vector<float>> entries_;
  bool dirty_ = false;
};

// Cache file for a provider inside a cache directory.
std::filesystem::path CachePathFor(const std::filesystem::path& dir, const ProviderId& id);

// Content keys: SHA-256 over (provider name, modality, payload).
Digest TextKey(const ProviderId& id, std::string_view text);
Digest ImageKey(const ProviderId& id, std::span<const std::uint8_t> file_bytes);

// Whitespace-collapsed, trimmed text used for hashing and sent to providers.
std::string NormalizeText(std::string_view text);

struct EmbedderOptions {
  std::size_t batch_size = 64;
  int jobs = 1;  // concurrent batches
  // Re-normalize rows that miss unit norm by more than 1e-4 (logged). Off
  // only for tests that need raw provider scale.
  bool enforce_unit_norm = true;
};

// Batches requests to a provider, enforces the unit-norm and dimension
// contract, and reads/writes through an optional cache.
class Embedder {
 public:
  Embedder(std::shared_ptr<EmbeddingProvider> provider, EmbeddingCache* cache = nullptr,
           EmbedderOptions options = {});

  const ProviderId& id() const { return provider_->id(); }
  EmbeddingMatrix EmbedTexts(std::span<const std::string> texts);
  EmbeddingMatrix EmbedImages(std::span<const std::filesystem::path> paths);

  // Counters for cache-transparency checks.
  std::size_t provider_rows() const { return provider_rows_.load(); }

 private:
  template <typename Input, typename KeyFn, typename CallFn>
  EmbeddingMatrix Embed(std::span<const Input> inputs, KeyFn key_of, CallFn call);

  std::shared_ptr<EmbeddingProvider> provider_;
  EmbeddingCache* cache_;
  EmbedderOptions options_;
  std::atomic<std::size_t> provider_rows_{0};
};

// Normalizes in place; returns the pre-normalization norm. Throws
// NumericalDegeneracy on a zero or non-finite vector.
double NormalizeInPlace(std::span<float> v);

}  // namespace rocoforge

#endif  // ROCOFORGE_EMBEDDING_H_
