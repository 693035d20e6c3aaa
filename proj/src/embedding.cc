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

#include "rocoforge/embedding.h"

#include <httplib.h>
#include <openssl/evp.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstring>
#include <fstream>
#include <nlohmann/json.hpp>
#include <thread>

#include "rocoforge/corpus.h"
#include "rocoforge/errors.h"
#include "rocoforge/image.h"
#include "rocoforge/io.h"
#include "rocoforge/logging.h"
#include "rocoforge/parallel.h"

namespace rocoforge {

using nlohmann::json;

namespace {

constexpr double kUnitNormTolerance = 1e-4;

std::uint32_t LoadLe32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::vector<double> ExpandBytes(std::span<const std::uint8_t> bytes, std::size_t n) {
  std::vector<double> out;
  out.reserve(n);
  std::vector<std::uint8_t> buf(bytes.begin(), bytes.end());
  buf.resize(bytes.size() + 4);
  for (std::uint32_t block = 0; out.size() < n; ++block) {
    for (int i = 0; i < 4; ++i) buf[bytes.size() + i] = static_cast<std::uint8_t>(block >> (8 * i));
    const Digest d = Sha256(buf);
    for (int w = 0; w < 8 && out.size() < n; ++w) {
      const std::uint32_t u = LoadLe32(d.data() + 4 * w);
      out.push_back(static_cast<double>(u >> 8) * 0x1.0p-23 - 1.0);
    }
  }
  return out;
}

std::vector<float> NormalizeToFloat(const std::vector<double>& v) {
  double ss = 0.0;
  for (double x : v) ss += x * x;
  const double norm = std::sqrt(ss);
  if (!(norm > 0.0) || !std::isfinite(norm)) throw NumericalDegeneracy("stub vector has zero norm");
  std::vector<float> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = static_cast<float>(v[i] / norm);
  return out;
}

std::string TokenKey(std::string_view salt, std::string_view token) {
  std::string key(salt);
  key.push_back('\x1f');
  key.append(token);
  return key;
}

void AppendLe(std::string& out, std::uint64_t v, int bytes) {
  for (int i = 0; i < bytes; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint64_t ReadLe(const std::string& in, std::size_t& pos, int bytes) {
  if (pos + bytes > in.size()) throw CacheError("truncated cache file");
  std::uint64_t v = 0;
  for (int i = 0; i < bytes; ++i) {
    v |= static_cast<std::uint64_t>(static_cast<std::uint8_t>(in[pos + i])) << (8 * i);
  }
  pos += bytes;
  return v;
}

}  // namespace

const std::vector<ProviderId>& KnownProviders() {
  static const std::vector<ProviderId> kProviders = {
      {"vsrn", 2048}, {"clip", 512}, {"vse-infty", 1024}, {"blip", 256}, {"stub", kStubDim},
  };
  return kProviders;
}

bool IsStubName(std::string_view name) { return name == "stub" || name.starts_with("stub-"); }

ProviderId ParseProviderSpec(std::string_view spec) {
  std::string name(spec);
  std::optional<std::size_t> dim;
  if (auto colon = spec.rfind(':'); colon != std::string_view::npos) {
    name = std::string(spec.substr(0, colon));
    const std::string digits(spec.substr(colon + 1));
    try {
      dim = std::stoul(digits);
    } catch (const std::exception&) {
      throw ValidationError("bad provider dim in '" + std::string(spec) + "'");
    }
    if (*dim == 0) throw ValidationError("provider dim must be positive");
  }
  for (const auto& known : KnownProviders()) {
    if (known.name == name) {
      if (dim && *dim != known.dim) {
        throw ValidationError("provider " + name + " has dim " + std::to_string(known.dim));
      }
      return known;
    }
  }
  if (IsStubName(name)) return {name, dim.value_or(kStubDim)};
  if (!dim) throw ValidationError("unknown provider '" + name + "' (use name:dim)");
  return {name, *dim};
}

EmbeddingMatrix::EmbeddingMatrix(ProviderId provider, std::vector<Digest> keys,
                                 std::vector<float> data)
    : provider_(std::move(provider)), keys_(std::move(keys)), data_(std::move(data)) {
  if (data_.size() != keys_.size() * provider_.dim) {
    throw ShapeError("embedding matrix data does not match rows x dim");
  }
}

std::vector<float> StubVector(std::span<const std::uint8_t> bytes, std::size_t dim) {
  if (dim < 2) throw ValidationError("stub dim must be >= 2");
  return NormalizeToFloat(ExpandBytes(bytes, dim));
}

std::vector<float> StubVector(std::string_view bytes, std::size_t dim) {
  return StubVector(std::span<const std::uint8_t>(
                        reinterpret_cast<const std::uint8_t*>(bytes.data()), bytes.size()),
                    dim);
}

double StubTokenWeight(std::string_view salt, std::string_view token, const StubWeights& weights) {
  if (auto it = weights.find(std::string(token)); it != weights.end()) return it->second;
  const Digest d = Sha256("w\x1f" + TokenKey(salt, token));
  return 0.5 + static_cast<double>(LoadLe32(d.data()) >> 8) * 0x1.0p-24;
}

std::vector<float> StubTextVector(std::string_view salt, std::span<const std::string> tokens,
                                  std::size_t dim, const StubWeights& weights) {
  if (dim < 2) throw ValidationError("stub dim must be >= 2");
  if (tokens.empty()) return StubVector(TokenKey(salt, ""), dim);
  std::vector<double> acc(dim, 0.0);
  for (const auto& token : tokens) {
    const double w = StubTokenWeight(salt, token, weights);
    const std::vector<float> e = StubVector(TokenKey(salt, token), dim);
    for (std::size_t i = 0; i < dim; ++i) acc[i] += w * static_cast<double>(e[i]);
  }
  return NormalizeToFloat(acc);
}

StubProvider::StubProvider(ProviderId id, StubWeights weights, float scale)
    : id_(std::move(id)), weights_(std::move(weights)), scale_(scale) {}

std::vector<std::vector<float>> StubProvider::EmbedTexts(std::span<const std::string> texts) {
  std::vector<std::vector<float>> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    const auto tokens = Tokenize(text);
    auto v = StubTextVector(id_.name, tokens, id_.dim, weights_);
    for (float& x : v) x *= scale_;
    out.push_back(std::move(v));
  }
  return out;
}

std::vector<std::vector<float>> StubProvider::EmbedImages(
    std::span<const std::filesystem::path> paths) {
  std::vector<std::vector<float>> out;
  out.reserve(paths.size());
  for (const auto& path : paths) {
    const Image img = ReadImage(path);
    std::string bytes = TokenKey(id_.name, "image");
    AppendLe(bytes, static_cast<std::uint64_t>(img.width), 4);
    AppendLe(bytes, static_cast<std::uint64_t>(img.height), 4);
    bytes.append(reinterpret_cast<const char*>(img.pixels.data()), img.pixels.size());
    auto v = StubVector(bytes, id_.dim);
    for (float& x : v) x *= scale_;
    out.push_back(std::move(v));
  }
  return out;
}

std::string Base64Encode(std::span<const std::uint8_t> bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()), bytes.data(),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

HttpProvider::HttpProvider(ProviderId id, std::string base_url, HttpOptions options)
    : id_(std::move(id)), base_url_(std::move(base_url)), options_(options) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

std::vector<std::vector<float>> HttpProvider::Post(const std::string& route,
                                                   const std::string& body,
                                                   std::size_t expected_rows) {
  std::string last_error;
  for (int attempt = 0; attempt <= options_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(std::chrono::milliseconds(options_.backoff_ms << (attempt - 1)));
    }
    httplib::Client client(base_url_);
    client.set_connection_timeout(options_.timeout_s, 0);
    client.set_read_timeout(options_.timeout_s, 0);
    auto res = client.Post(route, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 503) {
      last_error = "503 from " + base_url_ + route;
      continue;
    }
    if (res->status == 400) {
      throw ProviderContractViolation(id_.name + ": provider rejected request: " + res->body);
    }
    if (res->status != 200) {
      throw ProviderContractViolation(id_.name + ": unexpected HTTP status " +
                                      std::to_string(res->status));
    }
    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::parse_error& e) {
      throw ProviderContractViolation(id_.name + ": malformed reply: " + e.what());
    }
    try {
      if (!reply.contains("dim") || !reply.contains("embeddings") ||
          !reply["embeddings"].is_array()) {
        throw ProviderContractViolation(id_.name + ": reply lacks dim/embeddings");
      }
      const std::size_t dim = reply["dim"].get<std::size_t>();
      if (dim != id_.dim) {
        throw ProviderContractViolation(id_.name + ": advertised dim " + std::to_string(dim) +
                                        " but registry says " + std::to_string(id_.dim));
      }
      if (reply["embeddings"].size() != expected_rows) {
        throw ProviderContractViolation(id_.name + ": expected " + std::to_string(expected_rows) +
                                        " rows, got " + std::to_string(reply["embeddings"].size()));
      }
      std::vector<std::vector<float>> rows;
      rows.reserve(expected_rows);
      for (const auto& row : reply["embeddings"]) {
        auto v = row.get<std::vector<float>>();
        if (v.size() != dim) {
          throw ProviderContractViolation(id_.name + ": row length " + std::to_string(v.size()) +
                                          " != dim " + std::to_string(dim));
        }
        rows.push_back(std::move(v));
      }
      return rows;
    } catch (const json::exception& e) {
      throw ProviderContractViolation(id_.name + ": reply does not match the schema: " + e.what());
    }
  }
  throw ProviderUnavailable(id_.name + " unavailable after " +
                            std::to_string(options_.max_retries + 1) + " attempts (" + last_error +
                            ")");
}

std::vector<std::vector<float>> HttpProvider::EmbedTexts(std::span<const std::string> texts) {
  json body = {{"model", id_.name}, {"texts", json::array()}};
  for (const auto& t : texts) body["texts"].push_back(t);
  return Post("/v1/embed/text", body.dump(), texts.size());
}

std::vector<std::vector<float>> HttpProvider::EmbedImages(
    std::span<const std::filesystem::path> paths) {
  json body = {{"model", id_.name}, {"images_b64", json::array()}};
  for (const auto& p : paths) body["images_b64"].push_back(Base64Encode(ReadBytes(p)));
  return Post("/v1/embed/image", body.dump(), paths.size());
}

std::shared_ptr<EmbeddingProvider> MakeProvider(const ProviderId& id, const std::string& url) {
  if (url.empty()) {
    if (!IsStubName(id.name)) {
      throw ProviderUnavailable("provider " + id.name + " needs --provider-url");
    }
    return std::make_shared<StubProvider>(id);
  }
  return std::make_shared<HttpProvider>(id, url);
}

EmbeddingCache::EmbeddingCache(std::filesystem::path path, ProviderId provider)
    : path_(std::move(path)), provider_(std::move(provider)) {
  if (!std::filesystem::exists(path_)) return;
  const std::string in = ReadFile(path_);
  std::size_t pos = 0;
  if (in.size() < 4 || in.compare(0, 4, "EMBC") != 0) {
    throw CacheError(path_.string() + ": bad cache magic");
  }
  pos = 4;
  const auto version = ReadLe(in, pos, 4);
  if (version != kVersion) throw CacheError(path_.string() + ": unsupported cache version");
  const auto name_len = ReadLe(in, pos, 2);
  if (pos + name_len > in.size()) throw CacheError("truncated cache file");
  const std::string name = in.substr(pos, name_len);
  pos += name_len;
  const auto dim = ReadLe(in, pos, 4);
  const auto count = ReadLe(in, pos, 8);
  if (name != provider_.name || dim != provider_.dim) {
    throw CacheError(path_.string() + ": cache belongs to " + name + ":" + std::to_string(dim));
  }
  const std::size_t record = 32 + 4 * dim;
  if (in.size() - pos != count * record) throw CacheError(path_.string() + ": size mismatch");
  for (std::uint64_t r = 0; r < count; ++r) {
    Digest key;
    std::memcpy(key.data(), in.data() + pos, 32);
    pos += 32;
    std::vector<float> v(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      const auto bits = static_cast<std::uint32_t>(ReadLe(in, pos, 4));
      std::memcpy(&v[i], &bits, 4);
    }
    entries_.emplace(key, std::move(v));
  }
}

std::optional<std::vector<float>> EmbeddingCache::Get(const Digest& key) const {
  std::shared_lock lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void EmbeddingCache::Put(const Digest& key, std::span<const float> vector) {
  if (vector.size() != provider_.dim) throw CacheError("cache put with wrong dim");
  std::unique_lock lock(mu_);
  auto [it, inserted] = entries_.try_emplace(key, vector.begin(), vector.end());
  if (inserted) dirty_ = true;
}

std::size_t EmbeddingCache::size() const {
  std::shared_lock lock(mu_);
  return entries_.size();
}

bool EmbeddingCache::dirty() const {
  std::shared_lock lock(mu_);
  return dirty_;
}

void EmbeddingCache::Flush() {
  std::unique_lock lock(mu_);
  std::string out = "EMBC";
  AppendLe(out, kVersion, 4);
  AppendLe(out, provider_.name.size(), 2);
  out += provider_.name;
  AppendLe(out, provider_.dim, 4);
  AppendLe(out, entries_.size(), 8);
  for (const auto& [key, vec] : entries_) {
    out.append(reinterpret_cast<const char*>(key.data()), key.size());
    for (float x : vec) {
      std::uint32_t bits;
      std::memcpy(&bits, &x, 4);
      AppendLe(out, bits, 4);
    }
  }
  WriteFileAtomic(path_, out);
  dirty_ = false;
}

std::filesystem::path CachePathFor(const std::filesystem::path& dir, const ProviderId& id) {
  return dir / (id.name + "-" + std::to_string(id.dim) + ".embc");
}

std::string NormalizeText(std::string_view text) {
  std::string out;
  bool pending_space = false;
  for (char c : text) {
    if (c == ' ' || c == '\t' || c == '\n' || c == '\r') {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(c);
  }
  return out;
}

Digest TextKey(const ProviderId& id, std::string_view text) {
  Sha256Builder b;
  b.Add(id.name).Add("text").Add(NormalizeText(text));
  return b.Finish();
}

Digest ImageKey(const ProviderId& id, std::span<const std::uint8_t> file_bytes) {
  Sha256Builder b;
  b.Add(id.name).Add("image").Add(file_bytes);
  return b.Finish();
}

double NormalizeInPlace(std::span<float> v) {
  double ss = 0.0;
  for (float x : v) ss += static_cast<double>(x) * x;
  const double norm = std::sqrt(ss);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw NumericalDegeneracy("cannot normalize a zero or non-finite vector");
  }
  for (float& x : v) x = static_cast<float>(x / norm);
  return norm;
}

Embedder::Embedder(std::shared_ptr<EmbeddingProvider> provider, EmbeddingCache* cache,
                   EmbedderOptions options)
    : provider_(std::move(provider)), cache_(cache), options_(options) {
  if (cache_ != nullptr && !(cache_->provider() == provider_->id())) {
    throw CacheError("cache provider does not match embedder provider");
  }
  if (options_.batch_size == 0) options_.batch_size = 1;
}

template <typename Input, typename KeyFn, typename CallFn>
EmbeddingMatrix Embedder::Embed(std::span<const Input> inputs, KeyFn key_of, CallFn call) {
  const ProviderId& id = provider_->id();
  const std::size_t dim = id.dim;
  std::vector<Digest> keys(inputs.size());
  std::vector<float> data(inputs.size() * dim);
  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < inputs.size(); ++i) {
    keys[i] = key_of(inputs[i]);
    if (cache_ != nullptr) {
      if (auto hit = cache_->Get(keys[i])) {
        std::copy(hit->begin(), hit->end(), data.begin() + i * dim);
        continue;
      }
    }
    missing.push_back(i);
  }
  const std::size_t batches = (missing.size() + options_.batch_size - 1) / options_.batch_size;
  ParallelFor(
      batches, options_.jobs,
      [&](std::size_t b) {
        const std::size_t begin = b * options_.batch_size;
        const std::size_t end = std::min(missing.size(), begin + options_.batch_size);
        std::vector<Input> batch;
        for (std::size_t k = begin; k < end; ++k) batch.push_back(inputs[missing[k]]);
        auto rows = call(std::span<const Input>(batch));
        if (rows.size() != batch.size()) {
          throw ProviderContractViolation(id.name + ": row count mismatch");
        }
        for (std::size_t k = begin; k < end; ++k) {
          auto& row = rows[k - begin];
          if (row.size() != dim) {
            throw ProviderContractViolation(id.name + ": row of length " +
                                            std::to_string(row.size()) + ", expected " +
                                            std::to_string(dim));
          }
          if (options_.enforce_unit_norm) {
            double ss = 0.0;
            for (float x : row) ss += static_cast<double>(x) * x;
            if (std::abs(std::sqrt(ss) - 1.0) > kUnitNormTolerance) {
              LogWarning(id.name + ": re-normalizing row with norm " +
                         std::to_string(std::sqrt(ss)));
              NormalizeInPlace(row);
            }
          }
          const std::size_t i = missing[k];
          std::copy(row.begin(), row.end(), data.begin() + i * dim);
          if (cache_ != nullptr) cache_->Put(keys[i], row);
        }
      },
      1);
  provider_rows_ += missing.size();
  return EmbeddingMatrix(id, std::move(keys), std::move(data));
}

EmbeddingMatrix Embedder::EmbedTexts(std::span<const std::string> texts) {
  std::vector<std::string> normalized;
  normalized.reserve(texts.size());
  for (const auto& t : texts) normalized.push_back(NormalizeText(t));
  const ProviderId id = provider_->id();
  return Embed<std::string>(
      normalized, [&](const std::string& t) { return TextKey(id, t); },
      [&](std::span<const std::string> batch) { return provider_->EmbedTexts(batch); });
}

EmbeddingMatrix Embedder::EmbedImages(std::span<const std::filesystem::path> paths) {
  const ProviderId id = provider_->id();
  return Embed<std::filesystem::path>(
      paths,
      [&](const std::filesystem::path& p) {
        try {
          return ImageKey(id, ReadBytes(p));
        } catch (const IoError& e) {
          throw MissingEmbedding(std::string("image unreadable: ") + e.what());
        }
      },
      [&](std::span<const std::filesystem::path> batch) { return provider_->EmbedImages(batch); });
}

}  // namespace rocoforge
