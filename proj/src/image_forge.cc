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

#include "rocoforge/image_forge.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <nlohmann/json.hpp>
#include <set>

#include "rocoforge/errors.h"
#include "rocoforge/hashing.h"
#include "rocoforge/io.h"
#include "rocoforge/kernels.h"
#include "rocoforge/logging.h"
#include "rocoforge/parallel.h"

namespace rocoforge {

using nlohmann::json;

namespace {

constexpr int kPairRetries = 20;
constexpr double kMinAspect = 0.5;
constexpr double kMaxAspect = 2.0;

std::set<std::string> NounsOf(const Corpus& corpus, const ImageRecord& image) {
  std::set<std::string> out;
  for (const auto& cid : image.caption_ids) {
    const CaptionRecord& c = corpus.caption(cid);
    for (std::size_t idx : c.noun_indices) out.insert(c.tokens[idx]);
  }
  return out;
}

bool Overlaps(const std::set<std::string>& a, const std::set<std::string>& b) {
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia == *ib) return true;
    if (*ia < *ib) {
      ++ia;
    } else {
      ++ib;
    }
  }
  return false;
}

}  // namespace

std::string_view MixModeName(MixMode mode) { return mode == MixMode::kMix ? "mix" : "patch"; }

MixMode ParseMixMode(std::string_view name) {
  if (name == "mix") return MixMode::kMix;
  if (name == "patch") return MixMode::kPatch;
  throw ValidationError("unknown image mode '" + std::string(name) + "' (expected mix|patch)");
}

std::string LambdaLabel(double lambda) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", lambda);
  return buf;
}

Image Mix(const Image& orig, const Image& fake, double lambda) {
  if (orig.empty() || fake.empty()) throw InvalidImage("mix of an image with a zero dimension");
  if (!(lambda > 0.0 && lambda <= 1.0)) throw ValidationError("mix lambda must be in (0, 1]");
  const Image resized = ResizeBilinear(fake, orig.width, orig.height);
  Image out(orig.width, orig.height);
  kernels::BlendU8(orig.pixels, resized.pixels, out.pixels, kernels::BlendWeightQ16(lambda));
  return out;
}

std::optional<Rect> SamplePatchRect(int width, int height, double lambda_target, Rng& rng) {
  if (width <= 0 || height <= 0) throw InvalidImage("patch on an image with a zero dimension");
  if (!(lambda_target > 0.0 && lambda_target <= 1.0)) {
    throw ValidationError("patch lambda must be in (0, 1)");
  }
  const double area = (1.0 - lambda_target) * width * height;
  const double aspect = rng.Uniform(kMinAspect, kMaxAspect);  // w / h
  if (std::lround(area) == 0) return std::nullopt;
  const auto clamp_round = [](double v, int hi) {
    return static_cast<int>(std::clamp<long>(std::lround(v), 1L, static_cast<long>(hi)));
  };
  int h = clamp_round(std::sqrt(area / aspect), height);
  int w = clamp_round(area / h, width);
  h = clamp_round(area / w, height);
  w = clamp_round(area / h, width);
  Rect r;
  r.w = w;
  r.h = h;
  r.x = static_cast<int>(rng.UniformIndex(static_cast<std::size_t>(width - w + 1)));
  r.y = static_cast<int>(rng.UniformIndex(static_cast<std::size_t>(height - h + 1)));
  return r;
}

double PatchLambda(int width, int height, const std::optional<Rect>& rect) {
  if (!rect) return 1.0;
  const double total = static_cast<double>(width) * height;
  return (total - static_cast<double>(rect->w) * rect->h) / total;
}

PatchResult Patch(const Image& orig, const Image& fake, double lambda_target, Rng& rng) {
  if (orig.empty() || fake.empty()) throw InvalidImage("patch of an image with a zero dimension");
  PatchResult out;
  out.rect = SamplePatchRect(orig.width, orig.height, lambda_target, rng);
  out.image = orig;
  out.lambda_actual = PatchLambda(orig.width, orig.height, out.rect);
  if (!out.rect) return out;
  const Rect& r = *out.rect;
  const Image piece = ResizeBilinear(fake, r.w, r.h);
  for (int y = 0; y < r.h; ++y) {
    std::copy_n(piece.at(0, y), static_cast<std::size_t>(r.w) * Image::kChannels,
                out.image.at(r.x, r.y + y));
  }
  return out;
}

std::map<std::string, std::string> PairFakes(const Corpus& corpus, Rng& rng) {
  const auto& images = corpus.images();
  const std::size_t n = images.size();
  std::map<std::string, std::string> out;
  if (n < 2) {
    if (n == 1) LogWarning("pair_fakes: a single image cannot be paired");
    return out;
  }
  // Sattolo's algorithm yields a single n-cycle, hence no fixed points.
  std::vector<std::size_t> fake(n);
  for (std::size_t i = 0; i < n; ++i) fake[i] = i;
  for (std::size_t i = n - 1; i > 0; --i) std::swap(fake[i], fake[rng.UniformIndex(i)]);

  std::vector<std::set<std::string>> nouns(n);
  for (std::size_t i = 0; i < n; ++i) nouns[i] = NounsOf(corpus, images[i]);
  std::size_t unresolved = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (!Overlaps(nouns[i], nouns[fake[i]])) continue;
    bool fixed = false;
    for (int attempt = 0; attempt < kPairRetries && !fixed; ++attempt) {
      const std::size_t j = rng.UniformIndex(n);
      if (j == i || fake[j] == i || fake[i] == j) continue;
      if (Overlaps(nouns[i], nouns[fake[j]]) || Overlaps(nouns[j], nouns[fake[i]])) continue;
      std::swap(fake[i], fake[j]);
      fixed = true;
    }
    if (!fixed) ++unresolved;
  }
  if (unresolved > 0) {
    LogInfo("pair_fakes: " + std::to_string(unresolved) + " of " + std::to_string(n) +
            " pairs still share a caption noun");
  }
  for (std::size_t i = 0; i < n; ++i) out[images[i].image_id] = images[fake[i]].image_id;
  return out;
}

std::filesystem::path ImageSetDir(MixMode mode, double lambda, std::uint64_t seed) {
  return std::filesystem::path(std::string(MixModeName(mode))) / LambdaLabel(lambda) /
         std::to_string(seed);
}

ImageForgeResult GenImageSet(const Corpus& corpus, MixMode mode, double lambda, std::uint64_t seed,
                             const std::filesystem::path& out_dir,
                             const ImageForgeOptions& options) {
  if (!(lambda > 0.0 && lambda < 1.0)) throw ValidationError("lambda must be in (0, 1)");
  Rng pair_rng(DeriveSeed(seed, {"pair_fakes"}));
  const auto pairs = PairFakes(corpus, pair_rng);
  const auto& images = corpus.images();
  const std::string mode_name(MixModeName(mode));
  const std::string label = LambdaLabel(lambda);
  const std::filesystem::path set_dir = ImageSetDir(mode, lambda, seed);
  std::vector<std::optional<ImageManifestEntry>> slots(images.size());

  ParallelFor(
      images.size(), options.jobs,
      [&](std::size_t i) {
        const ImageRecord& rec = images[i];
        auto it = pairs.find(rec.image_id);
        if (it == pairs.end()) return;
        Image orig, fake;
        try {
          orig = ReadImage(corpus.ImagePath(rec));
          fake = ReadImage(corpus.ImagePath(corpus.image(it->second)));
        } catch (const InvalidImage& e) {
          LogWarning(std::string("gen_images: skipping ") + rec.image_id + ": " + e.what());
          return;
        }
        ImageManifestEntry e;
        e.orig_image_id = rec.image_id;
        e.fake_image_id = it->second;
        e.mode = mode;
        e.lambda_requested = lambda;
        e.seed = DeriveSeed(seed, {rec.image_id, mode_name, label});
        e.new_image_id = rec.image_id + "#" + mode_name + "_" + label + "#" + std::to_string(seed);
        Image result;
        if (mode == MixMode::kMix) {
          result = Mix(orig, fake, lambda);
          e.lambda_actual = lambda;
        } else {
          Rng rng(e.seed);
          PatchResult p = Patch(orig, fake, lambda, rng);
          result = std::move(p.image);
          e.lambda_actual = p.lambda_actual;
          e.mask_rect = p.rect;
        }
        const std::filesystem::path rel = set_dir / (rec.image_id + ".png");
        WritePngAtomic(result, out_dir / rel);
        e.output_path = rel.generic_string();
        slots[i] = std::move(e);
      },
      4);

  ImageForgeResult out;
  for (auto& s : slots) {
    if (s) {
      out.entries.push_back(std::move(*s));
    } else {
      ++out.skipped;
    }
  }
  return out;
}

std::string ImageEntryToJson(const ImageManifestEntry& e) {
  json rect = nullptr;
  if (e.mask_rect) {
    rect = {
        {"x", e.mask_rect->x}, {"y", e.mask_rect->y}, {"w", e.mask_rect->w}, {"h", e.mask_rect->h}};
  }
  json j = {{"new_image_id", e.new_image_id},
            {"orig_image_id", e.orig_image_id},
            {"fake_image_id", e.fake_image_id},
            {"mode", MixModeName(e.mode)},
            {"lambda_requested", e.lambda_requested},
            {"lambda_actual", e.lambda_actual},
            {"seed", e.seed},
            {"mask_rect", rect},
            {"output_path", e.output_path}};
  return j.dump();
}

ImageManifestEntry ImageEntryFromJson(std::string_view line) {
  try {
    const json j = json::parse(line);
    ImageManifestEntry e;
    e.new_image_id = j.at("new_image_id").get<std::string>();
    e.orig_image_id = j.at("orig_image_id").get<std::string>();
    e.fake_image_id = j.at("fake_image_id").get<std::string>();
    e.mode = ParseMixMode(j.at("mode").get<std::string>());
    e.lambda_requested = j.at("lambda_requested").get<double>();
    e.lambda_actual = j.at("lambda_actual").get<double>();
    e.seed = j.at("seed").get<std::uint64_t>();
    if (!j.at("mask_rect").is_null()) {
      const json& r = j["mask_rect"];
      e.mask_rect = Rect{r.at("x").get<int>(), r.at("y").get<int>(), r.at("w").get<int>(),
                         r.at("h").get<int>()};
    }
    e.output_path = j.at("output_path").get<std::string>();
    return e;
  } catch (const json::parse_error& err) {
    throw ParseError(std::string("malformed image manifest entry: ") + err.what(), err.byte);
  } catch (const json::exception& err) {
    throw ParseError(std::string("invalid image manifest entry: ") + err.what(), 0);
  }
}

std::string SerializeImageManifest(std::span<const ImageManifestEntry> entries) {
  std::string out;
  for (const auto& e : entries) out += ImageEntryToJson(e) + "\n";
  return out;
}

std::vector<ImageManifestEntry> ParseImageManifest(std::string_view text) {
  std::vector<ImageManifestEntry> out;
  for (const auto& line : SplitDataLines(text)) out.push_back(ImageEntryFromJson(line));
  return out;
}

}  // namespace rocoforge
