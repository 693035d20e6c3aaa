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

#ifndef ROCOFORGE_IMAGE_FORGE_H_
#define ROCOFORGE_IMAGE_FORGE_H_

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "rocoforge/corpus.h"
#include "rocoforge/image.h"
#include "rocoforge/random.h"

namespace rocoforge {

enum class MixMode { kMix, kPatch };

std::string_view MixModeName(MixMode mode);
MixMode ParseMixMode(std::string_view name);

// Canonical text form of a blend ratio ("0.9"); used in paths and ids.
std::string LambdaLabel(double lambda);

struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool operator==(const Rect&) const = default;
};

struct ImageManifestEntry {
  std::string new_image_id;
  std::string orig_image_id;
  std::string fake_image_id;
  MixMode mode = MixMode::kMix;
  double lambda_requested = 0.0;
  double lambda_actual = 0.0;
  std::uint64_t seed = 0;
  std::optional<Rect> mask_rect;
  std::string output_path;  // relative to the image-set root (GenImageSet out_dir)

  bool operator==(const ImageManifestEntry&) const = default;
};

// lambda * orig + (1 - lambda) * fake per channel, rounded half up. The fake
// is bilinearly resized to orig's size first. 0 < lambda <= 1.
Image Mix(const Image& orig, const Image& fake, double lambda);

struct PatchResult {
  Image image;
  double lambda_actual = 1.0;
  std::optional<Rect> rect;  // none when the rounded area is zero
};

// Pastes the fake, resized to a random rectangle covering about
// (1 - lambda_target) of the image, fully inside the original. The rectangle
// aspect ratio w/h is drawn from [0.5, 2]. lambda_actual is the share of
// original pixels kept.
PatchResult Patch(const Image& orig, const Image& fake, double lambda_target, Rng& rng);

// Deterministic rectangle placement used by Patch.
std::optional<Rect> SamplePatchRect(int width, int height, double lambda_target, Rng& rng);

// 1 - area(rect) / (width * height).
double PatchLambda(int width, int height, const std::optional<Rect>& rect);

// Seeded derangement: no image is paired with itself. Pairs whose captions
// share a noun are re-drawn a bounded number of times (best effort).
std::map<std::string, std::string> PairFakes(const Corpus& corpus, Rng& rng);

struct ImageForgeOptions {
  int jobs = 1;
};

struct ImageForgeResult {
  std::vector<ImageManifestEntry> entries;  // corpus image order
  std::size_t skipped = 0;
};

// Relative output directory for one image set: {mode}/{lambda}/{seed}.
std::filesystem::path ImageSetDir(MixMode mode, double lambda, std::uint64_t seed);

// Writes one PNG per original image under out_dir/ImageSetDir(...). Pairing
// and every per-image draw derive from `seed`, so output bytes do not depend
// on `jobs`. Unreadable sources are skipped and counted.
ImageForgeResult GenImageSet(const Corpus& corpus, MixMode mode, double lambda, std::uint64_t seed,
                             const std::filesystem::path& out_dir,
                             const ImageForgeOptions& options = {});

std::string ImageEntryToJson(const ImageManifestEntry& entry);
ImageManifestEntry ImageEntryFromJson(std::string_view line);
std::string SerializeImageManifest(std::span<const ImageManifestEntry> entries);
std::vector<ImageManifestEntry> ParseImageManifest(std::string_view text);

}  // namespace rocoforge

#endif  // ROCOFORGE_IMAGE_FORGE_H_
