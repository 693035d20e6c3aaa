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

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "rocoforge/corpus.h"
#include "rocoforge/errors.h"
#include "rocoforge/image.h"
#include "rocoforge/io.h"
#include "support/fixtures.h"

#ifndef ROCOFORGE_TEST_DATA_DIR
#define ROCOFORGE_TEST_DATA_DIR "tests/data"
#endif

namespace rocoforge {
namespace {

namespace fs = std::filesystem;

Image RandomImage(int w, int h, Rng& rng) {
  Image img(w, h);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.UniformIndex(256));
  return img;
}

Image Solid(int w, int h, std::uint8_t v) {
  Image img(w, h);
  std::fill(img.pixels.begin(), img.pixels.end(), v);
  return img;
}

// Corpus of n images without files, for pairing tests.
Corpus SyntheticCorpus(std::size_t n) {
  std::vector<ImageRecord> images;
  std::vector<CaptionRecord> captions;
  for (std::size_t i = 0; i < n; ++i) {
    ImageRecord img{std::to_string(i), std::to_string(i) + ".png", {}};
    for (int k = 0; k < 5; ++k) {
      const std::string id = std::to_string(i) + "_" + std::to_string(k);
      const std::string noun = "n" + std::to_string(i);
      captions.push_back({id, img.image_id, "a " + noun, {"a", noun}, {1}});
      img.caption_ids.push_back(id);
    }
    images.push_back(std::move(img));
  }
  return Corpus("test", std::move(images), std::move(captions));
}

TEST(Mix, LambdaOneIsIdentity) {
  Rng rng(1);
  const Image a = RandomImage(16, 16, rng), b = RandomImage(20, 9, rng);
  EXPECT_EQ(Mix(a, b, 1.0), a);
}

TEST(Mix, MidpointRounding) {
  const Image out = Mix(Solid(8, 8, 255), Solid(8, 8, 0), 0.5);
  for (auto p : out.pixels) EXPECT_TRUE(p == 127 || p == 128) << int(p);
}

TEST(Mix, WithinOneOfRealArithmetic) {
  Rng rng(2);
  for (int trial = 0; trial < 100; ++trial) {
    const Image a = RandomImage(16, 16, rng), b = RandomImage(16, 16, rng);
    const double lambda = trial == 0 ? 0.8 : 0.01 + 0.98 * rng.UniformUnit();
    const Image out = Mix(a, b, lambda);
    for (std::size_t i = 0; i < out.pixels.size(); ++i) {
      const double ref = lambda * a.pixels[i] + (1.0 - lambda) * b.pixels[i];
      ASSERT_LE(std::abs(out.pixels[i] - ref), 1.0) << trial << ":" << i;
    }
  }
}

TEST(Mix, ResizesFakeToOriginal) {
  Rng rng(3);
  const Image a = RandomImage(16, 12, rng), b = RandomImage(5, 30, rng);
  const Image out = Mix(a, b, 0.7);
  EXPECT_EQ(out.width, 16);
  EXPECT_EQ(out.height, 12);
  EXPECT_EQ(out, Mix(a, ResizeBilinear(b, 16, 12), 0.7));
}

TEST(Patch, TwoSourcePartition) {
  Rng rng(4);
  const Image a = RandomImage(64, 48, rng), b = RandomImage(30, 30, rng);
  for (int trial = 0; trial < 20; ++trial) {
    Rng prng(100 + trial);
    const PatchResult p = Patch(a, b, 0.8, prng);
    ASSERT_TRUE(p.rect.has_value());
    const Rect r = *p.rect;
    const Image piece = ResizeBilinear(b, r.w, r.h);
    for (int y = 0; y < a.height; ++y) {
      for (int x = 0; x < a.width; ++x) {
        const bool inside = x >= r.x && x < r.x + r.w && y >= r.y && y < r.y + r.h;
        const std::uint8_t* want = inside ? piece.at(x - r.x, y - r.y) : a.at(x, y);
        ASSERT_TRUE(std::equal(want, want + 3, p.image.at(x, y))) << x << "," << y;
      }
    }
    EXPECT_DOUBLE_EQ(p.lambda_actual, 1.0 - double(r.w) * r.h / (a.width * a.height));
    const double aspect = double(r.w) / r.h;
    EXPECT_GE(aspect, 0.45);
    EXPECT_LE(aspect, 2.2);
  }
}

TEST(Patch, AreaMatchesTargetAt224) {
  Rng rng(5);
  const Image a = RandomImage(224, 224, rng), b = RandomImage(100, 80, rng);
  for (double target : {0.9, 0.8, 0.7, 0.6}) {
    for (int trial = 0; trial < 25; ++trial) {
      Rng prng(trial);
      const PatchResult p = Patch(a, b, target, prng);
      EXPECT_LE(std::abs(p.lambda_actual - target), 0.005) << target;
    }
  }
}

TEST(Patch, NearOneKeepsOriginal) {
  Rng rng(6);
  const Image a = RandomImage(32, 32, rng), b = RandomImage(32, 32, rng);
  Rng prng(1);
  const PatchResult p = Patch(a, b, 0.99999, prng);
  EXPECT_FALSE(p.rect.has_value());
  EXPECT_EQ(p.image, a);
  EXPECT_EQ(p.lambda_actual, 1.0);
}

TEST(PairFakes, TwoImagesSwap) {
  const Corpus c = SyntheticCorpus(2);
  Rng rng(1);
  const auto pairs = PairFakes(c, rng);
  EXPECT_EQ(pairs.at("0"), "1");
  EXPECT_EQ(pairs.at("1"), "0");
}

TEST(PairFakes, FullScaleDerangementAndRerun) {
  const Corpus c = SyntheticCorpus(5000);
  Rng r1(9), r2(9);
  const auto a = PairFakes(c, r1);
  const auto b = PairFakes(c, r2);
  EXPECT_EQ(a, b);
  ASSERT_EQ(a.size(), 5000u);
  std::set<std::string> fakes;
  for (const auto& [orig, fake] : a) {
    EXPECT_NE(orig, fake);
    fakes.insert(fake);
  }
  EXPECT_EQ(fakes.size(), 5000u);  // a permutation
}

TEST(ImageCodec, PngRoundTripAndJpegDecode) {
  Rng rng(7);
  const Image a = RandomImage(13, 7, rng);
  const auto png = EncodePng(a);
  EXPECT_EQ(DecodeImage(png), a);
  EXPECT_EQ(EncodePng(a), png);
  const Image jpg = ReadImage(fs::path(ROCOFORGE_TEST_DATA_DIR) / "tiny.jpg");
  EXPECT_EQ(jpg.width, 12);
  EXPECT_EQ(jpg.height, 7);
  EXPECT_NEAR(jpg.at(3, 3)[0], 200, 6);
  const std::vector<std::uint8_t> junk = {1, 2, 3, 4, 5};
  EXPECT_THROW(DecodeImage(junk), InvalidImage);
}

TEST(LambdaLabel, Formatting) {
  EXPECT_EQ(LambdaLabel(0.9), "0.9");
  EXPECT_EQ(LambdaLabel(0.75), "0.75");
}

TEST(GenImageSet, ThreeImageFixtureDeterministic) {
  const auto dir = fixtures::MakeTempDir("imgset");
  const Corpus corpus = fixtures::MakeFixtureCorpus(dir / "src", {.images = 3});
  ImageForgeOptions parallel;
  parallel.jobs = 3;
  const auto a = GenImageSet(corpus, MixMode::kMix, 0.9, 7, dir / "a");
  const auto b = GenImageSet(corpus, MixMode::kMix, 0.9, 7, dir / "b", parallel);
  ASSERT_EQ(a.entries.size(), 3u);
  EXPECT_EQ(a.entries, b.entries);
  EXPECT_EQ(SerializeImageManifest(a.entries), SerializeImageManifest(b.entries));
  for (const auto& e : a.entries) {
    ASSERT_TRUE(fs::exists(dir / "a" / e.output_path));
    EXPECT_EQ(ReadBytes(dir / "a" / e.output_path), ReadBytes(dir / "b" / e.output_path));
    EXPECT_NE(e.orig_image_id, e.fake_image_id);
    EXPECT_EQ(e.lambda_actual, 0.9);
    EXPECT_FALSE(e.mask_rect.has_value());
  }
  EXPECT_EQ(ParseImageManifest(SerializeImageManifest(a.entries)), a.entries);
  fs::remove_all(dir);
}

TEST(GenImageSet, PatchKeepsNinetyPercent) {
  const auto dir = fixtures::MakeTempDir("imgset");
  const Corpus corpus = fixtures::MakeFixtureCorpus(dir / "src", {.images = 4});
  const auto r = GenImageSet(corpus, MixMode::kPatch, 0.9, 1, dir / "out");
  ASSERT_EQ(r.entries.size(), 4u);
  for (const auto& e : r.entries) {
    ASSERT_TRUE(e.mask_rect.has_value());
    const Image orig = ReadImage(corpus.ImagePath(corpus.image(e.orig_image_id)));
    EXPECT_DOUBLE_EQ(e.lambda_actual, PatchLambda(orig.width, orig.height, e.mask_rect));
    // Tiny fixture images quantize coarsely; 224x224 precision is checked above.
    EXPECT_NEAR(e.lambda_actual, 0.9, 0.03);
  }
  EXPECT_NE(ImageSetDir(MixMode::kPatch, 0.9, 1), ImageSetDir(MixMode::kMix, 0.9, 1));
  fs::remove_all(dir);
}

TEST(GenImageSet, RejectsLambdaOutsideOpenInterval) {
  const Corpus corpus = SyntheticCorpus(3);
  EXPECT_THROW(GenImageSet(corpus, MixMode::kMix, 1.0, 1, "unused"), ValidationError);
  EXPECT_THROW(GenImageSet(corpus, MixMode::kMix, 0.0, 1, "unused"), ValidationError);
}

TEST(GenImageSet, MissingSourceSkipped) {
  const auto dir = fixtures::MakeTempDir("imgset");
  Corpus corpus = SyntheticCorpus(3);
  corpus.set_image_root(dir);
  const auto r = GenImageSet(corpus, MixMode::kMix, 0.8, 1, dir / "out");
  EXPECT_EQ(r.entries.size(), 0u);
  EXPECT_EQ(r.skipped, 3u);
  fs::remove_all(dir);
}

}  // namespace
}  // namespace rocoforge
