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

#include "support/fixtures.h"

#include <unistd.h>

#include <atomic>
#include <nlohmann/json.hpp>
#include <vector>

#include "rocoforge/image.h"
#include "rocoforge/io.h"
#include "rocoforge/random.h"

#ifndef ROCOFORGE_SOURCE_DATA_DIR
#define ROCOFORGE_SOURCE_DATA_DIR "data"
#endif

namespace rocoforge::fixtures {
namespace {

namespace fs = std::filesystem;

constexpr std::string_view kSubjects[] = {"dog",  "cat",  "man",  "woman", "horse", "boy",
                                          "girl", "bird", "bear", "cow",   "sheep", "zebra"};
constexpr std::string_view kObjects[] = {"bench", "car",   "table",  "umbrella", "bus",
                                         "pizza", "chair", "street", "truck",    "plate",
                                         "train", "kite",  "couch",  "bed",      "boat"};
constexpr std::string_view kAdjectives[] = {"small", "large", "white", "brown", "young",
                                            "red",   "black", "old",   "wooden"};
constexpr std::string_view kVerbs[] = {"sitting", "standing", "walking", "sleeping", "looking"};
constexpr std::string_view kPreps[] = {"on", "near", "next to", "under", "by"};

template <std::size_t N>
std::string Pick(Rng& rng, const std::string_view (&items)[N]) {
  return std::string(items[rng.UniformIndex(N)]);
}

std::string Capitalize(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

Image SyntheticImage(int width, int height, Rng& rng) {
  Image img;
  img.width = width;
  img.height = height;
  img.pixels.resize(static_cast<std::size_t>(width) * height * 3);
  const int base[3] = {static_cast<int>(rng.UniformIndex(256)),
                       static_cast<int>(rng.UniformIndex(256)),
                       static_cast<int>(rng.UniformIndex(256))};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      for (int c = 0; c < 3; ++c) {
        const int noise = static_cast<int>(rng.UniformIndex(32));
        img.pixels[(static_cast<std::size_t>(y) * width + x) * 3 + c] =
            static_cast<std::uint8_t>((base[c] + x * (c + 1) + y * (3 - c) + noise) & 0xff);
      }
    }
  }
  return img;
}

}  // namespace

fs::path SourceDataDir() { return ROCOFORGE_SOURCE_DATA_DIR; }

fs::path MakeTempDir(std::string_view tag) {
  static std::atomic<int> counter{0};
  const fs::path dir =
      fs::temp_directory_path() / ("rocoforge-" + std::string(tag) + "-" +
                                   std::to_string(::getpid()) + "-" + std::to_string(counter++));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path WriteKarpathyFixture(const fs::path& dir, const FixtureSpec& spec) {
  Rng rng(spec.seed);
  nlohmann::json images = nlohmann::json::array();
  long long sentid = 1000;
  for (std::size_t i = 0; i < spec.images; ++i) {
    const long long cocoid = 500000 + static_cast<long long>(i) * 7;
    const std::string filename = "COCO_val2014_" + std::to_string(cocoid) + ".png";
    const int w = spec.base_width + static_cast<int>(i % 3) * 8;
    const int h = spec.base_height + static_cast<int>(i % 2) * 6;
    WritePngAtomic(SyntheticImage(w, h, rng), dir / "val2014" / filename);

    const std::string subject = Pick(rng, kSubjects);
    const std::string object = Pick(rng, kObjects);
    nlohmann::json sentences = nlohmann::json::array();
    for (int k = 0; k < 5; ++k) {
      std::string raw;
      switch (k) {
        case 0:
          raw = "a " + Pick(rng, kAdjectives) + " " + subject + " " + Pick(rng, kVerbs) + " " +
                Pick(rng, kPreps) + " a " + object;
          break;
        case 1:
          raw = "the " + subject + " is " + Pick(rng, kVerbs) + " " + Pick(rng, kPreps) + " the " +
                Pick(rng, kAdjectives) + " " + object;
          break;
        case 2:
          raw = "a " + object + " with a " + subject + " " + Pick(rng, kPreps) + " it";
          break;
        case 3:
          raw = "two " + subject + "s and a " + Pick(rng, kObjects) + " " + Pick(rng, kPreps) +
                " a " + object;
          break;
        default:
          raw = "there is a " + Pick(rng, kAdjectives) + " " + object + " and a " + subject;
          break;
      }
      nlohmann::json tokens = nlohmann::json::array();
      std::size_t start = 0;
      while (start < raw.size()) {
        std::size_t sp = raw.find(' ', start);
        if (sp == std::string::npos) sp = raw.size();
        tokens.push_back(raw.substr(start, sp - start));
        start = sp + 1;
      }
      sentences.push_back({{"raw", Capitalize(raw) + "."},
                           {"tokens", tokens},
                           {"imgid", static_cast<long long>(i)},
                           {"sentid", sentid++}});
    }
    images.push_back({{"filepath", "val2014"},
                      {"filename", filename},
                      {"imgid", static_cast<long long>(i)},
                      {"split", "test"},
                      {"cocoid", cocoid},
                      {"sentences", sentences}});
  }
  // One image from another split, which loading must ignore.
  images.push_back({{"filepath", "val2014"},
                    {"filename", "unused.png"},
                    {"split", "train"},
                    {"cocoid", 1},
                    {"sentences", nlohmann::json::array()}});
  const fs::path path = dir / "annotations.json";
  WriteFileAtomic(path, nlohmann::json({{"images", images}, {"dataset", "coco"}}).dump());
  return path;
}

NounLexicon SourceLexicon() {
  return NounLexicon::Load(SourceDataDir() / "nouns.txt", SourceDataDir() / "stop_nouns.txt");
}

Corpus MakeFixtureCorpus(const fs::path& dir, const FixtureSpec& spec) {
  return LoadKarpathySplit(WriteKarpathyFixture(dir, spec), Split::kTest, SourceLexicon());
}

}  // namespace rocoforge::fixtures
